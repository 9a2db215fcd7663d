#include "ipcs/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace ipcs {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// One seed per (grid point, repetition), independent of the mechanism, so a
// mechanism comparison at a point is paired sample by sample.
std::uint64_t job_seed(std::uint64_t base, std::size_t point, int rep) {
  return splitmix64(splitmix64(splitmix64(base) + point) +
                    static_cast<std::uint64_t>(rep));
}

struct RawMetrics {
  double spatial_reuse = 0.0;
  double throughput = 0.0;
  double offered = 0.0;
  long collisions = 0;
};

}  // namespace

const char* mechanism_name(CsMechanism mechanism) {
  return mechanism == CsMechanism::kIpcs ? "ipcs" : "conventional";
}

CsMechanism mechanism_from_name(std::string_view name) {
  if (name == "ipcs") return CsMechanism::kIpcs;
  if (name == "conventional") return CsMechanism::kConventional;
  throw std::invalid_argument("unknown mechanism '" + std::string(name) +
                              "' (expected ipcs or conventional)");
}

std::vector<int> default_sweep_counts() {
  std::vector<int> counts;
  counts.reserve(20);
  for (int k = 0; k < 20; ++k) {
    counts.push_back(
        static_cast<int>(std::llround(1.0 + k * (200.0 - 1.0) / 19.0)));
  }
  return counts;
}

double SweepSpec::resolved_d_max_ref() const {
  return d_max_ref > 0.0 ? d_max_ref : topo_base.length_max;
}

void SweepSpec::validate() const {
  if (link_counts.empty()) {
    throw std::invalid_argument("sweep: no link counts");
  }
  for (int n : link_counts) {
    if (n < 1) throw std::invalid_argument("sweep: link counts must be >= 1");
  }
  if (seeds_per_point < 1) {
    throw std::invalid_argument("sweep: need at least one seed per point");
  }
  if (mechanisms.empty()) {
    throw std::invalid_argument("sweep: no mechanisms");
  }
  if (workers < 0) {
    throw std::invalid_argument("sweep: negative worker count");
  }
  topo_base.validate();
  radio.validate();
  timing.validate();
  if (!(duration_s > 10.0 * timing.t_packet())) {
    throw std::invalid_argument("sweep: duration must exceed ten exchanges");
  }
  if (d_max_ref < 0.0) {
    throw std::invalid_argument("sweep: negative reference link length");
  }
}

std::vector<SweepPointResult> run_sweep(const SweepSpec& spec,
                                        const SweepProgress& progress) {
  spec.validate();
  const std::size_t n_points = spec.link_counts.size();
  const std::size_t n_reps = static_cast<std::size_t>(spec.seeds_per_point);
  const std::size_t n_mech = spec.mechanisms.size();
  const std::size_t n_jobs = n_points * n_reps;

  const double d_ref = spec.resolved_d_max_ref();
  const double csr = safe_csr_cumulative(spec.radio, d_ref);
  const double t_packet = spec.timing.t_packet();

  // raw[(point * reps + rep) * mechs + mech]
  std::vector<RawMetrics> raw(n_jobs * n_mech);

  std::atomic<std::size_t> next_job{0};
  std::atomic<std::size_t> done_jobs{0};
  std::mutex report_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      const std::size_t job = next_job.fetch_add(1);
      if (job >= n_jobs) return;
      {
        std::lock_guard<std::mutex> lock(report_mutex);
        if (first_error) return;
      }
      const std::size_t point = job / n_reps;
      const int rep = static_cast<int>(job % n_reps);
      const std::uint64_t seed = job_seed(spec.base_seed, point, rep);
      try {
        TopologyConfig tc = spec.topo_base;
        tc.count_model = CountModel::kFixed;
        tc.link_count = spec.link_counts[point];
        tc.seed = seed;
        const Topology topo = generate_topology(tc);

        for (std::size_t m = 0; m < n_mech; ++m) {
          SimConfig sc;
          sc.topology = topo;
          sc.radio = spec.radio;
          sc.cs = CsConfig::from_csr(spec.mechanisms[m], spec.radio, csr,
                                     t_packet);
          sc.timing = spec.timing;
          sc.backoff = spec.backoff;
          sc.duration_s = spec.duration_s;
          sc.seed = seed;
          sc.d_max_ref = d_ref;

          const SimResult result = run_simulation(sc);
          RawMetrics& slot = raw[job * n_mech + m];
          slot.spatial_reuse = result.metrics.spatial_reuse;
          slot.throughput = result.metrics.throughput_per_unit_area_bps;
          slot.offered = result.metrics.offered_link_density;
          slot.collisions = result.metrics.hidden_node_collisions;
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(report_mutex);
        if (!first_error) {
          first_error = std::make_exception_ptr(std::runtime_error(
              "sweep: job links=" + std::to_string(spec.link_counts[point]) +
              " seed=" + std::to_string(seed) + ": " + e.what()));
        }
        return;
      } catch (...) {
        std::lock_guard<std::mutex> lock(report_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
      const std::size_t done = done_jobs.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard<std::mutex> lock(report_mutex);
        progress(done, n_jobs);
      }
    }
  };

  unsigned n_workers = spec.workers > 0
                           ? static_cast<unsigned>(spec.workers)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_workers = static_cast<unsigned>(
      std::min<std::size_t>(n_workers, n_jobs));
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  std::vector<SweepPointResult> results;
  results.reserve(n_points * n_mech);
  for (std::size_t p = 0; p < n_points; ++p) {
    for (std::size_t m = 0; m < n_mech; ++m) {
      SweepPointResult out;
      out.link_count = spec.link_counts[p];
      out.mechanism = spec.mechanisms[m];
      out.seeds = spec.seeds_per_point;
      double reuse = 0.0, tput = 0.0, offered = 0.0;
      for (std::size_t r = 0; r < n_reps; ++r) {
        const RawMetrics& slot = raw[(p * n_reps + r) * n_mech + m];
        reuse += slot.spatial_reuse;
        tput += slot.throughput;
        offered += slot.offered;
        out.collisions += slot.collisions;
      }
      out.spatial_reuse = reuse / static_cast<double>(n_reps);
      out.throughput_per_unit_area_bps = tput / static_cast<double>(n_reps);
      out.offered_density = offered / static_cast<double>(n_reps);
      results.push_back(out);
    }
  }
  return results;
}

std::string sweep_to_csv(const SweepSpec& spec,
                         const std::vector<SweepPointResult>& results) {
  const double d_ref = spec.resolved_d_max_ref();
  const double csr = safe_csr_cumulative(spec.radio, d_ref);
  std::string out = "# ipcs-sim sweep v1\n";
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "# config arena_side=%g length_min=%g length_max=%g "
                "seeds_per_point=%d base_seed=%llu duration_s=%g "
                "gamma0=%g alpha=%g tx_power_mw=%g noise_mw=%g backoff=%s "
                "d_max_ref=%g csr_m=%.6f pth_mw=%.9e unit_area_m2=%.6f\n",
                spec.topo_base.arena_side, spec.topo_base.length_min,
                spec.topo_base.length_max, spec.seeds_per_point,
                static_cast<unsigned long long>(spec.base_seed),
                spec.duration_s, spec.radio.gamma0, spec.radio.alpha,
                spec.radio.tx_power_mw, spec.radio.noise_mw,
                spec.backoff == BackoffModel::kContinuous ? "continuous"
                                                          : "slotted",
                d_ref, csr, pth_from_csr(spec.radio, csr),
                unit_area(spec.radio, d_ref));
  out += buf;
  out += "density,mechanism,spatial_reuse,throughput_per_unit_area,collisions\n";
  for (const auto& row : results) {
    std::snprintf(buf, sizeof buf, "%.6f,%s,%.6f,%.6e,%ld\n",
                  row.offered_density, mechanism_name(row.mechanism),
                  row.spatial_reuse, row.throughput_per_unit_area_bps,
                  row.collisions);
    out += buf;
  }
  return out;
}

}  // namespace ipcs
