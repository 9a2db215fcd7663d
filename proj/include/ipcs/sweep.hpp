#pragma once

// Density sweep: run the MAC engine over a grid of link counts, with many
// random topologies per count, under each carrier-sensing mechanism, and
// aggregate per-unit-area spatial reuse and throughput. Seeds are paired:
// both mechanisms see the exact same topologies and backoff streams at every
// grid point, so their curves differ only by the sensing rule.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ipcs/carriersense.hpp"
#include "ipcs/geometry.hpp"
#include "ipcs/macsim.hpp"
#include "ipcs/rfmodel.hpp"

namespace ipcs {

const char* mechanism_name(CsMechanism mechanism);
CsMechanism mechanism_from_name(std::string_view name);  // throws on unknown

// 20 link counts from 1 to 200, evenly spaced and rounded.
std::vector<int> default_sweep_counts();

struct SweepSpec {
  std::vector<int> link_counts = default_sweep_counts();
  int seeds_per_point = 30;
  std::vector<CsMechanism> mechanisms = {CsMechanism::kIpcs,
                                         CsMechanism::kConventional};
  std::uint64_t base_seed = 1;
  int workers = 0;  // 0: one per hardware thread

  TopologyConfig topo_base;  // arena and link-length range; count is swept
  RadioParams radio;
  MacTiming timing;
  // Slotted binary-exponential backoff is the 802.11-style default for the
  // headline comparison; the continuous model is available for the
  // collision-isolation studies.
  BackoffModel backoff = BackoffModel::kSlotted;
  double duration_s = 0.3;
  double d_max_ref = 0.0;  // 0: topo_base.length_max

  double resolved_d_max_ref() const;
  void validate() const;  // throws std::invalid_argument
};

// One (link count, mechanism) grid point, aggregated over the seeds.
struct SweepPointResult {
  int link_count = 0;
  CsMechanism mechanism = CsMechanism::kIpcs;
  int seeds = 0;
  double offered_density = 0.0;  // links per unit area (same for all seeds)
  double spatial_reuse = 0.0;    // mean over seeds
  double throughput_per_unit_area_bps = 0.0;  // mean over seeds
  long collisions = 0;                        // summed over seeds
};

using SweepProgress = std::function<void(std::size_t done, std::size_t total)>;

// Runs the whole grid on a worker pool. Output order is deterministic:
// counts in spec order, mechanisms in spec order within each count.
// Rethrows the first worker exception, if any.
std::vector<SweepPointResult> run_sweep(const SweepSpec& spec,
                                        const SweepProgress& progress = {});

// CSV: version header, '#' config lines, then
// "density,mechanism,spatial_reuse,throughput_per_unit_area,collisions".
std::string sweep_to_csv(const SweepSpec& spec,
                         const std::vector<SweepPointResult>& results);

}  // namespace ipcs
