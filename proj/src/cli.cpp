#include "ipcs/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ipcs/carriersense.hpp"
#include "ipcs/geometry.hpp"
#include "ipcs/macsim.hpp"
#include "ipcs/rfmodel.hpp"
#include "ipcs/scenarios.hpp"
#include "ipcs/svg.hpp"
#include "ipcs/sweep.hpp"

namespace fs = std::filesystem;

namespace ipcs {

namespace {

constexpr const char* kVersion = "0.1.0";

struct GlobalOpts {
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  int workers = 0;
};

std::string strf(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

// Writes a CSV artifact, splicing version/timestamp/config comment lines in
// after the payload's leading format-version line. The "# generated" line is
// the only part of any artifact that varies between identical runs.
fs::path write_artifact(const GlobalOpts& g, const std::string& filename,
                        const std::string& payload,
                        const std::string& config) {
  const auto pos = payload.find('\n');
  const std::string head =
      pos == std::string::npos ? payload : payload.substr(0, pos + 1);
  const std::string rest =
      pos == std::string::npos ? std::string() : payload.substr(pos + 1);
  std::string meta = strf("# version %s\n# generated %s\n", kVersion,
                          timestamp_utc().c_str());
  if (!config.empty()) meta += "# config " + config + "\n";

  fs::create_directories(g.out_dir);
  const fs::path path = fs::path(g.out_dir) / filename;
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << head << meta << rest;
  out.close();
  std::cout << "wrote " << path.string() << "\n";
  return path;
}

// SVG output carries no timestamp at all: identical data must render
// byte-identical images.
fs::path write_svg(const fs::path& path, const std::string& svg) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << svg;
  out.close();
  std::cout << "wrote " << path.string() << "\n";
  return path;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CsvTable {
  std::string kind;  // from the "# ipcs-sim <kind> v1" line
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

CsvTable parse_csv(const std::string& text, const std::string& origin) {
  CsvTable table;
  std::istringstream ss(text);
  std::string line;
  bool first = true;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      first = false;
      const std::string tag = "# ipcs-sim ";
      if (line.rfind(tag, 0) != 0) {
        throw std::runtime_error(origin + ": not an ipcs-sim CSV artifact");
      }
      std::istringstream head(line.substr(tag.size()));
      head >> table.kind;
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    if (table.header.empty()) {
      table.header = split_csv_line(line);
      continue;
    }
    auto row = split_csv_line(line);
    if (row.size() != table.header.size()) {
      throw std::runtime_error(origin + ": malformed CSV row: " + line);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.kind.empty()) {
    throw std::runtime_error(origin + ": empty file");
  }
  return table;
}

double to_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw std::runtime_error("not a number: '" + s + "'");
  }
  return v;
}

// ---------------------------------------------------------------------------
// Expected-vs-actual check reporting for the scenario command.

class CheckList {
 public:
  void value(const std::string& what, double expected, double actual,
             double rel_tol) {
    const double scale = std::max(std::abs(expected), 1e-300);
    const double err = std::abs(actual - expected) / scale;
    note(err <= rel_tol, what,
         strf("expected=%.10g actual=%.10g rel_err=%.1e", expected, actual,
              err));
  }

  void count(const std::string& what, long expected, long actual) {
    note(expected == actual, what,
         strf("expected=%ld actual=%ld", expected, actual));
  }

  void truth(const std::string& what, bool ok, const std::string& detail) {
    note(ok, what, detail);
  }

  int failures() const { return failures_; }
  int total() const { return total_; }

 private:
  void note(bool ok, const std::string& what, const std::string& detail) {
    ++total_;
    if (!ok) ++failures_;
    std::printf("  [%s] %-58s %s\n", ok ? " ok " : "FAIL", what.c_str(),
                detail.c_str());
  }

  int failures_ = 0;
  int total_ = 0;
};

long count_type(const EventLog& log, SimEventType type) {
  return std::count_if(log.begin(), log.end(),
                       [&](const SimEvent& e) { return e.type == type; });
}

const SimEvent* find_event(const EventLog& log, SimEventType type, int link) {
  for (const auto& e : log) {
    if (e.type == type && e.link == link) return &e;
  }
  return nullptr;
}

// Every DATA/ACK direction assignment of the given links must satisfy each
// member's own-direction SIR constraint.
bool all_combos_feasible(const std::vector<int>& links, const Topology& topo,
                         const RadioParams& radio) {
  const std::size_t n = links.size();
  for (std::size_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<ActiveFrame> frames;
    frames.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      frames.push_back(ActiveFrame{
          links[i], mask & (1u << i) ? FrameDir::kAck : FrameDir::kData});
    }
    const FeasibilityReport rep =
        check_feasible(frames, topo, radio, SirCheck::kBoth);
    for (std::size_t i = 0; i < n; ++i) {
      const double own = frames[i].dir == FrameDir::kData
                             ? rep.links[i].data_sir
                             : rep.links[i].ack_sir;
      if (!(own >= radio.gamma0)) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Canonical scripted runs for each scenario.

struct ScenarioScript {
  std::string variant;
  CsMechanism mechanism = CsMechanism::kIpcs;
  double csr_m = 0.0;
  bool rs_mode = true;
  std::vector<ForcedStart> schedule;
};

std::vector<ScenarioScript> scenario_scripts(const Scenario& sc) {
  const double us = 1e-6;
  const double cum = safe_csr_cumulative(sc.radio, sc.d_max);
  if (sc.name == "fig1-three-link") {
    const double pair = safe_csr_pairwise(sc.radio, sc.d_max);
    return {
        // Pairwise-safe sensing admits the third transmitter into a
        // configuration that corrupts link 0's DATA frame.
        {"conventional", CsMechanism::kConventional, pair, true,
         {{0.0, 1}, {1000 * us, 0}, {1075 * us, 2}}},
        // Increment sensing with the cumulative-safe range defers both
        // would-be interferers instead.
        {"ipcs", CsMechanism::kIpcs, cum, true,
         {{0.0, 0}, {200 * us, 1}, {1075 * us, 2}}},
    };
  }
  if (sc.name == "fig3-conventional" || sc.name == "fig3-ipcs") {
    const CsMechanism mech = sc.name == "fig3-ipcs"
                                 ? CsMechanism::kIpcs
                                 : CsMechanism::kConventional;
    return {
        {"order-a", mech, cum, true, {{0.0, 0}, {200 * us, 1}, {400 * us, 2}}},
        {"order-b", mech, cum, true, {{0.0, 1}, {200 * us, 2}, {400 * us, 0}}},
    };
  }
  if (sc.name == "appendixA-capture") {
    return {
        {"rs-off", CsMechanism::kIpcs, cum, false, {{0.0, 0}, {300 * us, 1}}},
        {"rs-on", CsMechanism::kIpcs, cum, true, {{0.0, 0}, {300 * us, 1}}},
    };
  }
  throw std::invalid_argument("no scripts for scenario '" + sc.name + "'");
}

SimConfig scripted_config(const Scenario& sc, const ScenarioScript& script,
                          int trace_observer = -1) {
  SimConfig cfg;
  cfg.topology = sc.topology;
  cfg.radio = sc.radio;
  cfg.timing = MacTiming{};
  cfg.cs = CsConfig::from_csr(script.mechanism, sc.radio, script.csr_m,
                              cfg.timing.t_packet());
  cfg.rs_mode = script.rs_mode;
  cfg.duration_s = 0.05;
  cfg.seed = 1;
  cfg.d_max_ref = sc.d_max;
  cfg.forced_schedule = script.schedule;
  cfg.trace_observer = trace_observer;
  return cfg;
}

std::string events_filename(const Scenario& sc, const ScenarioScript& s) {
  return "scenario_" + sc.name + "_" + s.variant + ".events.csv";
}

// ---------------------------------------------------------------------------
// csr subcommand

struct CsrOpts {
  std::vector<double> gamma0;  // empty: log grid
  std::vector<double> alphas = {2.5, 3.0, 4.0, 6.0};
  double d_max = 1.0;
  int points = 61;
  std::string csv = "csr_table.csv";
};

int cmd_csr(const GlobalOpts& g, const CsrOpts& o) {
  if (o.d_max <= 0.0) throw std::invalid_argument("csr: d_max must be positive");
  if (o.points < 2) throw std::invalid_argument("csr: need at least 2 points");

  std::vector<double> grid = o.gamma0;
  const bool explicit_grid = !grid.empty();
  if (!explicit_grid) {
    for (int i = 0; i < o.points; ++i) {
      grid.push_back(std::pow(10.0, 4.0 * i / (o.points - 1)));
    }
  }

  std::string payload = "# ipcs-sim csr-table v1\n";
  payload += "gamma0,alpha,csr_pairwise,csr_cumulative,ratio,ratio_limit\n";

  for (double alpha : o.alphas) {
    RadioParams radio;
    radio.alpha = alpha;
    const double limit = csr_ratio_limit(alpha);
    std::printf("alpha=%-6g large-gamma0 ratio limit = %.6f\n", alpha, limit);
    std::printf("  %12s %14s %14s %10s\n", "gamma0", "pairwise_csr",
                "cumulative_csr", "ratio");
    const std::size_t stride =
        std::max<std::size_t>(1, (grid.size() - 1) / 4);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      radio.gamma0 = grid[i];
      const double pair = safe_csr_pairwise(radio, o.d_max);
      const double cum = safe_csr_cumulative(radio, o.d_max);
      const double ratio = cum / pair;
      payload += strf("%.10g,%g,%.6f,%.6f,%.6f,%.6f\n", grid[i], alpha, pair,
                      cum, ratio, limit);
      // Keep stdout short on the default dense grid: decades only.
      const bool print_row = explicit_grid || i % stride == 0;
      if (print_row) {
        std::printf("  %12.6g %14.6f %14.6f %10.6f\n", grid[i], pair, cum,
                    ratio);
      }
    }
  }

  std::string alphas_cfg;
  for (double a : o.alphas) {
    if (!alphas_cfg.empty()) alphas_cfg += ",";
    alphas_cfg += strf("%g", a);
  }
  const std::string cfg = strf(
      "d_max=%g points=%d alphas=%s gamma0_spec=%s", o.d_max,
      static_cast<int>(grid.size()), alphas_cfg.c_str(),
      explicit_grid ? "explicit" : "log-grid-1-to-1e4");
  write_artifact(g, o.csv, payload, cfg);
  return 0;
}

// ---------------------------------------------------------------------------
// scenario subcommand

void print_scenario_header(const Scenario& sc) {
  std::printf("scenario %s\n", sc.name.c_str());
  std::printf("  %s\n", sc.summary.c_str());
  std::printf("  gamma0=%g alpha=%g tx_power_mw=%g d_max=%g\n",
              sc.radio.gamma0, sc.radio.alpha, sc.radio.tx_power_mw, sc.d_max);
  std::printf("  pairwise-safe range   %.6f (pth %.9e mW)\n",
              safe_csr_pairwise(sc.radio, sc.d_max),
              pth_from_csr(sc.radio, safe_csr_pairwise(sc.radio, sc.d_max)));
  std::printf("  cumulative-safe range %.6f (pth %.9e mW)\n",
              safe_csr_cumulative(sc.radio, sc.d_max),
              pth_from_csr(sc.radio, safe_csr_cumulative(sc.radio, sc.d_max)));
  for (const auto& link : sc.topology.links) {
    std::printf("  link %d  tx=(%.6f, %.6f)  rx=(%.6f, %.6f)\n", link.id,
                link.tx.x, link.tx.y, link.rx.x, link.rx.y);
  }
}

void check_fig1(const GlobalOpts& g, const Scenario& sc, CheckList& checks) {
  const Topology& topo = sc.topology;
  const RadioParams& radio = sc.radio;
  const double d = sc.d_max;
  const double pt = radio.tx_power_mw;

  const double pair = safe_csr_pairwise(radio, d);
  checks.value("pairwise-safe range equals 4 d_max", 4.0 * d, pair, 1e-12);
  const double pth_pair = pth_from_csr(radio, pair);
  checks.value("pairwise threshold equals Pt/(4 d_max)^3",
               pt * std::pow(4.0 * d, -3.0), pth_pair, 1e-12);

  const std::vector<ActiveFrame> pair_frames{{0, FrameDir::kData},
                                             {1, FrameDir::kAck}};
  const double sensed =
      sense_power(topo.links[2].tx, pair_frames, topo, radio);
  const double sensed_exact =
      pt * (std::pow(5.0 * d, -3.0) + std::pow(8.0 * d, -3.0));
  checks.value("power at T3 while l1 DATA + l2 ACK on air", sensed_exact,
               sensed, 1e-12);
  checks.truth("T3 senses idle under the pairwise threshold",
               sensed <= pth_pair,
               strf("sensed=%.9e pth=%.9e", sensed, pth_pair));

  const std::vector<ActiveFrame> trio{
      {0, FrameDir::kData}, {1, FrameDir::kAck}, {2, FrameDir::kData}};
  const FeasibilityReport rep =
      check_feasible(trio, topo, radio, SirCheck::kData);
  checks.value("link-0 DATA SIR once l3 transmits", 54.0 / 7.0,
               rep.links[0].data_sir, 1e-12);
  checks.truth("link-0 SIR falls below the reception threshold",
               rep.links[0].data_sir < radio.gamma0,
               strf("sir=%.6f gamma0=%g", rep.links[0].data_sir,
                    radio.gamma0));

  for (int mask = 0; mask < 4; ++mask) {
    const FrameDir d0 = mask & 1 ? FrameDir::kAck : FrameDir::kData;
    const FrameDir d1 = mask & 2 ? FrameDir::kAck : FrameDir::kData;
    const std::vector<ActiveFrame> combo{{0, d0}, {1, d1}};
    const FeasibilityReport r =
        check_feasible(combo, topo, radio, SirCheck::kBoth);
    const double own0 = d0 == FrameDir::kData ? r.links[0].data_sir
                                              : r.links[0].ack_sir;
    const double own1 = d1 == FrameDir::kData ? r.links[1].data_sir
                                              : r.links[1].ack_sir;
    checks.truth(strf("links 0+1 alone feasible (%s + %s)",
                      d0 == FrameDir::kData ? "DATA" : "ACK",
                      d1 == FrameDir::kData ? "DATA" : "ACK"),
                 own0 >= radio.gamma0 && own1 >= radio.gamma0,
                 strf("sir0=%.4f sir1=%.4f", own0, own1));
  }

  for (const auto& script : scenario_scripts(sc)) {
    const bool conventional = script.variant == "conventional";
    SimConfig cfg = scripted_config(sc, script, conventional ? 2 : -1);
    const SimResult res = run_simulation(cfg);
    write_artifact(g, events_filename(sc, script), log_to_csv(res.log),
                   strf("scenario=%s variant=%s", sc.name.c_str(),
                        script.variant.c_str()));
    if (conventional) {
      checks.count("conventional run: delivered exchanges", 2,
                   res.metrics.delivered_packets);
      checks.count("conventional run: DATA failures", 1,
                   res.metrics.data_failures);
      checks.truth("conventional run: the corrupted DATA is link 0's",
                   find_event(res.log, SimEventType::kDataFail, 0) != nullptr,
                   "");
      checks.count("conventional run: deferred attempts", 0,
                   res.metrics.deferred_attempts);
      checks.count("conventional run: hidden-node collision events", 1,
                   res.metrics.hidden_node_collisions);
      const double at_attempt = res.observer_trace.total_mw_at(1075e-6);
      checks.value("conventional run: power T3 sensed at its attempt",
                   sensed_exact, at_attempt, 1e-9);
      write_artifact(g, "scenario_" + sc.name + "_t3.trace.csv",
                     trace_to_csv(res.observer_trace),
                     strf("scenario=%s variant=%s observer=2",
                          sc.name.c_str(), script.variant.c_str()));
    } else {
      checks.count("increment run: delivered exchanges", 1,
                   res.metrics.delivered_packets);
      checks.count("increment run: deferred attempts", 2,
                   res.metrics.deferred_attempts);
      checks.truth("increment run: both interferers deferred",
                   find_event(res.log, SimEventType::kDefer, 1) != nullptr &&
                       find_event(res.log, SimEventType::kDefer, 2) != nullptr,
                   "");
      checks.count("increment run: hidden-node collision events", 0,
                   res.metrics.hidden_node_collisions);
    }
  }
}

void check_fig3(const GlobalOpts& g, const Scenario& sc, CheckList& checks) {
  const Topology& topo = sc.topology;
  const RadioParams& radio = sc.radio;
  const bool ipcs = sc.name == "fig3-ipcs";

  const double w = safe_csr_cumulative(radio, sc.d_max);
  checks.value("T1-T2 spacing equals the cumulative-safe range", w,
               distance(topo.links[0].tx, topo.links[1].tx), 1e-12);
  const double pth = pth_from_csr(radio, w);

  const std::vector<ActiveFrame> others{{1, FrameDir::kData},
                                        {2, FrameDir::kData}};
  const double sensed = sense_power(topo.links[0].tx, others, topo, radio);
  if (!ipcs) {
    checks.value("power at T1 with both peers on air is 1.5x threshold",
                 1.5 * pth, sensed, 1e-9);
    checks.truth("an absolute-power sensor therefore blocks T1",
                 sensed > pth, strf("sensed=%.9e pth=%.9e", sensed, pth));
  } else {
    checks.truth("power at T1 with both peers on air stays above threshold",
                 sensed > pth, strf("sensed=%.9e pth=%.9e", sensed, pth));
  }

  const double inc_peer =
      radio.tx_power_mw *
      path_gain(distance(topo.links[1].tx, topo.links[0].tx), radio.alpha);
  checks.value("single increment from one safe range equals threshold", pth,
               inc_peer, 1e-12);
  checks.truth("single increment does not exceed threshold (idle)",
               inc_peer <= pth, strf("inc=%.9e pth=%.9e", inc_peer, pth));
  const double inc_third =
      radio.tx_power_mw *
      path_gain(distance(topo.links[2].tx, topo.links[0].tx), radio.alpha);
  checks.truth("third transmitter's increment stays below threshold",
               inc_third < pth, strf("inc=%.9e pth=%.9e", inc_third, pth));

  checks.truth("all three links feasible together (every direction combo)",
               all_combos_feasible({0, 1, 2}, topo, radio), "");

  for (const auto& script : scenario_scripts(sc)) {
    SimConfig cfg = scripted_config(sc, script);
    const SimResult res = run_simulation(cfg);
    write_artifact(g, events_filename(sc, script), log_to_csv(res.log),
                   strf("scenario=%s variant=%s", sc.name.c_str(),
                        script.variant.c_str()));
    const bool order_b = script.variant == "order-b";
    if (!ipcs && order_b) {
      checks.count("order-b run: delivered exchanges", 2,
                   res.metrics.delivered_packets);
      checks.count("order-b run: deferred attempts (exposed node)", 1,
                   res.metrics.deferred_attempts);
      const SimEvent* defer = find_event(res.log, SimEventType::kDefer, 0);
      checks.truth("order-b run: the deferred transmitter is T1",
                   defer != nullptr, defer ? defer->detail : "no defer event");
      if (defer != nullptr) {
        const auto pos = defer->detail.find("sensed=");
        const double logged =
            pos == std::string::npos
                ? 0.0
                : std::strtod(defer->detail.c_str() + pos + 7, nullptr);
        checks.value("order-b run: T1's sensed power at its attempt",
                     1.5 * pth, logged, 1e-5);
      }
    } else {
      checks.count(script.variant + " run: delivered exchanges", 3,
                   res.metrics.delivered_packets);
      checks.count(script.variant + " run: deferred attempts", 0,
                   res.metrics.deferred_attempts);
    }
    checks.count(script.variant + " run: hidden-node collision events", 0,
                 res.metrics.hidden_node_collisions);
  }
}

void check_capture(const GlobalOpts& g, const Scenario& sc,
                   CheckList& checks) {
  const Topology& topo = sc.topology;
  const RadioParams& radio = sc.radio;

  const double csr = safe_csr_cumulative(radio, sc.d_max);
  const double pth = pth_from_csr(radio, csr);
  checks.value("T1-T2 spacing is 1.05 cumulative-safe ranges", 1.05 * csr,
               distance(topo.links[0].tx, topo.links[1].tx), 1e-12);

  const std::vector<ActiveFrame> l1_data{{0, FrameDir::kData}};
  const double at_t2 = sense_power(topo.links[1].tx, l1_data, topo, radio);
  checks.truth("T2 senses idle while l1 transmits", at_t2 <= pth,
               strf("sensed=%.9e pth=%.9e", at_t2, pth));
  const double at_r2 = sense_power(topo.links[1].rx, l1_data, topo, radio);
  checks.truth("R2 hears T1 above the lock threshold", at_r2 > pth,
               strf("heard=%.9e pth=%.9e", at_r2, pth));
  checks.truth("both links feasible together (every direction combo)",
               all_combos_feasible({0, 1}, topo, radio), "");

  for (const auto& script : scenario_scripts(sc)) {
    SimConfig cfg = scripted_config(sc, script);
    const SimResult res = run_simulation(cfg);
    write_artifact(g, events_filename(sc, script), log_to_csv(res.log),
                   strf("scenario=%s variant=%s rs=%d", sc.name.c_str(),
                        script.variant.c_str(), script.rs_mode ? 1 : 0));
    if (!script.rs_mode) {
      checks.count("rs-off run: delivered exchanges", 1,
                   res.metrics.delivered_packets);
      const SimEvent* fail = find_event(res.log, SimEventType::kDataFail, 1);
      checks.truth("rs-off run: link 1 loses its DATA to capture",
                   fail != nullptr && fail->detail == "capture",
                   fail ? fail->detail : "no failure event");
      checks.count("rs-off run: hidden-node collision events (capture is "
                   "not interference)",
                   0, res.metrics.hidden_node_collisions);
    } else {
      checks.count("rs-on run: delivered exchanges", 2,
                   res.metrics.delivered_packets);
      checks.count("rs-on run: DATA failures", 0, res.metrics.data_failures);
      checks.count("rs-on run: hidden-node collision events", 0,
                   res.metrics.hidden_node_collisions);
    }
  }
}

struct ScenarioOpts {
  std::string name;
  double d_max = 1.0;
  bool list = false;
};

int cmd_scenario(const GlobalOpts& g, const ScenarioOpts& o) {
  if (o.list || o.name.empty()) {
    for (const auto& name : scenario_names()) {
      const Scenario sc = build_scenario(name);
      std::printf("%-20s %s\n", name.c_str(), sc.summary.c_str());
    }
    return 0;
  }
  const Scenario sc = build_scenario(o.name, o.d_max);
  print_scenario_header(sc);
  write_artifact(g, "scenario_" + sc.name + ".topology.txt",
                 topology_to_table(sc.topology),
                 strf("scenario=%s d_max=%g", sc.name.c_str(), o.d_max));

  CheckList checks;
  if (sc.name == "fig1-three-link") {
    check_fig1(g, sc, checks);
  } else if (sc.name == "fig3-conventional" || sc.name == "fig3-ipcs") {
    check_fig3(g, sc, checks);
  } else {
    check_capture(g, sc, checks);
  }
  std::printf("scenario %s: %d checks, %d failed\n", sc.name.c_str(),
              checks.total(), checks.failures());
  return checks.failures() == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// sim subcommand

struct SimOpts {
  std::string topology_file;
  int links = 50;
  double arena = 300.0;
  double lmin = 10.0;
  double lmax = 20.0;
  std::string mechanism = "ipcs";
  double gamma0 = 20.0;
  double alpha = 4.0;
  double power = 100.0;
  double noise = 0.0;
  double duration = 0.3;
  std::string backoff = "continuous";
  bool no_rs = false;
  double csr = 0.0;  // 0: cumulative-safe for d_max_ref
  double d_max_ref = 0.0;
  int trace_observer = -1;
  bool no_events = false;
  std::string prefix = "sim";
};

BackoffModel backoff_from_name(const std::string& name) {
  if (name == "continuous") return BackoffModel::kContinuous;
  if (name == "slotted") return BackoffModel::kSlotted;
  throw std::invalid_argument("unknown backoff '" + name +
                              "' (expected continuous or slotted)");
}

int cmd_sim(const GlobalOpts& g, const SimOpts& o) {
  SimConfig cfg;
  cfg.radio.gamma0 = o.gamma0;
  cfg.radio.alpha = o.alpha;
  cfg.radio.tx_power_mw = o.power;
  cfg.radio.noise_mw = o.noise;

  if (!o.topology_file.empty()) {
    cfg.topology = topology_from_table(read_file(o.topology_file));
    cfg.d_max_ref = o.d_max_ref;
  } else {
    TopologyConfig tc;
    tc.arena_side = o.arena;
    tc.count_model = CountModel::kFixed;
    tc.link_count = o.links;
    tc.length_min = o.lmin;
    tc.length_max = o.lmax;
    tc.seed = g.seed;
    cfg.topology_config = tc;
    cfg.d_max_ref = o.d_max_ref > 0.0 ? o.d_max_ref : o.lmax;
  }

  cfg.timing = MacTiming{};
  const double d_ref_for_csr =
      cfg.d_max_ref > 0.0
          ? cfg.d_max_ref
          : (cfg.topology ? cfg.topology->d_max : o.lmax);
  const double csr =
      o.csr > 0.0 ? o.csr : safe_csr_cumulative(cfg.radio, d_ref_for_csr);
  cfg.cs = CsConfig::from_csr(mechanism_from_name(o.mechanism), cfg.radio,
                              csr, cfg.timing.t_packet());
  cfg.backoff = backoff_from_name(o.backoff);
  cfg.rs_mode = !o.no_rs;
  cfg.duration_s = o.duration;
  cfg.seed = g.seed;
  cfg.trace_observer = o.trace_observer;

  const SimResult res = run_simulation(cfg);
  const SimMetrics& m = res.metrics;

  std::printf("links                     %zu\n", res.topology.links.size());
  std::printf("duration_s                %g\n", m.duration_s);
  std::printf("mechanism                 %s\n", o.mechanism.c_str());
  std::printf("csr_m                     %.6f\n", csr);
  std::printf("pth_mw                    %.9e\n", cfg.cs.pth_mw);
  std::printf("unit_area_m2              %.6f\n", m.unit_area_m2);
  std::printf("offered_link_density      %.6f\n", m.offered_link_density);
  std::printf("spatial_reuse             %.6f\n", m.spatial_reuse);
  std::printf("throughput_per_area_bps   %.6e\n",
              m.throughput_per_unit_area_bps);
  std::printf("delivered_packets         %ld\n", m.delivered_packets);
  std::printf("data_failures             %ld\n", m.data_failures);
  std::printf("ack_failures              %ld\n", m.ack_failures);
  std::printf("deferred_attempts         %ld\n", m.deferred_attempts);
  std::printf("hidden_node_collisions    %ld\n", m.hidden_node_collisions);

  const std::string cfg_line = strf(
      "mechanism=%s gamma0=%g alpha=%g tx_power_mw=%g noise_mw=%g csr_m=%.6f "
      "duration_s=%g seed=%llu backoff=%s rs=%d links=%zu",
      o.mechanism.c_str(), o.gamma0, o.alpha, o.power, o.noise, csr,
      o.duration, static_cast<unsigned long long>(g.seed), o.backoff.c_str(),
      cfg.rs_mode ? 1 : 0, res.topology.links.size());

  write_artifact(g, o.prefix + ".topology.txt",
                 topology_to_table(res.topology), cfg_line);
  std::string metrics_csv = "# ipcs-sim metrics v1\n";
  metrics_csv +=
      "duration_s,links,mechanism,offered_density,spatial_reuse,"
      "throughput_per_unit_area,delivered,data_failures,ack_failures,"
      "deferred,collisions\n";
  metrics_csv += strf("%g,%zu,%s,%.6f,%.6f,%.6e,%ld,%ld,%ld,%ld,%ld\n",
                      m.duration_s, res.topology.links.size(),
                      o.mechanism.c_str(), m.offered_link_density,
                      m.spatial_reuse, m.throughput_per_unit_area_bps,
                      m.delivered_packets, m.data_failures, m.ack_failures,
                      m.deferred_attempts, m.hidden_node_collisions);
  write_artifact(g, o.prefix + ".metrics.csv", metrics_csv, cfg_line);
  if (!o.no_events) {
    write_artifact(g, o.prefix + ".events.csv", log_to_csv(res.log), cfg_line);
  }
  if (o.trace_observer >= 0) {
    write_artifact(g, o.prefix + ".trace.csv",
                   trace_to_csv(res.observer_trace), cfg_line);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sweep subcommand

struct SweepOpts {
  std::vector<int> counts;
  int seeds = 30;
  double duration = 0.3;
  double arena = 300.0;
  double lmin = 10.0;
  double lmax = 20.0;
  double gamma0 = 20.0;
  double alpha = 4.0;
  double power = 100.0;
  double noise = 0.0;
  std::string backoff = "slotted";
  std::string csv = "sweep.csv";
  bool quiet = false;
};

int cmd_sweep(const GlobalOpts& g, const SweepOpts& o) {
  SweepSpec spec;
  if (!o.counts.empty()) spec.link_counts = o.counts;
  spec.seeds_per_point = o.seeds;
  spec.base_seed = g.seed;
  spec.workers = g.workers;
  spec.topo_base.arena_side = o.arena;
  spec.topo_base.length_min = o.lmin;
  spec.topo_base.length_max = o.lmax;
  spec.radio.gamma0 = o.gamma0;
  spec.radio.alpha = o.alpha;
  spec.radio.tx_power_mw = o.power;
  spec.radio.noise_mw = o.noise;
  spec.backoff = backoff_from_name(o.backoff);
  spec.duration_s = o.duration;

  SweepProgress progress;
  if (!o.quiet) {
    progress = [](std::size_t done, std::size_t total) {
      if (done % 25 == 0 || done == total) {
        std::fprintf(stderr, "sweep: %zu/%zu runs\n", done, total);
      }
    };
  }
  const auto results = run_sweep(spec, progress);

  std::printf("%10s %14s %14s %16s %11s\n", "density", "mechanism",
              "spatial_reuse", "throughput_pua", "collisions");
  for (const auto& row : results) {
    std::printf("%10.4f %14s %14.6f %16.6e %11ld\n", row.offered_density,
                mechanism_name(row.mechanism), row.spatial_reuse,
                row.throughput_per_unit_area_bps, row.collisions);
  }

  // Mechanism contrast at the densest point.
  double best_density = -1.0;
  std::map<std::string, double> densest_reuse;
  for (const auto& row : results) {
    best_density = std::max(best_density, row.offered_density);
  }
  for (const auto& row : results) {
    if (row.offered_density == best_density) {
      densest_reuse[mechanism_name(row.mechanism)] = row.spatial_reuse;
    }
  }
  if (densest_reuse.count("ipcs") && densest_reuse.count("conventional") &&
      densest_reuse["conventional"] > 0.0) {
    std::printf("densest point: ipcs=%.4f conventional=%.4f ratio=%.3f\n",
                densest_reuse["ipcs"], densest_reuse["conventional"],
                densest_reuse["ipcs"] / densest_reuse["conventional"]);
  }

  write_artifact(g, o.csv, sweep_to_csv(spec, results), "");
  return 0;
}

// ---------------------------------------------------------------------------
// plot subcommand

int column_index(const CsvTable& table, const std::string& name) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == name) return static_cast<int>(i);
  }
  throw std::runtime_error("CSV is missing column '" + name + "'");
}

SvgChart chart_from_sweep(const CsvTable& table) {
  const int c_density = column_index(table, "density");
  const int c_mech = column_index(table, "mechanism");
  const int c_reuse = column_index(table, "spatial_reuse");
  const int c_tput = column_index(table, "throughput_per_unit_area");

  std::vector<std::string> mechs;
  for (const auto& row : table.rows) {
    if (std::find(mechs.begin(), mechs.end(), row[c_mech]) == mechs.end()) {
      mechs.push_back(row[c_mech]);
    }
  }

  SvgChart chart;
  chart.title = "Spatial reuse and area throughput vs offered link density";
  chart.x_label = "offered links per unit area";
  chart.y_label = "spatial reuse (concurrent links per unit area)";
  chart.y2_label = "throughput per unit area (bit/s)";
  chart.h_guides = {1.0};
  for (const auto& mech : mechs) {
    SvgSeries reuse;
    reuse.label = "spatial reuse (" + mech + ")";
    SvgSeries tput;
    tput.label = "throughput (" + mech + ")";
    tput.axis = 1;
    tput.dashed = true;
    for (const auto& row : table.rows) {
      if (row[c_mech] != mech) continue;
      const double x = to_double(row[c_density]);
      reuse.points.emplace_back(x, to_double(row[c_reuse]));
      tput.points.emplace_back(x, to_double(row[c_tput]));
    }
    chart.series.push_back(std::move(reuse));
    chart.series.push_back(std::move(tput));
  }
  return chart;
}

SvgChart chart_from_csr(const CsvTable& table) {
  const int c_gamma = column_index(table, "gamma0");
  const int c_alpha = column_index(table, "alpha");
  const int c_ratio = column_index(table, "ratio");
  const int c_limit = column_index(table, "ratio_limit");

  std::vector<std::string> alphas;
  for (const auto& row : table.rows) {
    if (std::find(alphas.begin(), alphas.end(), row[c_alpha]) ==
        alphas.end()) {
      alphas.push_back(row[c_alpha]);
    }
  }

  SvgChart chart;
  chart.title = "Safe sensing-range ratio: cumulative vs pairwise";
  chart.x_label = "SIR threshold gamma0";
  chart.y_label = "cumulative-safe range / pairwise-safe range";
  chart.log_x = true;
  for (const auto& alpha : alphas) {
    SvgSeries curve;
    curve.label = "alpha=" + alpha;
    SvgSeries limit;
    limit.label = "alpha=" + alpha + " limit";
    limit.dashed = true;
    double gmin = 0.0, gmax = 0.0, lim = 0.0;
    bool any = false;
    for (const auto& row : table.rows) {
      if (row[c_alpha] != alpha) continue;
      const double x = to_double(row[c_gamma]);
      curve.points.emplace_back(x, to_double(row[c_ratio]));
      lim = to_double(row[c_limit]);
      if (!any) {
        gmin = gmax = x;
        any = true;
      }
      gmin = std::min(gmin, x);
      gmax = std::max(gmax, x);
    }
    if (any) {
      limit.points.emplace_back(gmin, lim);
      limit.points.emplace_back(gmax, lim);
    }
    chart.series.push_back(std::move(curve));
    chart.series.push_back(std::move(limit));
  }
  return chart;
}

struct PlotOpts {
  std::string input;
  std::string out;
};

int cmd_plot(const PlotOpts& o) {
  const CsvTable table = parse_csv(read_file(o.input), o.input);
  if (table.rows.empty()) {
    throw std::runtime_error(o.input + ": no data rows to plot");
  }
  SvgChart chart;
  if (table.kind == "sweep") {
    chart = chart_from_sweep(table);
  } else if (table.kind == "csr-table") {
    chart = chart_from_csr(table);
  } else {
    throw std::runtime_error(o.input + ": no chart defined for '" +
                             table.kind + "' artifacts");
  }
  fs::path out = o.out.empty()
                     ? fs::path(o.input).replace_extension(".svg")
                     : fs::path(o.out);
  write_svg(out, render_line_chart(chart));
  return 0;
}

// ---------------------------------------------------------------------------
// trace subcommand

struct TraceOpts {
  std::string scenario = "fig1-three-link";
  std::string variant;  // empty: first script
  int link = -1;        // observer; -1: last scheduled transmitter
  double d_max = 1.0;
};

int cmd_trace(const GlobalOpts& g, const TraceOpts& o) {
  const Scenario sc = build_scenario(o.scenario, o.d_max);
  const auto scripts = scenario_scripts(sc);
  const ScenarioScript* script = &scripts.front();
  if (!o.variant.empty()) {
    script = nullptr;
    for (const auto& s : scripts) {
      if (s.variant == o.variant) script = &s;
    }
    if (script == nullptr) {
      std::string known;
      for (const auto& s : scripts) known += " " + s.variant;
      throw std::invalid_argument("unknown variant '" + o.variant +
                                  "'; scenario has:" + known);
    }
  }
  const int observer =
      o.link >= 0 ? o.link : script->schedule.back().link;

  SimConfig cfg = scripted_config(sc, *script, observer);
  const SimResult res = run_simulation(cfg);

  std::printf("scenario %s variant %s, power sensed by link %d's transmitter "
              "(threshold %.9e mW)\n",
              sc.name.c_str(), script->variant.c_str(), observer,
              cfg.cs.pth_mw);
  std::printf("%14s %15s %8s %6s %15s\n", "t_us", "delta_mW", "source",
              "dir", "total_mW");
  double total = 0.0;
  for (const auto& e : res.observer_trace.events()) {
    total += e.delta_mw;
    std::printf("%14.6f %15.9e %8d %6s %15.9e\n", e.time_s * 1e6, e.delta_mw,
                e.source_link, e.dir == FrameDir::kData ? "data" : "ack",
                total);
  }
  write_artifact(g, "trace_" + sc.name + "_" + script->variant + ".csv",
                 trace_to_csv(res.observer_trace),
                 strf("scenario=%s variant=%s observer=%d d_max=%g",
                      sc.name.c_str(), script->variant.c_str(), observer,
                      o.d_max));
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Safe carrier-sensing range analysis and CSMA/CA simulation "
               "under cumulative interference"};
  app.set_version_flag("--version", std::string("ipcs-sim ") + kVersion);
  app.set_config("--config", "", "Read long-option defaults from an INI file");
  app.require_subcommand(0, 1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "Base RNG seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Directory for output artifacts")
      ->envname("IPCS_SIM_OUT_DIR")
      ->capture_default_str();
  app.add_option("--workers", g.workers,
                 "Worker threads for sweeps (0: all hardware threads)")
      ->capture_default_str();

  CsrOpts csr_opts;
  auto* csr = app.add_subcommand(
      "csr", "Tabulate safe sensing ranges and their ratio");
  csr->fallthrough();
  csr->add_option("--gamma0", csr_opts.gamma0,
                  "Explicit SIR thresholds (default: log grid 1..1e4)")
      ->delimiter(',');
  csr->add_option("--alpha", csr_opts.alphas, "Path-loss exponents")
      ->delimiter(',')
      ->capture_default_str();
  csr->add_option("--d-max", csr_opts.d_max, "Link length the ranges scale by")
      ->capture_default_str();
  csr->add_option("--points", csr_opts.points, "Grid points for the default "
                                               "gamma0 grid")
      ->capture_default_str();
  csr->add_option("--csv", csr_opts.csv, "Output CSV filename")
      ->capture_default_str();

  ScenarioOpts sc_opts;
  auto* scenario =
      app.add_subcommand("scenario", "Run a named layout and verify its "
                                     "expected sensing/reception behavior");
  scenario->fallthrough();
  scenario->add_option("name", sc_opts.name, "Scenario name (see --list)");
  scenario->add_flag("--list", sc_opts.list, "List scenario names");
  scenario->add_option("--d-max", sc_opts.d_max, "Link length scale")
      ->capture_default_str();

  SimOpts sim_opts;
  auto* sim = app.add_subcommand("sim", "One saturated CSMA/CA run");
  sim->fallthrough();
  sim->add_option("--topology", sim_opts.topology_file,
                  "Load a topology table instead of generating one");
  sim->add_option("--links", sim_opts.links, "Generated link count")
      ->capture_default_str();
  sim->add_option("--arena", sim_opts.arena, "Square arena side, meters")
      ->capture_default_str();
  sim->add_option("--lmin", sim_opts.lmin, "Min link length, meters")
      ->capture_default_str();
  sim->add_option("--lmax", sim_opts.lmax, "Max link length, meters")
      ->capture_default_str();
  sim->add_option("--mechanism", sim_opts.mechanism,
                  "ipcs or conventional")
      ->capture_default_str();
  sim->add_option("--gamma0", sim_opts.gamma0, "SIR threshold")
      ->capture_default_str();
  sim->add_option("--alpha", sim_opts.alpha, "Path-loss exponent")
      ->capture_default_str();
  sim->add_option("--power", sim_opts.power, "Transmit power, mW")
      ->capture_default_str();
  sim->add_option("--noise", sim_opts.noise, "Noise floor, mW")
      ->capture_default_str();
  sim->add_option("--duration", sim_opts.duration, "Simulated seconds")
      ->capture_default_str();
  sim->add_option("--backoff", sim_opts.backoff, "continuous or slotted")
      ->capture_default_str();
  sim->add_flag("--no-rs", sim_opts.no_rs,
                "Disable restart-mode receiver relocking");
  sim->add_option("--csr", sim_opts.csr,
                  "Sensing range override, meters (0: cumulative-safe)")
      ->capture_default_str();
  sim->add_option("--d-max-ref", sim_opts.d_max_ref,
                  "Reference link length for ranges and unit area "
                  "(0: realized maximum)")
      ->capture_default_str();
  sim->add_option("--trace-observer", sim_opts.trace_observer,
                  "Link id whose sensed-power trace to keep (-1: none)")
      ->capture_default_str();
  sim->add_flag("--no-events", sim_opts.no_events,
                "Skip writing the event log");
  sim->add_option("--prefix", sim_opts.prefix, "Artifact filename prefix")
      ->capture_default_str();

  SweepOpts sweep_opts;
  auto* sweep = app.add_subcommand(
      "sweep", "Density sweep comparing sensing mechanisms");
  sweep->fallthrough();
  sweep->add_option("--counts", sweep_opts.counts,
                    "Link counts (default: 20 points, 1..200)")
      ->delimiter(',');
  sweep->add_option("--seeds", sweep_opts.seeds, "Topologies per count")
      ->capture_default_str();
  sweep->add_option("--duration", sweep_opts.duration, "Simulated seconds "
                                                       "per run")
      ->capture_default_str();
  sweep->add_option("--arena", sweep_opts.arena, "Square arena side, meters")
      ->capture_default_str();
  sweep->add_option("--lmin", sweep_opts.lmin, "Min link length, meters")
      ->capture_default_str();
  sweep->add_option("--lmax", sweep_opts.lmax, "Max link length, meters")
      ->capture_default_str();
  sweep->add_option("--gamma0", sweep_opts.gamma0, "SIR threshold")
      ->capture_default_str();
  sweep->add_option("--alpha", sweep_opts.alpha, "Path-loss exponent")
      ->capture_default_str();
  sweep->add_option("--power", sweep_opts.power, "Transmit power, mW")
      ->capture_default_str();
  sweep->add_option("--noise", sweep_opts.noise, "Noise floor, mW")
      ->capture_default_str();
  sweep->add_option("--backoff", sweep_opts.backoff,
                    "continuous or slotted")
      ->capture_default_str();
  sweep->add_option("--csv", sweep_opts.csv, "Output CSV filename")
      ->capture_default_str();
  sweep->add_flag("--quiet", sweep_opts.quiet, "Suppress progress output");

  PlotOpts plot_opts;
  auto* plot = app.add_subcommand(
      "plot", "Render a sweep or csr-table CSV as an SVG chart");
  plot->fallthrough();
  plot->add_option("input", plot_opts.input, "CSV artifact to render")
      ->required();
  plot->add_option("--out", plot_opts.out,
                   "Output SVG path (default: input with .svg)");

  TraceOpts trace_opts;
  auto* trace = app.add_subcommand(
      "trace", "Dump the power steps one scenario transmitter senses");
  trace->fallthrough();
  trace->add_option("scenario", trace_opts.scenario, "Scenario name")
      ->capture_default_str();
  trace->add_option("--variant", trace_opts.variant,
                    "Script variant (default: the scenario's first)");
  trace->add_option("--link", trace_opts.link,
                    "Observer link id (-1: last scheduled transmitter)")
      ->capture_default_str();
  trace->add_option("--d-max", trace_opts.d_max, "Link length scale")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*csr) return cmd_csr(g, csr_opts);
    if (*scenario) return cmd_scenario(g, sc_opts);
    if (*sim) return cmd_sim(g, sim_opts);
    if (*sweep) return cmd_sweep(g, sweep_opts);
    if (*plot) return cmd_plot(plot_opts);
    if (*trace) return cmd_trace(g, trace_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cout << app.help();
  return 0;
}

}  // namespace ipcs
