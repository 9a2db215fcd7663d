// End-to-end tests for the ipcs-sim command-line tool. Each case runs the
// real binary (path injected as IPCS_SIM_BIN by the build) in a scratch
// directory, then inspects exit status, captured stdout/stderr, and the
// artifacts written to disk. The reproducibility contract is checked the way
// a user would: identical invocations must produce byte-identical artifacts
// except for the single "# generated" timestamp line, and SVG output must be
// byte-identical outright.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ipcs/rfmodel.hpp"

namespace fs = std::filesystem;
using namespace ipcs;

namespace {

std::string strf(const char* pattern, ...) {
  char buf[256];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return std::string(buf);
}

struct CmdResult {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(static_cast<bool>(in), "missing file: " << path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Scratch directory for one test case, wiped on entry so reruns start clean.
fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::current_path() / "cli_scratch" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs the binary with `args` from inside `dir`, capturing output. An env
// prefix like "env IPCS_SIM_OUT_DIR=envdir " goes in front of the binary.
CmdResult run_tool(const fs::path& dir, const std::string& args,
                   const std::string& env_prefix = "") {
  const std::string cmd = "cd \"" + dir.string() + "\" && " + env_prefix +
                          "\"" IPCS_SIM_BIN "\" " + args +
                          " >_stdout.txt 2>_stderr.txt";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  CmdResult r;
  r.status = WEXITSTATUS(rc);
  r.out = slurp(dir / "_stdout.txt");
  r.err = slurp(dir / "_stderr.txt");
  return r;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

// Everything except comment lines: the column header followed by data rows.
std::vector<std::string> payload_lines(const std::string& text) {
  std::vector<std::string> rows;
  for (const auto& line : split_lines(text)) {
    if (!line.empty() && line[0] == '#') continue;
    rows.push_back(line);
  }
  return rows;
}

// Artifact text with the one run-varying line ("# generated <time>") removed.
std::string strip_generated(const std::string& text) {
  std::string out;
  for (const auto& line : split_lines(text)) {
    if (line.rfind("# generated ", 0) == 0) continue;
    out += line;
    out += '\n';
  }
  return out;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

// First comment line starting with the given tag, or empty.
std::string comment_line(const std::string& text, const std::string& tag) {
  for (const auto& line : split_lines(text)) {
    if (line.rfind(tag, 0) == 0) return line;
  }
  return {};
}

}  // namespace

TEST_CASE("version, help, and unknown-command handling") {
  const fs::path dir = fresh_dir("basics");

  CmdResult r = run_tool(dir, "--version");
  CHECK(r.status == 0);
  CHECK(r.out == "ipcs-sim 0.1.0\n");

  r = run_tool(dir, "");
  CHECK(r.status == 0);
  CHECK(contains(r.out, "Usage"));
  CHECK(contains(r.out, "scenario"));
  CHECK(contains(r.out, "sweep"));

  r = run_tool(dir, "--help");
  CHECK(r.status == 0);
  CHECK(contains(r.out, "csr"));

  r = run_tool(dir, "frobnicate");
  CHECK(r.status != 0);
}

TEST_CASE("csr subcommand: stdout values and CSV artifact layout") {
  const fs::path dir = fresh_dir("csr");

  RadioParams radio;
  radio.alpha = 4.0;
  radio.gamma0 = 10.0;
  const double pair10 = safe_csr_pairwise(radio, 1.0);
  const double cum10 = safe_csr_cumulative(radio, 1.0);
  radio.gamma0 = 20.0;
  const double cum20 = safe_csr_cumulative(radio, 1.0);
  const double limit4 = csr_ratio_limit(4.0);

  const CmdResult r =
      run_tool(dir, "--out-dir art csr --gamma0 10,20 --alpha 4 --csv t.csv");
  INFO(r.err);
  CHECK(r.status == 0);
  CHECK(contains(r.out, "large-gamma0 ratio limit = " +
                            strf("%.6f", limit4)));
  CHECK(contains(r.out, strf("%.6f", pair10)));
  CHECK(contains(r.out, strf("%.6f", cum10)));
  CHECK(contains(r.out, strf("%.6f", cum20)));
  CHECK(contains(r.out, "t.csv"));

  const std::string csv = slurp(dir / "art" / "t.csv");
  const auto lines = split_lines(csv);
  REQUIRE(lines.size() >= 7);
  CHECK(lines[0] == "# ipcs-sim csr-table v1");
  CHECK(lines[1] == "# version 0.1.0");
  CHECK(lines[2].rfind("# generated ", 0) == 0);
  CHECK(lines[3].rfind("# config ", 0) == 0);
  CHECK(contains(lines[3], "gamma0_spec=explicit"));

  const auto rows = payload_lines(csv);
  REQUIRE(rows.size() == 3);  // header + 2 data rows
  CHECK(rows[0] == "gamma0,alpha,csr_pairwise,csr_cumulative,ratio,ratio_limit");
  CHECK(rows[1] == strf("%.10g,%g,%.6f,%.6f,%.6f,%.6f", 10.0, 4.0, pair10,
                        cum10, cum10 / pair10, limit4));
  CHECK(contains(rows[2], "20,4,"));
}

TEST_CASE("csr subcommand: default grid and input validation") {
  const fs::path dir = fresh_dir("csr_default");

  CmdResult r = run_tool(dir, "--out-dir . csr");
  CHECK(r.status == 0);
  const auto rows = payload_lines(slurp(dir / "csr_table.csv"));
  // Header plus 61 gamma0 grid points for each of the four default alphas.
  CHECK(rows.size() == 1 + 61 * 4);
  CHECK(contains(slurp(dir / "csr_table.csv"), ",2.5,"));
  CHECK(contains(slurp(dir / "csr_table.csv"), ",6,"));

  r = run_tool(dir, "csr --points 1");
  CHECK(r.status != 0);

  r = run_tool(dir, "csr --d-max 0");
  CHECK(r.status != 0);
}

TEST_CASE("scenario subcommand verifies every named layout end to end") {
  struct Expected {
    const char* name;
    std::vector<const char*> variants;
  };
  const std::vector<Expected> scenarios = {
      {"fig1-three-link", {"conventional", "ipcs"}},
      {"fig3-conventional", {"order-a", "order-b"}},
      {"fig3-ipcs", {"order-a", "order-b"}},
      {"appendixA-capture", {"rs-off", "rs-on"}},
  };

  for (const auto& sc : scenarios) {
    CAPTURE(sc.name);
    const fs::path dir = fresh_dir(std::string("scenario_") + sc.name);
    const CmdResult r =
        run_tool(dir, std::string("--out-dir a scenario ") + sc.name);
    INFO(r.out);
    INFO(r.err);
    CHECK(r.status == 0);
    CHECK(contains(r.out, strf("scenario %s:", sc.name)));
    CHECK(contains(r.out, " 0 failed"));
    CHECK(!contains(r.out, "FAIL"));

    const std::string topo =
        slurp(dir / "a" / (std::string("scenario_") + sc.name +
                           ".topology.txt"));
    CHECK(split_lines(topo)[0] == "# ipcs-sim topology v1");

    for (const auto* variant : sc.variants) {
      const std::string events =
          slurp(dir / "a" / (std::string("scenario_") + sc.name + "_" +
                             variant + ".events.csv"));
      CHECK(split_lines(events)[0] == "# ipcs-sim event-log v1");
      CHECK(payload_lines(events).size() > 1);
    }
  }

  // fig1's absolute-power run also writes the far transmitter's power trace.
  CHECK(fs::exists(fs::current_path() / "cli_scratch" /
                   "scenario_fig1-three-link" / "a" /
                   "scenario_fig1-three-link_t3.trace.csv"));

  const fs::path dir = fresh_dir("scenario_misc");
  CmdResult r = run_tool(dir, "scenario --list");
  CHECK(r.status == 0);
  for (const auto& sc : scenarios) CHECK(contains(r.out, sc.name));

  r = run_tool(dir, "scenario nope");
  CHECK(r.status == 1);
  CHECK(contains(r.err, "error:"));
  CHECK(contains(r.err, "unknown scenario"));
}

TEST_CASE("sim subcommand: artifacts, reproducibility, seed sensitivity") {
  const fs::path dir = fresh_dir("sim");
  const std::string base =
      "sim --links 8 --arena 150 --duration 0.02 --trace-observer 0 "
      "--prefix run";

  const CmdResult ra = run_tool(dir, "--seed 5 --out-dir a " + base);
  INFO(ra.err);
  CHECK(ra.status == 0);
  CHECK(contains(ra.out, "delivered_packets"));
  CHECK(contains(ra.out, "ipcs"));

  // The default sensing range is the cumulative-safe range for the longest
  // generated link length (20 m) under the default radio.
  RadioParams radio;
  CHECK(contains(ra.out,
                 "csr_m                     " +
                     strf("%.6f", safe_csr_cumulative(radio, 20.0))));

  const std::string topo_a = slurp(dir / "a" / "run.topology.txt");
  const std::string metrics_a = slurp(dir / "a" / "run.metrics.csv");
  const std::string events_a = slurp(dir / "a" / "run.events.csv");
  const std::string trace_a = slurp(dir / "a" / "run.trace.csv");

  CHECK(split_lines(topo_a)[0] == "# ipcs-sim topology v1");
  CHECK(split_lines(metrics_a)[0] == "# ipcs-sim metrics v1");
  CHECK(split_lines(events_a)[0] == "# ipcs-sim event-log v1");
  CHECK(split_lines(trace_a)[0] == "# ipcs-sim power-trace v1");

  const auto metric_rows = payload_lines(metrics_a);
  REQUIRE(metric_rows.size() == 2);
  CHECK(metric_rows[0] ==
        "duration_s,links,mechanism,offered_density,spatial_reuse,"
        "throughput_per_unit_area,delivered,data_failures,ack_failures,"
        "deferred,collisions");
  CHECK(contains(metric_rows[1], ",ipcs,"));
  CHECK(payload_lines(events_a)[0] == "time,event_type,link,detail");
  CHECK(contains(comment_line(metrics_a, "# config"), "seed=5"));

  // Same seed, fresh directory: identical artifacts modulo the timestamp.
  const CmdResult rb = run_tool(dir, "--seed 5 --out-dir b " + base);
  CHECK(rb.status == 0);
  CHECK(strip_generated(slurp(dir / "b" / "run.topology.txt")) ==
        strip_generated(topo_a));
  CHECK(strip_generated(slurp(dir / "b" / "run.metrics.csv")) ==
        strip_generated(metrics_a));
  CHECK(strip_generated(slurp(dir / "b" / "run.events.csv")) ==
        strip_generated(events_a));
  CHECK(strip_generated(slurp(dir / "b" / "run.trace.csv")) ==
        strip_generated(trace_a));

  // A different seed draws a different topology.
  const CmdResult rc = run_tool(dir, "--seed 6 --out-dir c " + base);
  CHECK(rc.status == 0);
  CHECK(payload_lines(slurp(dir / "c" / "run.topology.txt")) !=
        payload_lines(topo_a));

  // --no-events suppresses the event log artifact.
  const CmdResult rd = run_tool(
      dir, "--seed 5 --out-dir d sim --links 8 --arena 150 --duration 0.02 "
           "--no-events --prefix quietrun");
  CHECK(rd.status == 0);
  CHECK(fs::exists(dir / "d" / "quietrun.metrics.csv"));
  CHECK(!fs::exists(dir / "d" / "quietrun.events.csv"));
  CHECK(!fs::exists(dir / "d" / "quietrun.trace.csv"));
}

TEST_CASE("sim subcommand: topology files round-trip") {
  const fs::path dir = fresh_dir("sim_topo");

  CmdResult r = run_tool(dir, "--seed 5 --out-dir w sim --links 6 "
                              "--arena 150 --duration 0.02 --prefix gen");
  INFO(r.err);
  CHECK(r.status == 0);

  r = run_tool(dir, "--seed 5 --out-dir w sim --topology w/gen.topology.txt "
                    "--duration 0.02 --prefix loaded");
  INFO(r.err);
  CHECK(r.status == 0);
  CHECK(contains(r.out, "links                     6"));

  // Loading the written table and re-serializing it reproduces the rows.
  CHECK(payload_lines(slurp(dir / "w" / "loaded.topology.txt")) ==
        payload_lines(slurp(dir / "w" / "gen.topology.txt")));

  r = run_tool(dir, "sim --topology nope.txt");
  CHECK(r.status == 1);
  CHECK(contains(r.err, "cannot read"));
}

TEST_CASE("sim subcommand: rejects invalid options with an error message") {
  const fs::path dir = fresh_dir("sim_invalid");

  CmdResult r = run_tool(dir, "sim --mechanism both --duration 0.02");
  CHECK(r.status == 1);
  CHECK(contains(r.err, "unknown mechanism"));

  r = run_tool(dir, "sim --backoff warp --duration 0.02");
  CHECK(r.status == 1);
  CHECK(contains(r.err, "unknown backoff"));

  r = run_tool(dir, "sim --duration 0.001");
  CHECK(r.status == 1);
  CHECK(contains(r.err, "error:"));
}

TEST_CASE("sweep subcommand feeds the plot renderer") {
  const fs::path dir = fresh_dir("sweep");
  const std::string args =
      "--workers 2 --seed 2 --out-dir w sweep --counts 2,5 --seeds 2 "
      "--duration 0.02 --arena 150 --quiet --csv sw.csv";

  const CmdResult r = run_tool(dir, args);
  INFO(r.err);
  CHECK(r.status == 0);
  CHECK(r.err.empty());
  CHECK(contains(r.out, "density"));
  CHECK(contains(r.out, "mechanism"));
  CHECK(contains(r.out, "densest point: ipcs="));

  const std::string csv = slurp(dir / "w" / "sw.csv");
  CHECK(split_lines(csv)[0] == "# ipcs-sim sweep v1");
  const auto rows = payload_lines(csv);
  REQUIRE(rows.size() == 5);  // header + 2 counts x 2 mechanisms
  CHECK(rows[0] ==
        "density,mechanism,spatial_reuse,throughput_per_unit_area,collisions");
  CHECK(contains(csv, ",ipcs,"));
  CHECK(contains(csv, ",conventional,"));

  // Re-running the identical sweep reproduces the artifact byte for byte
  // (modulo the timestamp), including across the worker pool.
  const CmdResult r2 = run_tool(
      dir, "--workers 2 --seed 2 --out-dir w2 sweep --counts 2,5 --seeds 2 "
           "--duration 0.02 --arena 150 --quiet --csv sw.csv");
  CHECK(r2.status == 0);
  CHECK(strip_generated(slurp(dir / "w2" / "sw.csv")) == strip_generated(csv));

  // Plot the sweep: SVG artifacts carry no timestamp and must be
  // byte-identical run to run.
  CmdResult p = run_tool(dir, "plot w/sw.csv --out w/sw.svg");
  INFO(p.err);
  CHECK(p.status == 0);
  const std::string svg = slurp(dir / "w" / "sw.svg");
  CHECK(svg.rfind("<svg xmlns", 0) == 0);
  CHECK(contains(svg, "<polyline"));
  CHECK(contains(svg, "spatial reuse (ipcs)"));
  CHECK(contains(svg, "throughput (conventional)"));

  p = run_tool(dir, "plot w/sw.csv --out w/sw2.svg");
  CHECK(p.status == 0);
  CHECK(slurp(dir / "w" / "sw2.svg") == svg);

  // Default output name replaces the input extension.
  p = run_tool(dir, "plot w2/sw.csv");
  CHECK(p.status == 0);
  CHECK(contains(p.out, "sw.svg"));
  CHECK(fs::exists(dir / "w2" / "sw.svg"));

  // The ratio-curve table renders through the same path.
  p = run_tool(dir, "--out-dir w csr --gamma0 1,10,100 --alpha 3,4 "
                    "--csv rat.csv");
  CHECK(p.status == 0);
  p = run_tool(dir, "plot w/rat.csv");
  CHECK(p.status == 0);
  CHECK(contains(slurp(dir / "w" / "rat.svg"), "alpha=4 limit"));
}

TEST_CASE("plot subcommand rejects unusable inputs") {
  const fs::path dir = fresh_dir("plot_invalid");

  std::ofstream(dir / "empty.csv")
      << "# ipcs-sim sweep v1\n"
      << "density,mechanism,spatial_reuse,throughput_per_unit_area,"
         "collisions\n";
  CmdResult r = run_tool(dir, "plot empty.csv");
  CHECK(r.status == 1);
  CHECK(contains(r.err, "no data rows to plot"));

  std::ofstream(dir / "plain.csv") << "hello\n1,2,3\n";
  r = run_tool(dir, "plot plain.csv");
  CHECK(r.status == 1);
  CHECK(contains(r.err, "not an ipcs-sim CSV artifact"));

  std::ofstream(dir / "metrics.csv") << "# ipcs-sim metrics v1\na,b\n1,2\n";
  r = run_tool(dir, "plot metrics.csv");
  CHECK(r.status == 1);
  CHECK(contains(r.err, "no chart defined"));

  r = run_tool(dir, "plot missing.csv");
  CHECK(r.status == 1);
  CHECK(contains(r.err, "cannot read"));
}

TEST_CASE("trace subcommand dumps the sensed-power staircase") {
  const fs::path dir = fresh_dir("trace");

  // Defaults: first scripted variant of fig1-three-link, observing the last
  // scheduled transmitter (the far link, id 2).
  CmdResult r = run_tool(dir, "--out-dir t trace");
  INFO(r.err);
  CHECK(r.status == 0);
  CHECK(contains(r.out, "power sensed by link 2's transmitter"));
  const std::string trace =
      slurp(dir / "t" / "trace_fig1-three-link_conventional.csv");
  CHECK(split_lines(trace)[0] == "# ipcs-sim power-trace v1");
  // Three exchanges rise and fall past the observer: six power edges.
  CHECK(payload_lines(trace).size() == 1 + 6);

  r = run_tool(dir, "--out-dir t trace fig1-three-link --variant ipcs "
                    "--link 1");
  CHECK(r.status == 0);
  CHECK(contains(r.out, "variant ipcs"));
  CHECK(fs::exists(dir / "t" / "trace_fig1-three-link_ipcs.csv"));

  r = run_tool(dir, "trace fig1-three-link --variant zzz");
  CHECK(r.status == 1);
  CHECK(contains(r.err, "unknown variant"));

  r = run_tool(dir, "trace nope");
  CHECK(r.status == 1);
  CHECK(contains(r.err, "unknown scenario"));
}

TEST_CASE("out-dir comes from the flag, the environment, or the default") {
  const fs::path dir = fresh_dir("outdir");

  CmdResult r = run_tool(dir, "csr --gamma0 10 --alpha 4",
                         "env IPCS_SIM_OUT_DIR=envdir ");
  CHECK(r.status == 0);
  CHECK(fs::exists(dir / "envdir" / "csr_table.csv"));

  // An explicit --out-dir wins over the environment variable.
  r = run_tool(dir, "--out-dir flagdir csr --gamma0 10 --alpha 4",
               "env IPCS_SIM_OUT_DIR=envdir2 ");
  CHECK(r.status == 0);
  CHECK(fs::exists(dir / "flagdir" / "csr_table.csv"));
  CHECK(!fs::exists(dir / "envdir2"));
}

TEST_CASE("config file supplies defaults that flags override") {
  const fs::path dir = fresh_dir("config");
  std::ofstream(dir / "cfg.ini") << "seed=7\nout-dir=cfgdir\n";

  CmdResult r = run_tool(dir, "--config cfg.ini sim --links 5 --arena 150 "
                              "--duration 0.02 --prefix c1");
  INFO(r.err);
  CHECK(r.status == 0);
  const std::string m1 = slurp(dir / "cfgdir" / "c1.metrics.csv");
  CHECK(contains(comment_line(m1, "# config"), "seed=7"));

  r = run_tool(dir, "--config cfg.ini --seed 9 --out-dir ovdir sim --links 5 "
                    "--arena 150 --duration 0.02 --prefix c2");
  CHECK(r.status == 0);
  const std::string m2 = slurp(dir / "ovdir" / "c2.metrics.csv");
  CHECK(contains(comment_line(m2, "# config"), "seed=9"));
}
