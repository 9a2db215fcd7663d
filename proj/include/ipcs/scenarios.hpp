#pragma once

// Canonical hand-placed topologies that exercise the boundary cases of
// carrier sensing under cumulative interference:
//
//   fig1-three-link    three unit-length links where the pairwise-safe
//                      sensing range admits a third transmitter whose
//                      aggregate interference corrupts an ongoing DATA frame
//                      (the hidden-node counterexample).
//   fig3-conventional  two links spaced exactly one safe range apart plus a
//                      third transmitter on their midline at 2^(1/alpha)
//                      times the range: the closest spot absolute-power
//                      sensing can admit, and an arrival order that blocks a
//                      harmless transmitter (the exposed-node order effect).
//   fig3-ipcs          the same two links with the third transmitter pulled
//                      in to exactly one safe range (equilateral placement):
//                      admissible when sensing per-arrival power increments.
//   appendixA-capture  two far-apart links where the second receiver hears
//                      the first transmitter: without restart-mode reception
//                      the receiver stays locked on the earlier frame and
//                      misses its own, even though the SIR would allow it.

#include <string>
#include <string_view>
#include <vector>

#include "ipcs/geometry.hpp"
#include "ipcs/rfmodel.hpp"

namespace ipcs {

struct Scenario {
  std::string name;
  std::string summary;
  Topology topology;
  RadioParams radio;   // parameters the scenario's worked numbers assume
  double d_max = 1.0;  // link length the layout is scaled by
};

std::vector<std::string> scenario_names();

// Builds a named scenario scaled by d_max, with its canonical radio
// parameters. Throws std::invalid_argument for unknown names.
Scenario build_scenario(std::string_view name, double d_max = 1.0);

// Same, with explicit radio parameters (the range-derived layouts resize
// with gamma0 and alpha).
Scenario build_scenario(std::string_view name, double d_max,
                        const RadioParams& radio);

}  // namespace ipcs
