#pragma once

// Command-line front end. Subcommands:
//
//   csr       safe sensing-range table over gamma0 and alpha
//   scenario  run a named hand-built layout and check its expected numbers
//   sim       one engine run over a generated or loaded topology
//   sweep     density sweep comparing sensing mechanisms
//   plot      render a produced CSV (sweep or csr table) as an SVG chart
//   trace     dump one transmitter's sensed power history for a scenario
//
// Returns a process exit status: 0 on success (and all scenario checks
// passing), non-zero on errors or failed checks.

namespace ipcs {

int run_cli(int argc, const char* const* argv);

}  // namespace ipcs
