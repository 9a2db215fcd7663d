#pragma once

// Planar geometry for wireless link layouts: points, transmitter->receiver
// links, bounded arenas, seeded random topology generation, and a plain-text
// serialization that round-trips losslessly at fixed precision.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ipcs {

struct Point2D {
  double x = 0.0;  // meters
  double y = 0.0;  // meters
};

// Euclidean distance. Exact for axis-aligned pairs (hypot with a zero leg).
double distance(const Point2D& a, const Point2D& b);

// One directed transmitter->receiver pair. `length` caches distance(tx, rx).
struct LinkGeometry {
  int id = 0;
  Point2D tx;
  Point2D rx;
  double length = 0.0;  // meters

  // Validates finite coordinates and tx != rx, and computes length.
  static LinkGeometry make(int id, Point2D tx, Point2D rx);
};

// An ordered set of links inside a rectangular arena. Receivers may lie
// outside the arena; transmitters are expected inside it.
struct Topology {
  std::vector<LinkGeometry> links;
  double arena_width = 0.0;   // meters
  double arena_height = 0.0;  // meters
  double d_max = 0.0;         // max link length over `links`, meters

  static Topology from_links(std::vector<LinkGeometry> links,
                             double arena_width, double arena_height);
};

enum class CountModel {
  kFixed,    // exactly lround(link_count) links
  kPoisson,  // link count drawn once from Poisson(link_count)
};

struct TopologyConfig {
  double arena_side = 300.0;  // square arena edge, meters
  CountModel count_model = CountModel::kFixed;
  double link_count = 100.0;  // fixed count, or Poisson mean
  double length_min = 10.0;   // meters
  double length_max = 20.0;   // meters
  std::uint64_t seed = 1;

  void validate() const;  // throws std::invalid_argument
};

// Transmitters uniform in the arena square; each receiver at an angle uniform
// in [0, 2*pi) and a radius uniform in [length_min, length_max] from its
// transmitter. Identical configs (including seed) give identical topologies.
Topology generate_topology(const TopologyConfig& cfg);

// Plain-text table: '#' header lines carrying format version and arena size,
// then one link per line, "id tx_x tx_y rx_x rx_y", 6 decimal places.
std::string topology_to_table(const Topology& topo);
Topology topology_from_table(std::string_view text);  // throws std::runtime_error

}  // namespace ipcs
