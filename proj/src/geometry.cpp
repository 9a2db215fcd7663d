#include "ipcs/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ipcs {

namespace {

// Stable 64-bit mix used to decouple RNG streams from raw seed values.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string("geometry: non-finite ") + what);
  }
}

}  // namespace

double distance(const Point2D& a, const Point2D& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

LinkGeometry LinkGeometry::make(int id, Point2D tx, Point2D rx) {
  require_finite(tx.x, "coordinate");
  require_finite(tx.y, "coordinate");
  require_finite(rx.x, "coordinate");
  require_finite(rx.y, "coordinate");
  const double len = distance(tx, rx);
  if (!(len > 0.0)) {
    throw std::invalid_argument("geometry: link " + std::to_string(id) +
                                " has coincident endpoints");
  }
  return LinkGeometry{id, tx, rx, len};
}

Topology Topology::from_links(std::vector<LinkGeometry> links,
                              double arena_width, double arena_height) {
  Topology topo;
  topo.links = std::move(links);
  topo.arena_width = arena_width;
  topo.arena_height = arena_height;
  for (const auto& link : topo.links) {
    topo.d_max = std::max(topo.d_max, link.length);
  }
  return topo;
}

void TopologyConfig::validate() const {
  if (!(arena_side > 0.0)) {
    throw std::invalid_argument("topology: arena must have positive area");
  }
  if (!(length_min > 0.0) || !(length_max >= length_min)) {
    throw std::invalid_argument(
        "topology: need 0 < length_min <= length_max");
  }
  if (!(link_count >= 0.0) || !std::isfinite(link_count)) {
    throw std::invalid_argument("topology: link count must be non-negative");
  }
}

Topology generate_topology(const TopologyConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(splitmix64(cfg.seed));

  std::size_t n = 0;
  if (cfg.count_model == CountModel::kFixed) {
    n = static_cast<std::size_t>(std::llround(cfg.link_count));
  } else {
    std::poisson_distribution<long> count(cfg.link_count);
    n = static_cast<std::size_t>(count(rng));
  }

  std::uniform_real_distribution<double> coord(0.0, cfg.arena_side);
  std::uniform_real_distribution<double> radius(cfg.length_min,
                                                cfg.length_max);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

  std::vector<LinkGeometry> links;
  links.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2D tx{coord(rng), coord(rng)};
    const double r = radius(rng);
    const double th = angle(rng);
    const Point2D rx{tx.x + r * std::cos(th), tx.y + r * std::sin(th)};
    links.push_back(LinkGeometry::make(static_cast<int>(i), tx, rx));
  }
  return Topology::from_links(std::move(links), cfg.arena_side,
                              cfg.arena_side);
}

std::string topology_to_table(const Topology& topo) {
  std::string out = "# ipcs-sim topology v1\n";
  char buf[192];
  std::snprintf(buf, sizeof buf, "# arena %.6f %.6f\n", topo.arena_width,
                topo.arena_height);
  out += buf;
  for (const auto& link : topo.links) {
    std::snprintf(buf, sizeof buf, "%d %.6f %.6f %.6f %.6f\n", link.id,
                  link.tx.x, link.tx.y, link.rx.x, link.rx.y);
    out += buf;
  }
  return out;
}

Topology topology_from_table(std::string_view text) {
  std::vector<LinkGeometry> links;
  double arena_w = 0.0, arena_h = 0.0;
  bool saw_arena = false;

  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string line(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      double w = 0.0, h = 0.0;
      if (std::sscanf(line.c_str(), "# arena %lf %lf", &w, &h) == 2) {
        arena_w = w;
        arena_h = h;
        saw_arena = true;
      }
      continue;
    }
    int id = 0;
    double tx_x = 0.0, tx_y = 0.0, rx_x = 0.0, rx_y = 0.0;
    if (std::sscanf(line.c_str(), "%d %lf %lf %lf %lf", &id, &tx_x, &tx_y,
                    &rx_x, &rx_y) != 5) {
      throw std::runtime_error("topology table: malformed line " +
                               std::to_string(line_no) + ": '" + line + "'");
    }
    links.push_back(LinkGeometry::make(id, {tx_x, tx_y}, {rx_x, rx_y}));
  }
  if (!saw_arena) {
    throw std::runtime_error("topology table: missing '# arena w h' header");
  }
  return Topology::from_links(std::move(links), arena_w, arena_h);
}

}  // namespace ipcs
