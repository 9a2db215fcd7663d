#include "ipcs/rfmodel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace ipcs {

namespace {

// (2/sqrt(3))^alpha appears in both the K factor and the ratio limit: it is
// the crowding penalty of the densest (hexagonal) packing of interferers.
double hex_crowding(double alpha) { return std::pow(2.0 / std::sqrt(3.0), alpha); }

void require_alpha(double alpha) {
  if (!(alpha > 2.0)) {
    throw std::domain_error(
        "radio: path-loss exponent must exceed 2 (interference sums diverge "
        "otherwise)");
  }
}

const LinkGeometry& link_by_id(const Topology& topo, int id) {
  for (const auto& link : topo.links) {
    if (link.id == id) return link;
  }
  throw std::invalid_argument("rfmodel: unknown link id " + std::to_string(id));
}

}  // namespace

void RadioParams::validate() const {
  if (!(tx_power_mw > 0.0)) {
    throw std::invalid_argument("radio: transmit power must be positive");
  }
  require_alpha(alpha);
  if (!(gamma0 > 0.0)) {
    throw std::invalid_argument("radio: SIR threshold must be positive");
  }
  if (noise_mw < 0.0) {
    throw std::invalid_argument("radio: noise must be non-negative");
  }
}

double path_gain(double d, double alpha) {
  if (!(d > 0.0)) {
    throw std::domain_error("path_gain: distance must be positive");
  }
  return std::pow(d, -alpha);
}

Point2D sender_position(const ActiveFrame& frame, const Topology& topo) {
  const LinkGeometry& link = link_by_id(topo, frame.link);
  return frame.dir == FrameDir::kData ? link.tx : link.rx;
}

FeasibilityReport check_feasible(std::span<const ActiveFrame> frames,
                                 const Topology& topo,
                                 const RadioParams& radio, SirCheck which) {
  radio.validate();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();

  struct Member {
    const LinkGeometry* link;
    Point2D sender;
  };
  std::vector<Member> members;
  members.reserve(frames.size());
  std::unordered_map<int, bool> seen;
  for (const auto& frame : frames) {
    const LinkGeometry& link = link_by_id(topo, frame.link);
    if (seen.count(frame.link)) {
      throw std::invalid_argument("check_feasible: two frames on link " +
                                  std::to_string(frame.link));
    }
    seen[frame.link] = true;
    members.push_back({&link, sender_position(frame, topo)});
  }

  FeasibilityReport report;
  report.links.reserve(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    const LinkGeometry& link = *members[i].link;
    const double signal = radio.tx_power_mw * path_gain(link.length, radio.alpha);

    auto sir_at = [&](const Point2D& receiver) {
      double denom = radio.noise_mw;
      for (std::size_t j = 0; j < members.size(); ++j) {
        if (j == i) continue;
        denom += radio.tx_power_mw *
                 path_gain(distance(members[j].sender, receiver), radio.alpha);
      }
      return denom == 0.0 ? inf : signal / denom;
    };

    LinkSir entry;
    entry.link = link.id;
    entry.data_sir = nan;
    entry.ack_sir = nan;
    if (which != SirCheck::kAck) {
      entry.data_sir = sir_at(link.rx);
      entry.feasible = entry.feasible && entry.data_sir >= radio.gamma0;
    }
    if (which != SirCheck::kData) {
      entry.ack_sir = sir_at(link.tx);
      entry.feasible = entry.feasible && entry.ack_sir >= radio.gamma0;
    }
    report.feasible = report.feasible && entry.feasible;
    report.links.push_back(entry);
  }
  return report;
}

double safe_csr_pairwise(const RadioParams& radio, double d_max) {
  radio.validate();
  if (!(d_max > 0.0)) {
    throw std::invalid_argument("safe_csr: d_max must be positive");
  }
  return (std::pow(radio.gamma0, 1.0 / radio.alpha) + 2.0) * d_max;
}

double safe_k_factor(const RadioParams& radio) {
  radio.validate();
  const double inner =
      6.0 * radio.gamma0 *
      (1.0 + hex_crowding(radio.alpha) / (radio.alpha - 2.0));
  return std::pow(inner, 1.0 / radio.alpha);
}

double safe_csr_cumulative(const RadioParams& radio, double d_max) {
  if (!(d_max > 0.0)) {
    throw std::invalid_argument("safe_csr: d_max must be positive");
  }
  return (safe_k_factor(radio) + 2.0) * d_max;
}

double csr_ratio(const RadioParams& radio) {
  return safe_csr_cumulative(radio, 1.0) / safe_csr_pairwise(radio, 1.0);
}

double csr_ratio_limit(double alpha) {
  require_alpha(alpha);
  return std::pow(6.0 * (1.0 + hex_crowding(alpha) / (alpha - 2.0)),
                  1.0 / alpha);
}

double pth_from_csr(const RadioParams& radio, double csr) {
  radio.validate();
  if (!(csr > 0.0)) {
    throw std::invalid_argument("pth_from_csr: range must be positive");
  }
  return radio.tx_power_mw * path_gain(csr, radio.alpha);
}

double csr_from_pth(const RadioParams& radio, double pth) {
  radio.validate();
  if (!(pth > 0.0)) {
    throw std::invalid_argument("csr_from_pth: threshold must be positive");
  }
  return std::pow(radio.tx_power_mw / pth, 1.0 / radio.alpha);
}

double hex_interference_truncated(double k_factor, double alpha,
                                  const RadioParams& radio, double d_max,
                                  int layers) {
  radio.validate();
  require_alpha(alpha);
  if (!(k_factor > 0.0) || !(d_max > 0.0)) {
    throw std::invalid_argument("hex bound: k_factor and d_max must be positive");
  }
  if (layers < 1) {
    throw std::invalid_argument("hex bound: need at least one layer");
  }
  // Layer 1: 6 senders at k*d_max. Layer n >= 2: 6n senders at (sqrt(3)/2)*n*k*d_max.
  double sum = 6.0 * path_gain(k_factor * d_max, alpha);
  const double half_sqrt3 = std::sqrt(3.0) / 2.0;
  for (int n = 2; n <= layers; ++n) {
    sum += 6.0 * n * path_gain(half_sqrt3 * n * k_factor * d_max, alpha);
  }
  return radio.tx_power_mw * sum;
}

double hex_interference_closed_form(double k_factor, double alpha,
                                    const RadioParams& radio, double d_max) {
  radio.validate();
  require_alpha(alpha);
  if (!(k_factor > 0.0) || !(d_max > 0.0)) {
    throw std::invalid_argument("hex bound: k_factor and d_max must be positive");
  }
  return radio.tx_power_mw * 6.0 * std::pow(k_factor, -alpha) *
         (1.0 + hex_crowding(alpha) / (alpha - 2.0)) *
         std::pow(d_max, -alpha);
}

double unit_area(const RadioParams& radio, double d_max) {
  const double csr = safe_csr_cumulative(radio, d_max);
  return std::sqrt(3.0) / 2.0 * csr * csr;
}

}  // namespace ipcs
