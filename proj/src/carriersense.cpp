#include "ipcs/carriersense.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ipcs {

void PowerTrace::append(const PowerEvent& event) {
  if (event.delta_mw == 0.0 || !std::isfinite(event.delta_mw)) {
    throw std::invalid_argument("power trace: steps must be finite and non-zero");
  }
  if (!(event.time_s > last_time_)) {
    throw std::invalid_argument(
        "power trace: steps must be strictly increasing in time");
  }
  events_.push_back(event);
  last_time_ = event.time_s;
  // Neumaier-compensated add: keeps the running total exact to one ulp of its
  // peak even across millions of +/- step pairs, so near-threshold decisions
  // never ride on accumulated drift.
  const double t = sum_ + event.delta_mw;
  if (std::abs(sum_) >= std::abs(event.delta_mw)) {
    comp_ += (sum_ - t) + event.delta_mw;
  } else {
    comp_ += (event.delta_mw - t) + sum_;
  }
  sum_ = t;
}

double PowerTrace::total_mw() const { return std::max(0.0, sum_ + comp_); }

double PowerTrace::total_mw_at(double t) const {
  if (t >= last_time_) return total_mw();
  double sum = 0.0, comp = 0.0;
  for (const auto& e : events_) {
    if (e.time_s > t) break;
    const double s = sum + e.delta_mw;
    if (std::abs(sum) >= std::abs(e.delta_mw)) {
      comp += (sum - s) + e.delta_mw;
    } else {
      comp += (e.delta_mw - s) + sum;
    }
    sum = s;
  }
  return std::max(0.0, sum + comp);
}

void PowerTrace::prune_before(double t) {
  while (!events_.empty() && events_.front().time_s < t) {
    events_.pop_front();
  }
}

CsConfig CsConfig::from_csr(CsMechanism mechanism, const RadioParams& radio,
                            double csr_m, double t_packet_s) {
  CsConfig cfg;
  cfg.mechanism = mechanism;
  cfg.csr_m = csr_m;
  cfg.pth_mw = pth_from_csr(radio, csr_m);
  cfg.t_packet_s = t_packet_s;
  cfg.validate(radio);
  return cfg;
}

CsConfig CsConfig::from_pth(CsMechanism mechanism, const RadioParams& radio,
                            double pth_mw, double t_packet_s) {
  CsConfig cfg;
  cfg.mechanism = mechanism;
  cfg.pth_mw = pth_mw;
  cfg.csr_m = csr_from_pth(radio, pth_mw);
  cfg.t_packet_s = t_packet_s;
  cfg.validate(radio);
  return cfg;
}

void CsConfig::validate(const RadioParams& radio) const {
  if (!(pth_mw > 0.0) || !(csr_m > 0.0)) {
    throw std::invalid_argument("carrier sense: threshold and range must be positive");
  }
  const double expected = pth_from_csr(radio, csr_m);
  if (std::abs(pth_mw - expected) > 1e-9 * expected) {
    throw std::invalid_argument(
        "carrier sense: pth and csr are inconsistent for this radio");
  }
  if (!(t_packet_s > 0.0)) {
    throw std::invalid_argument("carrier sense: observation window must be positive");
  }
}

bool conventional_idle(const PowerTrace& trace, double t, const CsConfig& cfg) {
  return trace.total_mw_at(t) <= cfg.pth_mw;
}

bool ipcs_idle(const PowerTrace& trace, double t, const CsConfig& cfg) {
  const double window_start = t - cfg.t_packet_s;
  for (auto it = trace.events().rbegin(); it != trace.events().rend(); ++it) {
    if (it->time_s > t) continue;       // steps after the query instant
    if (it->time_s < window_start) break;  // window is closed at both ends
    if (it->delta_mw > cfg.pth_mw) return false;
  }
  return true;
}

double sense_power(const Point2D& observer, std::span<const ActiveFrame> frames,
                   const Topology& topo, const RadioParams& radio) {
  radio.validate();
  double total = 0.0;
  for (const auto& frame : frames) {
    const Point2D sender = sender_position(frame, topo);
    total += radio.tx_power_mw *
             path_gain(distance(sender, observer), radio.alpha);
  }
  return total;
}

std::string trace_to_csv(const PowerTrace& trace) {
  std::string out = "# ipcs-sim power-trace v1\n";
  out += "t_k,delta_mW,source_link,direction,total_after\n";
  char buf[160];
  double sum = 0.0, comp = 0.0;
  for (const auto& e : trace.events()) {
    const double t = sum + e.delta_mw;
    if (std::abs(sum) >= std::abs(e.delta_mw)) {
      comp += (sum - t) + e.delta_mw;
    } else {
      comp += (e.delta_mw - t) + sum;
    }
    sum = t;
    std::snprintf(buf, sizeof buf, "%.9e,%.9e,%d,%s,%.9e\n", e.time_s,
                  e.delta_mw, e.source_link,
                  e.dir == FrameDir::kData ? "data" : "ack",
                  std::max(0.0, sum + comp));
    out += buf;
  }
  return out;
}

}  // namespace ipcs
