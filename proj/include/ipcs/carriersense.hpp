#pragma once

// Carrier-sensing decision procedures over observed power histories.
//
// A PowerTrace is the sequence of signed received-power steps one observer
// sees as frames start (+delta) and end (-delta). Two mechanisms decide
// busy/idle from it:
//
//   conventional  busy iff the current total sensed power exceeds the
//                 threshold. Blind to how the total built up, so N weak
//                 arrivals can jointly block (exposed node) while a strong
//                 arrival hidden inside an expired total can slip through.
//
//   increment (IPCS)  idle iff every positive step within the last packet
//                 time is at or below the threshold. Each step isolates one
//                 arrival's power, i.e. one sender's distance, so admission
//                 is equivalent to every concurrent sender being outside the
//                 configured range.

#include <deque>
#include <span>
#include <string>

#include "ipcs/geometry.hpp"
#include "ipcs/rfmodel.hpp"

namespace ipcs {

struct PowerEvent {
  double time_s = 0.0;
  double delta_mw = 0.0;  // signed step, never zero
  int source_link = -1;
  FrameDir dir = FrameDir::kData;
};

// Strictly time-ordered power steps plus a compensated running total.
// Old events may be pruned without disturbing the total.
class PowerTrace {
 public:
  explicit PowerTrace(int observer_link = -1) : observer_(observer_link) {}

  // Throws std::invalid_argument on zero deltas or non-increasing times
  // (simultaneous steps would merge two senders into one observation).
  void append(const PowerEvent& event);

  // Running sum of all appended deltas (Neumaier-compensated), clamped at 0.
  double total_mw() const;

  // Sum of retained deltas with time <= t. Equals total_mw() for t past the
  // last event; earlier queries require the events not to have been pruned.
  double total_mw_at(double t) const;

  const std::deque<PowerEvent>& events() const { return events_; }
  void prune_before(double t);  // drop events strictly older than t
  int observer() const { return observer_; }
  double last_time() const { return last_time_; }

 private:
  int observer_;
  std::deque<PowerEvent> events_;
  double sum_ = 0.0;
  double comp_ = 0.0;  // Neumaier compensation term
  double last_time_ = -1e300;
};

enum class CsMechanism { kConventional, kIpcs };

struct CsConfig {
  CsMechanism mechanism = CsMechanism::kIpcs;
  double pth_mw = 0.0;      // sensing threshold
  double csr_m = 0.0;       // equivalent range: pth == Pt * csr^-alpha
  double t_packet_s = 0.0;  // increment-observation window length

  static CsConfig from_csr(CsMechanism mechanism, const RadioParams& radio,
                           double csr_m, double t_packet_s);
  static CsConfig from_pth(CsMechanism mechanism, const RadioParams& radio,
                           double pth_mw, double t_packet_s);

  // Throws std::invalid_argument if pth and csr disagree for this radio
  // (relative 1e-9) or the window is not positive.
  void validate(const RadioParams& radio) const;
};

// Total sensed power at time t compared against the threshold; equality is
// idle (the channel is busy only strictly above pth).
bool conventional_idle(const PowerTrace& trace, double t, const CsConfig& cfg);

// Idle iff no positive step above pth lies in the closed window
// [t - t_packet, t]. Negative steps never contribute.
bool ipcs_idle(const PowerTrace& trace, double t, const CsConfig& cfg);

// Aggregate received power at `observer` from every frame's emitting node.
// Throws std::domain_error if the observer is co-located with a sender.
double sense_power(const Point2D& observer, std::span<const ActiveFrame> frames,
                   const Topology& topo, const RadioParams& radio);

// CSV dump: version header, then "t_k,delta_mW,source_link,direction,total_after".
std::string trace_to_csv(const PowerTrace& trace);

}  // namespace ipcs
