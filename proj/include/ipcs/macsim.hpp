#pragma once

// Discrete-event CSMA/CA engine: saturated (or scripted) DATA/ACK exchanges
// with per-transmitter carrier sensing, SIR-based reception re-evaluated at
// every power change, restart-mode receiver locking, and a hidden-node
// collision audit over the produced event log.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ipcs/carriersense.hpp"
#include "ipcs/geometry.hpp"
#include "ipcs/rfmodel.hpp"

namespace ipcs {

struct MacTiming {
  double slot_s = 20e-6;
  double sifs_s = 10e-6;
  double difs_s = 50e-6;
  int cw_min = 31;    // initial contention window (slots)
  int cw_max = 1023;  // cap after exponential growth
  double data_rate_bps = 11e6;
  int payload_bytes = 1460;
  double phy_overhead_s = 0.0;  // preamble + header airtime folded into DATA
  double ack_duration_s = 112.0 / 11e6;

  double t_data() const {
    return phy_overhead_s + payload_bytes * 8.0 / data_rate_bps;
  }
  // Full exchange airtime: DATA, the SIFS turnaround, then the ACK. Also the
  // increment-sensing observation window.
  double t_packet() const { return t_data() + sifs_s + ack_duration_s; }

  void validate() const;
};

enum class BackoffModel {
  kContinuous,  // exponential residual, mean (cw_min/2)*slot; no doubling
  kSlotted,     // uniform {0..cw}*slot, cw doubling on failure up to cw_max
};

struct ForcedStart {
  double time_s = 0.0;
  int link = 0;
};

struct SimConfig {
  // Either an explicit topology or a generator config (topology wins if both).
  std::optional<Topology> topology;
  std::optional<TopologyConfig> topology_config;

  RadioParams radio;
  CsConfig cs;
  MacTiming timing;
  BackoffModel backoff = BackoffModel::kContinuous;
  bool rs_mode = true;  // receivers re-lock onto later, decodable frames
  double duration_s = 1.0;
  std::uint64_t seed = 1;

  // Link length the safe range and unit area are sized by; 0 means use the
  // topology's realized maximum.
  double d_max_ref = 0.0;

  // Non-empty switches the engine from saturated traffic to a script: each
  // entry is one transmission attempt, dropped (and logged) if the link's
  // own carrier sensing says busy.
  std::vector<ForcedStart> forced_schedule;

  // Link whose full (unpruned) power trace the run should retain, or -1.
  int trace_observer = -1;

  void validate() const;
  Topology resolve_topology() const;
};

enum class SimEventType {
  kDataStart,
  kDataEnd,
  kAckStart,
  kAckEnd,
  kDelivered,  // exchange outcome: DATA and ACK both received
  kDataFail,   // outcome: DATA not received (detail: "capture" or "sir")
  kAckFail,    // outcome: DATA ok, ACK not received
  kDefer,      // scripted attempt dropped because the channel was busy
};

const char* to_string(SimEventType type);

struct SimEvent {
  double time_s = 0.0;
  SimEventType type = SimEventType::kDataStart;
  int link = 0;
  std::string detail;
};

using EventLog = std::vector<SimEvent>;

struct SimMetrics {
  double duration_s = 0.0;
  double unit_area_m2 = 0.0;
  double offered_link_density = 0.0;  // links per unit area
  double spatial_reuse = 0.0;         // time-averaged on-air links per unit area
  double throughput_per_unit_area_bps = 0.0;
  long delivered_packets = 0;
  long data_failures = 0;
  long ack_failures = 0;
  long deferred_attempts = 0;
  long hidden_node_collisions = 0;
};

struct SimResult {
  SimMetrics metrics;
  EventLog log;
  Topology topology;         // the resolved topology the run used
  PowerTrace observer_trace; // full history when cfg.trace_observer >= 0
};

SimResult run_simulation(const SimConfig& cfg);

// Counts maximal spans during which the set of on-air frames violates some
// member's own-direction SIR constraint (each span is one hidden-node
// collision event, however many frames it corrupts).
long collision_audit(const EventLog& log, const Topology& topo,
                     const RadioParams& radio);

// Derives metrics from an event log; exposed separately so audits and tests
// can recompute them from serialized runs.
SimMetrics compute_metrics(const EventLog& log, const SimConfig& cfg,
                           const Topology& topo);

// CSV: version header, then "time,event_type,link,detail".
std::string log_to_csv(const EventLog& log);

}  // namespace ipcs
