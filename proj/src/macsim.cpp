#include "ipcs/macsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace ipcs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Event kinds, with same-instant ordering: frames leave the air before new
// ones join, bookkeeping follows power changes, and transmission decisions
// run last so they always see the instant's final power state.
enum class EvKind {
  kDataEnd,
  kAckEnd,
  kExchangeEnd,
  kAckStart,
  kCsWakeup,
  kAttempt,
  kForced,
};

int kind_priority(EvKind kind) {
  switch (kind) {
    case EvKind::kDataEnd:
    case EvKind::kAckEnd:
      return 0;
    case EvKind::kExchangeEnd:
      return 1;
    case EvKind::kAckStart:
      return 2;
    case EvKind::kCsWakeup:
      return 3;
    case EvKind::kAttempt:
    case EvKind::kForced:
      return 4;
  }
  return 5;
}

struct Ev {
  double t;
  int prio;
  std::uint64_t seq;
  EvKind kind;
  int link;  // internal index
  std::uint64_t gen;
};

struct EvAfter {
  bool operator()(const Ev& a, const Ev& b) const {
    if (a.t != b.t) return a.t > b.t;
    if (a.prio != b.prio) return a.prio > b.prio;
    return a.seq > b.seq;
  }
};

struct Frame {
  int id;
  int link;  // internal index
  FrameDir dir;
  int sender;  // node index
  int dest;    // node index
  double start;
  double end;
  bool dest_locked = false;  // destination held the lock from frame start
  bool corrupted = false;    // SIR dipped below gamma0 at the destination
  bool on_air = false;
};

struct NodeState {
  int locked_frame = -1;
  double lock_sir = 0.0;
  bool transmitting = false;
};

struct LinkCtl {
  // Contention (saturated mode).
  bool contending = false;
  double remaining = 0.0;     // backoff time left
  double count_start = -1.0;  // countdown anchor (after DIFS); < 0: not counting
  bool channel_busy = false;
  std::uint64_t attempt_gen = 0;
  int cw = 31;
  std::mt19937_64 rng;

  // Exchange in progress.
  bool in_exchange = false;
  int data_frame = -1;
  int ack_frame = -1;
  bool data_ok = false;
  bool ack_ok = false;
  double exchange_end = -1.0;  // scheduled end-of-exchange timestamp

  // Sensing state of this link's transmitter.
  PowerTrace trace;
  double busy_until = -1e300;  // increment sensing: latest blocking expiry
};

class Engine {
 public:
  explicit Engine(const SimConfig& cfg)
      : cfg_(cfg), topo_(cfg.resolve_topology()) {
    cfg_.topology = topo_;  // freeze the resolved topology
    n_ = static_cast<int>(topo_.links.size());
    if (n_ == 0) throw std::invalid_argument("sim: topology has no links");

    t_data_ = cfg_.timing.t_data();
    t_ack_ = cfg_.timing.ack_duration_s;
    t_packet_ = cfg_.timing.t_packet();
    sifs_ = cfg_.timing.sifs_s;
    difs_ = cfg_.timing.difs_s;
    pth_ = cfg_.cs.pth_mw;
    gamma0_ = cfg_.radio.gamma0;
    noise_ = cfg_.radio.noise_mw;
    ipcs_ = cfg_.cs.mechanism == CsMechanism::kIpcs;
    scripted_ = !cfg_.forced_schedule.empty();

    for (int i = 0; i < n_; ++i) {
      if (!index_by_id_.emplace(topo_.links[i].id, i).second) {
        throw std::invalid_argument("sim: duplicate link id " +
                                    std::to_string(topo_.links[i].id));
      }
    }
    trace_idx_ = -1;
    if (cfg_.trace_observer >= 0) {
      trace_idx_ = index_of(cfg_.trace_observer);
    }

    // Pt * d^-alpha between every ordered node pair; zero on the diagonal.
    const int nodes = 2 * n_;
    pg_.assign(static_cast<std::size_t>(nodes) * nodes, 0.0);
    for (int s = 0; s < nodes; ++s) {
      for (int o = 0; o < nodes; ++o) {
        if (s == o) continue;
        const double d = distance(node_pos(s), node_pos(o));
        if (!(d > 0.0)) {
          throw std::invalid_argument("sim: co-located nodes in topology");
        }
        pg_[static_cast<std::size_t>(s) * nodes + o] =
            cfg_.radio.tx_power_mw * path_gain(d, cfg_.radio.alpha);
      }
    }

    node_state_.assign(nodes, NodeState{});
    ctl_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      ctl_[i].rng.seed(splitmix64(splitmix64(cfg_.seed) + i));
      ctl_[i].cw = cfg_.timing.cw_min;
      ctl_[i].trace = PowerTrace(topo_.links[i].id);
    }
  }

  SimResult run() {
    if (scripted_) {
      std::unordered_set<long long> seen_times;
      for (const auto& fs : cfg_.forced_schedule) {
        const int idx = index_of(fs.link);
        if (!(fs.time_s >= 0.0)) {
          throw std::invalid_argument("sim: scripted start before time zero");
        }
        // Simultaneous starts would defeat the strict ordering the sensing
        // model relies on; scripts must stagger their attempts.
        if (!seen_times.insert(std::llround(fs.time_s * 1e12)).second) {
          throw std::invalid_argument("sim: scripted starts must use distinct times");
        }
        push(fs.time_s, EvKind::kForced, idx, 0);
      }
    } else {
      for (int i = 0; i < n_; ++i) {
        auto& c = ctl_[i];
        c.contending = true;
        c.remaining = draw_backoff(i);
        c.count_start = difs_;  // channel idle from t = 0
        push(c.count_start + c.remaining, EvKind::kAttempt, i, c.attempt_gen);
      }
    }

    while (!queue_.empty()) {
      const Ev ev = queue_.top();
      queue_.pop();
      dispatch(ev);
    }

    SimResult result;
    result.topology = topo_;
    result.log = std::move(log_);
    result.metrics = compute_metrics(result.log, cfg_, result.topology);
    if (trace_idx_ >= 0) {
      result.observer_trace = std::move(ctl_[trace_idx_].trace);
    }
    return result;
  }

 private:
  int index_of(int link_id) const {
    auto it = index_by_id_.find(link_id);
    if (it == index_by_id_.end()) {
      throw std::invalid_argument("sim: unknown link id " +
                                  std::to_string(link_id));
    }
    return it->second;
  }

  Point2D node_pos(int node) const {
    const LinkGeometry& link = topo_.links[node / 2];
    return node % 2 == 0 ? link.tx : link.rx;
  }
  static int tx_node(int link_idx) { return 2 * link_idx; }
  static int rx_node(int link_idx) { return 2 * link_idx + 1; }
  double pg(int sender, int observer) const {
    return pg_[static_cast<std::size_t>(sender) * (2 * n_) + observer];
  }

  void push(double t, EvKind kind, int link, std::uint64_t gen) {
    queue_.push(Ev{t, kind_priority(kind), seq_++, kind, link, gen});
  }

  void log_event(double t, SimEventType type, int link_idx,
                 std::string detail = {}) {
    log_.push_back(SimEvent{t, type, topo_.links[link_idx].id,
                            std::move(detail)});
  }

  double draw_backoff(int link_idx) {
    auto& c = ctl_[link_idx];
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    // Sub-nanosecond jitter keeps attempt instants distinct, so one of two
    // near-simultaneous contenders always senses the other first.
    const double jitter = uni(c.rng) * 1e-10;
    if (cfg_.backoff == BackoffModel::kContinuous) {
      const double mean = cfg_.timing.cw_min / 2.0 * cfg_.timing.slot_s;
      return -mean * std::log1p(-uni(c.rng)) + jitter;
    }
    std::uniform_int_distribution<int> slots(0, c.cw);
    return slots(c.rng) * cfg_.timing.slot_s + jitter;
  }

  bool idle_now(int link_idx, double t) const {
    const auto& c = ctl_[link_idx];
    return ipcs_ ? ipcs_idle(c.trace, t, cfg_.cs)
                 : conventional_idle(c.trace, t, cfg_.cs);
  }

  // Engine-side busy state used by the contention machinery. For increment
  // sensing, busy_until scopes each super-threshold rise to its exchange, so
  // the idle edge lands exactly on the exchange-end instant and every frozen
  // contender resumes together (attempts follow at least DIFS later). The
  // pure window predicate above serves the scripted admission decisions,
  // where no exchange has completed yet and the two views coincide.
  bool engine_busy(int link_idx, double t) const {
    const auto& c = ctl_[link_idx];
    return ipcs_ ? c.busy_until > t : c.trace.total_mw() > pth_;
  }

  void dispatch(const Ev& ev) {
    switch (ev.kind) {
      case EvKind::kAttempt:
        handle_attempt(ev);
        break;
      case EvKind::kForced:
        handle_forced(ev);
        break;
      case EvKind::kDataEnd:
        handle_data_end(ev);
        break;
      case EvKind::kAckStart:
        handle_ack_start(ev);
        break;
      case EvKind::kAckEnd:
        handle_ack_end(ev);
        break;
      case EvKind::kExchangeEnd:
        handle_exchange_end(ev);
        break;
      case EvKind::kCsWakeup:
        handle_wakeup(ev);
        break;
    }
  }

  void handle_attempt(const Ev& ev) {
    auto& c = ctl_[ev.link];
    if (ev.gen != c.attempt_gen || c.in_exchange || !c.contending) return;
    if (ev.t > cfg_.duration_s) return;  // no new exchanges past the horizon
    if (engine_busy(ev.link, ev.t)) {
      // Countdown only advances while the channel is idle, so an expiring
      // backoff must find it idle; anything else is an engine defect.
      throw std::logic_error("engine: backoff expired on a busy channel");
    }
    begin_data(ev.link, ev.t);
  }

  void handle_forced(const Ev& ev) {
    auto& c = ctl_[ev.link];
    if (c.in_exchange) {
      log_event(ev.t, SimEventType::kDefer, ev.link, "mid-exchange");
      return;
    }
    if (idle_now(ev.link, ev.t)) {
      begin_data(ev.link, ev.t);
      return;
    }
    char buf[96];
    if (ipcs_) {
      double worst = 0.0;
      for (const auto& e : c.trace.events()) {
        if (e.time_s >= ev.t - t_packet_ && e.time_s <= ev.t) {
          worst = std::max(worst, e.delta_mw);
        }
      }
      std::snprintf(buf, sizeof buf, "max_increment=%.6e pth=%.6e", worst, pth_);
    } else {
      std::snprintf(buf, sizeof buf, "sensed=%.6e pth=%.6e",
                    c.trace.total_mw(), pth_);
    }
    log_event(ev.t, SimEventType::kDefer, ev.link, buf);
  }

  void begin_data(int link_idx, double t) {
    auto& c = ctl_[link_idx];
    c.in_exchange = true;
    c.contending = false;
    c.data_ok = false;
    c.ack_ok = false;

    double min_sep = kInf;
    for (int j = 0; j < n_; ++j) {
      if (j == link_idx || !ctl_[j].in_exchange) continue;
      min_sep = std::min(min_sep, distance(topo_.links[link_idx].tx,
                                           topo_.links[j].tx));
    }
    // Every admission (contended or scheduled) passes an increment-sensing
    // grant first, and a step above pth would have blocked this sender, so
    // concurrent transmitters must sit at least the sensing range apart.
    if (ipcs_ && min_sep < cfg_.cs.csr_m * (1.0 - 1e-9)) {
      throw std::logic_error(
          "engine: increment-sensing admitted transmitters " +
          std::to_string(min_sep) + " m apart (range " +
          std::to_string(cfg_.cs.csr_m) + " m)");
    }
    std::string detail;
    if (min_sep < kInf) {
      char buf[48];
      std::snprintf(buf, sizeof buf, "minsep=%.6f", min_sep);
      detail = buf;
    }
    log_event(t, SimEventType::kDataStart, link_idx, std::move(detail));

    auto& tx_state = node_state_[tx_node(link_idx)];
    tx_state.transmitting = true;
    tx_state.locked_frame = -1;

    c.data_frame = new_frame(link_idx, FrameDir::kData, tx_node(link_idx),
                             rx_node(link_idx), t, t + t_data_);
    frame_start(c.data_frame);
    c.exchange_end = t + t_packet_;
    push(t + t_data_, EvKind::kDataEnd, link_idx, 0);
    push(c.exchange_end, EvKind::kExchangeEnd, link_idx, 0);
  }

  int new_frame(int link_idx, FrameDir dir, int sender, int dest, double start,
                double end) {
    Frame f;
    f.id = static_cast<int>(frames_.size());
    f.link = link_idx;
    f.dir = dir;
    f.sender = sender;
    f.dest = dest;
    f.start = start;
    f.end = end;
    frames_.push_back(f);
    return f.id;
  }

  double sir_of_frame_at(const Frame& f, int node) const {
    const double signal = pg(f.sender, node);
    double denom = noise_;
    for (int gid : on_air_) {
      const Frame& g = frames_[gid];
      if (g.id == f.id) continue;
      denom += pg(g.sender, node);
    }
    return denom == 0.0 ? kInf : signal / denom;
  }

  void frame_start(int fid) {
    Frame& f = frames_[fid];

    // Locking happens at the frame's first instant, against the power field
    // as it stood before this frame joined. Unlocked idle nodes latch onto
    // any arrival they can hear above the sensing threshold; in restart mode
    // a locked node switches to a new arrival it could decode.
    const int nodes = 2 * n_;
    for (int o = 0; o < nodes; ++o) {
      if (o == f.sender) continue;
      auto& ns = node_state_[o];
      if (ns.transmitting) continue;
      if (ns.locked_frame < 0) {
        if (pg(f.sender, o) > pth_) {
          ns.locked_frame = fid;
          ns.lock_sir = sir_of_frame_at(f, o);
        }
      } else if (cfg_.rs_mode) {
        const double sir = sir_of_frame_at(f, o);
        if (sir >= gamma0_) {
          Frame& old = frames_[ns.locked_frame];
          if (old.dest == o) old.dest_locked = false;
          ns.locked_frame = fid;
          ns.lock_sir = sir;
        }
      }
    }

    f.on_air = true;
    on_air_.push_back(fid);
    f.dest_locked = node_state_[f.dest].locked_frame == fid;

    // Reception is continuous: every on-air frame (including the newcomer)
    // must keep its SIR above gamma0 through every power change.
    for (int gid : on_air_) {
      Frame& g = frames_[gid];
      if (!g.corrupted && sir_of_frame_at(g, g.dest) < gamma0_) {
        g.corrupted = true;
      }
    }

    fan_out(f, +1.0);
  }

  void frame_end(int fid) {
    Frame& f = frames_[fid];
    auto it = std::find(on_air_.begin(), on_air_.end(), fid);
    if (it == on_air_.end()) {
      throw std::logic_error("engine: frame " + std::to_string(fid) +
                             " ended but was not on air");
    }
    f.on_air = false;
    on_air_.erase(it);
    for (auto& ns : node_state_) {
      if (ns.locked_frame == fid) ns.locked_frame = -1;
    }
    // Power only drops when a frame leaves, so no reception can newly fail.
    fan_out(f, -1.0);
  }

  // Applies one frame-edge power step to every other link's transmitter.
  void fan_out(const Frame& f, double sign) {
    for (int j = 0; j < n_; ++j) {
      if (j == f.link) continue;  // own DATA and own ACK are not sensed
      observer_step(j, f, sign);
    }
  }

  void observer_step(int j, const Frame& f, double sign) {
    auto& c = ctl_[j];
    const double t = sign > 0 ? f.start : f.end;
    const double delta = sign * pg(f.sender, tx_node(j));
    const bool was_busy = engine_busy(j, t);
    c.trace.append(PowerEvent{t, delta, topo_.links[f.link].id, f.dir});
    if (j != trace_idx_) {
      c.trace.prune_before(t - t_packet_);
    }
    if (ipcs_ && delta > pth_) {
      // A super-threshold rise marks a nearby exchange still in progress.
      // It blocks until that exchange leaves the air: a DATA rise covers the
      // full DATA+SIFS+ACK span (nothing may slip in between the DATA and
      // its ACK), an ACK rise only its own tail. Blocking a full window past
      // the ACK would leave a dead gap after every exchange during which only
      // the just-finished sender may contend, serializing each neighborhood.
      const double blocked_until =
          t + (f.dir == FrameDir::kData ? t_packet_ : t_ack_);
      if (blocked_until > c.busy_until) {
        c.busy_until = blocked_until;
        if (!c.in_exchange && c.contending) {
          push(c.busy_until, EvKind::kCsWakeup, j, 0);
        }
      }
    }
    const bool now_busy = engine_busy(j, t);
    if (now_busy && !was_busy) {
      on_busy(j, t);
    } else if (!now_busy && was_busy) {
      on_idle(j, t);
    }
  }

  void on_busy(int j, double t) {
    auto& c = ctl_[j];
    c.channel_busy = true;
    if (c.in_exchange || !c.contending) return;
    if (c.count_start >= 0.0 && t >= c.count_start) {
      c.remaining = std::max(0.0, c.remaining - (t - c.count_start));
    }
    c.count_start = -1.0;
    ++c.attempt_gen;  // cancels any pending attempt
  }

  void on_idle(int j, double t) {
    auto& c = ctl_[j];
    c.channel_busy = false;
    if (c.in_exchange || !c.contending) return;
    c.count_start = t + difs_;  // fresh DIFS before the countdown resumes
    ++c.attempt_gen;
    push(c.count_start + c.remaining, EvKind::kAttempt, j, c.attempt_gen);
  }

  void handle_wakeup(const Ev& ev) {
    auto& c = ctl_[ev.link];
    if (c.in_exchange || !c.contending) return;
    if (!c.channel_busy) return;  // some other edge already resumed us
    if (c.busy_until > ev.t) {
      push(c.busy_until, EvKind::kCsWakeup, ev.link, 0);  // extended meanwhile
      return;
    }
    on_idle(ev.link, ev.t);
  }

  void handle_data_end(const Ev& ev) {
    auto& c = ctl_[ev.link];
    if (c.data_frame < 0) {
      throw std::logic_error("engine: data end without a data frame");
    }
    Frame& f = frames_[c.data_frame];
    frame_end(f.id);
    node_state_[f.sender].transmitting = false;
    c.data_ok = f.dest_locked && !f.corrupted;
    log_event(ev.t, SimEventType::kDataEnd, ev.link);
    if (c.data_ok) {
      push(ev.t + sifs_, EvKind::kAckStart, ev.link, 0);
    }
  }

  void handle_ack_start(const Ev& ev) {
    auto& c = ctl_[ev.link];
    auto& rx_state = node_state_[rx_node(ev.link)];
    rx_state.transmitting = true;
    rx_state.locked_frame = -1;
    // The ACK must end on the exchange-end timestamp bit for bit: computing
    // it as ev.t + t_ack_ can land one rounding step past the exchange end,
    // which would tear the exchange down before the ACK completes. At equal
    // times the event priority puts the ACK end first.
    c.ack_frame = new_frame(ev.link, FrameDir::kAck, rx_node(ev.link),
                            tx_node(ev.link), ev.t, c.exchange_end);
    log_event(ev.t, SimEventType::kAckStart, ev.link);
    frame_start(c.ack_frame);
    push(c.exchange_end, EvKind::kAckEnd, ev.link, 0);
  }

  void handle_ack_end(const Ev& ev) {
    auto& c = ctl_[ev.link];
    if (c.ack_frame < 0) {
      throw std::logic_error("engine: ack end without an ack frame");
    }
    Frame& f = frames_[c.ack_frame];
    frame_end(f.id);
    node_state_[f.sender].transmitting = false;
    c.ack_ok = f.dest_locked && !f.corrupted;
    log_event(ev.t, SimEventType::kAckEnd, ev.link);
  }

  void handle_exchange_end(const Ev& ev) {
    auto& c = ctl_[ev.link];
    if (c.data_ok && c.ack_ok) {
      log_event(ev.t, SimEventType::kDelivered, ev.link);
    } else if (!c.data_ok) {
      const Frame& f = frames_[c.data_frame];
      log_event(ev.t, SimEventType::kDataFail, ev.link,
                f.dest_locked ? "sir" : "capture");
    } else {
      const Frame& f = frames_[c.ack_frame];
      log_event(ev.t, SimEventType::kAckFail, ev.link,
                f.dest_locked ? "sir" : "capture");
    }
    const bool delivered = c.data_ok && c.ack_ok;
    c.in_exchange = false;
    c.data_frame = -1;
    c.ack_frame = -1;
    if (scripted_) return;

    if (cfg_.backoff == BackoffModel::kSlotted) {
      c.cw = delivered ? cfg_.timing.cw_min
                       : std::min(2 * c.cw + 1, cfg_.timing.cw_max);
    }
    c.remaining = draw_backoff(ev.link);
    c.contending = true;
    if (engine_busy(ev.link, ev.t)) {
      c.channel_busy = true;
      c.count_start = -1.0;
      if (ipcs_) {
        push(c.busy_until, EvKind::kCsWakeup, ev.link, 0);
      }
      // conventional: the next frame-end power drop resumes us
    } else {
      on_idle(ev.link, ev.t);
    }
  }

  SimConfig cfg_;
  Topology topo_;
  int n_ = 0;
  std::unordered_map<int, int> index_by_id_;
  int trace_idx_ = -1;

  double t_data_ = 0.0, t_ack_ = 0.0, t_packet_ = 0.0;
  double sifs_ = 0.0, difs_ = 0.0;
  double pth_ = 0.0, gamma0_ = 0.0, noise_ = 0.0;
  bool ipcs_ = false;
  bool scripted_ = false;

  std::vector<double> pg_;
  std::vector<NodeState> node_state_;
  std::vector<LinkCtl> ctl_;
  std::vector<Frame> frames_;
  std::vector<int> on_air_;

  std::priority_queue<Ev, std::vector<Ev>, EvAfter> queue_;
  std::uint64_t seq_ = 0;
  EventLog log_;
};

}  // namespace

void MacTiming::validate() const {
  if (!(slot_s > 0.0) || !(sifs_s > 0.0) || !(difs_s > 0.0)) {
    throw std::invalid_argument("timing: slot, SIFS and DIFS must be positive");
  }
  if (cw_min < 1 || cw_max < cw_min) {
    throw std::invalid_argument("timing: need 1 <= cw_min <= cw_max");
  }
  if (!(data_rate_bps > 0.0) || payload_bytes < 1) {
    throw std::invalid_argument("timing: rate and payload must be positive");
  }
  if (phy_overhead_s < 0.0 || !(ack_duration_s > 0.0)) {
    throw std::invalid_argument("timing: bad overhead or ACK duration");
  }
}

void SimConfig::validate() const {
  radio.validate();
  timing.validate();
  cs.validate(radio);
  const double tp = timing.t_packet();
  if (std::abs(cs.t_packet_s - tp) > 1e-12 * tp) {
    throw std::invalid_argument(
        "sim: sensing window must equal the exchange airtime");
  }
  if (!(duration_s > 10.0 * tp)) {
    throw std::invalid_argument(
        "sim: duration must exceed ten exchange times");
  }
  if (!topology && !topology_config) {
    throw std::invalid_argument("sim: no topology or generator config given");
  }
}

Topology SimConfig::resolve_topology() const {
  validate();
  if (topology) return *topology;
  return generate_topology(*topology_config);
}

const char* to_string(SimEventType type) {
  switch (type) {
    case SimEventType::kDataStart:
      return "data_start";
    case SimEventType::kDataEnd:
      return "data_end";
    case SimEventType::kAckStart:
      return "ack_start";
    case SimEventType::kAckEnd:
      return "ack_end";
    case SimEventType::kDelivered:
      return "delivered";
    case SimEventType::kDataFail:
      return "data_fail";
    case SimEventType::kAckFail:
      return "ack_fail";
    case SimEventType::kDefer:
      return "defer";
  }
  return "unknown";
}

SimResult run_simulation(const SimConfig& cfg) {
  cfg.validate();
  Engine engine(cfg);
  return engine.run();
}

long collision_audit(const EventLog& log, const Topology& topo,
                     const RadioParams& radio) {
  std::vector<ActiveFrame> active;
  auto set_on_air = [&](int link, FrameDir dir, bool add) {
    if (add) {
      active.push_back(ActiveFrame{link, dir});
      return;
    }
    for (auto it = active.begin(); it != active.end(); ++it) {
      if (it->link == link && it->dir == dir) {
        active.erase(it);
        return;
      }
    }
    throw std::invalid_argument("collision audit: frame end without start");
  };

  long collisions = 0;
  bool infeasible = false;
  for (const auto& ev : log) {
    switch (ev.type) {
      case SimEventType::kDataStart:
        set_on_air(ev.link, FrameDir::kData, true);
        break;
      case SimEventType::kDataEnd:
        set_on_air(ev.link, FrameDir::kData, false);
        break;
      case SimEventType::kAckStart:
        set_on_air(ev.link, FrameDir::kAck, true);
        break;
      case SimEventType::kAckEnd:
        set_on_air(ev.link, FrameDir::kAck, false);
        break;
      default:
        continue;
    }
    bool bad = false;
    if (active.size() >= 2 || (active.size() == 1 && radio.noise_mw > 0.0)) {
      const FeasibilityReport report =
          check_feasible(active, topo, radio, SirCheck::kBoth);
      for (std::size_t i = 0; i < active.size(); ++i) {
        const double own = active[i].dir == FrameDir::kData
                               ? report.links[i].data_sir
                               : report.links[i].ack_sir;
        if (!(own >= radio.gamma0)) {
          bad = true;
          break;
        }
      }
    }
    if (bad && !infeasible) ++collisions;
    infeasible = bad;
  }
  return collisions;
}

SimMetrics compute_metrics(const EventLog& log, const SimConfig& cfg,
                           const Topology& topo) {
  const double duration = cfg.duration_s;
  const double arena_area = topo.arena_width * topo.arena_height;
  if (!(arena_area > 0.0)) {
    throw std::invalid_argument("metrics: arena must have positive area");
  }
  const double d_ref = cfg.d_max_ref > 0.0 ? cfg.d_max_ref : topo.d_max;
  const double area = unit_area(cfg.radio, d_ref);

  SimMetrics m;
  m.duration_s = duration;
  m.unit_area_m2 = area;
  m.offered_link_density =
      static_cast<double>(topo.links.size()) * area / arena_area;

  // On-air time is accumulated per frame, clipped to the measurement window.
  std::unordered_map<long long, double> open;  // (link, dir) -> start time
  auto key = [](int link, FrameDir dir) {
    return (static_cast<long long>(link) << 1) |
           (dir == FrameDir::kAck ? 1 : 0);
  };
  double on_air_integral = 0.0;
  auto close_frame = [&](int link, FrameDir dir, double end) {
    auto it = open.find(key(link, dir));
    if (it == open.end()) {
      throw std::invalid_argument("metrics: frame end without start");
    }
    const double a = std::min(it->second, duration);
    const double b = std::min(end, duration);
    on_air_integral += std::max(0.0, b - a);
    open.erase(it);
  };

  for (const auto& ev : log) {
    switch (ev.type) {
      case SimEventType::kDataStart:
        open[key(ev.link, FrameDir::kData)] = ev.time_s;
        break;
      case SimEventType::kDataEnd:
        close_frame(ev.link, FrameDir::kData, ev.time_s);
        break;
      case SimEventType::kAckStart:
        open[key(ev.link, FrameDir::kAck)] = ev.time_s;
        break;
      case SimEventType::kAckEnd:
        close_frame(ev.link, FrameDir::kAck, ev.time_s);
        break;
      case SimEventType::kDelivered:
        ++m.delivered_packets;
        break;
      case SimEventType::kDataFail:
        ++m.data_failures;
        break;
      case SimEventType::kAckFail:
        ++m.ack_failures;
        break;
      case SimEventType::kDefer:
        ++m.deferred_attempts;
        break;
    }
  }

  m.spatial_reuse = on_air_integral / duration * area / arena_area;
  m.throughput_per_unit_area_bps =
      static_cast<double>(m.delivered_packets) * cfg.timing.payload_bytes *
      8.0 / duration * area / arena_area;
  m.hidden_node_collisions = collision_audit(log, topo, cfg.radio);
  return m;
}

std::string log_to_csv(const EventLog& log) {
  std::string out = "# ipcs-sim event-log v1\n";
  out += "time,event_type,link,detail\n";
  char buf[192];
  for (const auto& ev : log) {
    std::snprintf(buf, sizeof buf, "%.9f,%s,%d,%s\n", ev.time_s,
                  to_string(ev.type), ev.link, ev.detail.c_str());
    out += buf;
  }
  return out;
}

}  // namespace ipcs
