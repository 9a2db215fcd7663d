#pragma once

// Channel model and carrier-sensing-range calculus under the cumulative
// interference model: geometric path gain, SIR feasibility of concurrent
// DATA/ACK frame sets, safe carrier-sensing ranges for the pairwise and
// cumulative interference models, and the worst-case hexagonal-packing
// interference bound that justifies the cumulative range.

#include <span>
#include <vector>

#include "ipcs/geometry.hpp"

namespace ipcs {

struct RadioParams {
  double tx_power_mw = 100.0;  // common transmit power Pt
  double alpha = 4.0;          // path-loss exponent; must exceed 2
  double gamma0 = 20.0;        // SIR threshold for correct reception
  double noise_mw = 0.0;       // background noise; 0 reduces SINR to SIR

  void validate() const;  // throws std::invalid_argument / std::domain_error
};

// Geometric path gain d^-alpha. Throws std::domain_error for d <= 0
// (co-located nodes have no finite gain in this model).
double path_gain(double d, double alpha);

enum class FrameDir { kData, kAck };

// One frame on the air. The emitting node is the link's transmitter for
// DATA and its receiver for ACK.
struct ActiveFrame {
  int link = 0;
  FrameDir dir = FrameDir::kData;
};

Point2D sender_position(const ActiveFrame& frame, const Topology& topo);

enum class SirCheck { kData, kAck, kBoth };

struct LinkSir {
  int link = 0;
  double data_sir = 0.0;  // NaN when not evaluated
  double ack_sir = 0.0;   // NaN when not evaluated
  bool feasible = true;   // every evaluated constraint >= gamma0
};

struct FeasibilityReport {
  std::vector<LinkSir> links;
  bool feasible = true;
};

// For every link with a frame in `frames`, evaluates the DATA constraint
// (signal tx->rx, measured at the receiver) and/or the ACK constraint
// (signal rx->tx, measured at the transmitter) against interference from the
// *other* frames' emitting nodes plus noise. With zero interference and zero
// noise the SIR is reported as +infinity, which satisfies any threshold.
// Throws std::invalid_argument on unknown link ids or two frames on one link.
FeasibilityReport check_feasible(std::span<const ActiveFrame> frames,
                                 const Topology& topo,
                                 const RadioParams& radio,
                                 SirCheck which = SirCheck::kBoth);

// Minimum transmitter separation (as a carrier-sensing range) that guarantees
// reception when at most one interferer is considered: (gamma0^(1/alpha)+2)*d_max.
double safe_csr_pairwise(const RadioParams& radio, double d_max);

// The spacing factor K with K^alpha = 6*gamma0*(1 + (2/sqrt(3))^alpha/(alpha-2)),
// sized so that interferers packed no tighter than K*d_max around a receiver
// keep the cumulative interference at or below Pt*d_max^-alpha/gamma0.
double safe_k_factor(const RadioParams& radio);

// Safe carrier-sensing range under cumulative interference: (K+2)*d_max.
double safe_csr_cumulative(const RadioParams& radio, double d_max);

// Ratio cumulative/pairwise for the given radio, and its large-gamma0 limit
// (6*(1 + (2/sqrt(3))^alpha/(alpha-2)))^(1/alpha).
double csr_ratio(const RadioParams& radio);
double csr_ratio_limit(double alpha);

// Power threshold seen at distance csr from a transmitter, and its inverse.
double pth_from_csr(const RadioParams& radio, double csr);
double csr_from_pth(const RadioParams& radio, double pth);

// Worst-case cumulative interference at a receiver from senders packed
// hexagonally with minimum spacing k_factor*d_max: 6 senders in layer 1 at
// distance >= k_factor*d_max, 6n senders in layer n >= 2 at distance
// >= (sqrt(3)/2)*n*k_factor*d_max. The truncated form sums `layers` layers;
// the closed form bounds the infinite sum via sum_{n>=2} n^(1-alpha) <= 1/(alpha-2).
double hex_interference_truncated(double k_factor, double alpha,
                                  const RadioParams& radio, double d_max,
                                  int layers);
double hex_interference_closed_form(double k_factor, double alpha,
                                    const RadioParams& radio, double d_max);

// Arena area consumed by one transmitter at the tightest packing the
// cumulative-model safe range admits: (sqrt(3)/2) * safe_csr_cumulative^2.
double unit_area(const RadioParams& radio, double d_max);

}  // namespace ipcs
