#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "dissipcert/systems.hpp"

namespace dissipcert {

// Adversarial environment search: instantiate members of a low-dimensional
// family of certified environments (passive, output-strictly passive, or
// gain-bounded) and hunt for one that destabilizes a given block in
// feedback.  A found witness is the constructive refutation of the block's
// claimed robustness; surviving the whole family is reported as evidence
// with the largest closed-loop gain seen.

// -------------------------------------------------------------------------
// Environment families.

enum class EnvKind {
  kStaticGain,   // y = k*u, theta = (k)
  kFirstOrder,   // k/(s + s0), theta = (k, s0)
  kParallelMix,  // c + k/(s + s0), theta = (c, k, s0)
  kGainBall,     // y = g*u with |g| <= alpha, theta = (g)
};

std::string to_string(EnvKind k);

// What every instantiated member must certify before use.
enum class CertMode {
  kPassive,    // positive-real margin >= -tol
  kOsp,        // output-strictness index >= level - tol
  kGainBound,  // H-infinity norm <= level + tol
};

std::string to_string(CertMode m);

struct EnvFamily {
  EnvKind kind = EnvKind::kStaticGain;
  Eigen::VectorXd lo, hi;  // inclusive parameter box, one entry per theta
  CertMode mode = CertMode::kPassive;
  double mode_level = 0.0;  // epsilon for kOsp, alpha for kGainBound

  long n_params() const;

  static EnvFamily static_gain(double k_lo, double k_hi);
  static EnvFamily first_order(double k_lo, double k_hi, double s0_lo,
                               double s0_hi);
  static EnvFamily parallel_mix(double c_lo, double c_hi, double k_lo,
                                double k_hi, double s0_lo, double s0_hi);
  static EnvFamily gain_ball(double alpha);  // g in [-alpha, alpha]
};

// Outcome of certifying one member against a mode.  margin >= -tol passes;
// the sign convention makes the requirement uniform across modes (margin =
// pr margin, osp index - level, or level - norm).  `boundary` flags members
// sitting on the edge of the certifiable set: a pole on the imaginary axis
// (an energy-conserving limit member such as the pure integrator).
struct MemberCertificate {
  CertMode mode = CertMode::kPassive;
  double level = 0.0;
  double margin = 0.0;
  bool boundary = false;
};

// The member's state-space realization for parameters theta.  Bounds are
// enforced here (ArgumentError outside the box or wrong arity).
StateSpace env_member(const EnvFamily& family, const Eigen::VectorXd& theta);

// Evaluate the certification margin of an arbitrary realization against a
// mode.  Never throws on failure; the caller reads the margin.
MemberCertificate certify_member(const StateSpace& member, CertMode mode,
                                 double level);

// Instantiate AND certify: returns the member as an operator only when its
// certificate clears -cert_tol, otherwise raises RejectedMemberError
// carrying the margin.  The two-argument overload discards the certificate.
OperatorExpr make_env(const EnvFamily& family, const Eigen::VectorXd& theta);
OperatorExpr make_env(const EnvFamily& family, const Eigen::VectorXd& theta,
                      MemberCertificate* certificate);

// -------------------------------------------------------------------------
// Falsification campaigns.

// Whether the environment's external port is driven or clamped to zero
// (which also selects the reported gain channel: full map vs e1 -> y1).
enum class FalsifyMode { kE2Free, kE2Zero };

std::string to_string(FalsifyMode m);

// One objective evaluation in the search trace.  For an LTI block the
// objective is the closed-loop spectral abscissa; otherwise it is the
// worst probe energy ratio (output/input).  Rejected points (member failed
// certification, ill-posed loop, non-converging solver) carry -inf.
struct SearchPoint {
  Eigen::VectorXd theta;
  double objective = 0.0;
  bool rejected = false;
};

struct FalsificationResult {
  bool destabilized = false;

  // Witness data (set when destabilized).  Every witness carries BOTH a
  // member certificate re-validated after the search and an instability
  // certificate: a spectral abscissa >= the instability margin for LTI
  // loops, or trajectory overflow / energy-ratio blowup (heuristic
  // evidence, not a proof) for simulated ones.
  std::optional<Eigen::VectorXd> theta;
  std::optional<MemberCertificate> member_certificate;
  std::optional<double> closed_loop_abscissa;
  std::optional<long> overflow_step;
  std::optional<double> energy_ratio;

  // Survival data: the largest closed-loop gain (exact for LTI loops, probe
  // lower bound otherwise) observed across certified stable members.
  std::optional<double> max_gain_lb;

  int evaluations = 0;
  std::vector<SearchPoint> trace;  // deterministic order: grid, then refine
};

// Coarse grid over the family's parameter box (resolution adapted to the
// budget), then a deterministic pattern-search refinement around the best
// point.  `budget` caps the number of member evaluations.  The block must
// be single-channel on both ports (the families are scalar).
FalsificationResult falsify(const OperatorExpr& sigma1,
                            const EnvFamily& family, int budget,
                            FalsifyMode mode);

// -------------------------------------------------------------------------
// The one-mass-one-spring study.

// Everything worth knowing about the loop of 1/(m s + d) against
// k/(s + s0): block-level verdicts, the closed-loop eigenvalues, and the
// two analytic stability quantities of the 2x2 loop matrix.
struct MassSpringReport {
  double m = 0.0, d = 0.0, s0 = 0.0, k = 0.0;

  double mass_osp_index = 0.0;  // equals d on this family
  bool mass_osp = false;
  double spring_pr_margin = 0.0;
  bool spring_passive = false;  // s0 >= 0

  Eigen::Vector2cd eigenvalues;  // of the closed-loop matrix
  double spectral_abscissa = 0.0;
  bool stable = false;

  // trace-based quantity d/m + s0 (positive <=> negative trace) and the
  // determinant-based quantity (d*s0 + k)/m; the loop is Hurwitz exactly
  // when BOTH are positive.
  double trace_condition = 0.0;
  double det_condition = 0.0;
  bool predicate = false;  // the trace-only test: d/m + s0 > 0
  bool marginal = false;   // either quantity or the abscissa at zero

  bool consistent = false;  // stable == (both quantities positive)
};

// ArgumentError unless m > 0 and k > 0.
MassSpringReport mass_spring_case(double m, double d, double s0, double k);

}  // namespace dissipcert
