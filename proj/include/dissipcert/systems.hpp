#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dissipcert/signals.hpp"

namespace dissipcert {

// Continuous-time linear system  x' = Ax + Bu,  y = Cx + Du.
// Zero-dimensional state (n = 0) is allowed and models a static gain.
struct StateSpace {
  Eigen::MatrixXd A, B, C, D;

  StateSpace() = default;
  StateSpace(Eigen::MatrixXd A_, Eigen::MatrixXd B_, Eigen::MatrixXd C_,
             Eigen::MatrixXd D_);

  long states() const { return A.rows(); }
  long inputs() const { return B.cols(); }
  long outputs() const { return C.rows(); }

  // Static p x m gain (no dynamics).
  static StateSpace static_gain(const Eigen::MatrixXd& D);
  // First-order SISO k/(s + a).
  static StateSpace first_order(double k, double a);
};

// ---- State-space algebra (exact, done on the continuous-time matrices) ----

// u -> first -> second -> y.
StateSpace series(const StateSpace& first, const StateSpace& second);
// y = first(u) + second(u).
StateSpace parallel(const StateSpace& a, const StateSpace& b);
// y = c * sys(u).
StateSpace scaled(const StateSpace& sys, double c);
// sys + c*I (square systems only).
StateSpace add_feedthrough(const StateSpace& sys, double c);
// Negative feedback with eps*I around sys:  y = sys(u - eps*y).
// Requires I + eps*D invertible.
StateSpace feedback_eps(const StateSpace& sys, double eps);
// Positive feedback with eps*I:  y = sys(u + eps*y).  feedback_eps(-eps).
StateSpace feedback_eps_positive(const StateSpace& sys, double eps);
// Keep output rows [r0, r0+nr) and input columns [c0, c0+nc).
StateSpace subsystem(const StateSpace& sys, long r0, long nr, long c0, long nc);

// Exact zero-order-hold discretization: (Ad, Bd) = expm([A B; 0 0] * dt).
// Holding u constant on each step makes the discrete recursion exact.
struct DiscreteStateSpace {
  Eigen::MatrixXd Ad, Bd, C, D;
};
DiscreteStateSpace discretize_zoh(const StateSpace& sys, double dt);

// G(jw) = C (jwI - A)^-1 B + D.  Raises SingularityError when jw sits within
// 1e-9 of an eigenvalue of A.
Eigen::MatrixXcd freq_response(const StateSpace& sys, double omega);

// ---- Operator expressions -------------------------------------------------
//
// A causal input/output operator on finite-horizon signals, represented as a
// tree: LTI leaves, memoryless nonlinearities, time-varying gains, scaled
// identities, combined by sum / cascade / scalar multiples.  Simulation
// always starts from rest (zero initial state); there is no API for nonzero
// initial conditions.

enum class StaticMap {
  kSaturation,  // clamp(u, -limit, limit)
  kDeadzone,    // sign(u) * max(|u| - width, 0)
  kCubic,       // u^3 / (1 + u^2): smooth odd map in the sector [0, 1)
};

enum class TvProfile {
  kConstant,    // k(t) = offset
  kAffine,      // k(t) = offset + slope*t          (offset, slope >= 0)
  kSinSquared,  // k(t) = offset + amp*sin^2(w*t)   (offset >= 0, amp >= -offset)
};

struct TimeVaryingGain {
  TvProfile profile = TvProfile::kConstant;
  double offset = 1.0;
  double slope = 0.0;
  double amp = 0.0;
  double omega = 1.0;

  double operator()(double t) const;
  void validate() const;  // enforce k(t) >= 0 for all t >= 0
};

// Incremental evaluator: output(k, u) is the operator output at step k if the
// input at step k were u (a pure function of u and the committed past);
// advance(k, u) commits u and moves to step k+1.  This is what the feedback
// loop solver needs to resolve algebraic loops sample by sample.
class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual Eigen::VectorXd output(long k, const Eigen::VectorXd& u) const = 0;
  virtual void advance(long k, const Eigen::VectorXd& u) = 0;
};

class OperatorExpr {
 public:
  OperatorExpr() = default;

  // Leaves.
  static OperatorExpr lti(StateSpace ss);
  static OperatorExpr identity(long dim, double scale = 1.0);
  static OperatorExpr saturation(long dim, double limit);
  static OperatorExpr deadzone(long dim, double width);
  static OperatorExpr cubic(long dim);
  static OperatorExpr tv_gain(long dim, TimeVaryingGain k);

  // Combinators.
  static OperatorExpr sum(OperatorExpr a, OperatorExpr b);
  static OperatorExpr cascade(OperatorExpr first, OperatorExpr then);
  static OperatorExpr scale(double c, OperatorExpr a);

  bool valid() const { return node_ != nullptr; }
  long input_dim() const;
  long output_dim() const;

  // True when every node in the tree is linear time-invariant.
  bool is_lti() const;
  // Collapse an all-LTI tree to a single realization; nullopt otherwise.
  std::optional<StateSpace> to_state_space() const;

  // Human-readable node kind ("lti", "sum", ...), for error messages.
  std::string kind() const;

  // Run the operator over a whole input signal from rest.  All-LTI trees run
  // through their collapsed realization with exact ZOH; mixed trees run
  // sample by sample (LTI leaves still step with exact ZOH).  A non-finite
  // output sample raises OverflowError with the first bad step index.
  Signal simulate(const Signal& u) const;

  std::unique_ptr<Stepper> make_stepper(const TimeGrid& grid) const;

  // Internal node access for serialization (io.cpp).
  struct Node;
  const std::shared_ptr<const Node>& node() const { return node_; }
  explicit OperatorExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<const Node> node_;
};

// Causality check: compare P_T(op(P_T u)) with P_T(op(u)) in L2 for every
// probe/horizon combination.  `empty_probe_warning` flags a vacuous pass.
struct CausalityCheck {
  bool causal = true;
  bool empty_probe_warning = false;
  double max_residual = 0.0;
};

CausalityCheck check_causality(
    const std::function<Signal(const Signal&)>& op,
    const std::vector<Signal>& probes, const std::vector<double>& horizons,
    double tol);
CausalityCheck check_causality(const OperatorExpr& op,
                               const std::vector<Signal>& probes,
                               const std::vector<double>& horizons, double tol);

}  // namespace dissipcert
