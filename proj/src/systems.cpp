#include "dissipcert/systems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unsupported/Eigen/MatrixFunctions>
#include <variant>

#include "dissipcert/errors.hpp"

namespace dissipcert {

namespace {

void require_finite(const Eigen::MatrixXd& M, const char* name) {
  if (!M.allFinite())
    throw ArgumentError(std::string("StateSpace: ") + name +
                        " contains a non-finite entry");
}

}  // namespace

StateSpace::StateSpace(Eigen::MatrixXd A_, Eigen::MatrixXd B_,
                       Eigen::MatrixXd C_, Eigen::MatrixXd D_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(std::move(D_)) {
  const long n = A.rows();
  if (A.cols() != n) throw DimensionError("StateSpace: A must be square");
  if (B.rows() != n)
    throw DimensionError("StateSpace: B must have one row per state");
  if (C.cols() != n)
    throw DimensionError("StateSpace: C must have one column per state");
  if (D.rows() != C.rows() || D.cols() != B.cols())
    throw DimensionError("StateSpace: D must be outputs x inputs");
  if (B.cols() < 1 || C.rows() < 1)
    throw DimensionError("StateSpace: need at least one input and one output");
  require_finite(A, "A");
  require_finite(B, "B");
  require_finite(C, "C");
  require_finite(D, "D");
}

StateSpace StateSpace::static_gain(const Eigen::MatrixXd& D) {
  const long p = D.rows(), m = D.cols();
  return StateSpace(Eigen::MatrixXd::Zero(0, 0), Eigen::MatrixXd::Zero(0, m),
                    Eigen::MatrixXd::Zero(p, 0), D);
}

StateSpace StateSpace::first_order(double k, double a) {
  Eigen::MatrixXd A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << -a;
  B << 1.0;
  C << k;
  D << 0.0;
  return StateSpace(A, B, C, D);
}

StateSpace series(const StateSpace& first, const StateSpace& second) {
  if (second.inputs() != first.outputs())
    throw DimensionError("series: inner dimensions do not match");
  const long n1 = first.states(), n2 = second.states();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
  A.topLeftCorner(n1, n1) = first.A;
  A.bottomLeftCorner(n2, n1) = second.B * first.C;
  A.bottomRightCorner(n2, n2) = second.A;
  Eigen::MatrixXd B(n1 + n2, first.inputs());
  B.topRows(n1) = first.B;
  B.bottomRows(n2) = second.B * first.D;
  Eigen::MatrixXd C(second.outputs(), n1 + n2);
  C.leftCols(n1) = second.D * first.C;
  C.rightCols(n2) = second.C;
  return StateSpace(A, B, C, second.D * first.D);
}

StateSpace parallel(const StateSpace& a, const StateSpace& b) {
  if (a.inputs() != b.inputs() || a.outputs() != b.outputs())
    throw DimensionError("parallel: port dimensions do not match");
  const long n1 = a.states(), n2 = b.states();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
  A.topLeftCorner(n1, n1) = a.A;
  A.bottomRightCorner(n2, n2) = b.A;
  Eigen::MatrixXd B(n1 + n2, a.inputs());
  B.topRows(n1) = a.B;
  B.bottomRows(n2) = b.B;
  Eigen::MatrixXd C(a.outputs(), n1 + n2);
  C.leftCols(n1) = a.C;
  C.rightCols(n2) = b.C;
  return StateSpace(A, B, C, a.D + b.D);
}

StateSpace scaled(const StateSpace& sys, double c) {
  return StateSpace(sys.A, sys.B, c * sys.C, c * sys.D);
}

StateSpace add_feedthrough(const StateSpace& sys, double c) {
  if (sys.inputs() != sys.outputs())
    throw DimensionError("add_feedthrough: system must be square");
  Eigen::MatrixXd D = sys.D;
  D.diagonal().array() += c;
  return StateSpace(sys.A, sys.B, sys.C, D);
}

StateSpace feedback_eps(const StateSpace& sys, double eps) {
  if (sys.inputs() != sys.outputs())
    throw DimensionError("feedback_eps: system must be square");
  const long p = sys.outputs();
  Eigen::MatrixXd M =
      Eigen::MatrixXd::Identity(p, p) + eps * sys.D;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible())
    throw WellPosednessError(
        "feedback_eps: I + eps*D is singular, the eps-loop is ill-posed",
        std::numeric_limits<double>::infinity());
  Eigen::MatrixXd K = lu.inverse();
  // y = K(Cx + Du);  x' = Ax + B(u - eps*y) = (A - eps*B*K*C)x + B*K*u.
  return StateSpace(sys.A - eps * sys.B * K * sys.C, sys.B * K, K * sys.C,
                    K * sys.D);
}

StateSpace feedback_eps_positive(const StateSpace& sys, double eps) {
  return feedback_eps(sys, -eps);
}

StateSpace subsystem(const StateSpace& sys, long r0, long nr, long c0,
                     long nc) {
  if (r0 < 0 || nr < 1 || r0 + nr > sys.outputs() || c0 < 0 || nc < 1 ||
      c0 + nc > sys.inputs())
    throw DimensionError("subsystem: port selection out of range");
  return StateSpace(sys.A, sys.B.middleCols(c0, nc), sys.C.middleRows(r0, nr),
                    sys.D.block(r0, c0, nr, nc));
}

DiscreteStateSpace discretize_zoh(const StateSpace& sys, double dt) {
  if (!(dt > 0.0)) throw ArgumentError("discretize_zoh: dt must be positive");
  const long n = sys.states(), m = sys.inputs();
  DiscreteStateSpace d;
  if (n == 0) {
    d.Ad = Eigen::MatrixXd::Zero(0, 0);
    d.Bd = Eigen::MatrixXd::Zero(0, m);
  } else {
    // One matrix exponential of the augmented block [[A, B], [0, 0]] gives
    // both Ad = e^{A dt} and Bd = \int_0^dt e^{A s} ds B exactly.
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + m, n + m);
    M.topLeftCorner(n, n) = sys.A;
    M.topRightCorner(n, m) = sys.B;
    Eigen::MatrixXd E = (M * dt).exp();
    d.Ad = E.topLeftCorner(n, n);
    d.Bd = E.topRightCorner(n, m);
  }
  d.C = sys.C;
  d.D = sys.D;
  return d;
}

Eigen::MatrixXcd freq_response(const StateSpace& sys, double omega) {
  const long n = sys.states();
  if (n == 0) return sys.D.cast<std::complex<double>>();
  const std::complex<double> jw(0.0, omega);
  Eigen::EigenSolver<Eigen::MatrixXd> es(sys.A, false);
  for (long i = 0; i < n; ++i) {
    if (std::abs(jw - es.eigenvalues()(i)) <= 1e-9)
      throw SingularityError(
          "freq_response: jw is within 1e-9 of a pole of the system", omega);
  }
  Eigen::MatrixXcd M = -sys.A.cast<std::complex<double>>();
  M.diagonal().array() += jw;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
  Eigen::MatrixXcd X = lu.solve(sys.B.cast<std::complex<double>>());
  return sys.C.cast<std::complex<double>>() * X +
         sys.D.cast<std::complex<double>>();
}

// ---- TimeVaryingGain --------------------------------------------------------

double TimeVaryingGain::operator()(double t) const {
  switch (profile) {
    case TvProfile::kConstant:
      return offset;
    case TvProfile::kAffine:
      return offset + slope * t;
    case TvProfile::kSinSquared: {
      const double s = std::sin(omega * t);
      return offset + amp * s * s;
    }
  }
  return offset;
}

void TimeVaryingGain::validate() const {
  switch (profile) {
    case TvProfile::kConstant:
      if (offset < 0.0)
        throw ArgumentError("TimeVaryingGain: constant gain must be >= 0");
      break;
    case TvProfile::kAffine:
      if (offset < 0.0 || slope < 0.0)
        throw ArgumentError(
            "TimeVaryingGain: affine profile needs offset >= 0 and slope >= 0 "
            "to stay nonnegative for all t");
      break;
    case TvProfile::kSinSquared:
      if (offset < 0.0 || offset + std::min(amp, 0.0) < 0.0)
        throw ArgumentError(
            "TimeVaryingGain: sin^2 profile dips below zero (need offset >= 0 "
            "and offset + min(amp, 0) >= 0)");
      break;
  }
}

// ---- OperatorExpr node ------------------------------------------------------

struct LtiNode {
  StateSpace ss;
};
struct StaticNode {
  StaticMap map;
  double param;  // limit / width; unused for kCubic
  long dim;
};
struct TvGainNode {
  TimeVaryingGain gain;
  long dim;
};
struct IdentityNode {
  double scale;
  long dim;
};
struct SumNode {
  std::vector<OperatorExpr> children;
};
struct CascadeNode {
  std::vector<OperatorExpr> children;  // applied left to right
};
struct ScaleNode {
  double factor;
  OperatorExpr child;
};

struct OperatorExpr::Node {
  std::variant<LtiNode, StaticNode, TvGainNode, IdentityNode, SumNode,
               CascadeNode, ScaleNode>
      v;
};

namespace {

OperatorExpr wrap(OperatorExpr::Node&& n) {
  return OperatorExpr(
      std::make_shared<const OperatorExpr::Node>(std::move(n)));
}

double apply_static(StaticMap map, double param, double x) {
  switch (map) {
    case StaticMap::kSaturation:
      return std::clamp(x, -param, param);
    case StaticMap::kDeadzone: {
      const double a = std::abs(x) - param;
      return a > 0.0 ? (x > 0.0 ? a : -a) : 0.0;
    }
    case StaticMap::kCubic:
      return x * x * x / (1.0 + x * x);
  }
  return x;
}

}  // namespace

OperatorExpr OperatorExpr::lti(StateSpace ss) {
  return wrap({LtiNode{std::move(ss)}});
}

OperatorExpr OperatorExpr::identity(long dim, double scale) {
  if (dim < 1) throw DimensionError("identity: dim must be >= 1");
  return wrap({IdentityNode{scale, dim}});
}

OperatorExpr OperatorExpr::saturation(long dim, double limit) {
  if (dim < 1) throw DimensionError("saturation: dim must be >= 1");
  if (!(limit > 0.0)) throw ArgumentError("saturation: limit must be > 0");
  return wrap({StaticNode{StaticMap::kSaturation, limit, dim}});
}

OperatorExpr OperatorExpr::deadzone(long dim, double width) {
  if (dim < 1) throw DimensionError("deadzone: dim must be >= 1");
  if (!(width >= 0.0)) throw ArgumentError("deadzone: width must be >= 0");
  return wrap({StaticNode{StaticMap::kDeadzone, width, dim}});
}

OperatorExpr OperatorExpr::cubic(long dim) {
  if (dim < 1) throw DimensionError("cubic: dim must be >= 1");
  return wrap({StaticNode{StaticMap::kCubic, 0.0, dim}});
}

OperatorExpr OperatorExpr::tv_gain(long dim, TimeVaryingGain k) {
  if (dim < 1) throw DimensionError("tv_gain: dim must be >= 1");
  k.validate();
  return wrap({TvGainNode{k, dim}});
}

OperatorExpr OperatorExpr::sum(OperatorExpr a, OperatorExpr b) {
  if (a.input_dim() != b.input_dim() || a.output_dim() != b.output_dim())
    throw DimensionError("sum: children must share input and output widths");
  return wrap({SumNode{{std::move(a), std::move(b)}}});
}

OperatorExpr OperatorExpr::cascade(OperatorExpr first, OperatorExpr then) {
  if (then.input_dim() != first.output_dim())
    throw DimensionError(
        "cascade: second stage input width must equal first stage output "
        "width");
  return wrap({CascadeNode{{std::move(first), std::move(then)}}});
}

OperatorExpr OperatorExpr::scale(double c, OperatorExpr a) {
  return wrap({ScaleNode{c, std::move(a)}});
}

long OperatorExpr::input_dim() const {
  if (!node_) throw ArgumentError("OperatorExpr: empty expression");
  return std::visit(
      [](const auto& n) -> long {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LtiNode>) return n.ss.inputs();
        if constexpr (std::is_same_v<T, StaticNode>) return n.dim;
        if constexpr (std::is_same_v<T, TvGainNode>) return n.dim;
        if constexpr (std::is_same_v<T, IdentityNode>) return n.dim;
        if constexpr (std::is_same_v<T, SumNode>)
          return n.children.front().input_dim();
        if constexpr (std::is_same_v<T, CascadeNode>)
          return n.children.front().input_dim();
        if constexpr (std::is_same_v<T, ScaleNode>)
          return n.child.input_dim();
      },
      node_->v);
}

long OperatorExpr::output_dim() const {
  if (!node_) throw ArgumentError("OperatorExpr: empty expression");
  return std::visit(
      [](const auto& n) -> long {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LtiNode>) return n.ss.outputs();
        if constexpr (std::is_same_v<T, StaticNode>) return n.dim;
        if constexpr (std::is_same_v<T, TvGainNode>) return n.dim;
        if constexpr (std::is_same_v<T, IdentityNode>) return n.dim;
        if constexpr (std::is_same_v<T, SumNode>)
          return n.children.front().output_dim();
        if constexpr (std::is_same_v<T, CascadeNode>)
          return n.children.back().output_dim();
        if constexpr (std::is_same_v<T, ScaleNode>)
          return n.child.output_dim();
      },
      node_->v);
}

bool OperatorExpr::is_lti() const {
  if (!node_) throw ArgumentError("OperatorExpr: empty expression");
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LtiNode>) return true;
        if constexpr (std::is_same_v<T, StaticNode>) return false;
        if constexpr (std::is_same_v<T, TvGainNode>) return false;
        if constexpr (std::is_same_v<T, IdentityNode>) return true;
        if constexpr (std::is_same_v<T, SumNode>) {
          for (const auto& c : n.children)
            if (!c.is_lti()) return false;
          return true;
        }
        if constexpr (std::is_same_v<T, CascadeNode>) {
          for (const auto& c : n.children)
            if (!c.is_lti()) return false;
          return true;
        }
        if constexpr (std::is_same_v<T, ScaleNode>) return n.child.is_lti();
      },
      node_->v);
}

std::optional<StateSpace> OperatorExpr::to_state_space() const {
  if (!node_) throw ArgumentError("OperatorExpr: empty expression");
  return std::visit(
      [](const auto& n) -> std::optional<StateSpace> {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LtiNode>) return n.ss;
        if constexpr (std::is_same_v<T, IdentityNode>)
          return StateSpace::static_gain(
              n.scale * Eigen::MatrixXd::Identity(n.dim, n.dim));
        if constexpr (std::is_same_v<T, SumNode>) {
          std::optional<StateSpace> acc;
          for (const auto& c : n.children) {
            auto s = c.to_state_space();
            if (!s) return std::nullopt;
            acc = acc ? parallel(*acc, *s) : *s;
          }
          return acc;
        }
        if constexpr (std::is_same_v<T, CascadeNode>) {
          std::optional<StateSpace> acc;
          for (const auto& c : n.children) {
            auto s = c.to_state_space();
            if (!s) return std::nullopt;
            acc = acc ? series(*acc, *s) : *s;
          }
          return acc;
        }
        if constexpr (std::is_same_v<T, ScaleNode>) {
          auto s = n.child.to_state_space();
          if (!s) return std::nullopt;
          return scaled(*s, n.factor);
        }
        return std::nullopt;  // StaticNode, TvGainNode
      },
      node_->v);
}

std::string OperatorExpr::kind() const {
  if (!node_) return "empty";
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LtiNode>) return "lti";
        if constexpr (std::is_same_v<T, StaticNode>) return "static";
        if constexpr (std::is_same_v<T, TvGainNode>) return "tvgain";
        if constexpr (std::is_same_v<T, IdentityNode>) return "identity";
        if constexpr (std::is_same_v<T, SumNode>) return "sum";
        if constexpr (std::is_same_v<T, CascadeNode>) return "cascade";
        if constexpr (std::is_same_v<T, ScaleNode>) return "scale";
      },
      node_->v);
}

// ---- Steppers ---------------------------------------------------------------

namespace {

class LtiStepper : public Stepper {
 public:
  LtiStepper(const StateSpace& ss, double dt)
      : d_(discretize_zoh(ss, dt)), x_(Eigen::VectorXd::Zero(ss.states())) {}

  Eigen::VectorXd output(long, const Eigen::VectorXd& u) const override {
    return d_.C * x_ + d_.D * u;
  }
  void advance(long, const Eigen::VectorXd& u) override {
    x_ = d_.Ad * x_ + d_.Bd * u;
  }

 private:
  DiscreteStateSpace d_;
  Eigen::VectorXd x_;
};

class StaticStepper : public Stepper {
 public:
  StaticStepper(StaticMap map, double param) : map_(map), param_(param) {}
  Eigen::VectorXd output(long, const Eigen::VectorXd& u) const override {
    return u.unaryExpr(
        [this](double x) { return apply_static(map_, param_, x); });
  }
  void advance(long, const Eigen::VectorXd&) override {}

 private:
  StaticMap map_;
  double param_;
};

class TvGainStepper : public Stepper {
 public:
  TvGainStepper(TimeVaryingGain g, double dt) : g_(g), dt_(dt) {}
  Eigen::VectorXd output(long k, const Eigen::VectorXd& u) const override {
    return g_(dt_ * static_cast<double>(k)) * u;
  }
  void advance(long, const Eigen::VectorXd&) override {}

 private:
  TimeVaryingGain g_;
  double dt_;
};

class IdentityStepper : public Stepper {
 public:
  explicit IdentityStepper(double scale) : scale_(scale) {}
  Eigen::VectorXd output(long, const Eigen::VectorXd& u) const override {
    return scale_ * u;
  }
  void advance(long, const Eigen::VectorXd&) override {}

 private:
  double scale_;
};

class SumStepper : public Stepper {
 public:
  explicit SumStepper(std::vector<std::unique_ptr<Stepper>> children)
      : children_(std::move(children)) {}
  Eigen::VectorXd output(long k, const Eigen::VectorXd& u) const override {
    Eigen::VectorXd y = children_.front()->output(k, u);
    for (std::size_t i = 1; i < children_.size(); ++i)
      y += children_[i]->output(k, u);
    return y;
  }
  void advance(long k, const Eigen::VectorXd& u) override {
    for (auto& c : children_) c->advance(k, u);
  }

 private:
  std::vector<std::unique_ptr<Stepper>> children_;
};

class CascadeStepper : public Stepper {
 public:
  explicit CascadeStepper(std::vector<std::unique_ptr<Stepper>> children)
      : children_(std::move(children)) {}
  Eigen::VectorXd output(long k, const Eigen::VectorXd& u) const override {
    Eigen::VectorXd v = u;
    for (const auto& c : children_) v = c->output(k, v);
    return v;
  }
  void advance(long k, const Eigen::VectorXd& u) override {
    Eigen::VectorXd v = u;
    for (auto& c : children_) {
      Eigen::VectorXd next = c->output(k, v);
      c->advance(k, v);
      v = std::move(next);
    }
  }

 private:
  std::vector<std::unique_ptr<Stepper>> children_;
};

class ScaleStepper : public Stepper {
 public:
  ScaleStepper(double factor, std::unique_ptr<Stepper> child)
      : factor_(factor), child_(std::move(child)) {}
  Eigen::VectorXd output(long k, const Eigen::VectorXd& u) const override {
    return factor_ * child_->output(k, u);
  }
  void advance(long k, const Eigen::VectorXd& u) override {
    child_->advance(k, u);
  }

 private:
  double factor_;
  std::unique_ptr<Stepper> child_;
};

}  // namespace

std::unique_ptr<Stepper> OperatorExpr::make_stepper(
    const TimeGrid& grid) const {
  if (!node_) throw ArgumentError("OperatorExpr: empty expression");
  return std::visit(
      [&](const auto& n) -> std::unique_ptr<Stepper> {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LtiNode>)
          return std::make_unique<LtiStepper>(n.ss, grid.dt);
        if constexpr (std::is_same_v<T, StaticNode>)
          return std::make_unique<StaticStepper>(n.map, n.param);
        if constexpr (std::is_same_v<T, TvGainNode>)
          return std::make_unique<TvGainStepper>(n.gain, grid.dt);
        if constexpr (std::is_same_v<T, IdentityNode>)
          return std::make_unique<IdentityStepper>(n.scale);
        if constexpr (std::is_same_v<T, SumNode>) {
          std::vector<std::unique_ptr<Stepper>> cs;
          for (const auto& c : n.children) cs.push_back(c.make_stepper(grid));
          return std::make_unique<SumStepper>(std::move(cs));
        }
        if constexpr (std::is_same_v<T, CascadeNode>) {
          std::vector<std::unique_ptr<Stepper>> cs;
          for (const auto& c : n.children) cs.push_back(c.make_stepper(grid));
          return std::make_unique<CascadeStepper>(std::move(cs));
        }
        if constexpr (std::is_same_v<T, ScaleNode>)
          return std::make_unique<ScaleStepper>(n.factor,
                                                n.child.make_stepper(grid));
      },
      node_->v);
}

namespace {

Signal simulate_discrete(const DiscreteStateSpace& d, const Signal& u) {
  const long n_steps = u.steps();
  Eigen::MatrixXd y(n_steps, d.C.rows());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d.Ad.rows());
  for (long k = 0; k < n_steps; ++k) {
    const Eigen::VectorXd uk = u.values.row(k).transpose();
    y.row(k) = (d.C * x + d.D * uk).transpose();
    x = d.Ad * x + d.Bd * uk;
  }
  return Signal(u.grid, std::move(y));
}

void check_finite_output(const Signal& y, const char* who) {
  if (y.values.allFinite()) return;
  for (long k = 0; k < y.steps(); ++k) {
    if (!y.values.row(k).allFinite())
      throw OverflowError(std::string(who) +
                              ": non-finite output sample at step " +
                              std::to_string(k),
                          k);
  }
}

}  // namespace

Signal OperatorExpr::simulate(const Signal& u) const {
  if (u.channels() != input_dim())
    throw DimensionError("simulate: input has " + std::to_string(u.channels()) +
                         " channels, operator expects " +
                         std::to_string(input_dim()));
  Signal y;
  if (auto ss = to_state_space()) {
    // All-LTI tree: one exact ZOH run of the collapsed realization.
    y = simulate_discrete(discretize_zoh(*ss, u.grid.dt), u);
  } else {
    std::unique_ptr<Stepper> st = make_stepper(u.grid);
    Eigen::MatrixXd out(u.steps(), output_dim());
    for (long k = 0; k < u.steps(); ++k) {
      const Eigen::VectorXd uk = u.values.row(k).transpose();
      out.row(k) = st->output(k, uk).transpose();
      st->advance(k, uk);
    }
    y = Signal(u.grid, std::move(out));
  }
  check_finite_output(y, "simulate");
  return y;
}

CausalityCheck check_causality(
    const std::function<Signal(const Signal&)>& op,
    const std::vector<Signal>& probes, const std::vector<double>& horizons,
    double tol) {
  CausalityCheck r;
  if (probes.empty() || horizons.empty()) {
    r.empty_probe_warning = true;
    return r;
  }
  for (const Signal& u : probes) {
    const Signal yu = op(u);
    for (double T : horizons) {
      const Signal a = truncate(op(truncate(u, T)), T);
      const Signal b = truncate(yu, T);
      Signal diff = a;
      diff.values -= b.values;
      const double res = l2_norm(diff);
      r.max_residual = std::max(r.max_residual, res);
      if (res > tol) r.causal = false;
    }
  }
  return r;
}

CausalityCheck check_causality(const OperatorExpr& op,
                               const std::vector<Signal>& probes,
                               const std::vector<double>& horizons,
                               double tol) {
  return check_causality(
      [&op](const Signal& u) { return op.simulate(u); }, probes, horizons,
      tol);
}

}  // namespace dissipcert
