#include "dissipcert/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "dissipcert/config.hpp"
#include "dissipcert/errors.hpp"
#include "dissipcert/numerics.hpp"
#include "dissipcert/probes.hpp"

namespace dissipcert {

namespace {

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.template lpNorm<Eigen::Infinity>();
}

void require_chained(long m1, long p1, long m2, long p2) {
  if (p1 != m2 || p2 != m1) {
    std::ostringstream os;
    os << "feedback dimensions do not chain: first subsystem is " << m1
       << "->" << p1 << ", second is " << m2 << "->" << p2
       << " (need p1 = m2 and p2 = m1)";
    throw DimensionError(os.str());
  }
}

}  // namespace

ClosedLoop::ClosedLoop(OperatorExpr s1, OperatorExpr s2, bool clamp_e2)
    : sigma1(std::move(s1)), sigma2(std::move(s2)), e2_clamped(clamp_e2) {
  if (!sigma1.valid() || !sigma2.valid())
    throw ArgumentError("a closed loop needs two valid operators");
  if (sigma1.input_dim() < 1 || sigma1.output_dim() < 1)
    throw ArgumentError("closed-loop subsystems need at least one channel");
  require_chained(sigma1.input_dim(), sigma1.output_dim(), sigma2.input_dim(),
                  sigma2.output_dim());
}

StateSpace close_loop_lti(const StateSpace& ss1, const StateSpace& ss2) {
  require_chained(ss1.inputs(), ss1.outputs(), ss2.inputs(), ss2.outputs());
  const long n1 = ss1.states(), n2 = ss2.states();
  const long m1 = ss1.inputs(), m2 = ss2.inputs();
  const long p1 = ss1.outputs(), p2 = ss2.outputs();

  // Well-posedness of the algebraic loop: the output equations reduce to
  // (I + D2*D1) y2-side solves, so condition that Schur complement.
  Eigen::MatrixXd w =
      Eigen::MatrixXd::Identity(p2, p2) + ss2.D * ss1.D;
  double cond = std::numeric_limits<double>::infinity();
  if (Eigen::FullPivLU<Eigen::MatrixXd>(w).isInvertible()) cond = cond_2norm(w);
  if (!(cond < config().wellposed_cond_max)) {
    throw WellPosednessError(
        "algebraic feedback loop is ill posed: I + D2*D1 is singular or "
        "nearly so",
        cond);
  }

  // Output equations:  y1 + D1*y2 = C1 x1 + D1 e1
  //                   -D2*y1 + y2 = C2 x2 + D2 e2
  Eigen::MatrixXd lmat = Eigen::MatrixXd::Identity(p1 + p2, p1 + p2);
  lmat.topRightCorner(p1, p2) = ss1.D;
  lmat.bottomLeftCorner(p2, p1) = -ss2.D;

  Eigen::MatrixXd cstack = Eigen::MatrixXd::Zero(p1 + p2, n1 + n2);
  cstack.topLeftCorner(p1, n1) = ss1.C;
  cstack.bottomRightCorner(p2, n2) = ss2.C;

  Eigen::MatrixXd dstack = Eigen::MatrixXd::Zero(p1 + p2, m1 + m2);
  dstack.topLeftCorner(p1, m1) = ss1.D;
  dstack.bottomRightCorner(p2, m2) = ss2.D;

  Eigen::PartialPivLU<Eigen::MatrixXd> llu(lmat);
  const Eigen::MatrixXd c_cl = llu.solve(cstack);
  const Eigen::MatrixXd d_cl = llu.solve(dstack);

  // Internal inputs:  u = e + J*y  with  u1 = e1 - y2,  u2 = e2 + y1.
  Eigen::MatrixXd jmat = Eigen::MatrixXd::Zero(m1 + m2, p1 + p2);
  jmat.topRightCorner(m1, p2) = -Eigen::MatrixXd::Identity(m1, p2);
  jmat.bottomLeftCorner(m2, p1) = Eigen::MatrixXd::Identity(m2, p1);

  Eigen::MatrixXd ablk = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
  ablk.topLeftCorner(n1, n1) = ss1.A;
  ablk.bottomRightCorner(n2, n2) = ss2.A;

  Eigen::MatrixXd bblk = Eigen::MatrixXd::Zero(n1 + n2, m1 + m2);
  bblk.topLeftCorner(n1, m1) = ss1.B;
  bblk.bottomRightCorner(n2, m2) = ss2.B;

  const Eigen::MatrixXd a_cl = ablk + bblk * jmat * c_cl;
  const Eigen::MatrixXd b_cl =
      bblk * (Eigen::MatrixXd::Identity(m1 + m2, m1 + m2) + jmat * d_cl);
  return StateSpace(a_cl, b_cl, c_cl, d_cl);
}

LoopTrajectory simulate_loop(const ClosedLoop& cl, const Signal& e1,
                             const Signal& e2) {
  if (!(e1.grid == e2.grid))
    throw ArgumentError("e1 and e2 must live on the same time grid");
  if (e1.channels() != cl.m1() || e2.channels() != cl.m2()) {
    std::ostringstream os;
    os << "loop inputs have " << e1.channels() << "/" << e2.channels()
       << " channels; the interconnection needs " << cl.m1() << "/"
       << cl.m2();
    throw DimensionError(os.str());
  }
  if (cl.e2_clamped && e2.values.size() > 0 &&
      e2.values.cwiseAbs().maxCoeff() > 0.0) {
    throw ArgumentError(
        "this interconnection clamps e2 to zero; got a nonzero e2");
  }

  const long p1 = cl.p1(), p2 = cl.p2();

  // Exact path: collapse the linear pair once and run the closed realization.
  if (cl.sigma1.is_lti() && cl.sigma2.is_lti()) {
    const StateSpace comp = close_loop_lti(*cl.sigma1.to_state_space(),
                                           *cl.sigma2.to_state_space());
    const Signal e = hstack({e1, e2});
    const Signal y = OperatorExpr::lti(comp).simulate(e);
    LoopTrajectory tr;
    tr.e1 = e1;
    tr.e2 = e2;
    tr.y1 = channel_block(y, 0, p1);
    tr.y2 = channel_block(y, p1, p2);
    tr.u1 = Signal(e1.grid, e1.values - tr.y2.values);
    tr.u2 = Signal(e2.grid, e2.values + tr.y1.values);
    tr.residual = 0.0;
    return tr;
  }

  // General path: resolve the algebraic loop at each sample with a damped
  // fixed-point iteration on (y1, y2), warm-started from the previous step.
  const auto& cfg = config();
  const auto s1 = cl.sigma1.make_stepper(e1.grid);
  const auto s2 = cl.sigma2.make_stepper(e1.grid);
  const long n = e1.grid.n_steps;

  Eigen::MatrixXd y1v(n, p1), y2v(n, p2);
  Eigen::MatrixXd u1v(n, cl.m1()), u2v(n, cl.m2());
  Eigen::VectorXd y1k = Eigen::VectorXd::Zero(p1);
  Eigen::VectorXd y2k = Eigen::VectorXd::Zero(p2);
  double worst = 0.0;

  for (long k = 0; k < n; ++k) {
    const Eigen::VectorXd e1k = e1.values.row(k).transpose();
    const Eigen::VectorXd e2k = e2.values.row(k).transpose();
    double res = std::numeric_limits<double>::infinity();
    bool settled = false;
    for (long it = 0; it < cfg.loop_max_iter; ++it) {
      const Eigen::VectorXd f1 = s1->output(k, e1k - y2k);
      const Eigen::VectorXd f2 = s2->output(k, e2k + y1k);
      if (!f1.allFinite() || !f2.allFinite())
        throw OverflowError(
            "closed-loop signals left the floating-point range", k);
      res = std::max((f1 - y1k).lpNorm<Eigen::Infinity>(),
                     (f2 - y2k).lpNorm<Eigen::Infinity>());
      const double scale =
          std::max({inf_norm(e1k), inf_norm(e2k), inf_norm(y1k),
                    inf_norm(y2k)});
      if (res <= cfg.loop_residual_tol * (1.0 + scale)) {
        y1k = f1;
        y2k = f2;
        settled = true;
        break;
      }
      y1k += cfg.loop_damping * (f1 - y1k);
      y2k += cfg.loop_damping * (f2 - y2k);
    }
    if (!settled)
      throw DivergenceError(
          "algebraic loop iteration did not contract at this step", k, res);
    worst = std::max(worst, res);

    const Eigen::VectorXd u1k = e1k - y2k;
    const Eigen::VectorXd u2k = e2k + y1k;
    y1v.row(k) = y1k.transpose();
    y2v.row(k) = y2k.transpose();
    u1v.row(k) = u1k.transpose();
    u2v.row(k) = u2k.transpose();
    s1->advance(k, u1k);
    s2->advance(k, u2k);
  }

  LoopTrajectory tr;
  tr.e1 = e1;
  tr.e2 = e2;
  tr.u1 = Signal(e1.grid, std::move(u1v));
  tr.u2 = Signal(e1.grid, std::move(u2v));
  tr.y1 = Signal(e1.grid, std::move(y1v));
  tr.y2 = Signal(e1.grid, std::move(y2v));
  tr.residual = worst;
  return tr;
}

namespace {

// Restrict the closed realization to the requested input/output ports.
StateSpace select_channel(const StateSpace& comp, const ClosedLoop& cl,
                          LoopChannel channel) {
  const long m1 = cl.m1(), p1 = cl.p1(), p2 = cl.p2();
  switch (channel) {
    case LoopChannel::kE1ToY1:
      return subsystem(comp, 0, p1, 0, m1);
    case LoopChannel::kFull:
      if (cl.e2_clamped) return subsystem(comp, 0, p1 + p2, 0, m1);
      return comp;
  }
  throw ArgumentError("unknown loop channel");
}

}  // namespace

GainCertificate loop_gain(const ClosedLoop& cl, LoopChannel channel,
                          double tol) {
  if (cl.sigma1.is_lti() && cl.sigma2.is_lti()) {
    const StateSpace comp = close_loop_lti(*cl.sigma1.to_state_space(),
                                           *cl.sigma2.to_state_space());
    // hinf_norm raises UnboundedGainError when the closed A-matrix is not
    // Hurwitz; channel selection never touches A, so the verdict is about
    // internal stability of the loop itself.
    return hinf_norm(select_channel(comp, cl, channel), tol);
  }
  const bool joint = channel == LoopChannel::kFull && !cl.e2_clamped;
  const long want = joint ? cl.m1() + cl.m2() : cl.m1();
  return loop_gain_empirical(cl, channel, default_probe_family(want));
}

GainCertificate loop_gain(const ClosedLoop& cl, LoopChannel channel) {
  return loop_gain(cl, channel, config().hinf_tol);
}

GainCertificate loop_gain_empirical(const ClosedLoop& cl, LoopChannel channel,
                                    const std::vector<Signal>& probes) {
  if (probes.empty())
    throw ArgumentError("empirical loop gain needs at least one probe");
  const long m1 = cl.m1(), m2 = cl.m2();
  const bool joint = channel == LoopChannel::kFull && !cl.e2_clamped;
  const long want = joint ? m1 + m2 : m1;

  double best = 0.0;
  for (const Signal& probe : probes) {
    if (probe.channels() != want) {
      std::ostringstream os;
      os << "probe has " << probe.channels() << " channels; this channel "
         << "selection needs " << want;
      throw DimensionError(os.str());
    }
    const double denom = l2_norm(probe);
    if (!(denom > 0.0))
      throw ArgumentError("zero-energy probe cannot witness a gain");
    const Signal e1 = joint ? channel_block(probe, 0, m1) : probe;
    const Signal e2 =
        joint ? channel_block(probe, m1, m2) : Signal::zero(probe.grid, m2);
    const LoopTrajectory tr = simulate_loop(cl, e1, e2);
    const Signal out = channel == LoopChannel::kE1ToY1
                           ? tr.y1
                           : hstack({tr.y1, tr.y2});
    best = std::max(best, l2_norm(out) / denom);
  }

  GainCertificate cert;
  cert.value = best;
  cert.method = GainMethod::kEmpiricalLowerBound;
  cert.tol = 0.0;
  return cert;
}

std::pair<OperatorExpr, OperatorExpr> loop_transform_passivity(
    const OperatorExpr& sigma1, const OperatorExpr& sigma2, double eps) {
  if (!sigma1.valid() || !sigma2.valid())
    throw ArgumentError("the loop shift needs two valid operators");
  if (!(eps > 0.0))
    throw ArgumentError("the loop shift needs eps > 0");
  if (sigma1.input_dim() != sigma1.output_dim() ||
      sigma2.input_dim() != sigma2.output_dim())
    throw ArgumentError("the loop shift is defined for square subsystems");
  require_chained(sigma1.input_dim(), sigma1.output_dim(), sigma2.input_dim(),
                  sigma2.output_dim());

  OperatorExpr shifted = OperatorExpr::sum(
      sigma1, OperatorExpr::identity(sigma1.input_dim(), eps));

  const auto ss2 = sigma2.to_state_space();
  if (!ss2) {
    throw ArgumentError(
        "the eps-feedback closure of the second subsystem is formed in exact "
        "state space, so it must be linear time-invariant; got a '" +
        sigma2.kind() + "' operator");
  }
  OperatorExpr wrapped = OperatorExpr::lti(feedback_eps(*ss2, eps));
  return {std::move(shifted), std::move(wrapped)};
}

StateSpace loop_transform_equivalent_ss(const StateSpace& ss1,
                                        const StateSpace& ss2, double eps) {
  if (ss1.inputs() != ss1.outputs() || ss2.inputs() != ss2.outputs())
    throw ArgumentError("the port relabeling needs square subsystems");
  require_chained(ss1.inputs(), ss1.outputs(), ss2.inputs(), ss2.outputs());
  if (!(eps >= 0.0) || !std::isfinite(eps))
    throw ArgumentError("the loop shift needs a finite eps >= 0");
  const long q = ss1.inputs();

  // Move eps*I onto the first subsystem; re-cutting the second subsystem at
  // the shifted boundary undoes its wrap, which is the positive-eps closure.
  const StateSpace shifted = add_feedthrough(ss1, eps);
  const StateSpace uncut = feedback_eps_positive(ss2, eps);
  const StateSpace cl = close_loop_lti(shifted, uncut);

  // External ports of the shifted diagram relate to the original ones by
  // constants:  (e1~, e2~) = (e1, e2 - eps*e1)  going in, and
  //             (y1, y2) = (w1 + eps*w2 - eps*e1, w2)  coming out.
  Eigen::MatrixXd tin = Eigen::MatrixXd::Identity(2 * q, 2 * q);
  tin.bottomLeftCorner(q, q) = -eps * Eigen::MatrixXd::Identity(q, q);
  Eigen::MatrixXd tout = Eigen::MatrixXd::Identity(2 * q, 2 * q);
  tout.topRightCorner(q, q) = eps * Eigen::MatrixXd::Identity(q, q);
  Eigen::MatrixXd ext = Eigen::MatrixXd::Zero(2 * q, 2 * q);
  ext.topLeftCorner(q, q) = -eps * Eigen::MatrixXd::Identity(q, q);

  return StateSpace(cl.A, cl.B * tin, tout * cl.C, tout * cl.D * tin + ext);
}

namespace {

void require_orthogonal(const Eigen::MatrixXd& m, const char* side) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw ArgumentError(std::string(side) +
                        " multiplier must be a nonempty square matrix");
  const double defect =
      (m.transpose() * m - Eigen::MatrixXd::Identity(m.rows(), m.cols()))
          .norm();
  if (!(defect <= 1e-12)) {
    std::ostringstream os;
    os << side << " multiplier is not orthogonal (||M'M - I|| = " << defect
       << "); it would change the gain";
    throw ArgumentError(os.str());
  }
}

}  // namespace

OperatorExpr multiplier_transform(const StateSpace& g,
                                  const Eigen::MatrixXd& d1,
                                  const Eigen::MatrixXd& d2) {
  require_orthogonal(d1, "input");
  require_orthogonal(d2, "output");
  if (d1.rows() != g.inputs() || d2.rows() != g.outputs()) {
    std::ostringstream os;
    os << "multiplier sizes " << d1.rows() << "/" << d2.rows()
       << " do not match the " << g.inputs() << "->" << g.outputs()
       << " system";
    throw DimensionError(os.str());
  }
  OperatorExpr pre = OperatorExpr::lti(StateSpace::static_gain(d1));
  OperatorExpr mid = OperatorExpr::lti(g);
  OperatorExpr post = OperatorExpr::lti(StateSpace::static_gain(d2));
  return OperatorExpr::cascade(OperatorExpr::cascade(pre, mid), post);
}

}  // namespace dissipcert
