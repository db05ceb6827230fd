#pragma once

#include <utility>
#include <vector>

#include "dissipcert/gain.hpp"
#include "dissipcert/signals.hpp"
#include "dissipcert/systems.hpp"

namespace dissipcert {

// Standard negative-feedback interconnection of two operators:
//
//     u1 = e1 - y2,   y1 = sigma1(u1),
//     u2 = e2 + y1,   y2 = sigma2(u2).
//
// Dimensions must chain: sigma1 maps m1 -> p1, sigma2 maps p1 -> m1.  With
// e2_clamped the second exogenous input is pinned to zero and the loop is
// studied as a map from e1 alone.
struct ClosedLoop {
  OperatorExpr sigma1;
  OperatorExpr sigma2;
  bool e2_clamped = false;

  ClosedLoop(OperatorExpr s1, OperatorExpr s2, bool clamp_e2 = false);

  long m1() const { return sigma1.input_dim(); }
  long p1() const { return sigma1.output_dim(); }
  long m2() const { return sigma2.input_dim(); }
  long p2() const { return sigma2.output_dim(); }
};

// One solved closed-loop run: the external inputs, the resolved internal
// signals, and the worst algebraic-loop residual accepted over the horizon.
// The interconnection equations u1 = e1 - y2 and u2 = e2 + y1 hold exactly
// by construction; `residual` measures how far y1/y2 were from a fixed point
// of the subsystem maps when the per-step iteration stopped (zero on the
// exact linear path).
struct LoopTrajectory {
  Signal e1, e2, u1, u2, y1, y2;
  double residual = 0.0;
};

// Exact closed-loop realization for a linear pair: state [x1; x2], inputs
// (e1, e2), outputs (y1, y2).  The algebraic loop must be well posed:
// I + D2*D1 invertible with 2-norm condition number below the configured
// threshold, otherwise WellPosednessError carries the condition estimate.
StateSpace close_loop_lti(const StateSpace& ss1, const StateSpace& ss2);

// Solve the loop sample by sample over the shared grid of e1/e2.  A pair of
// LTI operators routes through the exact closed-form realization (residual
// zero).  Anything else resolves each step's algebraic loop by damped
// fixed-point iteration: DivergenceError when the iteration fails to
// contract, OverflowError when the trajectory leaves floating-point range
// (callers treat overflow as instability evidence).
LoopTrajectory simulate_loop(const ClosedLoop& cl, const Signal& e1,
                             const Signal& e2);

// Which closed-loop map a gain refers to.
enum class LoopChannel {
  kFull,    // (e1, e2) -> (y1, y2);  e1 -> (y1, y2) when e2 is clamped
  kE1ToY1,  // e1 -> y1 with e2 = 0
};

// L2-gain of the selected closed-loop channel.  LTI pairs get the exact
// H-infinity norm of the closed realization; an internally unstable loop
// raises UnboundedGainError (it does not map L2 into L2 -- the verdict the
// falsification experiments look for).  Mixed pairs get a probe-driven lower
// bound via simulate_loop.
GainCertificate loop_gain(const ClosedLoop& cl, LoopChannel channel,
                          double tol);
GainCertificate loop_gain(const ClosedLoop& cl, LoopChannel channel);

// The probe-driven path of loop_gain, exposed for custom probe sets.  Probes
// carry the channel's input dimension: m1 + m2 stacked (e1, e2) columns for
// the unclamped full channel, m1 columns otherwise.  The result is a lower
// bound (max output/input energy ratio over the probes).
GainCertificate loop_gain_empirical(const ClosedLoop& cl, LoopChannel channel,
                                    const std::vector<Signal>& probes);

// Shift eps*I across the loop: returns (sigma1 + eps*I, sigma2 wrapped in
// negative feedback with eps*I).  The wrap gives the second subsystem an
// output passivity margin of at least eps whenever sigma2 is passive; the
// pair's interconnection, re-cut at the shifted port boundary (see
// loop_transform_equivalent_ss), has exactly the original closed-loop gain.
// sigma2 must be LTI -- its eps-feedback closure is formed in exact state
// space; I + eps*D2 singular raises WellPosednessError.
std::pair<OperatorExpr, OperatorExpr> loop_transform_passivity(
    const OperatorExpr& sigma1, const OperatorExpr& sigma2, double eps);

// The shifted loop assembled back into a realization of the ORIGINAL
// external map (e1, e2) -> (y1, y2): eps*I moves across the summing junction
// onto the first subsystem, the second subsystem is re-cut at the new port
// boundary (which inverts the eps wrap), and the external ports are
// relabeled by constant matrices.  The result has the same transfer function
// as close_loop_lti(ss1, ss2) -- this is the object that makes "the shift
// preserves closed-loop gain" a checkable statement rather than an
// assumption.  eps = 0 degenerates to close_loop_lti itself.
StateSpace loop_transform_equivalent_ss(const StateSpace& ss1,
                                        const StateSpace& ss2, double eps);

// Sandwich G between two static orthogonal maps: u -> d1*u -> G -> d2*(.).
// Orthogonality makes both factors unit-gain and invertible, so the cascade
// has exactly the gain of G.  Non-orthogonal matrices are rejected.
OperatorExpr multiplier_transform(const StateSpace& g,
                                  const Eigen::MatrixXd& d1,
                                  const Eigen::MatrixXd& d2);

}  // namespace dissipcert
