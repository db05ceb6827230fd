#include "dissipcert/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dissipcert/config.hpp"
#include "dissipcert/errors.hpp"
#include "dissipcert/feedback.hpp"
#include "dissipcert/gain.hpp"
#include "dissipcert/numerics.hpp"
#include "dissipcert/passivity.hpp"
#include "dissipcert/probes.hpp"
#include "dissipcert/signals.hpp"

namespace dissipcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string to_string(EnvKind k) {
  switch (k) {
    case EnvKind::kStaticGain:
      return "static_gain";
    case EnvKind::kFirstOrder:
      return "first_order";
    case EnvKind::kParallelMix:
      return "parallel_mix";
    case EnvKind::kGainBall:
      return "gain_ball";
  }
  return "unknown";
}

std::string to_string(CertMode m) {
  switch (m) {
    case CertMode::kPassive:
      return "passive";
    case CertMode::kOsp:
      return "osp";
    case CertMode::kGainBound:
      return "gain_bound";
  }
  return "unknown";
}

std::string to_string(FalsifyMode m) {
  return m == FalsifyMode::kE2Free ? "e2_free" : "e2_zero";
}

long EnvFamily::n_params() const {
  switch (kind) {
    case EnvKind::kStaticGain:
    case EnvKind::kGainBall:
      return 1;
    case EnvKind::kFirstOrder:
      return 2;
    case EnvKind::kParallelMix:
      return 3;
  }
  return 0;
}

namespace {

EnvFamily family_with_bounds(EnvKind kind, std::initializer_list<double> lo,
                             std::initializer_list<double> hi) {
  EnvFamily fam;
  fam.kind = kind;
  fam.lo = Eigen::Map<const Eigen::VectorXd>(lo.begin(),
                                             static_cast<long>(lo.size()));
  fam.hi = Eigen::Map<const Eigen::VectorXd>(hi.begin(),
                                             static_cast<long>(hi.size()));
  for (long i = 0; i < fam.lo.size(); ++i) {
    if (!(fam.lo[i] <= fam.hi[i])) {
      throw ArgumentError("family parameter bounds must satisfy lo <= hi");
    }
  }
  return fam;
}

}  // namespace

EnvFamily EnvFamily::static_gain(double k_lo, double k_hi) {
  return family_with_bounds(EnvKind::kStaticGain, {k_lo}, {k_hi});
}

EnvFamily EnvFamily::first_order(double k_lo, double k_hi, double s0_lo,
                                 double s0_hi) {
  return family_with_bounds(EnvKind::kFirstOrder, {k_lo, s0_lo},
                            {k_hi, s0_hi});
}

EnvFamily EnvFamily::parallel_mix(double c_lo, double c_hi, double k_lo,
                                  double k_hi, double s0_lo, double s0_hi) {
  return family_with_bounds(EnvKind::kParallelMix, {c_lo, k_lo, s0_lo},
                            {c_hi, k_hi, s0_hi});
}

EnvFamily EnvFamily::gain_ball(double alpha) {
  if (!(alpha > 0.0)) throw ArgumentError("gain ball radius must be positive");
  EnvFamily fam = family_with_bounds(EnvKind::kGainBall, {-alpha}, {alpha});
  fam.mode = CertMode::kGainBound;
  fam.mode_level = alpha;
  return fam;
}

StateSpace env_member(const EnvFamily& family, const Eigen::VectorXd& theta) {
  if (theta.size() != family.n_params()) {
    std::ostringstream msg;
    msg << "family '" << to_string(family.kind) << "' takes "
        << family.n_params() << " parameters, got " << theta.size();
    throw ArgumentError(msg.str());
  }
  for (long i = 0; i < theta.size(); ++i) {
    if (!(theta[i] >= family.lo[i] && theta[i] <= family.hi[i])) {
      std::ostringstream msg;
      msg << "parameter " << i << " = " << theta[i] << " outside ["
          << family.lo[i] << ", " << family.hi[i] << "]";
      throw ArgumentError(msg.str());
    }
  }
  switch (family.kind) {
    case EnvKind::kStaticGain:
    case EnvKind::kGainBall: {
      Eigen::MatrixXd d(1, 1);
      d << theta[0];
      return StateSpace::static_gain(d);
    }
    case EnvKind::kFirstOrder:
      return StateSpace::first_order(theta[0], theta[1]);
    case EnvKind::kParallelMix: {
      Eigen::MatrixXd d(1, 1);
      d << theta[0];
      return parallel(StateSpace::static_gain(d),
                      StateSpace::first_order(theta[1], theta[2]));
    }
  }
  throw ArgumentError("unknown family kind");
}

MemberCertificate certify_member(const StateSpace& member, CertMode mode,
                                 double level) {
  MemberCertificate cert;
  cert.mode = mode;
  cert.level = level;
  switch (mode) {
    case CertMode::kPassive:
      cert.margin = pr_margin(member);
      break;
    case CertMode::kOsp:
      cert.margin = osp_index(member) - level;
      break;
    case CertMode::kGainBound:
      try {
        cert.margin = level - hinf_norm(member).value;
      } catch (const UnboundedGainError&) {
        cert.margin = -kInf;
      }
      break;
  }
  cert.boundary = member.states() > 0 &&
                  spectral_abscissa(member.A) >= -config().stability_margin;
  return cert;
}

OperatorExpr make_env(const EnvFamily& family, const Eigen::VectorXd& theta,
                      MemberCertificate* certificate) {
  const StateSpace member = env_member(family, theta);
  const MemberCertificate cert =
      certify_member(member, family.mode, family.mode_level);
  if (!(cert.margin >= -config().cert_tol)) {
    std::ostringstream msg;
    msg << "member of family '" << to_string(family.kind)
        << "' failed its '" << to_string(family.mode)
        << "' certification: margin " << cert.margin;
    throw RejectedMemberError(msg.str(), cert.margin);
  }
  if (certificate) *certificate = cert;
  return OperatorExpr::lti(member);
}

OperatorExpr make_env(const EnvFamily& family, const Eigen::VectorXd& theta) {
  return make_env(family, theta, nullptr);
}

namespace {

// Everything one falsification campaign needs to score a parameter point.
struct CampaignContext {
  const EnvFamily* family = nullptr;
  FalsifyMode mode = FalsifyMode::kE2Free;
  // LTI path.
  std::optional<StateSpace> lti_block;
  // Simulation path.
  const OperatorExpr* block = nullptr;
  std::vector<Signal> probes;
  Signal e2_zero;
  // Shared outcome accumulators.
  double best_gain_lb = -kInf;
  std::optional<long> best_overflow_step;
};

struct PointOutcome {
  double objective = -kInf;
  bool rejected = true;
  std::optional<long> overflow_step;
};

PointOutcome score_point(CampaignContext& ctx, const Eigen::VectorXd& theta) {
  PointOutcome out;
  const StateSpace member = env_member(*ctx.family, theta);
  const MemberCertificate cert =
      certify_member(member, ctx.family->mode, ctx.family->mode_level);
  if (!(cert.margin >= -config().cert_tol)) return out;  // not certified

  if (ctx.lti_block) {
    StateSpace comp;
    try {
      comp = close_loop_lti(*ctx.lti_block, member);
    } catch (const WellPosednessError&) {
      return out;  // algebraic loop unsolvable: no verdict at this point
    }
    out.rejected = false;
    out.objective = spectral_abscissa(comp.A);
    if (out.objective < -config().stability_margin) {
      // Stable member: record the closed-loop gain on the mode's channel.
      const StateSpace channel =
          ctx.mode == FalsifyMode::kE2Zero ? subsystem(comp, 0, 1, 0, 1)
                                           : comp;
      try {
        ctx.best_gain_lb =
            std::max(ctx.best_gain_lb, hinf_norm(channel).value);
      } catch (const UnboundedGainError&) {
        // Marginally stable in the gap between margins: no gain to record.
      }
    }
    return out;
  }

  // Simulated path: drive the loop with the probe set and watch the energy.
  const ClosedLoop cl(*ctx.block, OperatorExpr::lti(member),
                      ctx.mode == FalsifyMode::kE2Zero);
  double worst_ratio = 0.0;
  for (const Signal& probe : ctx.probes) {
    try {
      const LoopTrajectory traj = simulate_loop(cl, probe, ctx.e2_zero);
      const double in_energy = inner_product(probe, probe);
      double out_energy = inner_product(traj.y1, traj.y1);
      if (ctx.mode == FalsifyMode::kE2Free) {
        out_energy += inner_product(traj.y2, traj.y2);
      }
      if (in_energy > 0.0) {
        worst_ratio = std::max(worst_ratio, out_energy / in_energy);
      }
    } catch (const OverflowError& e) {
      out.rejected = false;
      out.objective = kInf;
      out.overflow_step = e.first_bad_index;
      return out;
    } catch (const DivergenceError&) {
      return out;  // solver failure: no verdict at this point
    }
  }
  out.rejected = false;
  out.objective = worst_ratio;
  if (worst_ratio <= config().overflow_energy_ratio) {
    ctx.best_gain_lb = std::max(ctx.best_gain_lb, std::sqrt(worst_ratio));
  }
  return out;
}

}  // namespace

FalsificationResult falsify(const OperatorExpr& sigma1,
                            const EnvFamily& family, int budget,
                            FalsifyMode mode) {
  if (!sigma1.valid()) throw ArgumentError("falsify needs a valid block");
  if (budget < 1) throw ArgumentError("falsify needs budget >= 1");
  if (sigma1.input_dim() != 1 || sigma1.output_dim() != 1) {
    throw DimensionError(
        "environment families are single-channel; the block must be too");
  }

  CampaignContext ctx;
  ctx.family = &family;
  ctx.mode = mode;
  ctx.block = &sigma1;
  ctx.lti_block = sigma1.to_state_space();
  if (!ctx.lti_block) {
    // 80 s probe horizon: long enough for a growing mode to clear the
    // energy-ratio bar, short enough to keep campaigns cheap.
    const TimeGrid grid(0.02, 4001);
    auto probes = probe_family_v1(grid, 1, config().seed);
    probes.resize(std::min<std::size_t>(probes.size(), 4));
    ctx.probes = std::move(probes);
    ctx.e2_zero = Signal::zero(grid, 1);
  }

  FalsificationResult result;
  const long d = family.n_params();
  std::vector<long> free_dims;
  for (long i = 0; i < d; ++i) {
    if (family.hi[i] > family.lo[i]) free_dims.push_back(i);
  }

  // Grid resolution per free dimension, shrunk so the grid fits the budget.
  long res = config().falsify_grid;
  if (!free_dims.empty()) {
    const double per_dim =
        std::floor(std::pow(static_cast<double>(budget),
                            1.0 / static_cast<double>(free_dims.size())));
    res = std::max<long>(2, std::min<long>(res, static_cast<long>(per_dim)));
  }

  double best_objective = -kInf;
  Eigen::VectorXd best_theta;
  std::optional<long> best_overflow;

  auto evaluate = [&](const Eigen::VectorXd& theta) {
    PointOutcome out = score_point(ctx, theta);
    ++result.evaluations;
    result.trace.push_back({theta, out.objective, out.rejected});
    if (!out.rejected && out.objective > best_objective) {
      best_objective = out.objective;
      best_theta = theta;
      best_overflow = out.overflow_step;
    }
  };

  // Row-major sweep of the coarse grid.
  long total = 1;
  for (long i = 0; i < d; ++i) {
    total *= (family.hi[i] > family.lo[i]) ? res : 1;
  }
  for (long flat = 0; flat < total && result.evaluations < budget; ++flat) {
    Eigen::VectorXd theta(d);
    long rem = flat;
    for (long i = d - 1; i >= 0; --i) {
      const long n_i = (family.hi[i] > family.lo[i]) ? res : 1;
      const long idx = rem % n_i;
      rem /= n_i;
      theta[i] = n_i == 1 ? family.lo[i]
                          : family.lo[i] + (family.hi[i] - family.lo[i]) *
                                               static_cast<double>(idx) /
                                               static_cast<double>(n_i - 1);
    }
    evaluate(theta);
  }

  // Pattern-search refinement around the best point (skipped when nothing
  // scored or the objective is already off the scale).
  if (!free_dims.empty() && best_theta.size() == d &&
      std::isfinite(best_objective)) {
    Eigen::VectorXd step(d);
    for (long i = 0; i < d; ++i) {
      step[i] = (family.hi[i] - family.lo[i]) /
                static_cast<double>(std::max<long>(res - 1, 1));
    }
    int refine_used = 0;
    while (refine_used < config().falsify_refine_iters &&
           result.evaluations < budget) {
      bool improved = false;
      for (long i : free_dims) {
        for (double sign : {+1.0, -1.0}) {
          if (refine_used >= config().falsify_refine_iters ||
              result.evaluations >= budget) {
            break;
          }
          Eigen::VectorXd cand = best_theta;
          cand[i] = std::clamp(cand[i] + sign * step[i], family.lo[i],
                               family.hi[i]);
          if (cand[i] == best_theta[i]) continue;
          const double before = best_objective;
          evaluate(cand);
          ++refine_used;
          if (best_objective > before) improved = true;
        }
      }
      if (!improved) {
        double max_rel = 0.0;
        for (long i : free_dims) {
          step[i] *= 0.5;
          const double range = family.hi[i] - family.lo[i];
          if (range > 0.0) max_rel = std::max(max_rel, step[i] / range);
        }
        if (max_rel < 1e-9) break;
      }
    }
  }

  // Verdict.
  const bool lti = ctx.lti_block.has_value();
  const bool unstable =
      best_theta.size() == d &&
      (lti ? best_objective >= config().instability_margin
           : (best_overflow.has_value() ||
              best_objective > config().overflow_energy_ratio));
  if (unstable) {
    result.destabilized = true;
    result.theta = best_theta;
    result.member_certificate = certify_member(
        env_member(family, best_theta), family.mode, family.mode_level);
    if (lti) {
      result.closed_loop_abscissa = best_objective;
    } else if (best_overflow.has_value()) {
      result.overflow_step = best_overflow;
    } else {
      result.energy_ratio = best_objective;
    }
  } else if (std::isfinite(ctx.best_gain_lb) && ctx.best_gain_lb >= 0.0) {
    result.max_gain_lb = ctx.best_gain_lb;
  }
  return result;
}

MassSpringReport mass_spring_case(double m, double d, double s0, double k) {
  if (!(m > 0.0)) throw ArgumentError("mass coefficient m must be positive");
  if (!(k > 0.0)) throw ArgumentError("spring coefficient k must be positive");

  Eigen::MatrixXd A(1, 1), B(1, 1), C(1, 1), Dm(1, 1);
  A << -d / m;
  B << 1.0 / m;
  C << 1.0;
  Dm << 0.0;
  const StateSpace mass(A, B, C, Dm);
  const StateSpace spring = StateSpace::first_order(k, s0);
  const StateSpace comp = close_loop_lti(mass, spring);

  MassSpringReport rep;
  rep.m = m;
  rep.d = d;
  rep.s0 = s0;
  rep.k = k;
  // A coarse grid is exact here: the mass block's Re/|G|^2 ratio is constant
  // in omega (= d/m normalized by the input scaling) and the spring's real
  // part is monotone, so the scan extremum sits at a grid endpoint for any
  // density.  200 points keeps dense parameter sweeps fast.
  const FrequencyGrid grid(config().freq_omega_min, config().freq_omega_max,
                           200);
  rep.mass_osp_index = osp_index(mass, grid);
  rep.mass_osp = rep.mass_osp_index > 0.0;
  rep.spring_pr_margin = pr_margin(spring, grid);
  rep.spring_passive = s0 >= 0.0;

  Eigen::EigenSolver<Eigen::MatrixXd> eig(comp.A);
  rep.eigenvalues = eig.eigenvalues();
  rep.spectral_abscissa = spectral_abscissa(comp.A);
  rep.stable = rep.spectral_abscissa < -config().stability_margin;

  rep.trace_condition = d / m + s0;
  rep.det_condition = (d * s0 + k) / m;
  rep.predicate = rep.trace_condition > 0.0;
  const double band = config().stability_margin;
  rep.marginal = std::abs(rep.trace_condition) <= band ||
                 std::abs(rep.det_condition) <= band ||
                 std::abs(rep.spectral_abscissa) <= band;
  rep.consistent =
      rep.marginal ||
      rep.stable == (rep.trace_condition > 0.0 && rep.det_condition > 0.0);
  return rep;
}

}  // namespace dissipcert
