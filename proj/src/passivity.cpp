#include "dissipcert/passivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dissipcert/config.hpp"
#include "dissipcert/errors.hpp"

namespace dissipcert {

std::string to_string(PassivityMethod m) {
  switch (m) {
    case PassivityMethod::kFrequencyGrid:
      return "frequency_grid";
    case PassivityMethod::kEmpiricalProbes:
      return "empirical_probes";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_square(const StateSpace& ss, const char* who) {
  if (ss.inputs() != ss.outputs())
    throw DimensionError(std::string(who) +
                         ": passivity needs a square system (" +
                         std::to_string(ss.outputs()) + " outputs vs " +
                         std::to_string(ss.inputs()) + " inputs)");
}

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& G) {
  return 0.5 * (G + G.adjoint());
}

// Fold the analytic omega -> infinity value (from the feedthrough) into a
// grid scan result.
ScanResult fold_infinity(ScanResult r, double at_inf) {
  if (at_inf < r.value) return {at_inf, kInf};
  return r;
}

}  // namespace

ScanResult pr_margin_scan(const StateSpace& ss, const FrequencyGrid& grid) {
  require_square(ss, "pr_margin");
  const double at_inf =
      min_eig_hermitian_part(ss.D.cast<std::complex<double>>());
  if (ss.states() == 0) return {at_inf, kInf};
  ScanResult r = scan_min(
      [&](double w) { return min_eig_hermitian_part(freq_response(ss, w)); },
      grid, config().freq_refine_rel);
  return fold_infinity(r, at_inf);
}

double pr_margin(const StateSpace& ss, const FrequencyGrid& grid) {
  return pr_margin_scan(ss, grid).value;
}
double pr_margin(const StateSpace& ss) {
  return pr_margin(ss, FrequencyGrid());
}

ScanResult osp_index_scan(const StateSpace& ss, const FrequencyGrid& grid) {
  require_square(ss, "osp_index");
  auto eps_at = [&](const Eigen::MatrixXcd& G) {
    const Eigen::MatrixXcd W = G.adjoint() * G;
    // Regularize relative to W's own scale: an absolute floor would skew the
    // index wherever |G| is small (high frequency on strictly proper
    // systems), which is exactly where the infimum usually lives.
    const double reg = std::max(1e-13 * W.norm(), 1e-300);
    return min_generalized_eig(hermitian_part(G), W, reg);
  };

  std::optional<ScanResult> best;
  // The omega -> infinity constraint reads  D + D^T >= 2*eps*D^T D, which is
  // vacuous when D is singular (any eps works on the null space directions),
  // so it participates only for nonsingular D.
  Eigen::FullPivLU<Eigen::MatrixXd> dlu(ss.D);
  if (ss.D.size() > 0 && dlu.isInvertible())
    best = ScanResult{eps_at(ss.D.cast<std::complex<double>>()), kInf};

  if (ss.states() > 0 || !best) {
    ScanResult r =
        scan_min([&](double w) { return eps_at(freq_response(ss, w)); }, grid,
                 config().freq_refine_rel);
    if (!best || r.value < best->value) best = r;
  }
  return *best;
}

double osp_index(const StateSpace& ss, const FrequencyGrid& grid) {
  return osp_index_scan(ss, grid).value;
}
double osp_index(const StateSpace& ss) {
  return osp_index(ss, FrequencyGrid());
}

ScanResult strict_passivity_scan(const StateSpace& ss,
                                 const FrequencyGrid& grid) {
  require_square(ss, "strict_passivity_index");
  const long m = ss.inputs();
  auto c_at = [&](const Eigen::MatrixXcd& G) {
    const Eigen::MatrixXcd W =
        Eigen::MatrixXcd::Identity(m, m) + G.adjoint() * G;
    return min_generalized_eig(hermitian_part(G), W, 0.0);
  };
  // W >= I always, so the infinity term is always meaningful.
  ScanResult best{c_at(ss.D.cast<std::complex<double>>()), kInf};
  if (ss.states() > 0) {
    ScanResult r =
        scan_min([&](double w) { return c_at(freq_response(ss, w)); }, grid,
                 config().freq_refine_rel);
    if (r.value < best.value) best = r;
  }
  return best;
}

double strict_passivity_index(const StateSpace& ss,
                              const FrequencyGrid& grid) {
  return strict_passivity_scan(ss, grid).value;
}
double strict_passivity_index(const StateSpace& ss) {
  return strict_passivity_index(ss, FrequencyGrid());
}

PassivityReport lti_passivity_report(const StateSpace& ss,
                                     const FrequencyGrid& grid) {
  ScanResult d = pr_margin_scan(ss, grid);
  ScanResult e = osp_index_scan(ss, grid);
  PassivityReport r;
  r.delta = d.value;
  r.epsilon = e.value;
  r.method = PassivityMethod::kFrequencyGrid;
  r.tol = config().freq_refine_rel;
  r.delta_witness_frequency = d.omega;
  r.epsilon_witness_frequency = e.omega;
  // Frequency-domain conclusions have certificate force only when no pole
  // lies in the open right half plane; otherwise the L2 supply-rate reading
  // of the margins breaks down and this is evidence, not proof.
  r.is_certificate =
      spectral_abscissa(ss.A) <= config().stability_margin;
  return r;
}

PassivityReport lti_passivity_report(const StateSpace& ss) {
  return lti_passivity_report(ss, FrequencyGrid());
}

PassivityReport empirical_passivity_deficit(
    const OperatorExpr& op, const std::vector<Signal>& probes,
    const std::vector<double>& T_list) {
  if (op.input_dim() != op.output_dim())
    throw DimensionError(
        "empirical_passivity_deficit: operator must be square, got " +
        std::to_string(op.input_dim()) + " -> " +
        std::to_string(op.output_dim()));

  PassivityReport r;
  r.method = PassivityMethod::kEmpiricalProbes;
  r.is_certificate = false;
  r.tol = 0.0;

  double min_supply = kInf;
  double delta = kInf, epsilon = kInf;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    Signal u = probes[i];
    Signal y;
    try {
      y = op.simulate(u);
    } catch (const OverflowError& ov) {
      // The trajectory left double range at step `first_bad_index`; keep the
      // finite prefix as honest evidence instead of discarding the probe.
      if (ov.first_bad_index < 2) continue;
      TimeGrid cut(u.grid.dt, ov.first_bad_index);
      u = Signal(cut, probes[i].values.topRows(ov.first_bad_index));
      y = op.simulate(u);
    }
    std::vector<double> horizons =
        T_list.empty() ? std::vector<double>{u.grid.t_end()} : T_list;
    for (double T : horizons) {
      if (T > u.grid.t_end()) T = u.grid.t_end();
      const Signal ut = truncate(u, T);
      const Signal yt = truncate(y, T);
      const double s = inner_product(ut, yt);
      const double a = inner_product(ut, ut);
      const double b = inner_product(yt, yt);
      if (s < min_supply) {
        min_supply = s;
        r.witness_probe = static_cast<long>(i);
        r.witness_horizon = T;
      }
      if (a > 1e-14) delta = std::min(delta, s / (2.0 * a));
      if (b > 1e-14) epsilon = std::min(epsilon, s / (2.0 * b));
    }
  }
  r.delta = std::isfinite(delta) ? delta : 0.0;
  r.epsilon = std::isfinite(epsilon) ? epsilon : 0.0;
  r.min_supply = std::isfinite(min_supply) ? std::optional<double>(min_supply)
                                           : std::nullopt;
  return r;
}

}  // namespace dissipcert
