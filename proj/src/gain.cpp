#include "dissipcert/gain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dissipcert/config.hpp"
#include "dissipcert/errors.hpp"

namespace dissipcert {

std::string to_string(GainMethod m) {
  switch (m) {
    case GainMethod::kHamiltonianBisection:
      return "hamiltonian_bisection";
    case GainMethod::kFrequencyGrid:
      return "frequency_grid";
    case GainMethod::kEmpiricalLowerBound:
      return "empirical_lower_bound";
  }
  return "unknown";
}

double sigma_max_response(const StateSpace& ss, double omega) {
  Eigen::MatrixXcd G = freq_response(ss, omega);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(G);
  return svd.singularValues()(0);
}

ScanResult scan_gain(const StateSpace& ss, const FrequencyGrid& grid) {
  return scan_max([&](double w) { return sigma_max_response(ss, w); }, grid,
                  config().freq_refine_rel);
}

GainCertificate gain_frequency_grid(const StateSpace& ss,
                                    const FrequencyGrid& grid) {
  ScanResult r = scan_gain(ss, grid);
  GainCertificate c;
  c.method = GainMethod::kFrequencyGrid;
  c.value = r.value;
  c.peak_frequency = r.omega;
  c.tol = 0.0;  // lower bound: the scan never overestimates sup_w
  // The w -> infinity limit is available analytically.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ss.D);
  const double at_inf = ss.D.size() == 0 ? 0.0 : svd.singularValues()(0);
  if (at_inf > c.value) {
    c.value = at_inf;
    c.peak_frequency = std::numeric_limits<double>::infinity();
  }
  return c;
}

namespace {

// Does gamma sit strictly below the H-infinity norm?  Test: the Hamiltonian
//   H = [ A + B R^-1 D^T C        B R^-1 B^T      ]
//       [ -g^2 C^T S^-1 C      -(A + B R^-1 D^T C)^T ]
// with R = g^2 I - D^T D, S = g^2 I - D D^T has an imaginary-axis eigenvalue
// exactly when gamma < ||G||_inf (valid for gamma > sigma_max(D)).  When it
// does, the imaginary parts locate frequencies where sigma_max(G(jw)) = gamma.
struct HamiltonianProbe {
  bool has_imag_axis_eig = false;
  std::vector<double> crossing_freqs;
};

HamiltonianProbe probe_gamma(const StateSpace& ss, double gamma) {
  const long n = ss.states(), m = ss.inputs(), p = ss.outputs();
  const double g2 = gamma * gamma;
  Eigen::MatrixXd R = g2 * Eigen::MatrixXd::Identity(m, m) -
                      ss.D.transpose() * ss.D;
  Eigen::MatrixXd S = g2 * Eigen::MatrixXd::Identity(p, p) -
                      ss.D * ss.D.transpose();
  Eigen::PartialPivLU<Eigen::MatrixXd> Rlu(R), Slu(S);
  Eigen::MatrixXd RinvBt = Rlu.solve(ss.B.transpose());
  Eigen::MatrixXd RinvDtC = Rlu.solve(ss.D.transpose() * ss.C);
  Eigen::MatrixXd Acl = ss.A + ss.B * RinvDtC;

  Eigen::MatrixXd H(2 * n, 2 * n);
  H.topLeftCorner(n, n) = Acl;
  H.topRightCorner(n, n) = ss.B * RinvBt;
  H.bottomLeftCorner(n, n) = -g2 * ss.C.transpose() * Slu.solve(ss.C);
  H.bottomRightCorner(n, n) = -Acl.transpose();

  Eigen::EigenSolver<Eigen::MatrixXd> es(H, false);
  HamiltonianProbe out;
  const double tol = config().imag_axis_tol;
  for (long i = 0; i < 2 * n; ++i) {
    const std::complex<double> lam = es.eigenvalues()(i);
    if (std::abs(lam.real()) <= tol * (1.0 + std::abs(lam))) {
      out.has_imag_axis_eig = true;
      out.crossing_freqs.push_back(std::abs(lam.imag()));
    }
  }
  return out;
}

}  // namespace

GainCertificate hinf_norm(const StateSpace& ss, double tol) {
  if (!(tol > 0.0)) throw ArgumentError("hinf_norm: tol must be positive");
  GainCertificate cert;
  cert.method = GainMethod::kHamiltonianBisection;
  cert.tol = tol;

  Eigen::JacobiSVD<Eigen::MatrixXd> dsvd(ss.D);
  const double sigma_d = ss.D.size() == 0 ? 0.0 : dsvd.singularValues()(0);

  if (ss.states() == 0) {
    // No dynamics: the norm is sigma_max(D) exactly.
    cert.value = sigma_d;
    cert.tol = 0.0;
    return cert;
  }

  const double abscissa = spectral_abscissa(ss.A);
  if (abscissa >= -config().stability_margin)
    throw UnboundedGainError(
        "hinf_norm: A is not Hurwitz (spectral abscissa " +
            std::to_string(abscissa) +
            "), the operator does not map L2 into L2",
        abscissa);

  // Bracket [lo, hi]: lo = sigma_max(D) is always a lower bound; the upper
  // start adds a crude resolvent bound and is doubled until the Hamiltonian
  // test reports no imaginary-axis eigenvalues.
  double lo = sigma_d;
  double hi = sigma_d + 2.0 * ss.C.norm() * ss.B.norm() / (-abscissa) + tol;
  std::vector<double> last_crossings;
  bool crossing_at_hi = probe_gamma(ss, hi).has_imag_axis_eig;
  for (int i = 0; i < 128 && crossing_at_hi; ++i) {
    hi = sigma_d + 2.0 * (hi - sigma_d);
    crossing_at_hi = probe_gamma(ss, hi).has_imag_axis_eig;
  }
  if (crossing_at_hi) {
    // A pole too close to the imaginary axis keeps the eigenvalue test
    // positive at every gamma, so no finite level can be certified.
    throw UnboundedGainError(
        "hinf_norm: the response cannot be bounded away from the imaginary "
        "axis at the configured eigenvalue tolerance (spectral abscissa " +
            std::to_string(abscissa) + ")",
        abscissa);
  }

  while (hi - lo > 2.0 * tol) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;  // bracket exhausted in floating point
    HamiltonianProbe p = probe_gamma(ss, mid);
    if (p.has_imag_axis_eig) {
      lo = mid;
      last_crossings = std::move(p.crossing_freqs);
    } else {
      hi = mid;
    }
  }
  cert.value = 0.5 * (lo + hi);
  cert.tol = std::max(tol, 0.5 * (hi - lo));

  // The crossing frequencies from the last gamma below the norm cluster
  // around the response peak; pick the candidate with the largest response.
  if (!last_crossings.empty()) {
    double best_w = last_crossings.front(), best_s = -1.0;
    for (double w : last_crossings) {
      double s;
      try {
        s = sigma_max_response(ss, w);
      } catch (const SingularityError&) {
        continue;
      }
      if (s > best_s) {
        best_s = s;
        best_w = w;
      }
    }
    cert.peak_frequency = best_w;
  }
  return cert;
}

GainCertificate hinf_norm(const StateSpace& ss) {
  return hinf_norm(ss, config().hinf_tol);
}

GainCertificate empirical_gain_lb(const OperatorExpr& op,
                                  const std::vector<Signal>& probes) {
  if (probes.empty())
    throw ArgumentError("empirical_gain_lb: need at least one probe");
  GainCertificate cert;
  cert.method = GainMethod::kEmpiricalLowerBound;
  cert.tol = 0.0;
  double best = 0.0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const double nu = l2_norm(probes[i]);
    if (nu <= 0.0)
      throw ArgumentError("empirical_gain_lb: probe " + std::to_string(i) +
                          " has zero energy");
    const double ratio = l2_norm(op.simulate(probes[i])) / nu;
    best = std::max(best, ratio);
  }
  cert.value = best;
  return cert;
}

}  // namespace dissipcert
