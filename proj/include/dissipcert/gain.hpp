#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dissipcert/numerics.hpp"
#include "dissipcert/systems.hpp"

namespace dissipcert {

// How a gain number was obtained.  The empirical method can only ever certify
// a LOWER bound on the gain; the certificate keeps that distinction explicit.
enum class GainMethod {
  kHamiltonianBisection,  // exact LTI H-infinity norm, two-sided within tol
  kFrequencyGrid,         // dense frequency sampling, lower bound up to grid
  kEmpiricalLowerBound,   // max over probes of ||op(u)|| / ||u||
};

std::string to_string(GainMethod m);

struct GainCertificate {
  double value = 0.0;  // gamma >= 0
  GainMethod method = GainMethod::kHamiltonianBisection;
  double tol = 0.0;
  std::optional<double> peak_frequency;

  bool is_lower_bound_only() const {
    return method != GainMethod::kHamiltonianBisection;
  }
};

// Largest singular value of the frequency response at omega.
double sigma_max_response(const StateSpace& ss, double omega);

// Dense log-grid maximization of sigma_max(G(jw)) with golden refinement.
// Pure grid scan; the omega -> infinity value sigma_max(D) is NOT appended
// (callers decide).  Used as the independent cross-check for hinf_norm.
ScanResult scan_gain(const StateSpace& ss, const FrequencyGrid& grid);
GainCertificate gain_frequency_grid(const StateSpace& ss,
                                    const FrequencyGrid& grid);

// Exact L2-gain of an LTI system by bisection on gamma: gamma is below the
// norm exactly when the associated 2n x 2n Hamiltonian matrix has an
// eigenvalue on the imaginary axis.  |value - true norm| <= tol.  Requires a
// Hurwitz A; otherwise the operator does not map L2 into L2 and
// UnboundedGainError is raised with the offending spectral abscissa.
GainCertificate hinf_norm(const StateSpace& ss, double tol);
GainCertificate hinf_norm(const StateSpace& ss);  // tol from config()

// Max over probes of ||op(u)||/||u||: a certified lower bound on the gain of
// an arbitrary causal operator.  Deterministic for a fixed probe list.
// Zero-energy probes are rejected.
GainCertificate empirical_gain_lb(const OperatorExpr& op,
                                  const std::vector<Signal>& probes);

}  // namespace dissipcert
