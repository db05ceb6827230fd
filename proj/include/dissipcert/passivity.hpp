#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dissipcert/numerics.hpp"
#include "dissipcert/systems.hpp"

namespace dissipcert {

// How a passivity statement was obtained.  Frequency-domain results on LTI
// realizations are two-sided certificates (up to grid resolution, which the
// report carries); probe-based results are evidence only and never certify
// passivity, a gap every report flags via `is_certificate`.
enum class PassivityMethod {
  kFrequencyGrid,
  kEmpiricalProbes,
};

std::string to_string(PassivityMethod m);

struct PassivityReport {
  // Input strictness delta and output strictness epsilon in
  //   integral of u.y  >=  delta*||u||^2 + epsilon*||y||^2.
  // Either may be zero or negative; a negative value quantifies the deficit.
  double delta = 0.0;
  double epsilon = 0.0;
  PassivityMethod method = PassivityMethod::kFrequencyGrid;
  bool is_certificate = false;
  double tol = 0.0;

  // Frequency-domain witnesses (frequency achieving each minimum); the
  // analytic omega -> infinity term is reported as +infinity.
  std::optional<double> delta_witness_frequency;
  std::optional<double> epsilon_witness_frequency;

  // Probe-based witnesses: the probe index / horizon achieving the minimal
  // supply integral, and that integral itself.
  std::optional<long> witness_probe;
  std::optional<double> witness_horizon;
  std::optional<double> min_supply;
};

// Positive-real margin of a square LTI system: min over the grid (and the
// analytic omega -> infinity value from D) of the smallest eigenvalue of the
// Hermitian part of G(jw).  Margin >= 0 together with a Hurwitz A certifies
// passivity; margin < 0 is a constructive non-passivity witness at the
// reported frequency.  Stability is deliberately NOT a precondition: the
// sign test is pointwise in frequency and is needed on unstable systems too.
ScanResult pr_margin_scan(const StateSpace& ss, const FrequencyGrid& grid);
double pr_margin(const StateSpace& ss, const FrequencyGrid& grid);
double pr_margin(const StateSpace& ss);

// Output-strictness index: the largest eps with
//   G(jw) + G(jw)^H  >=  2*eps*G(jw)^H G(jw)   for all grid w,
// i.e. the best constant in  integral u.y >= eps*||y||^2  for the LTI
// operator.  The omega -> infinity term is appended only when D is
// nonsingular (otherwise the constraint is vacuous there).  A negative value
// quantifies the deficit.
ScanResult osp_index_scan(const StateSpace& ss, const FrequencyGrid& grid);
double osp_index(const StateSpace& ss, const FrequencyGrid& grid);
double osp_index(const StateSpace& ss);

// Balanced strictness: the largest c with
//   G(jw) + G(jw)^H >= 2*c*(I + G(jw)^H G(jw)),
// i.e. integral u.y >= c*(||u||^2 + ||y||^2).  Positive c gives strict
// passivity with delta = epsilon = c and the gain bound 2 + 1/c.
ScanResult strict_passivity_scan(const StateSpace& ss,
                                 const FrequencyGrid& grid);
double strict_passivity_index(const StateSpace& ss, const FrequencyGrid& grid);
double strict_passivity_index(const StateSpace& ss);

// Frequency-domain report for an LTI realization: delta from the
// positive-real margin, epsilon from the output-strictness index.
PassivityReport lti_passivity_report(const StateSpace& ss,
                                     const FrequencyGrid& grid);
PassivityReport lti_passivity_report(const StateSpace& ss);

// Probe-based evidence for an arbitrary square operator: for every probe u
// and horizon T in T_list, the supply integral over [0, T] of u.op(u) is
// evaluated; any negative value is a constructive non-passivity witness
// (probe and horizon stored).  delta/epsilon are conservative equal-split
// fits: delta = min s/(2*||P_T u||^2), epsilon = min s/(2*||P_T y||^2).
PassivityReport empirical_passivity_deficit(const OperatorExpr& op,
                                            const std::vector<Signal>& probes,
                                            const std::vector<double>& T_list);

}  // namespace dissipcert
