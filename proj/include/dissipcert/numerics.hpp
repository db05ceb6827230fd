#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace dissipcert {

// Log-spaced frequency scan shared by the gain and passivity analyses.
struct FrequencyGrid {
  double omega_min;
  double omega_max;
  int n_points;

  FrequencyGrid();  // defaults from config()
  FrequencyGrid(double omega_min_, double omega_max_, int n_points_);

  std::vector<double> points() const;
};

// Result of minimizing (or maximizing) a scalar function of frequency over a
// log grid with golden-section refinement around the best grid point.
struct ScanResult {
  double value;  // extremal value found
  double omega;  // frequency where it was found
};

// Minimize f over the grid, then golden-section refine inside the bracket
// formed by the neighbours of the best grid point (log-omega coordinate).
// `refine_rel` is the relative bracket width at which refinement stops.
ScanResult scan_min(const std::function<double(double)>& f,
                    const FrequencyGrid& grid, double refine_rel);
ScanResult scan_max(const std::function<double(double)>& f,
                    const FrequencyGrid& grid, double refine_rel);

// max Re(lambda_i(A)); -inf for a 0x0 matrix (no dynamics).
double spectral_abscissa(const Eigen::MatrixXd& A);

// Smallest eigenvalue of the Hermitian part (M + M^H)/2.
double min_eig_hermitian_part(const Eigen::MatrixXcd& M);

// Largest c such that H - c*W is positive semidefinite, for Hermitian H and
// Hermitian positive semidefinite W: the minimal generalized eigenvalue of
// (H, W).  W is regularized by reg*I to tolerate rank deficiency.
double min_generalized_eig(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& W,
                           double reg);

// 2-norm condition number estimate via SVD.
double cond_2norm(const Eigen::MatrixXd& M);

}  // namespace dissipcert
