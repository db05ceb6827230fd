#include "dissipcert/numerics.hpp"

#include <cmath>
#include <limits>

#include "dissipcert/config.hpp"
#include "dissipcert/errors.hpp"

namespace dissipcert {

FrequencyGrid::FrequencyGrid()
    : omega_min(config().freq_omega_min),
      omega_max(config().freq_omega_max),
      n_points(config().freq_points) {}

FrequencyGrid::FrequencyGrid(double omega_min_, double omega_max_,
                             int n_points_)
    : omega_min(omega_min_), omega_max(omega_max_), n_points(n_points_) {
  if (!(omega_min > 0.0) || !(omega_max > omega_min))
    throw ArgumentError("FrequencyGrid: need 0 < omega_min < omega_max");
  if (n_points < 2) throw ArgumentError("FrequencyGrid: need >= 2 points");
}

std::vector<double> FrequencyGrid::points() const {
  std::vector<double> w(n_points);
  const double l0 = std::log(omega_min);
  const double l1 = std::log(omega_max);
  for (int i = 0; i < n_points; ++i)
    w[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) /
                             static_cast<double>(n_points - 1));
  return w;
}

namespace {

// Golden-section minimization of g over [a, b] (any coordinates).
ScanResult golden_min(const std::function<double(double)>& g, double a,
                      double b, double rel_tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = g(c);
  double fd = g(d);
  while ((b - a) > rel_tol * (std::abs(a) + std::abs(b) + 1e-300)) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = g(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = g(d);
    }
  }
  return fc < fd ? ScanResult{fc, c} : ScanResult{fd, d};
}

}  // namespace

ScanResult scan_min(const std::function<double(double)>& f,
                    const FrequencyGrid& grid, double refine_rel) {
  const std::vector<double> w = grid.points();
  int best = 0;
  double best_val = f(w[0]);
  std::vector<double> vals(w.size());
  vals[0] = best_val;
  for (std::size_t i = 1; i < w.size(); ++i) {
    vals[i] = f(w[i]);
    if (vals[i] < best_val) {
      best_val = vals[i];
      best = static_cast<int>(i);
    }
  }
  // Refine in log-omega between the neighbours of the best point.
  const int lo = best > 0 ? best - 1 : best;
  const int hi = best + 1 < static_cast<int>(w.size()) ? best + 1 : best;
  if (lo == hi) return {best_val, w[best]};
  auto g = [&](double logw) { return f(std::exp(logw)); };
  ScanResult refined =
      golden_min(g, std::log(w[lo]), std::log(w[hi]), refine_rel);
  refined.omega = std::exp(refined.omega);
  if (refined.value < best_val) return refined;
  return {best_val, w[best]};
}

ScanResult scan_max(const std::function<double(double)>& f,
                    const FrequencyGrid& grid, double refine_rel) {
  ScanResult r = scan_min([&](double w) { return -f(w); }, grid, refine_rel);
  return {-r.value, r.omega};
}

double spectral_abscissa(const Eigen::MatrixXd& A) {
  if (A.rows() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

double min_eig_hermitian_part(const Eigen::MatrixXcd& M) {
  if (M.rows() != M.cols())
    throw DimensionError("min_eig_hermitian_part: matrix must be square");
  Eigen::MatrixXcd H = 0.5 * (M + M.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  return es.eigenvalues().minCoeff();
}

double min_generalized_eig(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& W,
                           double reg) {
  if (H.rows() != H.cols() || W.rows() != W.cols() || H.rows() != W.rows())
    throw DimensionError("min_generalized_eig: dimension mismatch");
  Eigen::MatrixXcd Wr = 0.5 * (W + W.adjoint());
  Wr += reg * Eigen::MatrixXcd::Identity(W.rows(), W.cols());
  // Whiten: lambda_min of L^-1 H L^-H where Wr = L L^H.
  Eigen::LLT<Eigen::MatrixXcd> llt(Wr);
  if (llt.info() != Eigen::Success)
    throw ArgumentError("min_generalized_eig: weight matrix not positive "
                        "definite even after regularization");
  Eigen::MatrixXcd Hs = 0.5 * (H + H.adjoint());
  Eigen::MatrixXcd L = llt.matrixL();
  Eigen::MatrixXcd X = L.triangularView<Eigen::Lower>().solve(Hs);
  Eigen::MatrixXcd Y =
      L.triangularView<Eigen::Lower>().solve(X.adjoint()).adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (Y + Y.adjoint()));
  return es.eigenvalues().minCoeff();
}

double cond_2norm(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

}  // namespace dissipcert
