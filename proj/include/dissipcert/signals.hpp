#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <vector>

#include "dissipcert/errors.hpp"

namespace dissipcert {

// Uniform sampling grid starting at t = 0.  Samples live at t_k = k*dt for
// k = 0..n_steps-1; the last sample is at t_end() = dt*(n_steps-1) and the
// nominal horizon is dt*n_steps.  All signal arithmetic in the library is
// finite-horizon on such grids; quadrature is the trapezoidal rule over the
// samples, i.e. it integrates [0, t_end()].
struct TimeGrid {
  double dt = 0.0;
  long n_steps = 0;

  TimeGrid() = default;
  TimeGrid(double dt_, long n_steps_);

  double t(long k) const { return dt * static_cast<double>(k); }
  double t_end() const { return dt * static_cast<double>(n_steps - 1); }
  double horizon() const { return dt * static_cast<double>(n_steps); }

  bool operator==(const TimeGrid& o) const {
    return dt == o.dt && n_steps == o.n_steps;
  }
};

// Grid covering [0, duration] inclusive: n_steps = round(duration/dt) + 1.
TimeGrid grid_for_duration(double dt, double duration);

// Finite-horizon multichannel signal: values(k, c) is channel c at t_k.
struct Signal {
  TimeGrid grid;
  Eigen::MatrixXd values;  // n_steps rows, n_channels columns

  Signal() = default;
  Signal(TimeGrid g, Eigen::MatrixXd v);

  long channels() const { return values.cols(); }
  long steps() const { return values.rows(); }

  static Signal zero(const TimeGrid& g, long channels);
  // Sample a scalar function of time into a 1-channel signal.
  static Signal from_function(const TimeGrid& g,
                              const std::function<double(double)>& f);
  // Sample a vector function of time; `channels` fixes the width.
  static Signal from_function(const TimeGrid& g, long channels,
                              const std::function<Eigen::VectorXd(double)>& f);
};

// Trapezoidal quadrature weights for the grid: dt*[1/2, 1, ..., 1, 1/2].
// A single-sample grid has zero width and weight zero.
Eigen::VectorXd trapezoid_weights(const TimeGrid& g);

// <u, v> = integral over [0, t_end] of u(t).v(t) dt (sum over channels),
// trapezoidal rule.  Grids and channel counts must match.
double inner_product(const Signal& u, const Signal& v);

// sqrt(<u, u>).
double l2_norm(const Signal& u);

// Truncation P_T: zero every sample strictly after T.  A T that is not a
// grid point rounds DOWN to the nearest sample; T past the horizon is the
// identity; T < 0 is an error.  Idempotent, and energy is monotone in T.
Signal truncate(const Signal& u, double T);

// Right shift S_tau: prepend tau seconds of zeros, dropping what falls off
// the end of the horizon.  tau must be a nonnegative integer multiple of dt
// (within 1e-9 relative); anything else is rejected, never interpolated.
Signal shift(const Signal& u, double tau);

// Stack signals side by side into one multichannel signal (shared grid).
Signal hstack(const std::vector<Signal>& parts);

// Select a contiguous channel range [first, first+count).
Signal channel_block(const Signal& u, long first, long count);

// CSV exchange format: header "t,ch0,ch1,...", one row per sample.  The
// reader checks that time stamps are uniformly spaced to 1e-9 relative and
// start at 0; violations raise ParseError with the offending row.
void write_signal_csv(std::ostream& os, const Signal& u);
Signal read_signal_csv(std::istream& is);

}  // namespace dissipcert
