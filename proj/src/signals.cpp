#include "dissipcert/signals.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace dissipcert {

TimeGrid::TimeGrid(double dt_, long n_steps_) : dt(dt_), n_steps(n_steps_) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw ArgumentError("TimeGrid: dt must be positive and finite");
  if (n_steps < 1) throw ArgumentError("TimeGrid: need at least one sample");
}

TimeGrid grid_for_duration(double dt, double duration) {
  if (!(duration >= 0.0))
    throw ArgumentError("grid_for_duration: duration must be >= 0");
  long n = static_cast<long>(std::llround(duration / dt)) + 1;
  return TimeGrid(dt, n);
}

Signal::Signal(TimeGrid g, Eigen::MatrixXd v)
    : grid(g), values(std::move(v)) {
  if (values.rows() != grid.n_steps)
    throw DimensionError("Signal: values must have one row per grid sample (" +
                         std::to_string(values.rows()) + " rows vs " +
                         std::to_string(grid.n_steps) + " samples)");
  if (values.cols() < 1)
    throw DimensionError("Signal: need at least one channel");
}

Signal Signal::zero(const TimeGrid& g, long channels) {
  return Signal(g, Eigen::MatrixXd::Zero(g.n_steps, channels));
}

Signal Signal::from_function(const TimeGrid& g,
                             const std::function<double(double)>& f) {
  Eigen::MatrixXd v(g.n_steps, 1);
  for (long k = 0; k < g.n_steps; ++k) v(k, 0) = f(g.t(k));
  return Signal(g, std::move(v));
}

Signal Signal::from_function(
    const TimeGrid& g, long channels,
    const std::function<Eigen::VectorXd(double)>& f) {
  Eigen::MatrixXd v(g.n_steps, channels);
  for (long k = 0; k < g.n_steps; ++k) {
    Eigen::VectorXd row = f(g.t(k));
    if (row.size() != channels)
      throw DimensionError("Signal::from_function: sample width mismatch");
    v.row(k) = row.transpose();
  }
  return Signal(g, std::move(v));
}

Eigen::VectorXd trapezoid_weights(const TimeGrid& g) {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(g.n_steps, g.dt);
  if (g.n_steps == 1) {
    w(0) = 0.0;  // zero-width interval
    return w;
  }
  w(0) = 0.5 * g.dt;
  w(g.n_steps - 1) = 0.5 * g.dt;
  return w;
}

namespace {

void require_compatible(const Signal& u, const Signal& v, const char* who) {
  if (!(u.grid == v.grid))
    throw DimensionError(std::string(who) + ": signals live on different grids");
  if (u.channels() != v.channels())
    throw DimensionError(std::string(who) + ": channel counts differ (" +
                         std::to_string(u.channels()) + " vs " +
                         std::to_string(v.channels()) + ")");
}

}  // namespace

double inner_product(const Signal& u, const Signal& v) {
  require_compatible(u, v, "inner_product");
  const Eigen::VectorXd w = trapezoid_weights(u.grid);
  // sum_k w_k * (row_k(u) . row_k(v))
  return (u.values.array() * v.values.array()).rowwise().sum().matrix().dot(w);
}

double l2_norm(const Signal& u) {
  double e = inner_product(u, u);
  // Guard tiny negative round-off.
  return std::sqrt(e > 0.0 ? e : 0.0);
}

Signal truncate(const Signal& u, double T) {
  if (!(T >= 0.0))
    throw ArgumentError("truncate: T must be >= 0, got " + std::to_string(T));
  if (T >= u.grid.t_end()) return u;
  const double ratio = T / u.grid.dt;
  const long cut = static_cast<long>(std::floor(ratio + 1e-9 * (1.0 + ratio)));
  Signal out = u;
  if (cut + 1 < u.grid.n_steps)
    out.values.bottomRows(u.grid.n_steps - cut - 1).setZero();
  return out;
}

Signal shift(const Signal& u, double tau) {
  if (!(tau >= 0.0))
    throw ArgumentError("shift: tau must be >= 0, got " + std::to_string(tau));
  const double ratio = tau / u.grid.dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * (1.0 + std::abs(ratio)))
    throw ArgumentError(
        "shift: tau = " + std::to_string(tau) +
        " is not an integer multiple of dt = " + std::to_string(u.grid.dt) +
        "; shifts are never interpolated");
  const long k = static_cast<long>(rounded);
  Signal out = Signal::zero(u.grid, u.channels());
  if (k < u.grid.n_steps)
    out.values.bottomRows(u.grid.n_steps - k) =
        u.values.topRows(u.grid.n_steps - k);
  return out;
}

Signal hstack(const std::vector<Signal>& parts) {
  if (parts.empty()) throw ArgumentError("hstack: nothing to stack");
  long total = 0;
  for (const Signal& p : parts) {
    if (!(p.grid == parts.front().grid))
      throw DimensionError("hstack: signals live on different grids");
    total += p.channels();
  }
  Eigen::MatrixXd v(parts.front().grid.n_steps, total);
  long col = 0;
  for (const Signal& p : parts) {
    v.middleCols(col, p.channels()) = p.values;
    col += p.channels();
  }
  return Signal(parts.front().grid, std::move(v));
}

Signal channel_block(const Signal& u, long first, long count) {
  if (first < 0 || count < 1 || first + count > u.channels())
    throw DimensionError("channel_block: range [" + std::to_string(first) +
                         ", " + std::to_string(first + count) +
                         ") out of bounds for " + std::to_string(u.channels()) +
                         " channels");
  return Signal(u.grid, u.values.middleCols(first, count));
}

void write_signal_csv(std::ostream& os, const Signal& u) {
  os << "t";
  for (long c = 0; c < u.channels(); ++c) os << ",ch" << c;
  os << "\n";
  os.precision(17);
  for (long k = 0; k < u.steps(); ++k) {
    os << u.grid.t(k);
    for (long c = 0; c < u.channels(); ++c) os << "," << u.values(k, c);
    os << "\n";
  }
}

Signal read_signal_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw ParseError("$", "empty signal file, expected a CSV header");
  // Header: t,ch0,ch1,...  (tolerate \r\n endings)
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("t,", 0) != 0 && line != "t")
    throw ParseError("$.header",
                     "expected header starting with 't,' but got '" + line + "'");

  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  long n_cols = -1;
  long row_index = 0;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    const std::string where = "$.row[" + std::to_string(row_index) + "]";
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument("trailing junk");
        row.push_back(v);
      } catch (const std::exception&) {
        throw ParseError(where, "cannot parse '" + cell + "' as a number");
      }
    }
    if (row.size() < 2)
      throw ParseError(where, "need a time stamp and at least one channel");
    if (n_cols == -1)
      n_cols = static_cast<long>(row.size());
    else if (static_cast<long>(row.size()) != n_cols)
      throw ParseError(where, "expected " + std::to_string(n_cols) +
                                  " columns, got " + std::to_string(row.size()));
    times.push_back(row[0]);
    row.erase(row.begin());
    rows.push_back(std::move(row));
    ++row_index;
  }
  if (rows.empty()) throw ParseError("$", "signal file has no data rows");

  if (std::abs(times[0]) > 1e-12)
    throw ParseError("$.row[0]", "time axis must start at 0, got " +
                                     std::to_string(times[0]));
  double dt;
  if (rows.size() == 1) {
    dt = 1.0;  // arbitrary: single sample has zero quadrature width
  } else {
    dt = times[1] - times[0];
    if (!(dt > 0.0))
      throw ParseError("$.row[1]", "time stamps must be strictly increasing");
    for (std::size_t k = 1; k < times.size(); ++k) {
      const double expected = dt * static_cast<double>(k);
      if (std::abs(times[k] - expected) >
          1e-9 * std::max(1.0, std::abs(expected)))
        throw ParseError(
            "$.row[" + std::to_string(k) + "]",
            "non-uniform time axis: t = " + std::to_string(times[k]) +
                " but uniform spacing predicts " + std::to_string(expected));
    }
  }

  Eigen::MatrixXd v(static_cast<long>(rows.size()), n_cols - 1);
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (long c = 0; c + 1 < n_cols; ++c) v(static_cast<long>(k), c) = rows[k][c];
  return Signal(TimeGrid(dt, static_cast<long>(rows.size())), std::move(v));
}

}  // namespace dissipcert
