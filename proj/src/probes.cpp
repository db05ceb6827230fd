#include "dissipcert/probes.hpp"

#include <cmath>
#include <random>

#include "dissipcert/config.hpp"
#include "dissipcert/errors.hpp"

namespace dissipcert {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Place a scalar waveform in channel `c` of an otherwise zero signal and
// normalize the result to unit energy.
void emit(std::vector<Signal>& out, const TimeGrid& g, long channels, long c,
          const std::function<double(double)>& f) {
  Signal s = Signal::zero(g, channels);
  for (long k = 0; k < g.n_steps; ++k) s.values(k, c) = f(g.t(k));
  const double e = l2_norm(s);
  if (e <= 0.0) return;  // degenerate grid; skip silently
  s.values /= e;
  out.push_back(std::move(s));
}

}  // namespace

std::vector<Signal> probe_family_v1(const TimeGrid& grid, long channels,
                                    std::uint64_t seed) {
  if (channels < 1) throw DimensionError("probe_family_v1: channels >= 1");
  const double T = grid.t_end();
  if (!(T > 0.0))
    throw ArgumentError("probe_family_v1: grid must span a positive horizon");

  std::vector<Signal> out;
  const double burst_freqs[] = {0.01, 0.05, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
  const double step_rates[] = {0.05, 0.2, 1.0};
  const double bump_rates[] = {0.05, -0.05, 0.1, -0.1, 0.2, -0.2, 0.5, -0.5};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  for (long c = 0; c < channels; ++c) {
    // Hann-windowed sinusoid bursts.
    for (double w : burst_freqs) {
      emit(out, grid, channels, c, [w, T](double t) {
        const double win = std::sin(kPi * t / T);
        return std::sin(w * t) * win * win;
      });
    }
    // Exponentially windowed steps.
    for (double lam : step_rates) {
      emit(out, grid, channels, c,
           [lam](double t) { return std::exp(-lam * t); });
    }
    // Seeded band-limited noise: 24 sinusoids, log-uniform frequencies.
    for (int draw = 0; draw < 2; ++draw) {
      std::vector<double> freqs(24), phases(24), amps(24);
      for (int i = 0; i < 24; ++i) {
        freqs[i] = 0.01 * std::pow(20.0 / 0.01, unif(rng));
        phases[i] = 2.0 * kPi * unif(rng);
        amps[i] = 0.25 + unif(rng);
      }
      emit(out, grid, channels, c, [&](double t) {
        double v = 0.0;
        for (int i = 0; i < 24; ++i)
          v += amps[i] * std::sin(freqs[i] * t + phases[i]);
        return v;
      });
    }
    // Mode-extraction bumps u = w' - a*w with w(t) = sin^2(pi t / T).
    for (double a : bump_rates) {
      emit(out, grid, channels, c, [a, T](double t) {
        const double s = std::sin(kPi * t / T);
        const double w = s * s;
        const double dw = (kPi / T) * std::sin(2.0 * kPi * t / T);
        return dw - a * w;
      });
    }
  }
  return out;
}

std::vector<Signal> default_probe_family(long channels) {
  const Config& cfg = config();
  TimeGrid g(cfg.probe_dt, cfg.probe_steps);
  return probe_family_v1(g, channels, cfg.seed);
}

}  // namespace dissipcert
