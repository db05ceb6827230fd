#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dissipcert/signals.hpp"

namespace dissipcert {

// Fixed, versioned family of test inputs used by the empirical gain and
// passivity analyses.  The family is deterministic given (grid, channels,
// seed), so every report built on it is reproducible bit for bit.
//
// Version 1 contents, per channel (the waveform is placed in one channel at a
// time, other channels zero), all normalized to unit energy:
//   - Hann-windowed sinusoid bursts at omega in {0.01, 0.05, 0.1, 0.5, 1, 2,
//     5, 10, 20} rad/s: smooth, compactly supported, narrow-band probes.
//   - Exponentially windowed steps exp(-lambda t) at lambda in {0.05, 0.2, 1}.
//   - Two seeded band-limited noise draws (sum of 24 random sinusoids with
//     log-uniform frequencies in [0.01, 20]).
//   - Mode-extraction bumps u = w' - a*w with w a full-width sin^2 bump and
//     a in {+-0.05, +-0.1, +-0.2, +-0.5}.  Driving a first-order channel
//     1/(s - a) with u produces y = w exactly, so the supply integral
//     collapses to -a*||w||^2: these probes expose hidden unstable modes that
//     plain sinusoids provably cannot (their supply picks up a positive
//     boundary term 0.5*x(T)^2).

inline constexpr const char* kProbeFamilyVersion = "v1";

std::vector<Signal> probe_family_v1(const TimeGrid& grid, long channels,
                                    std::uint64_t seed);

// Family v1 on the configured default probe grid (probe_dt, probe_steps).
std::vector<Signal> default_probe_family(long channels);

}  // namespace dissipcert
