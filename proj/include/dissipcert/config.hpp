#pragma once

#include <cstdint>
#include <string>

namespace dissipcert {

// All tunable defaults in one place.  Every field can be overridden by an
// environment variable DISSIPCERT_<FIELD> (upper-cased field name, see
// config.cpp for the exact spelling) and, where the CLI exposes it, by a
// command-line flag.  Keeping the knobs here makes runs reproducible: a
// report plus a Config uniquely determines the numbers in it.
struct Config {
  // Frequency scans (positive-real margin, output-strictness index, the
  // grid oracle for gains): log-spaced [omega_min, omega_max] with n points,
  // then golden-section refinement around the best grid point.
  double freq_omega_min = 1e-4;
  double freq_omega_max = 1e4;
  int freq_points = 2000;
  double freq_refine_rel = 1e-10;  // relative bracket width to stop refining

  // Gain certification.
  double hinf_tol = 1e-6;        // |value - true norm| target for bisection
  double imag_axis_tol = 1e-8;   // |Re lambda| <= tol*(1+|lambda|) => on axis
  double stability_margin = 1e-9;  // spectral abscissa < -margin => stable

  // Nonlinear loop solver (per-step damped fixed point).
  double loop_damping = 0.5;
  int loop_max_iter = 200;
  double loop_residual_tol = 1e-10;  // scaled by (1 + signal scale)
  double wellposed_cond_max = 1e8;   // cond(I + D2*D1) above this => ill-posed

  // Probe family / empirical certificates.
  double probe_dt = 0.02;
  int probe_steps = 12001;  // 240 s horizon
  std::uint64_t seed = 0x5eedcafe;

  // Quadratic-form ensembles.
  int sproc_generators = 64;
  int sproc_shifts = 4;
  double sproc_tol_base = 1e-7;  // scaled by (1 + max member energy)
  double sproc_dt = 0.01;
  int sproc_steps = 2001;  // 20 s horizon

  // Adversarial search.
  int falsify_grid = 32;           // coarse grid resolution per parameter
  int falsify_refine_iters = 60;   // local refinement budget
  double instability_margin = 1e-6;   // abscissa >= margin => destabilized
  double overflow_energy_ratio = 1e6; // trajectory/input energy ratio
  double cert_tol = 1e-7;             // slack for member certification

  // Populate from DISSIPCERT_* environment variables; unknown variables are
  // ignored, malformed values raise ArgumentError.
  static Config from_env();
};

// Library-wide default instance (constructed once from the environment).
const Config& config();

}  // namespace dissipcert
