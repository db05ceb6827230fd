#include "dissipcert/config.hpp"

#include <cstdlib>
#include <string>

#include "dissipcert/errors.hpp"

namespace dissipcert {
namespace {

bool read_env(const char* name, std::string& out) {
  const char* v = std::getenv(name);
  if (v == nullptr) return false;
  out = v;
  return true;
}

void load_double(const char* name, double& field) {
  std::string s;
  if (!read_env(name, s)) return;
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    field = v;
  } catch (const std::exception&) {
    throw ArgumentError(std::string(name) + ": cannot parse '" + s +
                        "' as a real number");
  }
}

void load_int(const char* name, int& field) {
  std::string s;
  if (!read_env(name, s)) return;
  try {
    std::size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    field = static_cast<int>(v);
  } catch (const std::exception&) {
    throw ArgumentError(std::string(name) + ": cannot parse '" + s +
                        "' as an integer");
  }
}

void load_u64(const char* name, std::uint64_t& field) {
  std::string s;
  if (!read_env(name, s)) return;
  try {
    std::size_t pos = 0;
    unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    field = v;
  } catch (const std::exception&) {
    throw ArgumentError(std::string(name) + ": cannot parse '" + s +
                        "' as an unsigned integer");
  }
}

}  // namespace

Config Config::from_env() {
  Config c;
  load_double("DISSIPCERT_FREQ_OMEGA_MIN", c.freq_omega_min);
  load_double("DISSIPCERT_FREQ_OMEGA_MAX", c.freq_omega_max);
  load_int("DISSIPCERT_FREQ_POINTS", c.freq_points);
  load_double("DISSIPCERT_FREQ_REFINE_REL", c.freq_refine_rel);
  load_double("DISSIPCERT_HINF_TOL", c.hinf_tol);
  load_double("DISSIPCERT_IMAG_AXIS_TOL", c.imag_axis_tol);
  load_double("DISSIPCERT_STABILITY_MARGIN", c.stability_margin);
  load_double("DISSIPCERT_LOOP_DAMPING", c.loop_damping);
  load_int("DISSIPCERT_LOOP_MAX_ITER", c.loop_max_iter);
  load_double("DISSIPCERT_LOOP_RESIDUAL_TOL", c.loop_residual_tol);
  load_double("DISSIPCERT_WELLPOSED_COND_MAX", c.wellposed_cond_max);
  load_double("DISSIPCERT_PROBE_DT", c.probe_dt);
  load_int("DISSIPCERT_PROBE_STEPS", c.probe_steps);
  load_u64("DISSIPCERT_SEED", c.seed);
  load_int("DISSIPCERT_SPROC_GENERATORS", c.sproc_generators);
  load_int("DISSIPCERT_SPROC_SHIFTS", c.sproc_shifts);
  load_double("DISSIPCERT_SPROC_TOL_BASE", c.sproc_tol_base);
  load_double("DISSIPCERT_SPROC_DT", c.sproc_dt);
  load_int("DISSIPCERT_SPROC_STEPS", c.sproc_steps);
  load_int("DISSIPCERT_FALSIFY_GRID", c.falsify_grid);
  load_int("DISSIPCERT_FALSIFY_REFINE_ITERS", c.falsify_refine_iters);
  load_double("DISSIPCERT_INSTABILITY_MARGIN", c.instability_margin);
  load_double("DISSIPCERT_OVERFLOW_ENERGY_RATIO", c.overflow_energy_ratio);
  load_double("DISSIPCERT_CERT_TOL", c.cert_tol);
  return c;
}

const Config& config() {
  static const Config c = Config::from_env();
  return c;
}

}  // namespace dissipcert
