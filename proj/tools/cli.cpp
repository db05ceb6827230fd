#include "cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dissipcert/adversary.hpp"
#include "dissipcert/config.hpp"
#include "dissipcert/errors.hpp"
#include "dissipcert/feedback.hpp"
#include "dissipcert/gain.hpp"
#include "dissipcert/io.hpp"
#include "dissipcert/numerics.hpp"
#include "dissipcert/passivity.hpp"
#include "dissipcert/probes.hpp"
#include "dissipcert/signals.hpp"
#include "dissipcert/sprocedure.hpp"
#include "dissipcert/systems.hpp"
#include "svg.hpp"

namespace dissipcert::cli {
namespace {

using nlohmann::json;

// Every report echoes the effective numeric configuration (defaults plus any
// DISSIPCERT_* environment overrides), so a report pins down exactly how its
// numbers were produced.
json config_json() {
  const Config& c = config();
  json j;
  j["freq_omega_min"] = c.freq_omega_min;
  j["freq_omega_max"] = c.freq_omega_max;
  j["freq_points"] = c.freq_points;
  j["freq_refine_rel"] = c.freq_refine_rel;
  j["hinf_tol"] = c.hinf_tol;
  j["imag_axis_tol"] = c.imag_axis_tol;
  j["stability_margin"] = c.stability_margin;
  j["loop_damping"] = c.loop_damping;
  j["loop_max_iter"] = c.loop_max_iter;
  j["loop_residual_tol"] = c.loop_residual_tol;
  j["wellposed_cond_max"] = c.wellposed_cond_max;
  j["probe_dt"] = c.probe_dt;
  j["probe_steps"] = c.probe_steps;
  j["seed"] = c.seed;
  j["sproc_generators"] = c.sproc_generators;
  j["sproc_shifts"] = c.sproc_shifts;
  j["sproc_tol_base"] = c.sproc_tol_base;
  j["sproc_dt"] = c.sproc_dt;
  j["sproc_steps"] = c.sproc_steps;
  j["falsify_grid"] = c.falsify_grid;
  j["falsify_refine_iters"] = c.falsify_refine_iters;
  j["instability_margin"] = c.instability_margin;
  j["overflow_energy_ratio"] = c.overflow_energy_ratio;
  j["cert_tol"] = c.cert_tol;
  return j;
}

std::filesystem::path ensure_dir(const std::string& dir) {
  std::filesystem::path p = dir.empty() ? std::filesystem::path(".")
                                        : std::filesystem::path(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec)
    throw ArgumentError("cannot create output directory '" + p.string() +
                        "': " + ec.message());
  return p;
}

void write_text_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ArgumentError("cannot open '" + p.string() + "' for writing");
  f << text;
  f.flush();
  if (!f.good()) throw ArgumentError("failed while writing '" + p.string() + "'");
}

// Largest singular value of the frequency response on a fixed 400-point
// log grid spanning the configured band; samples landing exactly on a pole
// are skipped.  Used only for plotting (the certified numbers come from the
// scan/bisection routines).
void gain_curve(const StateSpace& ss, std::vector<double>& w,
                std::vector<double>& g) {
  const Config& c = config();
  const double l0 = std::log10(c.freq_omega_min);
  const double l1 = std::log10(c.freq_omega_max);
  const int n = 400;
  for (int i = 0; i < n; ++i) {
    const double om = std::pow(10.0, l0 + (l1 - l0) * i / double(n - 1));
    try {
      const Eigen::MatrixXcd resp = freq_response(ss, om);
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(resp);
      const double s = svd.singularValues()(0);
      if (std::isfinite(s)) {
        w.push_back(om);
        g.push_back(s);
      }
    } catch (const SingularityError&) {
      // pole exactly on the sample; the neighbors carry the shape
    }
  }
}

// Deterministic orthogonal matrix: a product of Givens rotations with angles
// drawn from the raw engine stream (portable across platforms, unlike the
// standard distributions).
Eigen::MatrixXd random_orthogonal(long n, std::mt19937_64& rng) {
  auto unit = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j) {
      const double th = 2.0 * std::numbers::pi * unit();
      const double cth = std::cos(th), sth = std::sin(th);
      Eigen::MatrixXd giv = Eigen::MatrixXd::Identity(n, n);
      giv(i, i) = cth;
      giv(j, j) = cth;
      giv(i, j) = -sth;
      giv(j, i) = sth;
      q = giv * q;
    }
  if (n > 0 && unit() < 0.5) q.row(0) = -q.row(0);  // mix in a reflection
  return q;
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeOpts {
  std::string path;
  std::string out_dir = ".";
  bool no_plots = false;
  bool expect_stable = false;
};

int run_analyze(const AnalyzeOpts& o, std::ostream& out) {
  const OperatorExpr op = read_system_file(o.path);
  json body;
  body["command"] = "analyze";
  body["input"] = o.path;
  body["operator"] = json{{"kind", op.kind()},
                          {"inputs", op.input_dim()},
                          {"outputs", op.output_dim()},
                          {"lti", op.is_lti()}};
  json plots = json::array();
  std::string verdict;

  if (op.is_lti()) {
    const StateSpace ss = *op.to_state_space();
    const double absc = ss.states() > 0
                            ? spectral_abscissa(ss.A)
                            : -std::numeric_limits<double>::infinity();
    body["spectral_abscissa"] =
        measured(absc, "spectral_abscissa", config().stability_margin);
    verdict = (ss.states() == 0 || absc < -config().stability_margin)
                  ? "stable"
                  : "unstable-unbounded";
    try {
      body["gain"] = to_json(hinf_norm(ss));
    } catch (const UnboundedGainError& e) {
      body["gain"] = nullptr;
      body["gain_note"] = e.what();
      verdict = "unstable-unbounded";
    }
    try {
      body["gain_scan"] = to_json(scan_gain(ss, FrequencyGrid()),
                                  "frequency_grid", config().freq_refine_rel);
    } catch (const SingularityError& e) {
      body["gain_scan"] = nullptr;
      body["gain_scan_note"] = e.what();
    }
    if (op.input_dim() == op.output_dim()) {
      try {
        body["passivity"] = to_json(lti_passivity_report(ss));
        body["osp_index"] = measured(osp_index(ss), "frequency_grid",
                                     config().freq_refine_rel);
        body["pr_margin"] = measured(pr_margin(ss), "frequency_grid",
                                     config().freq_refine_rel);
      } catch (const SingularityError& e) {
        body["passivity"] = nullptr;
        body["passivity_note"] = e.what();
      }
    } else {
      body["passivity"] = nullptr;  // passivity pairs inputs with outputs
    }
    if (!o.no_plots) {
      std::vector<double> wv, gv;
      gain_curve(ss, wv, gv);
      if (!wv.empty()) {
        const auto p = ensure_dir(o.out_dir) / "gain_vs_frequency.svg";
        write_text_file(
            p, line_plot_svg("Largest singular value of the response",
                             "omega [rad/s]", "gain", wv, gv));
        plots.push_back(p.string());
      }
    }
  } else {
    // No exact certificates for general operators: probe-driven lower bounds
    // and supply-rate evidence only.
    verdict = "inconclusive";
    const std::vector<Signal> probes = default_probe_family(op.input_dim());
    const double t_end = probes.front().grid.t_end();
    try {
      body["gain"] = to_json(empirical_gain_lb(op, probes));
    } catch (const OverflowError& e) {
      body["gain"] = nullptr;
      body["gain_note"] = e.what();
      verdict = "unstable-unbounded";
    }
    if (op.input_dim() != op.output_dim()) {
      body["passivity"] = nullptr;
    } else if (verdict == "unstable-unbounded") {
      body["passivity"] = nullptr;  // the same probes overflow
    } else {
      try {
        body["passivity"] = to_json(empirical_passivity_deficit(
            op, probes, {0.25 * t_end, 0.5 * t_end, t_end}));
      } catch (const OverflowError& e) {
        body["passivity"] = nullptr;
        body["passivity_note"] = e.what();
        verdict = "unstable-unbounded";
      }
    }
  }

  body["plots"] = plots;
  body["verdict"] = verdict;
  body["config"] = config_json();
  out << render_report(report_envelope("analyze", std::move(body)));
  return (o.expect_stable && verdict == "unstable-unbounded") ? 1 : 0;
}

// ---------------------------------------------------------------------------
// interconnect

struct InterconnectOpts {
  std::string path;
  std::string input_csv;
  double dt = 0.02;
  long steps = 2001;
  std::string out_dir = ".";
  bool no_plots = false;
  bool expect_stable = false;
  bool grid_flags_given = false;
};

int run_interconnect(const InterconnectOpts& o, std::ostream& out) {
  const LoopSpec ls = read_loop_file(o.path);
  const ClosedLoop cl(ls.sigma1, ls.sigma2, ls.e2_clamped);
  const bool lti_pair = ls.sigma1.is_lti() && ls.sigma2.is_lti();

  json body;
  body["command"] = "interconnect";
  body["input"] = o.path;
  body["loop"] = json{{"sigma1_kind", ls.sigma1.kind()},
                      {"sigma2_kind", ls.sigma2.kind()},
                      {"e2", ls.e2_clamped ? "zero" : "free"},
                      {"lti", lti_pair}};
  std::string verdict = lti_pair ? "stable" : "inconclusive";

  json gains;
  try {
    gains["full"] = to_json(loop_gain(cl, LoopChannel::kFull));
    gains["e1_to_y1"] = to_json(loop_gain(cl, LoopChannel::kE1ToY1));
  } catch (const UnboundedGainError& e) {
    gains["full"] = nullptr;
    gains["e1_to_y1"] = nullptr;
    gains["note"] = e.what();
    gains["closed_loop_abscissa"] = measured(
        e.spectral_abscissa, "spectral_abscissa", config().stability_margin);
    verdict = "unstable-unbounded";
  } catch (const OverflowError& e) {
    gains["full"] = nullptr;
    gains["e1_to_y1"] = nullptr;
    gains["note"] = e.what();
    gains["overflow_step"] = e.first_bad_index;
    verdict = "unstable-unbounded";
  } catch (const WellPosednessError& e) {
    gains["full"] = nullptr;
    gains["e1_to_y1"] = nullptr;
    gains["note"] = e.what();
    gains["condition_estimate"] = e.condition_estimate;
    verdict = "ill-posed";
  }
  body["loop_gain"] = gains;

  if (!o.input_csv.empty() && o.grid_flags_given)
    throw ArgumentError(
        "interconnect: --input supplies the time grid; --dt/--steps apply "
        "only to the generated probe");
  const Signal e1 = [&]() {
    if (!o.input_csv.empty()) return read_signal_csv(o.input_csv);
    return probe_family_v1(TimeGrid(o.dt, o.steps), cl.m1(), config().seed)
        .front();
  }();
  if (e1.channels() != cl.m1())
    throw DimensionError("interconnect: input has " +
                         std::to_string(e1.channels()) +
                         " channels, the loop needs e1 with " +
                         std::to_string(cl.m1()));

  json traj_block;
  traj_block["dt"] = e1.grid.dt;
  traj_block["rows"] = e1.steps();
  if (verdict != "ill-posed") {
    try {
      const LoopTrajectory traj =
          simulate_loop(cl, e1, Signal::zero(e1.grid, cl.p1()));
      const auto p = ensure_dir(o.out_dir) / "trajectory.csv";
      std::ostringstream csv;
      write_trajectory_csv(csv, traj);
      write_text_file(p, csv.str());
      traj_block["file"] = p.string();
      traj_block["solver_residual"] = measured(
          traj.residual, "fixed_point_iteration", config().loop_residual_tol);
      traj_block["input_energy"] =
          measured(inner_product(e1, e1), "trapezoid_quadrature", 0.0);
      traj_block["output_energy"] =
          measured(inner_product(traj.y1, traj.y1) +
                       inner_product(traj.y2, traj.y2),
                   "trapezoid_quadrature", 0.0);
    } catch (const OverflowError& e) {
      traj_block["note"] = e.what();
      traj_block["overflow_step"] = e.first_bad_index;
      verdict = "unstable-unbounded";
    } catch (const DivergenceError& e) {
      traj_block["note"] = e.what();
      traj_block["diverged_step"] = e.step_index;
      traj_block["residual"] = e.residual;
      if (verdict == "stable") verdict = "inconclusive";
    } catch (const WellPosednessError& e) {
      traj_block["note"] = e.what();
      verdict = "ill-posed";
    }
  } else {
    traj_block["note"] = "skipped: the loop is not well posed";
  }
  body["trajectory"] = traj_block;

  json plots = json::array();
  if (lti_pair && !o.no_plots && verdict != "ill-posed") {
    try {
      const StateSpace cls = close_loop_lti(*ls.sigma1.to_state_space(),
                                            *ls.sigma2.to_state_space());
      std::vector<double> wv, gv;
      gain_curve(cls, wv, gv);
      if (!wv.empty()) {
        const auto p = ensure_dir(o.out_dir) / "loop_gain_vs_frequency.svg";
        write_text_file(
            p, line_plot_svg("Closed-loop response, largest singular value",
                             "omega [rad/s]", "gain", wv, gv));
        plots.push_back(p.string());
      }
    } catch (const WellPosednessError&) {
      // already reported through the gain section
    }
  }
  body["plots"] = plots;
  body["verdict"] = verdict;
  body["config"] = config_json();
  out << render_report(report_envelope("interconnect", std::move(body)));
  return (o.expect_stable && verdict == "unstable-unbounded") ? 1 : 0;
}

// ---------------------------------------------------------------------------
// falsify

struct FalsifyOpts {
  std::string path;
  std::string family;
  double alpha = 1.0;
  std::vector<double> lo, hi;
  std::string mode;
  double level = 0.0;
  bool mode_given = false;
  bool level_given = false;
  int budget = 200;
  std::string e2 = "free";
  bool expect_stable = false;
};

EnvFamily make_family(const FalsifyOpts& o) {
  const auto need = [&](std::size_t n, const char* names) {
    if (o.lo.size() != n || o.hi.size() != n)
      throw ArgumentError("falsify: family " + o.family + " takes " +
                          std::to_string(n) + " --lo/--hi values (" + names +
                          ")");
  };
  const bool box_given = !o.lo.empty() || !o.hi.empty();
  if (o.family == "static_gain") {
    if (!box_given) return EnvFamily::static_gain(0.05, 20.0);
    need(1, "k");
    return EnvFamily::static_gain(o.lo[0], o.hi[0]);
  }
  if (o.family == "first_order") {
    if (!box_given) return EnvFamily::first_order(0.05, 20.0, 0.0, 5.0);
    need(2, "k, s0");
    return EnvFamily::first_order(o.lo[0], o.hi[0], o.lo[1], o.hi[1]);
  }
  if (o.family == "parallel_mix") {
    if (!box_given)
      return EnvFamily::parallel_mix(0.0, 5.0, 0.05, 20.0, 0.0, 5.0);
    need(3, "c, k, s0");
    return EnvFamily::parallel_mix(o.lo[0], o.hi[0], o.lo[1], o.hi[1],
                                   o.lo[2], o.hi[2]);
  }
  if (o.family == "gain_ball") {
    if (box_given)
      throw ArgumentError(
          "falsify: gain_ball is parameterized by --alpha, not --lo/--hi");
    return EnvFamily::gain_ball(o.alpha);
  }
  throw ArgumentError("falsify: unknown family '" + o.family + "'");
}

CertMode parse_mode(const std::string& s) {
  if (s == "passive") return CertMode::kPassive;
  if (s == "osp") return CertMode::kOsp;
  if (s == "gain_bound") return CertMode::kGainBound;
  throw ArgumentError("falsify: unknown --mode '" + s + "'");
}

int run_falsify(const FalsifyOpts& o, std::ostream& out) {
  const OperatorExpr op = read_system_file(o.path);
  EnvFamily fam = make_family(o);
  if (o.mode_given) fam.mode = parse_mode(o.mode);
  if (o.level_given) fam.mode_level = o.level;
  const FalsifyMode fm =
      o.e2 == "zero" ? FalsifyMode::kE2Zero : FalsifyMode::kE2Free;

  const FalsificationResult r = falsify(op, fam, o.budget, fm);

  json body;
  body["command"] = "falsify";
  body["input"] = o.path;
  body["family"] = json{{"kind", to_string(fam.kind)},
                        {"lo", vector_json(fam.lo)},
                        {"hi", vector_json(fam.hi)},
                        {"mode", to_string(fam.mode)},
                        {"mode_level", fam.mode_level}};
  body["budget"] = o.budget;
  body["e2"] = o.e2;
  body["result"] = to_json(r, op.is_lti());
  const std::string verdict = r.destabilized ? "destabilized" : "survived";
  body["verdict"] = verdict;
  body["config"] = config_json();
  out << render_report(report_envelope("falsify", std::move(body)));
  return (o.expect_stable && r.destabilized) ? 1 : 0;
}

// ---------------------------------------------------------------------------
// sproc

struct SprocOpts {
  std::string path;
  std::string form;
  double gamma = 0.0;
  bool gamma_given = false;
  double alpha = 1.0;
  int generators = 0;
  int shifts = 0;
};

int run_sproc(const SprocOpts& o, std::ostream& out) {
  const OperatorExpr op = read_system_file(o.path);
  if (!op.is_lti())
    throw ArgumentError(
        "sproc: ensemble sampling requires a state-space (lti) system "
        "document");
  const StateSpace ss = *op.to_state_space();

  const bool clamped = o.form.rfind("clamped_", 0) == 0;
  const SubspaceTag tag =
      clamped ? SubspaceTag::kLoopClamped : SubspaceTag::kLoopFree;
  const BlockLayout layout =
      clamped ? BlockLayout::loop_clamped(ss.inputs(), ss.outputs())
              : BlockLayout::loop_free(ss.inputs(), ss.outputs());
  const double level = o.gamma_given ? o.gamma : default_gain_level(ss);
  if (!(level > 0.0)) throw ArgumentError("sproc: --gamma must be positive");

  // Each preset pairs the target form sigma0 (to be shown feasible, i.e.
  // sigma0 + mu*sigma1 <= 0 on the sampled subspace for some multiplier
  // mu >= 0) with the constraint form sigma1 carrying what the environment
  // side certifies: its passivity supply for the `gain` presets, its
  // alpha-ball gain supply for the `small_gain` presets.
  if (!(o.alpha > 0.0)) throw ArgumentError("sproc: --alpha must be positive");
  QuadraticForm s0, s1;
  std::string target, constraint;
  if (o.form == "gain") {
    s0 = make_form(layout, FormKind::kGain, level);
    s1 = make_form(layout, FormKind::kPassivitySupply);
    target = "gain_form(gamma)";
    constraint = "passivity_supply";
  } else if (o.form == "clamped_gain") {
    s0 = make_form(layout, FormKind::kClampedGain, level);
    s1 = make_form(layout, FormKind::kClampedPassivitySupply);
    target = "clamped_gain_form(gamma)";
    constraint = "clamped_passivity_supply";
  } else if (o.form == "small_gain") {
    s0 = make_form(layout, FormKind::kGain, level);
    s1 = make_form(layout, FormKind::kSmallGain, o.alpha);
    target = "gain_form(gamma)";
    constraint = "small_gain_supply(alpha)";
  } else if (o.form == "clamped_small_gain") {
    s0 = make_form(layout, FormKind::kClampedGain, level);
    s1 = make_form(layout, FormKind::kClampedSmallGain, o.alpha);
    target = "clamped_gain_form(gamma)";
    constraint = "clamped_small_gain_supply(alpha)";
  } else {
    throw ArgumentError("sproc: unknown --form '" + o.form + "'");
  }

  const TimeGrid grid(config().sproc_dt, config().sproc_steps);
  const int n_gen = o.generators > 0 ? o.generators : config().sproc_generators;
  const int n_shift = o.shifts > 0 ? o.shifts : config().sproc_shifts;
  const std::vector<Signal> gens =
      generator_bank(ss.inputs(), n_gen, grid, config().seed);
  const SubspaceEnsemble ens = sample_subspace(ss, gens, tag, n_shift);
  const SprocedureReport rep = check_sprocedure(ens, s0, s1);

  json body;
  body["command"] = "sproc";
  body["input"] = o.path;
  json form_block = json{{"name", o.form},
                         {"gamma", level},
                         {"target", target},
                         {"constraint", constraint}};
  if (o.form == "small_gain" || o.form == "clamped_small_gain")
    form_block["alpha"] = o.alpha;
  body["form"] = form_block;
  body["ensemble"] = json{{"tag", to_string(tag)},
                          {"generators", n_gen},
                          {"shifts", n_shift},
                          {"members", rep.pairs.size()},
                          {"grid_dt", grid.dt},
                          {"grid_steps", grid.n_steps}};
  body["result"] = to_json(rep);
  std::string verdict;
  if (!rep.conditionally_negative)
    verdict = "violated";
  else
    verdict = rep.regular ? "conditionally-negative"
                          : "conditionally-negative-irregular";
  body["verdict"] = verdict;
  body["config"] = config_json();
  out << render_report(report_envelope("sproc", std::move(body)));
  return 0;
}

// ---------------------------------------------------------------------------
// example

struct ExampleOpts {
  double m = 1.0;
  double k = 1.0;
  std::string grid = "41x41";
  std::string out_dir = ".";
  bool no_plots = false;
};

void parse_grid_spec(const std::string& s, int& nd, int& ns) {
  char extra = 0;
  if (std::sscanf(s.c_str(), "%dx%d%c", &nd, &ns, &extra) != 2 || nd < 2 ||
      ns < 2)
    throw ArgumentError("example: --grid wants ROWSxCOLS with both >= 2, got '" +
                        s + "'");
}

int run_example(const ExampleOpts& o, std::ostream& out) {
  if (!(o.m > 0.0)) throw ArgumentError("example: --m must be positive");
  if (!(o.k > 0.0)) throw ArgumentError("example: --k must be positive");
  int nd = 0, ns = 0;
  parse_grid_spec(o.grid, nd, ns);

  const double d_lo = -1.0, d_hi = 1.0, s_lo = 0.0, s_hi = 2.0;
  std::vector<int> cells(static_cast<std::size_t>(nd) * ns, 0);
  std::ostringstream sweep;
  sweep << "d,s0,osp_index,pr_margin,spectral_abscissa,stable,predicate,"
           "marginal,consistent\n";
  long n_stable = 0, n_pred = 0, n_mismatch = 0, n_marginal = 0;
  char buf[512];
  for (int i = 0; i < nd; ++i) {
    const double d = d_lo + (d_hi - d_lo) * i / static_cast<double>(nd - 1);
    for (int j = 0; j < ns; ++j) {
      const double s0 = s_lo + (s_hi - s_lo) * j / static_cast<double>(ns - 1);
      const MassSpringReport r = mass_spring_case(o.m, d, s0, o.k);
      n_stable += r.stable;
      n_pred += r.predicate;
      n_marginal += r.marginal;
      const bool mismatch = !r.marginal && r.stable != r.predicate;
      n_mismatch += mismatch;
      cells[static_cast<std::size_t>(j) * nd + i] =
          r.marginal ? 2 : (r.stable ? 1 : 0);
      std::snprintf(buf, sizeof buf,
                    "%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%d,%d\n", d, s0,
                    r.mass_osp_index, r.spring_pr_margin, r.spectral_abscissa,
                    static_cast<int>(r.stable), static_cast<int>(r.predicate),
                    static_cast<int>(r.marginal),
                    static_cast<int>(r.consistent));
      sweep << buf;
    }
  }

  // The analytic boundary of the damping-based predicate: d/m + s0 = 0,
  // clipped to the swept rectangle.
  std::ostringstream bnd;
  bnd << "d,s0\n";
  std::vector<std::pair<double, double>> bpts;
  const double bd_lo = std::max(d_lo, -s_hi * o.m);
  const double bd_hi = std::min(d_hi, -s_lo * o.m);
  if (bd_hi >= bd_lo) {
    const int nb = 201;
    for (int t = 0; t < nb; ++t) {
      const double d =
          bd_lo + (bd_hi - bd_lo) * t / static_cast<double>(nb - 1);
      const double s0v = -d / o.m;
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", d, s0v);
      bnd << buf;
      bpts.emplace_back(d, s0v);
    }
  }

  const auto dir = ensure_dir(o.out_dir);
  const auto sweep_path = dir / "sweep.csv";
  const auto bnd_path = dir / "boundary.csv";
  write_text_file(sweep_path, sweep.str());
  write_text_file(bnd_path, bnd.str());

  json plots = json::array();
  if (!o.no_plots) {
    const auto p = dir / "phase_diagram.svg";
    write_text_file(
        p, phase_diagram_svg("Mass-spring loop: eigenvalue stability map",
                             "damping d", "spring pole s0", d_lo, d_hi, s_lo,
                             s_hi, nd, ns, cells, bpts,
                             {"unstable", "stable", "marginal"}));
    plots.push_back(p.string());
  }

  json body;
  body["command"] = "example";
  body["m"] = o.m;
  body["k"] = o.k;
  body["grid"] = json{{"d_points", nd},
                      {"s0_points", ns},
                      {"d_range", json::array({d_lo, d_hi})},
                      {"s0_range", json::array({s_lo, s_hi})}};
  body["boundary"] = "d/m + s0 = 0";
  body["counts"] = json{{"cells", static_cast<long>(nd) * ns},
                        {"stable", n_stable},
                        {"predicate_true", n_pred},
                        {"marginal", n_marginal},
                        {"mismatch", n_mismatch}};
  body["predicate_matches_eigenvalues"] = (n_mismatch == 0);
  body["files"] = json::array({sweep_path.string(), bnd_path.string()});
  body["plots"] = plots;
  body["config"] = config_json();
  out << render_report(report_envelope("example", std::move(body)));
  return 0;
}

// ---------------------------------------------------------------------------
// transform

struct TransformOpts {
  std::string path;
  std::vector<double> eps;
  bool expect_stable = false;
};

int run_transform(const TransformOpts& o, std::ostream& out) {
  const LoopSpec ls = read_loop_file(o.path);
  if (!ls.sigma1.is_lti() || !ls.sigma2.is_lti())
    throw ArgumentError(
        "transform: both loop blocks must be lti system documents");
  const StateSpace ss1 = *ls.sigma1.to_state_space();
  const StateSpace ss2 = *ls.sigma2.to_state_space();
  const std::vector<double> eps_list =
      o.eps.empty() ? std::vector<double>{0.01, 0.1} : o.eps;
  for (double e : eps_list)
    if (!(e >= 0.0))
      throw ArgumentError("transform: --eps values must be nonnegative");

  json body;
  body["command"] = "transform";
  body["input"] = o.path;
  std::string verdict = "equivalent";
  std::optional<double> g0;
  try {
    const GainCertificate c0 =
        hinf_norm(close_loop_lti(ss1, ss2));
    g0 = c0.value;
    body["loop_gain"] = to_json(c0);
  } catch (const UnboundedGainError& e) {
    body["loop_gain"] = nullptr;
    body["loop_gain_note"] = e.what();
    verdict = "unstable-unbounded";
  } catch (const WellPosednessError& e) {
    body["loop_gain"] = nullptr;
    body["loop_gain_note"] = e.what();
    verdict = "ill-posed";
  }

  const bool square_pair =
      ss1.inputs() == ss1.outputs() && ss2.inputs() == ss2.outputs();
  json shifts = json::array();
  for (double eps : eps_list) {
    json entry;
    entry["eps"] = eps;
    try {
      const GainCertificate ce =
          hinf_norm(loop_transform_equivalent_ss(ss1, ss2, eps));
      entry["gain"] = to_json(ce);
      if (g0) {
        const double rel = std::abs(ce.value - *g0) / (1.0 + *g0);
        entry["relative_difference"] = rel;
        entry["gain_preserved"] = rel <= 1e-4;
        if (rel > 1e-4 && verdict == "equivalent") verdict = "mismatch";
      }
    } catch (const UnboundedGainError& e) {
      entry["gain"] = nullptr;
      entry["note"] = e.what();
      if (g0 && verdict == "equivalent") verdict = "mismatch";
    } catch (const WellPosednessError& e) {
      entry["gain"] = nullptr;
      entry["note"] = e.what();
    }
    if (square_pair) {
      // The shifted pair: sigma1 gains an output margin, the wrapped sigma2
      // keeps its excess; both stay state-space objects.
      try {
        const auto pair = loop_transform_passivity(ls.sigma1, ls.sigma2, eps);
        entry["shifted_sigma1_osp_index"] =
            measured(osp_index(*pair.first.to_state_space()),
                     "frequency_grid", config().freq_refine_rel);
        entry["wrapped_sigma2_pr_margin"] =
            measured(pr_margin(*pair.second.to_state_space()),
                     "frequency_grid", config().freq_refine_rel);
      } catch (const WellPosednessError& e) {
        entry["shift_note"] = e.what();
      }
    }
    shifts.push_back(std::move(entry));
  }
  body["shifts"] = shifts;

  // Unit-gain sandwich: composing with orthogonal static maps must leave the
  // open-loop gain untouched.
  json mult;
  std::mt19937_64 rng(config().seed);
  const Eigen::MatrixXd d1 = random_orthogonal(ss1.inputs(), rng);
  const Eigen::MatrixXd d2 = random_orthogonal(ss1.outputs(), rng);
  try {
    const GainCertificate before = hinf_norm(ss1);
    const OperatorExpr wrapped = multiplier_transform(ss1, d1, d2);
    const GainCertificate after = hinf_norm(*wrapped.to_state_space());
    const double rel =
        std::abs(after.value - before.value) / (1.0 + before.value);
    mult = json{{"gain_before", to_json(before)},
                {"gain_after", to_json(after)},
                {"relative_difference", rel},
                {"gain_preserved", rel <= 1e-4}};
    if (rel > 1e-4 && verdict == "equivalent") verdict = "mismatch";
  } catch (const UnboundedGainError& e) {
    mult = json{{"note", std::string("open-loop gain unbounded: ") + e.what()}};
  }
  body["multiplier"] = mult;

  body["verdict"] = verdict;
  body["config"] = config_json();
  out << render_report(report_envelope("transform", std::move(body)));
  return (o.expect_stable && verdict == "unstable-unbounded") ? 1 : 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// argv wiring

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{
      "dissipcert: certify L2 gain and passivity of input-output systems,\n"
      "simulate feedback interconnections, search adversarial environments,\n"
      "and check dissipation inequalities on sampled trajectory ensembles."};
  app.require_subcommand(1);

  AnalyzeOpts an;
  CLI::App* c_an = app.add_subcommand(
      "analyze", "Gain and passivity report for a system file");
  c_an->add_option("system", an.path, "system JSON document")->required();
  c_an->add_option("--out", an.out_dir, "directory for SVG outputs")
      ->capture_default_str();
  c_an->add_flag("--no-plots", an.no_plots, "skip SVG generation");
  c_an->add_flag("--expect-stable", an.expect_stable,
                 "exit 1 when the verdict is unstable-unbounded");

  InterconnectOpts ic;
  ic.dt = config().probe_dt;
  CLI::App* c_ic = app.add_subcommand(
      "interconnect", "Close a feedback loop, simulate it, certify its gain");
  c_ic->add_option("loop", ic.path, "loop JSON document")->required();
  c_ic->add_option("--input", ic.input_csv,
                   "e1 drive signal as CSV (t,u[0],...); replaces the "
                   "generated probe and fixes the time grid");
  c_ic->add_option("--dt", ic.dt, "probe grid spacing [s]")
      ->capture_default_str();
  c_ic->add_option("--steps", ic.steps, "probe grid length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_ic->add_option("--out", ic.out_dir, "directory for CSV/SVG outputs")
      ->capture_default_str();
  c_ic->add_flag("--no-plots", ic.no_plots, "skip SVG generation");
  c_ic->add_flag("--expect-stable", ic.expect_stable,
                 "exit 1 when the verdict is unstable-unbounded");

  FalsifyOpts fa;
  CLI::App* c_fa = app.add_subcommand(
      "falsify",
      "Search a certified environment family for a destabilizing member");
  c_fa->add_option("system", fa.path, "system JSON document")->required();
  c_fa->add_option("--family", fa.family, "environment family")
      ->required()
      ->check(CLI::IsMember(
          {"static_gain", "first_order", "parallel_mix", "gain_ball"}));
  c_fa->add_option("--alpha", fa.alpha, "gain_ball radius")
      ->capture_default_str();
  c_fa->add_option("--lo", fa.lo,
                   "parameter box lower corner (comma separated)")
      ->delimiter(',');
  c_fa->add_option("--hi", fa.hi,
                   "parameter box upper corner (comma separated)")
      ->delimiter(',');
  c_fa->add_option("--mode", fa.mode,
                   "member certification mode (default: the family's)")
      ->check(CLI::IsMember({"passive", "osp", "gain_bound"}));
  c_fa->add_option("--level", fa.level,
                   "certification level (epsilon for osp, alpha for "
                   "gain_bound)");
  c_fa->add_option("--budget", fa.budget, "evaluation budget")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_fa->add_option("--e2", fa.e2, "second exogenous port")
      ->check(CLI::IsMember({"free", "zero"}))
      ->capture_default_str();
  c_fa->add_flag("--expect-stable", fa.expect_stable,
                 "exit 1 when a destabilizing member is found");

  SprocOpts sp;
  CLI::App* c_sp = app.add_subcommand(
      "sproc",
      "Evaluate a target/constraint form pair on a sampled loop ensemble");
  c_sp->add_option("system", sp.path, "system JSON document (lti)")
      ->required();
  c_sp->add_option("--form", sp.form, "form preset")
      ->required()
      ->check(CLI::IsMember(
          {"gain", "small_gain", "clamped_gain", "clamped_small_gain"}));
  c_sp->add_option("--gamma", sp.gamma,
                   "target gain level (default: a level comfortably above "
                   "the sampled loop's reach)");
  c_sp->add_option("--alpha", sp.alpha,
                   "environment gain-ball radius (small_gain presets)")
      ->capture_default_str();
  c_sp->add_option("--generators", sp.generators,
                   "generator count (default from config)")
      ->check(CLI::PositiveNumber);
  c_sp->add_option("--shifts", sp.shifts,
                   "time-shifted copies per generator (default from config)")
      ->check(CLI::PositiveNumber);

  ExampleOpts ex;
  CLI::App* c_ex = app.add_subcommand(
      "example",
      "Mass-spring sweep: eigenvalue verdicts vs the damping predicate");
  c_ex->add_option("--m", ex.m, "mass")->capture_default_str();
  c_ex->add_option("--k", ex.k, "spring constant")->capture_default_str();
  c_ex->add_option("--grid", ex.grid, "sweep resolution, ROWSxCOLS over "
                                      "(d, s0) in [-1,1]x[0,2]")
      ->capture_default_str();
  c_ex->add_option("--out", ex.out_dir, "directory for CSV/SVG outputs")
      ->capture_default_str();
  c_ex->add_flag("--no-plots", ex.no_plots, "skip SVG generation");

  TransformOpts tr;
  CLI::App* c_tr = app.add_subcommand(
      "transform",
      "Check gain preservation of loop-shift and multiplier transformations");
  c_tr->add_option("loop", tr.path, "loop JSON document (both blocks lti)")
      ->required();
  c_tr->add_option("--eps", tr.eps, "shift sizes (comma separated; default "
                                    "0.01,0.1)")
      ->delimiter(',');
  c_tr->add_flag("--expect-stable", tr.expect_stable,
                 "exit 1 when the closed loop is unstable-unbounded");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (c_an->parsed()) return run_analyze(an, out);
    if (c_ic->parsed()) {
      ic.grid_flags_given =
          c_ic->count("--dt") > 0 || c_ic->count("--steps") > 0;
      return run_interconnect(ic, out);
    }
    if (c_fa->parsed()) {
      fa.mode_given = c_fa->count("--mode") > 0;
      fa.level_given = c_fa->count("--level") > 0;
      return run_falsify(fa, out);
    }
    if (c_sp->parsed()) {
      sp.gamma_given = c_sp->count("--gamma") > 0;
      return run_sproc(sp, out);
    }
    if (c_ex->parsed()) return run_example(ex, out);
    if (c_tr->parsed()) return run_transform(tr, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const WellPosednessError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;  // unreachable: require_subcommand(1)
}

}  // namespace dissipcert::cli
