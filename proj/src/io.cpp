#include "dissipcert/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dissipcert/config.hpp"
#include "dissipcert/errors.hpp"

namespace dissipcert {

namespace {

using nlohmann::json;

std::string index_path(const std::string& at, const std::string& key) {
  return at + "." + key;
}

std::string index_path(const std::string& at, std::size_t i) {
  return at + "[" + std::to_string(i) + "]";
}

// --- strict field access ---------------------------------------------------

const json& need_key(const json& doc, const std::string& at,
                     const std::string& key) {
  if (!doc.contains(key))
    throw ParseError(at, "missing required key \"" + key + "\"");
  return doc.at(key);
}

void reject_unknown_keys(const json& doc, const std::string& at,
                         const std::string& kind,
                         const std::set<std::string>& allowed) {
  for (const auto& item : doc.items()) {
    if (!allowed.count(item.key()))
      throw ParseError(index_path(at, item.key()),
                       "unknown key \"" + item.key() + "\" for kind \"" +
                           kind + "\"");
  }
}

double need_number(const json& v, const std::string& at) {
  if (!v.is_number())
    throw ParseError(at, "expected a number, got " + std::string(v.type_name()));
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ParseError(at, "number is not finite");
  return x;
}

double number_field(const json& doc, const std::string& at,
                    const std::string& key) {
  return need_number(need_key(doc, at, key), index_path(at, key));
}

double number_field_or(const json& doc, const std::string& at,
                       const std::string& key, double fallback) {
  if (!doc.contains(key)) return fallback;
  return need_number(doc.at(key), index_path(at, key));
}

long dim_field(const json& doc, const std::string& at,
               const std::string& key) {
  const json& v = need_key(doc, at, key);
  const std::string vp = index_path(at, key);
  if (!v.is_number_integer())
    throw ParseError(vp, "expected an integer channel count");
  const long n = v.get<long>();
  if (n < 1) throw ParseError(vp, "channel count must be >= 1");
  return n;
}

std::string string_field(const json& doc, const std::string& at,
                         const std::string& key) {
  const json& v = need_key(doc, at, key);
  if (!v.is_string())
    throw ParseError(index_path(at, key),
                     "expected a string, got " + std::string(v.type_name()));
  return v.get<std::string>();
}

// --- matrices ----------------------------------------------------------

// Array of equal-length arrays of finite numbers; [] is the 0x0 matrix.
Eigen::MatrixXd parse_matrix(const json& v, const std::string& at) {
  if (!v.is_array())
    throw ParseError(at, "expected a matrix (array of rows), got " +
                             std::string(v.type_name()));
  const std::size_t rows = v.size();
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  std::size_t cols = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const json& row = v[i];
    const std::string rp = index_path(at, i);
    if (!row.is_array())
      throw ParseError(rp, "expected a row (array of numbers), got " +
                               std::string(row.type_name()));
    if (i == 0) {
      cols = row.size();
    } else if (row.size() != cols) {
      throw ParseError(rp, "ragged matrix: row has " +
                               std::to_string(row.size()) +
                               " entries, expected " + std::to_string(cols));
    }
  }
  Eigen::MatrixXd m(static_cast<long>(rows), static_cast<long>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<long>(i), static_cast<long>(j)) =
          need_number(v[i][j], index_path(index_path(at, i), j));
  return m;
}

Eigen::MatrixXd matrix_field(const json& doc, const std::string& at,
                             const std::string& key) {
  return parse_matrix(need_key(doc, at, key), index_path(at, key));
}

// --- node parsers ------------------------------------------------------

OperatorExpr parse_lti(const json& doc, const std::string& at) {
  reject_unknown_keys(doc, at, "lti", {"kind", "A", "B", "C", "D"});
  Eigen::MatrixXd A = matrix_field(doc, at, "A");
  Eigen::MatrixXd B = matrix_field(doc, at, "B");
  Eigen::MatrixXd C = matrix_field(doc, at, "C");
  Eigen::MatrixXd D = matrix_field(doc, at, "D");
  if (A.rows() != A.cols())
    throw ParseError(index_path(at, "A"),
                     "state matrix must be square, got " +
                         std::to_string(A.rows()) + "x" +
                         std::to_string(A.cols()));
  const long n = A.rows();
  // With no states the input/output widths live in D alone; accept [] for
  // the degenerate n=0 blocks and give them D's widths.
  if (n == 0) {
    if (B.size() == 0) B = Eigen::MatrixXd(0, D.cols());
    if (C.size() == 0) C = Eigen::MatrixXd(D.rows(), 0);
  }
  if (B.rows() != n)
    throw ParseError(index_path(at, "B"),
                     "input matrix must have " + std::to_string(n) +
                         " rows, got " + std::to_string(B.rows()));
  if (C.cols() != n)
    throw ParseError(index_path(at, "C"),
                     "output matrix must have " + std::to_string(n) +
                         " columns, got " + std::to_string(C.cols()));
  if (D.rows() != C.rows() || D.cols() != B.cols())
    throw ParseError(index_path(at, "D"),
                     "feedthrough must be " + std::to_string(C.rows()) + "x" +
                         std::to_string(B.cols()) + ", got " +
                         std::to_string(D.rows()) + "x" +
                         std::to_string(D.cols()));
  try {
    return OperatorExpr::lti(StateSpace(A, B, C, D));
  } catch (const std::runtime_error& e) {
    throw ParseError(at, e.what());
  }
}

OperatorExpr parse_identity(const json& doc, const std::string& at) {
  reject_unknown_keys(doc, at, "identity", {"kind", "dim", "scale"});
  const long dim = dim_field(doc, at, "dim");
  const double scale = number_field_or(doc, at, "scale", 1.0);
  return OperatorExpr::identity(dim, scale);
}

OperatorExpr parse_static(const json& doc, const std::string& at) {
  const std::string map = string_field(doc, at, "map");
  const long dim = dim_field(doc, at, "dim");
  if (map == "saturation") {
    reject_unknown_keys(doc, at, "static", {"kind", "map", "dim", "limit"});
    const double limit = number_field(doc, at, "limit");
    if (!(limit > 0.0))
      throw ParseError(index_path(at, "limit"),
                       "saturation limit must be positive");
    return OperatorExpr::saturation(dim, limit);
  }
  if (map == "deadzone") {
    reject_unknown_keys(doc, at, "static", {"kind", "map", "dim", "width"});
    const double width = number_field(doc, at, "width");
    if (!(width >= 0.0))
      throw ParseError(index_path(at, "width"),
                       "deadzone width must be nonnegative");
    return OperatorExpr::deadzone(dim, width);
  }
  if (map == "cubic") {
    reject_unknown_keys(doc, at, "static", {"kind", "map", "dim"});
    return OperatorExpr::cubic(dim);
  }
  throw ParseError(index_path(at, "map"),
                   "unknown static map \"" + map +
                       "\" (expected saturation, deadzone, or cubic)");
}

OperatorExpr parse_tvgain(const json& doc, const std::string& at) {
  reject_unknown_keys(
      doc, at, "tvgain",
      {"kind", "dim", "profile", "offset", "slope", "amp", "omega"});
  const long dim = dim_field(doc, at, "dim");
  TimeVaryingGain k;
  const std::string profile = string_field(doc, at, "profile");
  if (profile == "constant") {
    k.profile = TvProfile::kConstant;
  } else if (profile == "affine") {
    k.profile = TvProfile::kAffine;
  } else if (profile == "sin_squared") {
    k.profile = TvProfile::kSinSquared;
  } else {
    throw ParseError(index_path(at, "profile"),
                     "unknown profile \"" + profile +
                         "\" (expected constant, affine, or sin_squared)");
  }
  k.offset = number_field_or(doc, at, "offset", 1.0);
  k.slope = number_field_or(doc, at, "slope", 0.0);
  k.amp = number_field_or(doc, at, "amp", 0.0);
  k.omega = number_field_or(doc, at, "omega", 1.0);
  try {
    return OperatorExpr::tv_gain(dim, k);
  } catch (const std::runtime_error& e) {
    throw ParseError(at, e.what());
  }
}

OperatorExpr parse_children_fold(const json& doc, const std::string& at,
                                 const std::string& kind) {
  reject_unknown_keys(doc, at, kind, {"kind", "children"});
  const json& kids = need_key(doc, at, "children");
  const std::string kp = index_path(at, "children");
  if (!kids.is_array() || kids.size() < 2)
    throw ParseError(kp, "\"" + kind +
                             "\" needs an array of at least two children");
  OperatorExpr acc = parse_system(kids[0], index_path(kp, std::size_t{0}));
  for (std::size_t i = 1; i < kids.size(); ++i) {
    OperatorExpr next = parse_system(kids[i], index_path(kp, i));
    try {
      acc = kind == "sum" ? OperatorExpr::sum(std::move(acc), std::move(next))
                          : OperatorExpr::cascade(std::move(acc),
                                                  std::move(next));
    } catch (const std::runtime_error& e) {
      throw ParseError(index_path(kp, i), e.what());
    }
  }
  return acc;
}

OperatorExpr parse_scale(const json& doc, const std::string& at) {
  reject_unknown_keys(doc, at, "scale", {"kind", "c", "child"});
  const double c = number_field(doc, at, "c");
  OperatorExpr child =
      parse_system(need_key(doc, at, "child"), index_path(at, "child"));
  try {
    return OperatorExpr::scale(c, std::move(child));
  } catch (const std::runtime_error& e) {
    throw ParseError(at, e.what());
  }
}

// --- file plumbing -----------------------------------------------------

std::string file_path_prefix(const std::string& path) { return path + ":$"; }

// --- report helpers ----------------------------------------------------

json json_number(double x) {
  if (std::isnan(x)) return json("nan");
  if (std::isinf(x)) return json(x > 0 ? "inf" : "-inf");
  return json(x);
}

json json_opt_number(const std::optional<double>& x) {
  return x ? json_number(*x) : json(nullptr);
}

void print_row(std::ostream& os, double t,
               const std::vector<const Signal*>& sigs, long k) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", t);
  os << buf;
  for (const Signal* s : sigs) {
    for (long c = 0; c < s->channels(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", s->values(k, c));
      os << ',' << buf;
    }
  }
  os << '\n';
}

void print_header(std::ostream& os, const std::vector<const char*>& names,
                  const std::vector<const Signal*>& sigs) {
  os << 't';
  for (std::size_t i = 0; i < sigs.size(); ++i)
    for (long c = 0; c < sigs[i]->channels(); ++c)
      os << ',' << names[i] << '[' << c << ']';
  os << '\n';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

// --- parsing entry points ----------------------------------------------

OperatorExpr parse_system(const json& doc, const std::string& at) {
  if (!doc.is_object())
    throw ParseError(at, "expected a system object, got " +
                             std::string(doc.type_name()));
  const std::string kind = string_field(doc, at, "kind");
  if (kind == "lti") return parse_lti(doc, at);
  if (kind == "identity") return parse_identity(doc, at);
  if (kind == "static") return parse_static(doc, at);
  if (kind == "tvgain") return parse_tvgain(doc, at);
  if (kind == "sum" || kind == "cascade")
    return parse_children_fold(doc, at, kind);
  if (kind == "scale") return parse_scale(doc, at);
  throw ParseError(index_path(at, "kind"),
                   "unknown system kind \"" + kind +
                       "\" (expected lti, identity, static, tvgain, sum, "
                       "cascade, or scale)");
}

LoopSpec parse_loop(const json& doc, const std::string& at) {
  if (!doc.is_object())
    throw ParseError(at, "expected a loop object, got " +
                             std::string(doc.type_name()));
  reject_unknown_keys(doc, at, "loop", {"sigma1", "sigma2", "e2"});
  LoopSpec spec;
  spec.sigma1 =
      parse_system(need_key(doc, at, "sigma1"), index_path(at, "sigma1"));
  spec.sigma2 =
      parse_system(need_key(doc, at, "sigma2"), index_path(at, "sigma2"));
  if (doc.contains("e2")) {
    const std::string e2 = string_field(doc, at, "e2");
    if (e2 == "zero") {
      spec.e2_clamped = true;
    } else if (e2 == "free") {
      spec.e2_clamped = false;
    } else {
      throw ParseError(index_path(at, "e2"),
                       "expected \"free\" or \"zero\", got \"" + e2 + "\"");
    }
  }
  return spec;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(file_path_prefix(path),
                     "invalid JSON: " + std::string(e.what()));
  }
}

OperatorExpr read_system_file(const std::string& path) {
  return parse_system(read_json_file(path), file_path_prefix(path));
}

LoopSpec read_loop_file(const std::string& path) {
  return parse_loop(read_json_file(path), file_path_prefix(path));
}

// --- CSV ---------------------------------------------------------------

void write_signal_csv(std::ostream& os, const Signal& s,
                      const std::string& name) {
  print_header(os, {name.c_str()}, {&s});
  for (long k = 0; k < s.steps(); ++k) print_row(os, s.grid.t(k), {&s}, k);
}

Signal read_signal_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  auto at_line = [&path](long line) {
    return path + ":line " + std::to_string(line);
  };

  std::string line;
  if (!std::getline(in, line)) throw ParseError(path, "empty CSV file");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.empty() || header[0] != "t")
    throw ParseError(at_line(1), "first column must be \"t\"");
  const long channels = static_cast<long>(header.size()) - 1;
  if (channels < 1)
    throw ParseError(at_line(1), "no value columns after \"t\"");

  std::vector<double> times;
  std::vector<double> flat;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<long>(fields.size()) != channels + 1)
      throw ParseError(at_line(lineno),
                       "expected " + std::to_string(channels + 1) +
                           " fields, got " + std::to_string(fields.size()));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const std::string& f = fields[i];
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(f, &used);
      } catch (const std::exception&) {
        throw ParseError(at_line(lineno), "not a number: \"" + f + "\"");
      }
      if (used != f.size() || !std::isfinite(v))
        throw ParseError(at_line(lineno), "not a finite number: \"" + f + "\"");
      if (i == 0) {
        times.push_back(v);
      } else {
        flat.push_back(v);
      }
    }
  }
  const long n = static_cast<long>(times.size());
  if (n < 2) throw ParseError(path, "need at least two data rows");
  if (std::abs(times[0]) > 1e-12)
    throw ParseError(at_line(2), "time must start at 0, got " +
                                     std::to_string(times[0]));
  const double dt = times[1] - times[0];
  if (!(dt > 0.0)) throw ParseError(at_line(3), "time must be increasing");
  for (long k = 0; k < n; ++k) {
    const double expect = dt * static_cast<double>(k);
    if (std::abs(times[static_cast<std::size_t>(k)] - expect) >
        1e-9 * (1.0 + std::abs(expect)))
      throw ParseError(at_line(k + 2),
                       "time grid is not uniform: got " +
                           std::to_string(times[static_cast<std::size_t>(k)]) +
                           ", expected " + std::to_string(expect));
  }
  Eigen::MatrixXd values(n, channels);
  for (long k = 0; k < n; ++k)
    for (long c = 0; c < channels; ++c)
      values(k, c) = flat[static_cast<std::size_t>(k * channels + c)];
  return Signal(TimeGrid(dt, n), std::move(values));
}

void write_trajectory_csv(std::ostream& os, const LoopTrajectory& traj) {
  const std::vector<const char*> names = {"e1", "e2", "u1", "u2", "y1", "y2"};
  const std::vector<const Signal*> sigs = {&traj.e1, &traj.e2, &traj.u1,
                                           &traj.u2, &traj.y1, &traj.y2};
  print_header(os, names, sigs);
  for (long k = 0; k < traj.e1.steps(); ++k)
    print_row(os, traj.e1.grid.t(k), sigs, k);
}

// --- report serialization ----------------------------------------------

json measured(double value, const std::string& method, double tol) {
  json j;
  j["value"] = json_number(value);
  j["method"] = method;
  j["tol"] = json_number(tol);
  return j;
}

json to_json(const GainCertificate& cert) {
  json j = measured(cert.value, to_string(cert.method), cert.tol);
  j["lower_bound_only"] = cert.is_lower_bound_only();
  j["peak_frequency"] = json_opt_number(cert.peak_frequency);
  return j;
}

json to_json(const ScanResult& r, const std::string& method, double tol) {
  json j = measured(r.value, method, tol);
  j["omega"] = json_number(r.omega);
  return j;
}

json to_json(const PassivityReport& rep) {
  const std::string method = to_string(rep.method);
  json delta = measured(rep.delta, method, rep.tol);
  delta["witness_frequency"] = json_opt_number(rep.delta_witness_frequency);
  json epsilon = measured(rep.epsilon, method, rep.tol);
  epsilon["witness_frequency"] =
      json_opt_number(rep.epsilon_witness_frequency);

  json j;
  j["delta"] = std::move(delta);
  j["epsilon"] = std::move(epsilon);
  j["is_certificate"] = rep.is_certificate;
  if (rep.witness_probe) {
    json w;
    w["probe"] = *rep.witness_probe;
    w["horizon"] = json_opt_number(rep.witness_horizon);
    w["min_supply"] = json_opt_number(rep.min_supply);
    j["probe_witness"] = std::move(w);
  } else {
    j["probe_witness"] = nullptr;
  }
  return j;
}

json to_json(const MemberCertificate& cert) {
  const std::string method = cert.mode == CertMode::kGainBound
                                 ? "hamiltonian_bisection"
                                 : "frequency_grid";
  json j;
  j["mode"] = to_string(cert.mode);
  j["level"] = json_number(cert.level);
  j["margin"] = measured(cert.margin, method, config().cert_tol);
  j["boundary"] = cert.boundary;
  return j;
}

json to_json(const FalsificationResult& r, bool exact) {
  json j;
  j["destabilized"] = r.destabilized;
  if (r.theta) {
    json theta = json::array();
    for (long i = 0; i < r.theta->size(); ++i)
      theta.push_back(json_number((*r.theta)(i)));
    j["theta"] = std::move(theta);
  } else {
    j["theta"] = nullptr;
  }
  j["member_certificate"] =
      r.member_certificate ? to_json(*r.member_certificate) : json(nullptr);
  j["closed_loop_abscissa"] =
      r.closed_loop_abscissa
          ? measured(*r.closed_loop_abscissa, "spectral_abscissa",
                     config().stability_margin)
          : json(nullptr);
  j["overflow_step"] =
      r.overflow_step ? json(*r.overflow_step) : json(nullptr);
  j["energy_ratio"] = r.energy_ratio
                          ? measured(*r.energy_ratio, "probe_energy_ratio",
                                     config().overflow_energy_ratio)
                          : json(nullptr);
  j["max_gain_lb"] =
      r.max_gain_lb
          ? measured(*r.max_gain_lb,
                     exact ? "hamiltonian_bisection" : "empirical_lower_bound",
                     exact ? config().hinf_tol : 0.0)
          : json(nullptr);
  j["evaluations"] = r.evaluations;
  json trace = json::array();
  for (const SearchPoint& p : r.trace) {
    json pt;
    json theta = json::array();
    for (long i = 0; i < p.theta.size(); ++i)
      theta.push_back(json_number(p.theta(i)));
    pt["theta"] = std::move(theta);
    pt["objective"] = json_number(p.objective);
    pt["rejected"] = p.rejected;
    trace.push_back(std::move(pt));
  }
  j["trace"] = std::move(trace);
  return j;
}

json to_json(const SprocedureReport& rep) {
  json j;
  json pairs = json::array();
  for (const auto& [a, b] : rep.pairs) {
    json p;
    p["a"] = json_number(a);
    p["b"] = json_number(b);
    pairs.push_back(std::move(p));
  }
  j["pairs"] = std::move(pairs);
  j["method"] = "trapezoid_quadrature";
  j["tol"] = json_number(rep.tol);
  j["regular"] = rep.regular;
  j["witness_index"] =
      rep.witness_index ? json(*rep.witness_index) : json(nullptr);
  j["conditionally_negative"] = rep.conditionally_negative;
  j["violation_index"] =
      rep.violation_index ? json(*rep.violation_index) : json(nullptr);
  if (rep.mu) {
    json mu;
    mu["lo"] = json_number(rep.mu->lo);
    mu["hi"] = json_number(rep.mu->hi);
    j["mu"] = std::move(mu);
  } else {
    j["mu"] = nullptr;
  }
  j["mu_hat"] = json_opt_number(rep.mu_hat);
  j["max_energy"] = json_number(rep.max_energy);
  j["ensemble_only"] = rep.ensemble_only;
  return j;
}

json to_json(const MassSpringReport& rep) {
  json j;
  j["m"] = json_number(rep.m);
  j["d"] = json_number(rep.d);
  j["s0"] = json_number(rep.s0);
  j["k"] = json_number(rep.k);
  j["mass_osp_index"] =
      measured(rep.mass_osp_index, "frequency_grid", config().freq_refine_rel);
  j["mass_osp"] = rep.mass_osp;
  j["spring_pr_margin"] = measured(rep.spring_pr_margin, "frequency_grid",
                                   config().freq_refine_rel);
  j["spring_passive"] = rep.spring_passive;
  json spectrum = measured(rep.spectral_abscissa, "spectral_abscissa",
                           config().stability_margin);
  json eigs = json::array();
  for (long i = 0; i < rep.eigenvalues.size(); ++i) {
    json e;
    e["re"] = json_number(rep.eigenvalues(i).real());
    e["im"] = json_number(rep.eigenvalues(i).imag());
    eigs.push_back(std::move(e));
  }
  spectrum["eigenvalues"] = std::move(eigs);
  j["spectral_abscissa"] = std::move(spectrum);
  j["stable"] = rep.stable;
  j["trace_condition"] = measured(rep.trace_condition, "closed_form", 0.0);
  j["det_condition"] = measured(rep.det_condition, "closed_form", 0.0);
  j["predicate"] = rep.predicate;
  j["marginal"] = rep.marginal;
  j["consistent"] = rep.consistent;
  return j;
}

json report_envelope(const std::string& kind, json body) {
  json j;
  j["schema"] = 1;
  j["kind"] = kind;
  j["report"] = std::move(body);
  return j;
}

std::string render_report(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace dissipcert
