#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "dissipcert/adversary.hpp"
#include "dissipcert/feedback.hpp"
#include "dissipcert/gain.hpp"
#include "dissipcert/passivity.hpp"
#include "dissipcert/signals.hpp"
#include "dissipcert/sprocedure.hpp"
#include "dissipcert/systems.hpp"

namespace dissipcert {

// ---------------------------------------------------------------------------
// Input documents.
//
// System document (recursive):
//   {"kind": "lti", "A": [[...]], "B": [[...]], "C": [[...]], "D": [[...]]}
//   {"kind": "identity", "dim": n, "scale": c}              (scale optional)
//   {"kind": "static", "map": "saturation", "dim": n, "limit": x}
//   {"kind": "static", "map": "deadzone",   "dim": n, "width": x}
//   {"kind": "static", "map": "cubic",      "dim": n}
//   {"kind": "tvgain", "dim": n, "profile": "constant"|"affine"|"sin_squared",
//    "offset": x, "slope": x, "amp": x, "omega": x}     (numbers optional)
//   {"kind": "sum",     "children": [doc, doc, ...]}         (two or more)
//   {"kind": "cascade", "children": [doc, doc, ...]}         (applied left
//                                                             to right)
//   {"kind": "scale", "c": x, "child": doc}
//
// Validation is strict: unknown kinds, unknown keys, missing keys, ragged or
// non-numeric matrices, and dimension mismatches all raise ParseError whose
// `path` pinpoints the offending element ("$.children[1].A" style).
//
// Loop document:
//   {"sigma1": <system doc>, "sigma2": <system doc>, "e2": "free"|"zero"}
// where "e2" is optional and defaults to "free".
// ---------------------------------------------------------------------------

struct LoopSpec {
  OperatorExpr sigma1;
  OperatorExpr sigma2;
  bool e2_clamped = false;  // true for the "e2": "zero" variant
};

// Parse from an already-loaded JSON value; `at` seeds the error path.
OperatorExpr parse_system(const nlohmann::json& doc,
                          const std::string& at = "$");
LoopSpec parse_loop(const nlohmann::json& doc, const std::string& at = "$");

// Load and syntax-check a JSON document; ParseError paths are prefixed with
// the file name ("mass.json:$" style), covering unreadable and empty files.
nlohmann::json read_json_file(const std::string& path);
OperatorExpr read_system_file(const std::string& path);
LoopSpec read_loop_file(const std::string& path);

// ---------------------------------------------------------------------------
// Signal CSV.  Header "t,name[0],name[1],..."; one row per grid step; the
// time column must start at 0 and advance uniformly.  write/read round-trip
// exactly (values are printed with full precision).
// ---------------------------------------------------------------------------

void write_signal_csv(std::ostream& os, const Signal& s,
                      const std::string& name = "u");
Signal read_signal_csv(const std::string& path);

// One CSV with all six loop signals: columns t, e1[i], e2[i], u1[i], u2[i],
// y1[i], y2[i].
void write_trajectory_csv(std::ostream& os, const LoopTrajectory& traj);

// ---------------------------------------------------------------------------
// Report serialization.  Every analysis numeric is emitted as an object
// {"value": v, "method": tag, "tol": t} so numbers never travel without
// their provenance; non-finite values are encoded as the strings "inf",
// "-inf", "nan" (JSON has no literals for them).  Key order is alphabetical
// (nlohmann objects sort), so identical inputs render identical bytes.
// ---------------------------------------------------------------------------

nlohmann::json measured(double value, const std::string& method, double tol);

nlohmann::json to_json(const GainCertificate& cert);
nlohmann::json to_json(const ScanResult& r, const std::string& method,
                       double tol);
nlohmann::json to_json(const PassivityReport& rep);
nlohmann::json to_json(const MemberCertificate& cert);
// `exact` says whether the campaign ran on the collapsed LTI closed loop
// (abscissa/gain certificates) or on simulated trajectories (energy
// evidence); it selects the method tags.
nlohmann::json to_json(const FalsificationResult& r, bool exact);
nlohmann::json to_json(const SprocedureReport& rep);
nlohmann::json to_json(const MassSpringReport& rep);

// Wrap a report body in the versioned envelope:
//   {"schema": 1, "kind": <kind>, "report": <body>}.
nlohmann::json report_envelope(const std::string& kind, nlohmann::json body);

// Deterministic bytes for a report document (2-space indent, trailing
// newline).  Identical documents render identically.
std::string render_report(const nlohmann::json& doc);

}  // namespace dissipcert
