#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dissipcert/signals.hpp"
#include "dissipcert/systems.hpp"

namespace dissipcert {

// Machinery for testing conditional negativity of one quadratic form under
// another on a sampled signal subspace, and for deciding whether a single
// nonnegative multiplier merges the two into an unconditionally nonpositive
// combination.  This is the workhorse behind the converse certification
// demos: the subspace encodes "these tuples are realizable by the known
// subsystem", the forms encode gain or supply-rate statements, and the
// multiplier interval is the finite-sample shadow of the lossless
// S-procedure argument.

// -------------------------------------------------------------------------
// Block layout: names the channel groups of a stacked signal.

struct BlockSpec {
  std::string name;
  long width = 0;
};

// Ordered list of named channel blocks; block c starts at offset(name).
struct BlockLayout {
  std::vector<BlockSpec> blocks;

  long total() const;
  bool has(const std::string& name) const;
  long offset(const std::string& name) const;  // ArgumentError if absent
  long width(const std::string& name) const;   // ArgumentError if absent
  bool operator==(const BlockLayout& o) const;

  // (u1, u2, e1, e2): the free-port interconnection tuple.  u1/e1 have the
  // known subsystem's input width m1, u2/e2 its output width p1.
  static BlockLayout loop_free(long m1, long p1);
  // (u1, y1, e1): the tuple when the second external port is clamped to 0.
  static BlockLayout loop_clamped(long m1, long p1);
};

// -------------------------------------------------------------------------
// Quadratic forms sigma(f) = scale * integral f(t)' Phi f(t) dt.

enum class FormKind {
  kGain,                    // ||u1||^2+||u2||^2 - level^2(||e1||^2+||e2||^2)
  kPassivitySupply,         // <u2, e1 - u1>, written with a 1/2 prefactor
  kClampedGain,             // ||y1||^2 - level^2 ||e1||^2
  kClampedPassivitySupply,  // <y1, e1 - u1>, written with a 1/2 prefactor
  kSmallGain,               // level^2 ||u2||^2 - ||u1 - e1||^2
  kClampedSmallGain,        // level^2 ||y1||^2 - ||u1 - e1||^2
};

std::string to_string(FormKind k);

// sigma(f) = scale * sum_k w_k f_k' phi f_k (trapezoidal weights w).  `phi`
// is stored exactly as the form is conventionally written, with any scalar
// prefactor kept separately in `scale` so the matrix itself stays an exact
// array of 0 / +-1 / level^2 blocks.
struct QuadraticForm {
  Eigen::MatrixXd phi;  // exactly symmetric, layout.total() square
  BlockLayout layout;
  double scale = 1.0;

  double evaluate(const Signal& f) const;  // DimensionError on width mismatch
};

// Build one of the stock forms on the given layout.  Gain and small-gain
// kinds take a positive level (the gain bound gamma resp. the ball radius
// alpha); supply kinds take none.  Passivity supplies pair channels, so they
// require m1 == p1.  Wrong layout shape, wrong arity, or level <= 0 raise
// ArgumentError.
QuadraticForm make_form(const BlockLayout& layout, FormKind kind);
QuadraticForm make_form(const BlockLayout& layout, FormKind kind,
                        double level);

// -------------------------------------------------------------------------
// Sampled subspaces.

// Which linear constraint ties the stacked channels together:
//   kLoopFree:    u2 = e2 + G(u1)   on layout (u1, u2, e1, e2)
//   kLoopClamped: y1 = G(u1)        on layout (u1, y1, e1)
enum class SubspaceTag { kLoopFree, kLoopClamped };

std::string to_string(SubspaceTag t);

struct EnsembleMember {
  Signal f;  // stacked signal, layout.total() channels
  // l2 distance from the constraint, measured by re-simulation.
  double residual = 0.0;
};

struct SubspaceEnsemble {
  SubspaceTag tag = SubspaceTag::kLoopFree;
  BlockLayout layout;
  std::vector<EnsembleMember> members;
};

// Deterministic bank of `count` unit-energy generator signals with the given
// channel width: the versioned probe family first, then seeded band-limited
// noise draws once the family is exhausted.
std::vector<Signal> generator_bank(long channels, int count,
                                   const TimeGrid& grid, std::uint64_t seed);

// Build ensemble members from free channel choices and one simulation of G
// per member, then append time-shifted copies of each (shift stride is
// n_steps/8 samples; shifting commutes with the zero-state recursion, so the
// copies stay on the constraint).  Generators must have G's input width and
// a shared grid.  Even-indexed generators produce members with all free
// channels zero (the sub-subspace used in the converse arguments);
// odd-indexed ones mix in neighbouring generators as e1 (and, when widths
// allow, e2).  Member count = generators.size() * n_shifts.
SubspaceEnsemble sample_subspace(const StateSpace& g,
                                 const std::vector<Signal>& generators,
                                 SubspaceTag tag, int n_shifts);
SubspaceEnsemble sample_subspace(const StateSpace& g,
                                 const std::vector<Signal>& generators,
                                 SubspaceTag tag);  // shifts from config()

// -------------------------------------------------------------------------
// Scalar multiplier feasibility.

struct MuInterval {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
};

// Exact feasible set of { mu >= 0 : a_k + mu*b_k <= 0 for all k } as an
// interval, or absence when the constraints conflict.  Empty input yields
// [0, inf).  O(K) scan, no tolerance.
std::optional<MuInterval> mu_feasible(
    const std::vector<std::pair<double, double>>& pairs);

// -------------------------------------------------------------------------
// The combined check.

struct SprocedureReport {
  std::vector<std::pair<double, double>> pairs;  // (a_k, b_k) per member
  double tol = 0.0;

  // Regularity: some member has b_k > tol (a strict witness for the
  // constraint form).  witness_index is the argmax of b_k when regular.
  bool regular = false;
  std::optional<std::size_t> witness_index;

  // Conditional negativity: a_k <= tol whenever b_k >= -tol.  When it
  // fails, violation_index is the offending member with the largest a_k.
  bool conditionally_negative = false;
  std::optional<std::size_t> violation_index;

  // Exact multiplier interval for a_k + mu*b_k <= 0 (no tolerance), and a
  // representative point of it (lo when unbounded, midpoint otherwise).
  std::optional<MuInterval> mu;
  std::optional<double> mu_hat;

  double max_energy = 0.0;  // max_k <f_k, f_k>, drives the default tol

  // Finite ensembles only ever sample the subspace, so every verdict here
  // is evidence over the sampled members, never a proof over the whole
  // space.  Always true; serialized so downstream consumers see the caveat.
  bool ensemble_only = true;
};

// Evaluate s0/s1 on every member, then assemble the report above.  Both
// forms must carry the ensemble's layout (ArgumentError otherwise).  The
// two-argument overload uses tol = sproc_tol_base * (1 + max member energy).
SprocedureReport check_sprocedure(const SubspaceEnsemble& ensemble,
                                  const QuadraticForm& s0,
                                  const QuadraticForm& s1, double tol);
SprocedureReport check_sprocedure(const SubspaceEnsemble& ensemble,
                                  const QuadraticForm& s0,
                                  const QuadraticForm& s1);

// A gain level comfortably above anything the sampled loops can realize for
// this subsystem: 4 * (1 + 1/max(c*, 0.1)) * (1 + peak frequency-grid gain),
// where c* is the subsystem's strict passivity index.  Works for unstable g
// too (the grid scan is a pointwise evaluation, not a norm).
double default_gain_level(const StateSpace& g);

}  // namespace dissipcert
