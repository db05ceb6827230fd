#include "dissipcert/sprocedure.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "dissipcert/config.hpp"
#include "dissipcert/errors.hpp"
#include "dissipcert/gain.hpp"
#include "dissipcert/passivity.hpp"
#include "dissipcert/probes.hpp"

namespace dissipcert {

namespace {

const BlockSpec* find_block(const BlockLayout& layout,
                            const std::string& name) {
  for (const auto& b : layout.blocks) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

[[noreturn]] void missing_block(const std::string& name) {
  throw ArgumentError("block layout has no block named '" + name + "'");
}

}  // namespace

long BlockLayout::total() const {
  long sum = 0;
  for (const auto& b : blocks) sum += b.width;
  return sum;
}

bool BlockLayout::has(const std::string& name) const {
  return find_block(*this, name) != nullptr;
}

long BlockLayout::offset(const std::string& name) const {
  long off = 0;
  for (const auto& b : blocks) {
    if (b.name == name) return off;
    off += b.width;
  }
  missing_block(name);
}

long BlockLayout::width(const std::string& name) const {
  const BlockSpec* b = find_block(*this, name);
  if (!b) missing_block(name);
  return b->width;
}

bool BlockLayout::operator==(const BlockLayout& o) const {
  if (blocks.size() != o.blocks.size()) return false;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].name != o.blocks[i].name ||
        blocks[i].width != o.blocks[i].width) {
      return false;
    }
  }
  return true;
}

BlockLayout BlockLayout::loop_free(long m1, long p1) {
  if (m1 < 1 || p1 < 1) {
    throw ArgumentError("loop_free layout needs positive channel widths");
  }
  return BlockLayout{
      {{"u1", m1}, {"u2", p1}, {"e1", m1}, {"e2", p1}}};
}

BlockLayout BlockLayout::loop_clamped(long m1, long p1) {
  if (m1 < 1 || p1 < 1) {
    throw ArgumentError("loop_clamped layout needs positive channel widths");
  }
  return BlockLayout{{{"u1", m1}, {"y1", p1}, {"e1", m1}}};
}

std::string to_string(FormKind k) {
  switch (k) {
    case FormKind::kGain:
      return "gain";
    case FormKind::kPassivitySupply:
      return "passivity_supply";
    case FormKind::kClampedGain:
      return "clamped_gain";
    case FormKind::kClampedPassivitySupply:
      return "clamped_passivity_supply";
    case FormKind::kSmallGain:
      return "small_gain";
    case FormKind::kClampedSmallGain:
      return "clamped_small_gain";
  }
  return "unknown";
}

std::string to_string(SubspaceTag t) {
  switch (t) {
    case SubspaceTag::kLoopFree:
      return "loop_free";
    case SubspaceTag::kLoopClamped:
      return "loop_clamped";
  }
  return "unknown";
}

double QuadraticForm::evaluate(const Signal& f) const {
  if (f.channels() != layout.total()) {
    std::ostringstream msg;
    msg << "quadratic form expects " << layout.total()
        << " stacked channels, signal has " << f.channels();
    throw DimensionError(msg.str());
  }
  const Eigen::VectorXd w = trapezoid_weights(f.grid);
  const Eigen::VectorXd per_sample =
      (f.values * phi).cwiseProduct(f.values).rowwise().sum();
  return scale * per_sample.dot(w);
}

namespace {

bool needs_level(FormKind kind) {
  return kind == FormKind::kGain || kind == FormKind::kClampedGain ||
         kind == FormKind::kSmallGain || kind == FormKind::kClampedSmallGain;
}

bool wants_free_layout(FormKind kind) {
  return kind == FormKind::kGain || kind == FormKind::kPassivitySupply ||
         kind == FormKind::kSmallGain;
}

void set_identity_block(Eigen::MatrixXd& phi, long r0, long c0, long n,
                        double v) {
  for (long i = 0; i < n; ++i) phi(r0 + i, c0 + i) = v;
}

QuadraticForm build_form(const BlockLayout& layout, FormKind kind,
                         double level) {
  const bool free_layout = wants_free_layout(kind);
  const BlockLayout expected_shape =
      free_layout ? BlockLayout::loop_free(1, 1) : BlockLayout::loop_clamped(1, 1);
  if (layout.blocks.size() != expected_shape.blocks.size()) {
    throw ArgumentError("form kind '" + to_string(kind) +
                        "' expects a " +
                        (free_layout ? std::string("(u1, u2, e1, e2)")
                                     : std::string("(u1, y1, e1)")) +
                        " layout");
  }
  for (std::size_t i = 0; i < layout.blocks.size(); ++i) {
    if (layout.blocks[i].name != expected_shape.blocks[i].name) {
      throw ArgumentError("form kind '" + to_string(kind) +
                          "' does not match block '" +
                          layout.blocks[i].name + "' in the layout");
    }
  }
  const long m1 = layout.width("u1");
  const long p1 = free_layout ? layout.width("u2") : layout.width("y1");
  if (layout.width("e1") != m1) {
    throw ArgumentError("e1 block must have u1's width");
  }
  if (free_layout && layout.width("e2") != p1) {
    throw ArgumentError("e2 block must have u2's width");
  }
  const bool pairing =
      kind == FormKind::kPassivitySupply ||
      kind == FormKind::kClampedPassivitySupply;
  if (pairing && m1 != p1) {
    throw ArgumentError("passivity supply pairs channels; widths " +
                        std::to_string(m1) + " and " + std::to_string(p1) +
                        " differ");
  }

  const long n = layout.total();
  QuadraticForm form;
  form.layout = layout;
  form.phi = Eigen::MatrixXd::Zero(n, n);
  form.scale = 1.0;

  const long off_u1 = layout.offset("u1");
  const long off_e1 = layout.offset("e1");
  Eigen::MatrixXd& phi = form.phi;

  switch (kind) {
    case FormKind::kGain: {
      // diag(I, I, -level^2 I, -level^2 I) over (u1, u2, e1, e2).
      const long off_u2 = layout.offset("u2");
      const long off_e2 = layout.offset("e2");
      set_identity_block(phi, off_u1, off_u1, m1, 1.0);
      set_identity_block(phi, off_u2, off_u2, p1, 1.0);
      set_identity_block(phi, off_e1, off_e1, m1, -level * level);
      set_identity_block(phi, off_e2, off_e2, p1, -level * level);
      break;
    }
    case FormKind::kPassivitySupply: {
      // (1/2) * [u2 row: -u1 + e1 coupling], symmetrized: the written
      // matrix has -I in the (u1,u2) pair and +I in the (u2,e1) pair.
      const long off_u2 = layout.offset("u2");
      set_identity_block(phi, off_u1, off_u2, m1, -1.0);
      set_identity_block(phi, off_u2, off_u1, m1, -1.0);
      set_identity_block(phi, off_u2, off_e1, m1, 1.0);
      set_identity_block(phi, off_e1, off_u2, m1, 1.0);
      form.scale = 0.5;
      break;
    }
    case FormKind::kClampedGain: {
      // diag(0, I, -level^2 I) over (u1, y1, e1).
      const long off_y1 = layout.offset("y1");
      set_identity_block(phi, off_y1, off_y1, p1, 1.0);
      set_identity_block(phi, off_e1, off_e1, m1, -level * level);
      break;
    }
    case FormKind::kClampedPassivitySupply: {
      const long off_y1 = layout.offset("y1");
      set_identity_block(phi, off_u1, off_y1, m1, -1.0);
      set_identity_block(phi, off_y1, off_u1, m1, -1.0);
      set_identity_block(phi, off_y1, off_e1, m1, 1.0);
      set_identity_block(phi, off_e1, off_y1, m1, 1.0);
      form.scale = 0.5;
      break;
    }
    case FormKind::kSmallGain: {
      // [[-I, 0, I, 0], [0, level^2 I, 0, 0], [I, 0, -I, 0], [0,0,0,0]]
      // over (u1, u2, e1, e2): level^2 ||u2||^2 - ||u1 - e1||^2.
      const long off_u2 = layout.offset("u2");
      set_identity_block(phi, off_u1, off_u1, m1, -1.0);
      set_identity_block(phi, off_u2, off_u2, p1, level * level);
      set_identity_block(phi, off_e1, off_e1, m1, -1.0);
      set_identity_block(phi, off_u1, off_e1, m1, 1.0);
      set_identity_block(phi, off_e1, off_u1, m1, 1.0);
      break;
    }
    case FormKind::kClampedSmallGain: {
      // [[-I, 0, I], [0, level^2 I, 0], [I, 0, -I]] over (u1, y1, e1).
      const long off_y1 = layout.offset("y1");
      set_identity_block(phi, off_u1, off_u1, m1, -1.0);
      set_identity_block(phi, off_y1, off_y1, p1, level * level);
      set_identity_block(phi, off_e1, off_e1, m1, -1.0);
      set_identity_block(phi, off_u1, off_e1, m1, 1.0);
      set_identity_block(phi, off_e1, off_u1, m1, 1.0);
      break;
    }
  }
  return form;
}

}  // namespace

QuadraticForm make_form(const BlockLayout& layout, FormKind kind) {
  if (needs_level(kind)) {
    throw ArgumentError("form kind '" + to_string(kind) +
                        "' needs a positive level argument");
  }
  return build_form(layout, kind, 0.0);
}

QuadraticForm make_form(const BlockLayout& layout, FormKind kind,
                        double level) {
  if (!needs_level(kind)) {
    throw ArgumentError("form kind '" + to_string(kind) +
                        "' takes no level argument");
  }
  if (!(level > 0.0) || !std::isfinite(level)) {
    throw ArgumentError("form level must be positive and finite");
  }
  return build_form(layout, kind, level);
}

std::vector<Signal> generator_bank(long channels, int count,
                                   const TimeGrid& grid, std::uint64_t seed) {
  if (channels < 1) throw ArgumentError("generator_bank needs channels >= 1");
  if (count < 1) throw ArgumentError("generator_bank needs count >= 1");
  if (grid.n_steps < 2) {
    throw ArgumentError("generator_bank needs a grid with >= 2 samples");
  }
  std::vector<Signal> family = probe_family_v1(grid, channels, seed);
  std::vector<Signal> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count && i < static_cast<int>(family.size()); ++i) {
    out.push_back(std::move(family[static_cast<std::size_t>(i)]));
  }
  // Top up with seeded band-limited noise once the fixed family runs out.
  // Draws hit all channels at once (the family already covers one-at-a-time
  // excitation) and are normalized to unit energy.
  int extra = 0;
  while (static_cast<int>(out.size()) < count) {
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL *
                                static_cast<std::uint64_t>(extra + 1)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double log_lo = std::log(0.01), log_hi = std::log(20.0);
    Eigen::MatrixXd values =
        Eigen::MatrixXd::Zero(grid.n_steps, channels);
    for (long c = 0; c < channels; ++c) {
      for (int s = 0; s < 24; ++s) {
        const double omega = std::exp(log_lo + (log_hi - log_lo) * unif(rng));
        const double phase = 2.0 * M_PI * unif(rng);
        const double amp = 2.0 * unif(rng) - 1.0;
        for (long k = 0; k < grid.n_steps; ++k) {
          values(k, c) += amp * std::sin(omega * grid.t(k) + phase);
        }
      }
    }
    Signal draw{grid, std::move(values)};
    const double nrm = l2_norm(draw);
    if (nrm > 0.0) {
      draw.values /= nrm;
      out.push_back(std::move(draw));
      ++extra;
    } else {
      ++extra;  // degenerate draw; skip and reseed with the next index
    }
  }
  return out;
}

namespace {

Signal add_signals(const Signal& a, const Signal& b) {
  Signal out = a;
  out.values += b.values;
  return out;
}

Signal sub_signals(const Signal& a, const Signal& b) {
  Signal out = a;
  out.values -= b.values;
  return out;
}

double constraint_residual(const OperatorExpr& op, const BlockLayout& layout,
                           SubspaceTag tag, const Signal& f) {
  const Signal u1 = channel_block(f, layout.offset("u1"), layout.width("u1"));
  const Signal ysim = op.simulate(u1);
  if (tag == SubspaceTag::kLoopFree) {
    const Signal u2 =
        channel_block(f, layout.offset("u2"), layout.width("u2"));
    const Signal e2 =
        channel_block(f, layout.offset("e2"), layout.width("e2"));
    return l2_norm(sub_signals(sub_signals(u2, e2), ysim));
  }
  const Signal y1 = channel_block(f, layout.offset("y1"), layout.width("y1"));
  return l2_norm(sub_signals(y1, ysim));
}

}  // namespace

SubspaceEnsemble sample_subspace(const StateSpace& g,
                                 const std::vector<Signal>& generators,
                                 SubspaceTag tag, int n_shifts) {
  if (g.inputs() < 1 || g.outputs() < 1) {
    throw ArgumentError("sample_subspace needs a system with channels");
  }
  if (generators.empty()) {
    throw ArgumentError("sample_subspace needs at least one generator");
  }
  if (n_shifts < 1) throw ArgumentError("sample_subspace needs n_shifts >= 1");
  const long m1 = g.inputs();
  const long p1 = g.outputs();
  const TimeGrid grid = generators.front().grid;
  for (const Signal& gen : generators) {
    if (!(gen.grid == grid)) {
      throw ArgumentError("generators must share one time grid");
    }
    if (gen.channels() != m1) {
      std::ostringstream msg;
      msg << "generators must have the system's input width " << m1
          << ", got " << gen.channels();
      throw DimensionError(msg.str());
    }
  }

  SubspaceEnsemble ens;
  ens.tag = tag;
  ens.layout = tag == SubspaceTag::kLoopFree
                   ? BlockLayout::loop_free(m1, p1)
                   : BlockLayout::loop_clamped(m1, p1);

  const OperatorExpr op = OperatorExpr::lti(g);
  const long stride = std::max<long>(1, grid.n_steps / 8);
  const std::size_t n_gen = generators.size();
  ens.members.reserve(n_gen * static_cast<std::size_t>(n_shifts));

  for (std::size_t i = 0; i < n_gen; ++i) {
    const Signal& u1 = generators[i];
    const bool mix = (i % 2 == 1);
    const Signal e1 =
        mix ? generators[(i + 1) % n_gen] : Signal::zero(grid, m1);
    const Signal y1 = op.simulate(u1);

    Signal stacked;
    if (tag == SubspaceTag::kLoopFree) {
      const Signal e2 = (mix && p1 == m1) ? generators[(i + 2) % n_gen]
                                          : Signal::zero(grid, p1);
      const Signal u2 = add_signals(e2, y1);
      stacked = hstack({u1, u2, e1, e2});
    } else {
      stacked = hstack({u1, y1, e1});
    }

    for (int j = 0; j < n_shifts; ++j) {
      const double tau = grid.dt * static_cast<double>(stride) * j;
      Signal f = (j == 0) ? stacked : shift(stacked, tau);
      EnsembleMember member;
      member.residual = constraint_residual(op, ens.layout, tag, f);
      member.f = std::move(f);
      ens.members.push_back(std::move(member));
    }
  }
  return ens;
}

SubspaceEnsemble sample_subspace(const StateSpace& g,
                                 const std::vector<Signal>& generators,
                                 SubspaceTag tag) {
  return sample_subspace(g, generators, tag, config().sproc_shifts);
}

std::optional<MuInterval> mu_feasible(
    const std::vector<std::pair<double, double>>& pairs) {
  MuInterval box;
  for (const auto& [a, b] : pairs) {
    if (b > 0.0) {
      box.hi = std::min(box.hi, -a / b);
    } else if (b < 0.0) {
      box.lo = std::max(box.lo, a / (-b));
    } else if (!(a <= 0.0)) {
      return std::nullopt;  // 0*mu cannot fix a positive constant
    }
  }
  if (box.lo > box.hi) return std::nullopt;
  return box;
}

SprocedureReport check_sprocedure(const SubspaceEnsemble& ensemble,
                                  const QuadraticForm& s0,
                                  const QuadraticForm& s1, double tol) {
  if (!(s0.layout == ensemble.layout) || !(s1.layout == ensemble.layout)) {
    throw ArgumentError(
        "quadratic forms must carry the ensemble's block layout");
  }
  SprocedureReport report;
  report.tol = tol;
  report.pairs.reserve(ensemble.members.size());

  double best_b = -std::numeric_limits<double>::infinity();
  double worst_violation_a = -std::numeric_limits<double>::infinity();
  report.conditionally_negative = true;
  for (std::size_t k = 0; k < ensemble.members.size(); ++k) {
    const Signal& f = ensemble.members[k].f;
    const double a = s0.evaluate(f);
    const double b = s1.evaluate(f);
    report.pairs.emplace_back(a, b);
    report.max_energy = std::max(report.max_energy, inner_product(f, f));
    if (b > best_b) {
      best_b = b;
      if (b > tol) {
        report.regular = true;
        report.witness_index = k;
      }
    }
    if (b >= -tol && a > tol) {
      report.conditionally_negative = false;
      if (a > worst_violation_a) {
        worst_violation_a = a;
        report.violation_index = k;
      }
    }
  }
  report.mu = mu_feasible(report.pairs);
  if (report.mu) {
    report.mu_hat = std::isfinite(report.mu->hi)
                        ? 0.5 * (report.mu->lo + report.mu->hi)
                        : report.mu->lo;
  }
  return report;
}

SprocedureReport check_sprocedure(const SubspaceEnsemble& ensemble,
                                  const QuadraticForm& s0,
                                  const QuadraticForm& s1) {
  double max_energy = 0.0;
  for (const auto& member : ensemble.members) {
    max_energy = std::max(max_energy, inner_product(member.f, member.f));
  }
  const double tol = config().sproc_tol_base * (1.0 + max_energy);
  return check_sprocedure(ensemble, s0, s1, tol);
}

double default_gain_level(const StateSpace& g) {
  if (g.inputs() < 1 || g.outputs() < 1) {
    throw ArgumentError("default_gain_level needs a system with channels");
  }
  const double cstar =
      g.inputs() == g.outputs() ? strict_passivity_index(g) : 0.0;
  const double scan = scan_gain(g, FrequencyGrid()).value;
  return 4.0 * (1.0 + 1.0 / std::max(cstar, 0.1)) * (1.0 + scan);
}

}  // namespace dissipcert
