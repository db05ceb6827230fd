#include "dissipcert/adversary.hpp"

#include <cmath>
#include <random>

#include "dissipcert/config.hpp"
#include "dissipcert/errors.hpp"
#include "dissipcert/feedback.hpp"
#include "dissipcert/gain.hpp"
#include "dissipcert/passivity.hpp"
#include "doctest.h"

using namespace dissipcert;

namespace {

// 1/(m s + d).
StateSpace mass(double m, double d) {
  Eigen::MatrixXd A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << -d / m;
  B << 1.0 / m;
  C << 1.0;
  D << 0.0;
  return StateSpace(A, B, C, D);
}

Eigen::VectorXd theta1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

Eigen::VectorXd theta2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

Eigen::VectorXd theta3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

// Wraps an LTI block behind a unit time-varying gain so the loop solver
// cannot collapse it: forces the simulated falsification path.
OperatorExpr opaque(const StateSpace& ss) {
  TimeVaryingGain unit;  // constant 1
  return OperatorExpr::cascade(OperatorExpr::tv_gain(ss.inputs(), unit),
                               OperatorExpr::lti(ss));
}

void require_sound_witness(const FalsificationResult& r) {
  REQUIRE(r.destabilized);
  REQUIRE(r.theta.has_value());
  REQUIRE(r.member_certificate.has_value());
  CHECK(r.member_certificate->margin >= -config().cert_tol);
  const bool lti_evidence =
      r.closed_loop_abscissa.has_value() &&
      *r.closed_loop_abscissa >= config().instability_margin;
  const bool sim_evidence =
      r.overflow_step.has_value() ||
      (r.energy_ratio.has_value() &&
       *r.energy_ratio > config().overflow_energy_ratio);
  CHECK((lti_evidence || sim_evidence));
}

}  // namespace

TEST_CASE("environment members and certification") {
  SUBCASE("first-order lag is accepted as passive with margin ~ 0") {
    auto fam = EnvFamily::first_order(0.5, 2.0, 0.0, 2.0);
    MemberCertificate cert;
    OperatorExpr env = make_env(fam, theta2(1.0, 1.0), &cert);
    CHECK(env.is_lti());
    // Re 1/(1 + jw) = 1/(1+w^2) > 0 with infimum 0 at high frequency.
    CHECK(cert.margin >= -config().cert_tol);
    CHECK(cert.margin <= 1e-6);
    CHECK(!cert.boundary);
    CHECK(cert.mode == CertMode::kPassive);
  }

  SUBCASE("zero static gain is trivially passive") {
    auto fam = EnvFamily::static_gain(0.0, 3.0);
    MemberCertificate cert;
    OperatorExpr env = make_env(fam, theta1(0.0), &cert);
    auto ss = env.to_state_space();
    REQUIRE(ss.has_value());
    CHECK(ss->states() == 0);
    CHECK(ss->D(0, 0) == 0.0);
    CHECK(cert.margin == 0.0);
    CHECK(!cert.boundary);
  }

  SUBCASE("the integrator is the flagged boundary member") {
    auto fam = EnvFamily::first_order(0.5, 2.0, 0.0, 2.0);
    MemberCertificate cert;
    make_env(fam, theta2(1.0, 0.0), &cert);
    CHECK(std::abs(cert.margin) <= 1e-9);  // Re 1/(jw) = 0 identically
    CHECK(cert.boundary);                  // pole sitting on the axis
  }

  SUBCASE("members violating their mode are rejected with the margin") {
    // Widen the box past the passive region: s0 < 0 must be rejected.
    auto fam = EnvFamily::first_order(0.5, 2.0, -1.0, 2.0);
    try {
      make_env(fam, theta2(1.0, -0.5));
      FAIL("expected RejectedMemberError");
    } catch (const RejectedMemberError& e) {
      // Re 1/(jw - 0.5) reaches -2 at w -> 0.
      CHECK(e.margin == doctest::Approx(-2.0).epsilon(1e-4));
    }

    // Output-strictness mode: the integrator has index 0 < 0.5.
    auto osp_fam = EnvFamily::first_order(0.5, 2.0, 0.0, 2.0);
    osp_fam.mode = CertMode::kOsp;
    osp_fam.mode_level = 0.5;
    CHECK_THROWS_AS(make_env(osp_fam, theta2(1.0, 0.0)),
                    RejectedMemberError);
    // 1/(s+1) has index 1 >= 0.5: accepted.
    MemberCertificate cert;
    make_env(osp_fam, theta2(1.0, 1.0), &cert);
    CHECK(cert.margin == doctest::Approx(0.5).epsilon(1e-6));
  }

  SUBCASE("gain-ball members certify against the norm bound") {
    auto fam = EnvFamily::gain_ball(1.0);
    CHECK(fam.mode == CertMode::kGainBound);
    CHECK(fam.mode_level == 1.0);
    MemberCertificate cert;
    make_env(fam, theta1(-1.0), &cert);
    CHECK(cert.margin == doctest::Approx(0.0).epsilon(1e-9));
    make_env(fam, theta1(0.25), &cert);
    CHECK(cert.margin == doctest::Approx(0.75).epsilon(1e-9));
  }

  SUBCASE("parallel mix realizes c + k/(s + s0)") {
    auto fam = EnvFamily::parallel_mix(0.0, 1.0, 0.5, 2.0, 0.5, 2.0);
    MemberCertificate cert;
    OperatorExpr env = make_env(fam, theta3(0.5, 1.0, 1.0), &cert);
    auto ss = env.to_state_space();
    REQUIRE(ss.has_value());
    CHECK(ss->states() == 1);
    CHECK(ss->D(0, 0) == 0.5);
    // Re {0.5 + 1/(1+jw)} >= 0.5 with infimum 0.5 at high frequency.
    CHECK(cert.margin == doctest::Approx(0.5).epsilon(1e-6));
  }

  SUBCASE("arity and bounds are enforced") {
    auto fam = EnvFamily::first_order(0.5, 2.0, 0.0, 2.0);
    CHECK_THROWS_AS(env_member(fam, theta1(1.0)), ArgumentError);
    CHECK_THROWS_AS(env_member(fam, theta2(1.0, 3.0)), ArgumentError);
    CHECK_THROWS_AS(env_member(fam, theta2(0.0, 1.0)), ArgumentError);
    CHECK_THROWS_AS(EnvFamily::first_order(2.0, 0.5, 0.0, 2.0),
                    ArgumentError);
    CHECK_THROWS_AS(EnvFamily::gain_ball(0.0), ArgumentError);
  }
}

TEST_CASE("falsification campaigns on the mass family") {
  auto spring_family = EnvFamily::first_order(1.0, 1.0, 0.0, 2.0);

  SUBCASE("negative damping is destabilized by a passive spring") {
    FalsificationResult r = falsify(OperatorExpr::lti(mass(1.0, -0.5)),
                                    spring_family, 200, FalsifyMode::kE2Free);
    require_sound_witness(r);
    // Any witness must sit below s0 = 0.5 (where the loop trace crosses 0).
    CHECK((*r.theta)[1] < 0.5);
    // Cross-check the reported abscissa on the case report.
    MassSpringReport case_rep =
        mass_spring_case(1.0, -0.5, (*r.theta)[1], (*r.theta)[0]);
    CHECK(case_rep.spectral_abscissa ==
          doctest::Approx(*r.closed_loop_abscissa).epsilon(1e-9));
    CHECK(!case_rep.stable);
    // The family's strongest witness is s0 = 0 with abscissa 0.25.
    CHECK(*r.closed_loop_abscissa ==
          doctest::Approx(0.25).epsilon(1e-3));
  }

  SUBCASE("positive damping survives the whole passive family") {
    FalsificationResult r = falsify(OperatorExpr::lti(mass(1.0, 2.0)),
                                    spring_family, 10000,
                                    FalsifyMode::kE2Free);
    CHECK(!r.destabilized);
    CHECK(!r.theta.has_value());
    REQUIRE(r.max_gain_lb.has_value());
    CHECK(*r.max_gain_lb > 0.0);
    CHECK(r.evaluations <= 10000);
    CHECK(!r.trace.empty());
    for (const auto& pt : r.trace) {
      CHECK(!pt.rejected);  // the whole box is certifiable here
      CHECK(pt.objective < -config().stability_margin);
    }
  }

  SUBCASE("campaigns are deterministic") {
    auto a = falsify(OperatorExpr::lti(mass(1.0, -0.5)), spring_family, 150,
                     FalsifyMode::kE2Free);
    auto b = falsify(OperatorExpr::lti(mass(1.0, -0.5)), spring_family, 150,
                     FalsifyMode::kE2Free);
    REQUIRE(a.trace.size() == b.trace.size());
    CHECK(a.evaluations == b.evaluations);
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
      CHECK(a.trace[i].objective == b.trace[i].objective);
      CHECK(a.trace[i].theta == b.trace[i].theta);
    }
    CHECK(*a.closed_loop_abscissa == *b.closed_loop_abscissa);
  }

  SUBCASE("clamped mode reports the e1 -> y1 channel gain") {
    FalsificationResult r = falsify(OperatorExpr::lti(mass(1.0, 2.0)),
                                    spring_family, 300, FalsifyMode::kE2Zero);
    CHECK(!r.destabilized);
    REQUIRE(r.max_gain_lb.has_value());
    // Output strict passivity with index d = 2 bounds this channel by 1/2.
    CHECK(*r.max_gain_lb <= 0.5 + 1e-6);
    CHECK(*r.max_gain_lb > 0.2);
  }

  SUBCASE("argument checks") {
    CHECK_THROWS_AS(falsify(OperatorExpr::lti(mass(1.0, 1.0)), spring_family,
                            0, FalsifyMode::kE2Free),
                    ArgumentError);
    StateSpace wide(Eigen::MatrixXd::Zero(0, 0), Eigen::MatrixXd::Zero(0, 2),
                    Eigen::MatrixXd::Zero(1, 0), Eigen::MatrixXd::Zero(1, 2));
    CHECK_THROWS_AS(falsify(OperatorExpr::lti(wide), spring_family, 10,
                            FalsifyMode::kE2Free),
                    DimensionError);
  }
}

TEST_CASE("small-gain falsification in the unit gain ball") {
  auto ball = EnvFamily::gain_ball(1.0);

  SUBCASE("gain below the bound survives") {
    StateSpace g = scaled(StateSpace::first_order(1.0, 1.0), 0.5);
    FalsificationResult r =
        falsify(OperatorExpr::lti(g), ball, 100, FalsifyMode::kE2Free);
    CHECK(!r.destabilized);
    REQUIRE(r.max_gain_lb.has_value());
    // The worst certified member g = -1 closes 0.5/(s + 0.5): gain 1.
    CHECK(*r.max_gain_lb >= 1.0 - 1e-6);
  }

  SUBCASE("gain above the reciprocal radius is destabilized") {
    StateSpace g = scaled(StateSpace::first_order(1.0, 1.0), 1.2);
    FalsificationResult r =
        falsify(OperatorExpr::lti(g), ball, 100, FalsifyMode::kE2Free);
    require_sound_witness(r);
    // The corner member g = -1 moves the pole to +0.2.
    CHECK((*r.theta)[0] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(*r.closed_loop_abscissa == doctest::Approx(0.2).epsilon(1e-9));
  }

  SUBCASE("the marginal block beta = 1 survives: the inequality is strict") {
    StateSpace g = StateSpace::first_order(1.0, 1.0);
    FalsificationResult r =
        falsify(OperatorExpr::lti(g), ball, 100, FalsifyMode::kE2Free);
    CHECK(!r.destabilized);
  }
}

TEST_CASE("converse sweep: falsification succeeds exactly at the deficit") {
  // Over random masses, the passive spring family destabilizes precisely
  // the non-output-strictly-passive half d < 0 (away from a thin band).
  auto family = EnvFamily::first_order(0.5, 2.0, 0.0, 2.0);
  std::mt19937 rng(91);
  std::uniform_real_distribution<double> m_draw(0.5, 2.0);
  std::uniform_real_distribution<double> d_draw(-1.0, 1.0);
  int checked = 0;
  while (checked < 10) {
    const double m = m_draw(rng);
    const double d = d_draw(rng);
    if (std::abs(d) < 0.05) continue;  // skip the boundary band
    ++checked;
    FalsificationResult r = falsify(OperatorExpr::lti(mass(m, d)), family,
                                    300, FalsifyMode::kE2Free);
    CHECK(r.destabilized == (d < 0.0));
    if (r.destabilized) {
      require_sound_witness(r);
    } else {
      REQUIRE(r.max_gain_lb.has_value());
      CHECK(*r.max_gain_lb > 0.0);
    }
  }
}

TEST_CASE("simulated campaigns for blocks the solver cannot collapse") {
  auto family = EnvFamily::first_order(1.0, 1.0, 0.0, 1.0);

  SUBCASE("hidden unstable mode found by trajectory blowup") {
    FalsificationResult r = falsify(opaque(mass(1.0, -0.5)), family, 20,
                                    FalsifyMode::kE2Free);
    require_sound_witness(r);
    CHECK((r.overflow_step.has_value() || r.energy_ratio.has_value()));
  }

  SUBCASE("stable nonlinear block survives with a probe lower bound") {
    // Saturation wrapped around a damped lag: gain stays below 1.
    OperatorExpr block =
        OperatorExpr::cascade(OperatorExpr::lti(StateSpace::first_order(
                                  1.0, 2.0)),
                              OperatorExpr::saturation(1, 5.0));
    FalsificationResult r =
        falsify(block, family, 20, FalsifyMode::kE2Zero);
    CHECK(!r.destabilized);
    REQUIRE(r.max_gain_lb.has_value());
    CHECK(*r.max_gain_lb > 0.0);
    CHECK(*r.max_gain_lb < 1.0);
  }
}

TEST_CASE("mass-spring case reports") {
  SUBCASE("unit parameters: poles at -1 +- j, stable, consistent") {
    MassSpringReport rep = mass_spring_case(1.0, 1.0, 1.0, 1.0);
    CHECK(rep.stable);
    CHECK(rep.predicate);
    CHECK(!rep.marginal);
    CHECK(rep.consistent);
    CHECK(rep.mass_osp);
    CHECK(rep.mass_osp_index == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.spring_passive);
    CHECK(rep.trace_condition == doctest::Approx(2.0));
    CHECK(rep.det_condition == doctest::Approx(2.0));
    CHECK(rep.spectral_abscissa == doctest::Approx(-1.0).epsilon(1e-9));
    // Eigenvalues -1 +- j in some order.
    const auto ev = rep.eigenvalues;
    CHECK(ev(0).real() == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(ev(1).real() == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(std::abs(ev(0).imag()) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ev(0).imag() == doctest::Approx(-ev(1).imag()).epsilon(1e-9));
  }

  SUBCASE("negative damping with a soft spring: positive trace, unstable") {
    MassSpringReport rep = mass_spring_case(1.0, -0.5, 0.25, 1.0);
    CHECK(!rep.stable);
    CHECK(!rep.predicate);  // -0.5 + 0.25 < 0
    CHECK(rep.consistent);
    CHECK(!rep.mass_osp);
    CHECK(rep.mass_osp_index == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(rep.spectral_abscissa == doctest::Approx(0.125).epsilon(1e-9));
    CHECK(rep.eigenvalues(0).real() + rep.eigenvalues(1).real() ==
          doctest::Approx(0.25).epsilon(1e-9));
  }

  SUBCASE("the double boundary point is flagged marginal") {
    MassSpringReport rep = mass_spring_case(2.0, 0.0, 0.0, 1.0);
    CHECK(rep.marginal);
    CHECK(!rep.predicate);  // 0 > 0 is false
    CHECK(!rep.stable);     // poles exactly on the axis
    CHECK(rep.trace_condition == 0.0);
    CHECK(std::abs(rep.spectral_abscissa) <= 1e-9);
  }

  SUBCASE("trace test alone misses determinant instability") {
    // d = -1, s0 = 1.5: trace condition 0.5 > 0 yet the loop has a real
    // pole at +0.5 because the determinant quantity is negative.  The
    // report keeps both quantities so the discrepancy is visible.
    MassSpringReport rep = mass_spring_case(1.0, -1.0, 1.5, 1.0);
    CHECK(rep.predicate);
    CHECK(!rep.stable);
    CHECK(rep.det_condition == doctest::Approx(-0.5));
    CHECK(rep.consistent);  // stable == (trace > 0 AND det > 0) still holds
    CHECK(rep.spectral_abscissa == doctest::Approx(0.5).epsilon(1e-9));
  }

  SUBCASE("argument checks") {
    CHECK_THROWS_AS(mass_spring_case(0.0, 1.0, 1.0, 1.0), ArgumentError);
    CHECK_THROWS_AS(mass_spring_case(-1.0, 1.0, 1.0, 1.0), ArgumentError);
    CHECK_THROWS_AS(mass_spring_case(1.0, 1.0, 1.0, 0.0), ArgumentError);
  }
}
