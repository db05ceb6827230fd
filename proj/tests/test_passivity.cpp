#include "dissipcert/passivity.hpp"

#include <cmath>

#include "dissipcert/errors.hpp"
#include "dissipcert/gain.hpp"
#include "dissipcert/probes.hpp"
#include "doctest.h"

using namespace dissipcert;

namespace {

// 1/(m s + d): one mass with viscous coefficient d.
StateSpace mass(double m, double d) {
  Eigen::MatrixXd A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << -d / m;
  B << 1.0 / m;
  C << 1.0;
  D << 0.0;
  return StateSpace(A, B, C, D);
}

}  // namespace

TEST_CASE("positive-real margin") {
  SUBCASE("first-order lag: infimum 0 approached as w -> infinity") {
    ScanResult r = pr_margin_scan(StateSpace::first_order(1.0, 1.0),
                                  FrequencyGrid());
    CHECK(r.value == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::isinf(r.omega));
  }

  SUBCASE("negative damping is caught with a low-frequency witness") {
    // Re 1/(d + jw) = d/(d^2+w^2); at d = -0.5 the margin is -2 near w = 0.
    ScanResult r = pr_margin_scan(mass(1.0, -0.5), FrequencyGrid());
    CHECK(r.value == doctest::Approx(-2.0).epsilon(1e-6));
    CHECK(r.omega <= 1e-3);
  }

  SUBCASE("positive-definite static map") {
    Eigen::MatrixXd D(2, 2);
    D << 2, 1, 1, 3;
    const double lmin =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (D + D.transpose()))
            .eigenvalues()(0);
    CHECK(pr_margin(StateSpace::static_gain(D)) == doctest::Approx(lmin));
    CHECK(lmin > 0.0);
  }

  SUBCASE("non-square systems are rejected") {
    StateSpace rect = StateSpace::static_gain(Eigen::MatrixXd::Ones(2, 1));
    CHECK_THROWS_AS(pr_margin(rect), DimensionError);
  }
}

TEST_CASE("output-strictness index") {
  SUBCASE("1/(s+d) has index exactly d") {
    CHECK(osp_index(StateSpace::first_order(1.0, 2.0)) ==
          doctest::Approx(2.0).epsilon(1e-9));
    CHECK(osp_index(StateSpace::first_order(1.0, 1.0)) ==
          doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("unit static gain has index 1") {
    CHECK(osp_index(StateSpace::static_gain(Eigen::MatrixXd::Ones(1, 1))) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("sign of the index tracks the damping sign for a single mass") {
    // Re G / |G|^2 = d identically in w for G = 1/(ms + d).
    for (double m : {0.5, 1.0, 2.0})
      for (double d : {-1.0, -0.1, 0.1, 1.0}) {
        const double eps = osp_index(mass(m, d));
        CHECK(eps == doctest::Approx(d).epsilon(1e-7));
        CHECK((eps > 0) == (d > 0));
      }
  }
}

TEST_CASE("output strictness bounds the gain") {
  // eps* > 0 implies ||G||_inf <= 1/eps*.
  std::vector<StateSpace> cases;
  cases.push_back(StateSpace::first_order(1.0, 2.0));
  cases.push_back(add_feedthrough(StateSpace::first_order(0.7, 1.3), 0.5));
  cases.push_back(parallel(StateSpace::first_order(0.4, 0.9),
                           StateSpace::first_order(0.3, 2.1)));
  for (const StateSpace& ss : cases) {
    const double eps = osp_index(ss);
    REQUIRE(eps > 0.0);
    CHECK(hinf_norm(ss, 1e-8).value <= 1.0 / eps + 1e-6);
  }
}

TEST_CASE("balanced strictness index") {
  SUBCASE("unit static gain: 1 >= c * (1 + 1) gives c = 1/2") {
    CHECK(strict_passivity_index(
              StateSpace::static_gain(Eigen::MatrixXd::Ones(1, 1))) ==
          doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("strictly proper lag is not strictly passive (no feedthrough)") {
    CHECK(strict_passivity_index(StateSpace::first_order(1.0, 1.0)) ==
          doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("lag plus unit feedthrough: c* = min (2+w^2)/(5+2w^2) = 2/5") {
    StateSpace ss = add_feedthrough(StateSpace::first_order(1.0, 1.0), 1.0);
    ScanResult r = strict_passivity_scan(ss, FrequencyGrid());
    CHECK(r.value == doctest::Approx(0.4).epsilon(1e-7));
    CHECK(r.omega <= 1e-3);
  }
  SUBCASE("positive index implies passivity margin and bounded gain") {
    StateSpace ss = add_feedthrough(StateSpace::first_order(1.0, 1.0), 1.0);
    const double c = strict_passivity_index(ss);
    REQUIRE(c > 0.0);
    CHECK(pr_margin(ss) >= c - 1e-9);
    CHECK(hinf_norm(ss, 1e-8).value <= 2.0 + 1.0 / c + 1e-6);
  }
}

TEST_CASE("lti passivity report") {
  SUBCASE("strictly proper stable lag: delta = 0 certificate") {
    PassivityReport r = lti_passivity_report(StateSpace::first_order(1.0, 1.0));
    CHECK(r.delta == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.epsilon == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.method == PassivityMethod::kFrequencyGrid);
    CHECK(r.is_certificate);
    REQUIRE(r.delta_witness_frequency.has_value());
    CHECK(std::isinf(*r.delta_witness_frequency));
  }
  SUBCASE("unstable mass: margins reported but certificate force withheld") {
    PassivityReport r = lti_passivity_report(mass(1.0, -0.5));
    CHECK(r.delta < 0.0);
    CHECK(r.epsilon < 0.0);
    CHECK_FALSE(r.is_certificate);
  }
}

TEST_CASE("probe-based passivity evidence") {
  TimeGrid grid(0.02, 8001);  // 160 s
  std::vector<Signal> probes = probe_family_v1(grid, 1, 777);
  std::vector<double> horizons{40.0, 80.0, 160.0};

  SUBCASE("nonnegative time-varying gain never yields negative supply") {
    TimeVaryingGain k{TvProfile::kSinSquared, 1.0, 0.0, 1.0, 1.0};
    PassivityReport r = empirical_passivity_deficit(
        OperatorExpr::tv_gain(1, k), probes, horizons);
    REQUIRE(r.min_supply.has_value());
    CHECK(*r.min_supply >= -1e-12);
    CHECK_FALSE(r.is_certificate);
    CHECK(r.method == PassivityMethod::kEmpiricalProbes);
  }

  SUBCASE("hidden unstable mode is exposed by the bump probes") {
    PassivityReport r = empirical_passivity_deficit(
        OperatorExpr::lti(StateSpace::first_order(1.0, -0.1)), probes,
        horizons);
    REQUIRE(r.min_supply.has_value());
    CHECK(*r.min_supply < -1e-4);
    CHECK(r.witness_probe.has_value());
    CHECK(r.witness_horizon.has_value());
  }

  SUBCASE("scaled identity recovers the equal-split fits") {
    PassivityReport r = empirical_passivity_deficit(
        OperatorExpr::identity(1, 0.5), probes, horizons);
    CHECK(r.delta == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(r.epsilon == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.delta >= 0.25 - 1e-9);
    CHECK(r.epsilon >= 0.25 - 1e-9);
  }

  SUBCASE("supplies add across a sum of operators") {
    OperatorExpr g = OperatorExpr::lti(StateSpace::first_order(1.0, 1.0));
    TimeVaryingGain k{TvProfile::kSinSquared, 1.0, 0.0, 1.0, 1.0};
    OperatorExpr d = OperatorExpr::tv_gain(1, k);
    PassivityReport rg = empirical_passivity_deficit(g, probes, horizons);
    PassivityReport rd = empirical_passivity_deficit(d, probes, horizons);
    PassivityReport rs = empirical_passivity_deficit(OperatorExpr::sum(g, d),
                                                     probes, horizons);
    REQUIRE(rs.min_supply.has_value());
    CHECK(*rs.min_supply >= *rg.min_supply + *rd.min_supply - 1e-10);
  }

  SUBCASE("rectangular operators are rejected") {
    StateSpace rect = StateSpace::static_gain(Eigen::MatrixXd::Ones(2, 1));
    CHECK_THROWS_AS(
        empirical_passivity_deficit(OperatorExpr::lti(rect), probes, horizons),
        DimensionError);
  }
}
