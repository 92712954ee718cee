#include <cmath>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "momsos/gmp.hpp"
#include "momsos/problems.hpp"

using namespace momsos;

namespace {

Polynomial x1() { return Polynomial::variable(1, 0); }

SemialgebraicSet half_interval() { return normalize(unit_box(1), 1.0); }

GmpDualModel interval_volume() { return build_volume_standard(SemialgebraicSet(1, {0.5 * x1() - x1() * x1()})); }

}  // namespace

TEST_CASE("POP tightening has one free variable and one membership block") {
  const auto model = build_pop(x1() * x1(), half_interval());
  const auto t = build_tightening(model, 2);
  CHECK(t.program.num_free == 1);
  CHECK(t.encodings.size() == 1);
  CHECK(t.sign == -1.0);
  CHECK(t.unknown_basis[0].size() == 1);
}

TEST_CASE("volume tightening has two membership blocks") {
  const auto t = build_tightening(interval_volume(), 3);
  CHECK(t.encodings.size() == 2);
  CHECK(t.program.num_free == 7);
  CHECK(t.sign == 1.0);
}

TEST_CASE("no constraints means unbounded") {
  GmpDualModel model;
  model.unknowns.push_back({"w", 1, DegreeRule{2, 0}, MomentFunctional::box(1)});
  const auto r = solve_level(model, 1);
  CHECK(r.status == ConicStatus::unbounded);
  CHECK(r.value == -std::numeric_limits<double>::infinity());
}

TEST_CASE("degree rule violations") {
  GmpDualModel model = interval_volume();
  model.unknowns[0].rule = DegreeRule{2, -3};
  CHECK_THROWS_AS(build_tightening(model, 1), DegreeRuleError);
  model.unknowns[0].rule = DegreeRule{2, 1};
  CHECK_THROWS_AS(build_tightening(model, 1), DegreeRuleError);
  const auto run = run_hierarchy(model, 1, 1);
  REQUIRE(run.results.size() == 1);
  CHECK(std::isnan(run.results[0].value));
}

TEST_CASE("phi tables") {
  const auto model = build_volume_stokes(SemialgebraicSet(1, {0.25 - x1() * x1()}));
  const auto& c = model.constraints[0];
  CHECK(approx_equal(c.phi(0, MultiIndex{2}), x1() * x1(), 0.0));
  CHECK(approx_equal(c.phi(1, MultiIndex{3}), -3.0 * x1() * x1(), 0.0));
  const auto& b = model.constraints[1];
  CHECK(approx_equal(b.phi(1, MultiIndex{1}), 2.0 * x1() * x1(), 0.0));
  CHECK(b.phi(0, MultiIndex{1}).is_zero());
}

TEST_CASE("POP levels") {
  const auto sq = solve_level(build_pop(x1() * x1(), half_interval()), 1);
  REQUIRE(sq.solved());
  CHECK(std::abs(sq.value) <= 1e-6);
  CHECK(std::abs(sq.gap) <= 10 * 1e-8);

  const auto run = run_hierarchy(build_pop(x1().pow(4) - x1() * x1(), half_interval()), 2, 4);
  CHECK(run.monotone());
  for (const auto& r : run.results) CHECK(std::abs(r.value + 0.25) <= 1e-6);

  const SemialgebraicSet ray = normalize(SemialgebraicSet(1, {x1() - 0.2}), 1.0);
  const auto lin = solve_level(build_pop(3.0 * x1() + 1.0, ray), 1);
  CHECK(std::abs(lin.value - 1.6) <= 1e-6);
}

TEST_CASE("volume interval") {
  const auto r3 = solve_level(interval_volume(), 3);
  REQUIRE(r3.solved());
  CHECK(r3.value >= 0.5);
  // Reference: LP over degree-6 polynomials with the positivity constraints
  // imposed on dense grids (scipy HiGHS), a slight relaxation of the SDP.
  CHECK(r3.value >= 1.0235902898 - 1e-6);
  CHECK(r3.value <= 1.0235902898 + 1e-5);

  const auto run = run_hierarchy(interval_volume(), 2, 6);
  CHECK(run.monotone());
  for (const auto& r : run.results) {
    REQUIRE(r.solved());
    CHECK(r.value >= 0.5 - 1e-6);
    CHECK(std::abs(r.gap) <= 1e-7);
    for (const auto& z : r.pseudo_moments) {
      CHECK(z.moment(MultiIndex{0}) >= 0.0);
      const Eigen::MatrixXd mm = moment_matrix(z, r.level);
      CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(mm).eigenvalues().minCoeff() >= -1e-6);
    }
  }
}

TEST_CASE("full box volume is exact at level one") {
  const auto r = solve_level(build_volume_standard(unit_box(2)), 1);
  REQUIRE(r.solved());
  CHECK(std::abs(r.value - 4.0) <= 1e-6);
}

TEST_CASE("slack bounds") {
  const auto model = interval_volume();
  const std::vector<Polynomial> two{Polynomial::constant(1, 2.0)};
  const auto s = slack_lower_bound(model, two, 1.0, 1);
  REQUIRE(s.size() == 2);
  CHECK(s[0].certified);
  CHECK(s[1].certified);
  CHECK(s[0].rho >= 1.0 - 1e-6);
  CHECK(s[1].rho >= 2.0 - 1e-6);

  const std::vector<Polynomial> half{Polynomial::constant(1, 0.5)};
  const auto bad = slack_lower_bound(model, half, 1.0, 1);
  CHECK_FALSE(bad[0].certified);
  CHECK(bad[0].negative);
  CHECK(bad[0].rho == 0.0);

  const double eps = 0.01;
  const auto pop = build_pop(x1() * x1(), half_interval());
  const auto p = slack_lower_bound(pop, {Polynomial::constant(1, -eps)}, 0.001, 1);
  CHECK(p[0].certified);
  CHECK(p[0].rho == doctest::Approx(eps).epsilon(1e-4));
}

TEST_CASE("inward perturbation") {
  const auto model = interval_volume();
  const std::vector<Polynomial> w{Polynomial::constant(1, 2.0) + 0.0 * x1()};
  const std::vector<Polynomial> phi{Polynomial::constant(1, 1.0)};
  const double eps = 0.3;
  const auto r = perturb_inward(model, w, phi, eps, 2);
  CHECK(r.theta == doctest::Approx(eps / 6.0).epsilon(1e-14));
  CHECK(r.degradation <= eps / 3.0 + 1e-15);
  for (const auto& m : r.direction_margin) CHECK(m.rho >= 1.0 - 1e-6);
  for (const auto& m : r.margin) {
    CHECK(m.certified);
    CHECK(m.rho > 0.0);
  }

  const auto big = perturb_inward(model, w, phi, 1e6, 2);
  CHECK(big.theta == 1.0);

  CHECK_THROWS_AS(perturb_inward(model, w, {Polynomial::constant(1, -1.0)}, eps, 2), std::runtime_error);

  GmpDualModel free_cost = model;
  free_cost.unknowns[0].objective.reset();
  CHECK(perturb_inward(free_cost, w, phi, eps, 2).theta == 1.0);
}

TEST_CASE("pseudo-moment table covers degree 2l") {
  const auto r = solve_level(interval_volume(), 2);
  REQUIRE(r.pseudo_moments.size() == 2);
  CHECK(r.pseudo_moments[0].label == "X");
  CHECK_NOTHROW(r.pseudo_moments[0].moment(MultiIndex{4}));
  CHECK_THROWS_AS(r.pseudo_moments[0].moment(MultiIndex{5}), std::out_of_range);
  // Z_X + Z_K reproduces the box moments.
  for (int k = 0; k <= 4; ++k) {
    const MultiIndex a{k};
    CHECK(r.pseudo_moments[0].moment(a) + r.pseudo_moments[1].moment(a) ==
          doctest::Approx(box_moment(a)).epsilon(1e-6));
  }
}
