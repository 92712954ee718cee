#include <cmath>
#include <numbers>

#include "doctest.h"
#include "momsos/problems.hpp"

using namespace momsos;

namespace {

Polynomial x1() { return Polynomial::variable(1, 0); }

double v_closed(double y) {
  const double a = std::abs(y);
  return y * y - 2.0 * a + 2.0 - 2.0 * std::exp(-a);
}

OcpSpec double_integrator_free() {
  const Polynomial y = Polynomial::variable(2, 0), u = Polynomial::variable(2, 1);
  OcpSpec o;
  o.f = {u};
  o.g = y * y;
  o.beta = 1.0;
  o.state_set = unit_box(1);
  o.control_set = unit_box(1);
  o.mu0 = MomentFunctional::dirac({0.0});
  o.assumptions_asserted = true;
  return o;
}

ExitSpec brownian(const Polynomial& g) {
  ExitSpec e;
  e.f0 = {Polynomial(1)};
  e.set = SemialgebraicSet(1, {1.0 - x1() * x1()});
  e.with_diffusion({{Polynomial::constant(1, 1.0)}});
  e.g = g;
  e.x0 = {0.0};
  return e;
}

}  // namespace

TEST_CASE("POP builder") {
  const auto s = normalize(unit_box(1), 1.0);
  const auto m = build_pop(x1() * x1(), s);
  CHECK(m.orientation == Orientation::maximize);
  CHECK(m.unknowns.size() == 1);
  CHECK(std::abs(solve_level(m, 1).value) <= 1e-6);
  CHECK(std::abs(solve_level(build_pop(x1().pow(4) - x1() * x1(), s), 2).value + 0.25) <= 1e-6);
  CHECK_THROWS_AS(build_pop(Polynomial::variable(2, 0), s), DimensionError);
}

TEST_CASE("standard volume builder") {
  const Polynomial x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  const auto disk = build_volume_standard(SemialgebraicSet(2, {0.36 - x * x - y * y}));
  CHECK(disk.constraints.size() == 2);
  const auto run = run_hierarchy(disk, 1, 4);
  CHECK(run.monotone());
  for (const auto& r : run.results) CHECK(r.value >= 0.36 * std::numbers::pi - 1e-6);
}

TEST_CASE("Stokes volume builder") {
  const auto m = build_volume_stokes(SemialgebraicSet(1, {0.25 - x1() * x1()}));
  CHECK(m.unknowns.size() == 2);
  CHECK(m.constraints.size() == 3);
  CHECK(m.unknowns[1].rule.degree(3) == 5);
  const auto run = run_hierarchy(m, 1, 6);
  CHECK(run.monotone());
  for (const auto& r : run.results) CHECK(r.value >= 1.0 - 1e-6);
  CHECK(run.results.back().value < 1.01);
  CHECK(run.results.back().value < run.results.front().value);
  CHECK_THROWS_AS(build_volume_stokes(SemialgebraicSet(1, {x1(), 1.0 - x1()})), std::invalid_argument);
}

TEST_CASE("OCP oracle matches the closed form") {
  const auto oracle = oracle_ocp_1d(double_integrator_free());
  double worst = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double y = -1.0 + 0.01 * i;
    worst = std::max(worst, std::abs(oracle.value(y) - v_closed(y)));
    CHECK(std::abs(oracle.value(y) - oracle.value(-y)) <= 1e-9);
  }
  CHECK(worst <= 1e-4);
  CHECK(std::abs(oracle.expectation(MomentFunctional::dirac({0.0}))) <= 1e-4);
  CHECK_THROWS_AS(oracle.value(1.5), std::out_of_range);

  // E over the uniform box: integral of the closed form over [-1,1].
  const double box = 2.0 * (1.0 / 3.0 - 1.0 + 2.0 - 2.0 * (1.0 - std::exp(-1.0)));
  CHECK(std::abs(oracle.expectation(MomentFunctional::box(1)) - box) <= 1e-3);
}

TEST_CASE("OCP oracle edge cases") {
  auto spec = double_integrator_free();
  spec.g = Polynomial(2);
  const auto zero = oracle_ocp_1d(spec);
  for (double v : zero.values()) CHECK(v == 0.0);

  spec.assumptions_asserted = false;
  CHECK_THROWS_AS(oracle_ocp_1d(spec), std::invalid_argument);
}

TEST_CASE("OCP hierarchy stays below the value function") {
  const auto spec = double_integrator_free();
  const auto model = build_ocp(spec);
  CHECK(model.unknowns[0].rule.degree(3) == 6);
  const auto run = run_hierarchy(model, 1, 5);
  CHECK(run.monotone());
  for (const auto& r : run.results) {
    REQUIRE(r.solved());
    CHECK(r.value <= 1e-6);
  }
  const auto oracle = oracle_ocp_1d(spec);
  const auto& v = run.results.back().solution.front();
  for (int i = 0; i <= 40; ++i) {
    const double y = -1.0 + 0.05 * i;
    CHECK(v.eval(std::span<const double>(&y, 1)) <= oracle.value(y) + 1e-4);
  }
}

TEST_CASE("OCP with zero control keeps V = 0 feasible for nonnegative g") {
  auto spec = double_integrator_free();
  spec.f = {Polynomial(2)};
  const auto r = solve_level(build_ocp(spec), 1);
  REQUIRE(r.solved());
  CHECK(r.value >= -1e-6);
}

TEST_CASE("exit oracle") {
  CHECK(std::abs(oracle_exit_1d(brownian(x1()))) <= 1e-12);
  CHECK(oracle_exit_1d(brownian(x1() * x1())) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(oracle_exit_1d(brownian(Polynomial::constant(1, 0.7))) == doctest::Approx(0.7).epsilon(1e-12));

  auto e = brownian(x1());
  e.x0 = {0.3};
  CHECK(oracle_exit_1d(e) == doctest::Approx(0.3).epsilon(1e-12));

  // -v'' + c v' = 0: v = A + B exp(c x).
  const double c = 1.5;
  e.f0 = {Polynomial::constant(1, c)};
  const double want = -1.0 + 2.0 * (std::exp(c * 0.3) - std::exp(-c)) / (std::exp(c) - std::exp(-c));
  CHECK(oracle_exit_1d(e) == doctest::Approx(want).epsilon(1e-10));

  e.with_diffusion({{x1()}});
  CHECK_THROWS_AS(oracle_exit_1d(e), std::runtime_error);
}

TEST_CASE("exit hierarchy") {
  const auto lin = solve_level(build_exit(brownian(x1())), 1);
  REQUIRE(lin.solved());
  CHECK(std::abs(lin.value) <= 1e-6);

  const auto run = run_hierarchy(build_exit(brownian(x1() * x1())), 1, 4);
  CHECK(run.monotone());
  for (const auto& r : run.results) CHECK(r.value <= 1.0 + 1e-6);

  auto e = brownian(x1());
  e.x0 = {0.0, 0.0};
  CHECK_THROWS_AS(build_exit(e), DimensionError);
  e = brownian(x1());
  e.x0 = {2.0};
  CHECK_THROWS_AS(build_exit(e), std::invalid_argument);
}

TEST_CASE("volume reference") {
  const auto iv = volume_reference(SemialgebraicSet(1, {0.5 * x1() - x1() * x1()}), 1'000'000, 3);
  CHECK(std::abs(iv.value - 0.5) <= 2e-3);
  CHECK(iv.std_error > 0.0);
  const Polynomial x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  const auto disk = volume_reference(SemialgebraicSet(2, {0.36 - x * x - y * y}), 1'000'000, 3);
  CHECK(std::abs(disk.value - 0.36 * std::numbers::pi) <= 3e-3);
  CHECK(volume_reference(SemialgebraicSet(1, {-1.0 - x1() * x1()}), 1000).value == 0.0);
}
