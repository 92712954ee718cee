#include <cmath>
#include <random>

#include "doctest.h"
#include "momsos/semialg.hpp"

using namespace momsos;

namespace {

Polynomial x1() { return Polynomial::variable(1, 0); }

}  // namespace

TEST_CASE("normalize a linear generator") {
  const auto s = normalize(SemialgebraicSet(1, {x1()}), 1.0);
  REQUIRE(s.ineqs.size() == 2);
  CHECK(s.archimedean_augmented);
  CHECK(approx_equal(s.ineqs[0], 0.5 * x1(), 1e-14));
  CHECK(approx_equal(s.ineqs[1], 0.5 * (1.0 - x1() * x1()), 1e-14));
}

TEST_CASE("normalize does not duplicate the ball") {
  const auto s = normalize(SemialgebraicSet(1, {1.0 - x1() * x1()}), 1.0);
  REQUIRE(s.ineqs.size() == 1);
  CHECK(approx_equal(s.ineqs[0], 0.5 * (1.0 - x1() * x1()), 1e-14));
  const auto again = normalize(s, 1.0);
  REQUIRE(again.ineqs.size() == 1);
  CHECK(approx_equal(again.ineqs[0], s.ineqs[0], 1e-14));
}

TEST_CASE("normalize keeps the point set") {
  const Polynomial x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  const SemialgebraicSet s(2, {0.36 - x * x - y * y, x + 0.1});
  const auto n = normalize(s, std::sqrt(2.0));
  for (const auto& h : n.ineqs) CHECK(sup_norm_box(h, 101) <= 0.5 + 1e-12);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double p[2] = {u(rng), u(rng)};
    CHECK(contains(s, p) == contains(n, p));
  }
}

TEST_CASE("violation") {
  const double a = -0.3;
  CHECK(violation_H(SemialgebraicSet(1, {x1()}), std::span<const double>(&a, 1)) == doctest::Approx(0.3));
  const double z = 0.0;
  CHECK(violation_H(SemialgebraicSet(1, {1.0 - x1() * x1()}), std::span<const double>(&z, 1)) == 0.0);
  CHECK(violation_H(SemialgebraicSet(1, {1.0 - x1() * x1(), x1() - 0.5}), std::span<const double>(&z, 1)) ==
        doctest::Approx(0.5));
  const SemialgebraicSet s(1, {x1() * (1.0 - x1())});
  for (int i = 0; i <= 40; ++i) {
    const double x = -1.0 + 0.05 * i;
    CHECK((violation_H(s, std::span<const double>(&x, 1)) == 0.0) == contains(s, std::span<const double>(&x, 1)));
  }
}

TEST_CASE("containment") {
  const SemialgebraicSet s(1, {1.0 - x1() * x1()});
  const double in = 0.0, out = 2.0, edge = 1.0;
  CHECK(contains(s, std::span<const double>(&in, 1)));
  CHECK_FALSE(contains(s, std::span<const double>(&out, 1)));
  CHECK(contains(s, std::span<const double>(&edge, 1)));
}

TEST_CASE("distance") {
  const SemialgebraicSet iv(1, {x1(), 1.0 - x1()});
  const double a = -0.4, b = 0.5;
  CHECK(distance_D(iv, std::span<const double>(&a, 1), 2000).value == doctest::Approx(0.4).epsilon(2.5e-3));
  CHECK(distance_D(iv, std::span<const double>(&b, 1), 2000).value == 0.0);
  const Polynomial x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  const SemialgebraicSet disk(2, {1.0 - x * x - y * y});
  const double p[2] = {1.0, 1.0};
  CHECK(std::abs(distance_D(disk, p, 5000).value - (std::sqrt(2.0) - 1.0)) <= 1e-3);
  const SemialgebraicSet empty(1, {-1.0 - x1() * x1()});
  CHECK_THROWS_AS(distance_D(empty, std::span<const double>(&a, 1), 500), std::runtime_error);
}

TEST_CASE("Lojasiewicz estimate") {
  const auto e = estimate_lojasiewicz(SemialgebraicSet(1, {x1(), 1.0 - x1()}), 2000);
  CHECK(e.exponent == doctest::Approx(1.0).epsilon(0.05));
  CHECK(e.constant == doctest::Approx(1.0).epsilon(0.05));
  const Polynomial x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  const auto ball = estimate_lojasiewicz(SemialgebraicSet(2, {1.0 - x * x - y * y}), 4000);
  CHECK(ball.exponent >= 1.0);
  CHECK(ball.exponent <= 1.2);
  CHECK_THROWS(estimate_lojasiewicz(SemialgebraicSet(1, {1.0 - x1() * x1()}), 500));
}
