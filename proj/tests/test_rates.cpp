#include <cmath>
#include <random>

#include "doctest.h"
#include "momsos/rates.hpp"

using namespace momsos;

namespace {

bool rel_eq(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol * std::abs(b); }

RateParams two_d() {
  RateParams p;
  p.m = 2;
  return p;
}

}  // namespace

TEST_CASE("effective Putinar bound") {
  CHECK(rel_eq(putinar_degree_bound(two_d(), 2, 3.0), 31104.0));
  CHECK(rel_eq(putinar_degree_bound(two_d(), 2, 1.0), 128.0));
  RateParams g;
  g.gamma = 7.0;
  CHECK(rel_eq(putinar_degree_bound(g, 1, 1.0), 7.0));
  CHECK_THROWS(putinar_degree_bound(two_d(), 2, 0.5));
  CHECK_THROWS(putinar_degree_bound(two_d(), 0, 2.0));
}

TEST_CASE("Putinar bound is monotone in every argument") {
  for (int deg = 1; deg <= 4; ++deg) {
    for (double ratio : {1.0, 1.5, 3.0}) {
      for (int m = 1; m <= 3; ++m) {
        for (double loja : {1.0, 1.5}) {
          for (double gamma : {1.0, 2.0}) {
            RateParams p;
            p.m = m;
            p.loja = loja;
            p.gamma = gamma;
            const double b = putinar_degree_bound(p, deg, ratio);
            CHECK(putinar_degree_bound(p, deg + 1, ratio) >= b);
            CHECK(putinar_degree_bound(p, deg, ratio * 1.1) >= b);
            RateParams q = p;
            q.m = m + 1;
            CHECK(putinar_degree_bound(q, deg, ratio) >= b);
            q = p;
            q.loja = loja + 0.5;
            CHECK(putinar_degree_bound(q, deg, ratio) >= b);
            q = p;
            q.gamma = gamma * 2;
            CHECK(putinar_degree_bound(q, deg, ratio) >= b);
          }
        }
      }
    }
  }
}

TEST_CASE("gamma upper bound") {
  CHECK(rel_eq(gamma_upper_bound(1, 1, 1, 1, 1, 2), 32.0));
  CHECK(rel_eq(gamma_upper_bound(1, 1, 1, 1, 1, 1), 16.0));
  CHECK(gamma_upper_bound(1e-6, 1, 1, 1, 1, 1) == 1.0);
}

TEST_CASE("POP rate and its inverse") {
  CHECK(rel_eq(pop_rate(two_d(), 1024, 1.0, 1), 0.75));
  CHECK(rel_eq(pop_rate(two_d(), 1.0, 2.0, 3), 6.0 * std::pow(3.0, 1.4)));
  CHECK(pop_level_for(two_d(), 0.75, 1.0, 1) >= 1024 * (1 - 1e-9));
  for (double l : {1.0, 10.0, 1e3, 1e6}) {
    for (int deg : {1, 2, 4}) {
      const double eps = pop_rate(two_d(), l, 1.0, deg);
      if (eps <= 1.0) CHECK(pop_level_for(two_d(), eps, 1.0, deg) >= l * (1 - 1e-9));
    }
  }
  CHECK_THROWS_AS(pop_level_for(two_d(), 2.0, 1.0, 1), std::domain_error);
  CHECK_THROWS_AS(pop_level_for(two_d(), 0.0, 1.0, 1), std::domain_error);
}

TEST_CASE("OCP degree bound") {
  RateParams p;
  p.A = 0.3;
  p.B = 0.0;
  p.C = 2.0;
  CHECK(rel_eq(ocp_degree_bound(p, 1, 0.3, 0), 32.0));
  p.C = 0.0;
  CHECK(rel_eq(ocp_degree_bound(p, 1, 0.3, 0), std::pow(2.0, 2.5)));
  p.C = 2.0;
  RateParams q = p;
  q.gamma = 2.0;
  CHECK(rel_eq(ocp_degree_bound(q, 3, 0.1, 2), 2.0 * ocp_degree_bound(p, 3, 0.1, 2)));
}

TEST_CASE("volume degree bound") {
  RateParams p;
  p.vol_C = 1.0;
  p.c_G = 1.0;
  CHECK(rel_eq(volume_degree_bound(p, std::nextafter(1.0, 0.0)), std::pow(5.0, 2.5), 1e-12));
  p.c_G = 0.0;
  CHECK(rel_eq(volume_degree_bound(p, 0.25), std::pow(4.0, 3.5)));
  p.c_G = 0.7;
  for (double eps : {0.9, 0.5, 0.1, 0.01}) {
    CHECK(volume_degree_bound(p, eps / 2) >= std::pow(2.0, 3.5) * volume_degree_bound(p, eps));
  }
  CHECK_THROWS_AS(volume_degree_bound(p, 1.0), std::domain_error);
}

TEST_CASE("theoretical exponents") {
  CHECK(rel_eq(theoretical_exponent(RateKind::pop, two_d()).alpha, 0.2));
  CHECK(rel_eq(theoretical_exponent(RateKind::ocp_smooth, two_d()).alpha, 1.0 / 12.0));
  CHECK(theoretical_exponent(RateKind::ocp_generic, two_d()).logarithmic);
  CHECK(rel_eq(theoretical_exponent(RateKind::exit, RateParams{}).alpha, 1.0 / 3.0));
  CHECK(rel_eq(theoretical_exponent(RateKind::volume_stokes, two_d()).alpha, 1.0 / 6.0));
  CHECK(rel_eq(theoretical_exponent(RateKind::volume_standard, RateParams{}).alpha, 1.0 / 6.0));
  CHECK(parse_rate_kind("volume_stokes") == RateKind::volume_stokes);
  CHECK_THROWS_AS(parse_rate_kind("nope"), std::invalid_argument);
}

TEST_CASE("rate fitting") {
  const std::vector<double> l{2, 4, 8, 16};
  std::vector<double> g;
  for (double v : l) g.push_back(2.0 * std::pow(v, -0.5));
  const auto f = fit_rate(l, g);
  CHECK(std::abs(f.alpha - 0.5) <= 1e-6);
  CHECK(std::abs(f.c - 2.0) <= 1e-6);
  CHECK(f.r2 == doctest::Approx(1.0));

  const auto flat = fit_rate(l, {0.3, 0.3, 0.3, 0.3});
  CHECK(std::abs(flat.alpha) <= 1e-12);

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  std::vector<double> lv, gv;
  for (int k = 1; k <= 10; ++k) {
    lv.push_back(std::pow(2.0, k));
    gv.push_back(3.0 * std::pow(lv.back(), -1.0 / 6.0) * (1.0 + noise(rng)));
  }
  CHECK(std::abs(fit_rate(lv, gv).alpha - 1.0 / 6.0) <= 0.02);

  CHECK_THROWS(fit_rate({1, 2}, {1, 1}));
  CHECK_THROWS(fit_rate({1, 2, 3}, {1, 0, 1}));
}

TEST_CASE("proof-pattern constants") {
  const auto k = ocp_proof_constants(2.0, 1.0, 0.5, 0.1, 0.5);
  CHECK(rel_eq(k.A, 4.0));
  CHECK(rel_eq(k.B, 2.0 * 1.5 * 0.1 / 0.5));
  CHECK(rel_eq(k.C, 4.0));
  const Polynomial x = Polynomial::variable(1, 0);
  CHECK(inscribed_box_halfwidth(SemialgebraicSet(1, {0.25 - x * x})) == doctest::Approx(0.5));
  CHECK(sup_norm_on_set(x, SemialgebraicSet(1, {0.25 - x * x})) == doctest::Approx(0.5));
}
