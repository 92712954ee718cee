#include <cmath>

#include "doctest.h"
#include "momsos/approx.hpp"
#include "momsos/gmp.hpp"
#include "momsos/problems.hpp"

using namespace momsos;

namespace {

Callable from(std::function<double(double)> f, int smoothness) {
  return {[f](std::span<const double> x) { return f(x[0]); }, 1, smoothness};
}

std::vector<double> sample(const Grid& g, const std::function<double(double)>& f) {
  std::vector<double> v;
  for (const auto& p : g.points) v.push_back(f(p[0]));
  return v;
}

double step(double x) { return x >= 0.0 ? 1.0 : 0.0; }

}  // namespace

TEST_CASE("grids") {
  const auto u = Grid::uniform(2, 11);
  CHECK(u.size() == 121);
  double total = 0.0;
  for (double w : u.weights) total += w;
  CHECK(total == doctest::Approx(4.0).epsilon(1e-14));
  const auto c = Grid::chebyshev(1, 5);
  CHECK(c.axis.front() == -1.0);
  CHECK(c.axis.back() == 1.0);
  CHECK(c.axis[2] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("modulus of continuity") {
  const auto g = Grid::uniform(1, 2001);
  const auto abs_f = from([](double x) { return std::abs(x); }, 0);
  CHECK(modulus_of_continuity(abs_f, 0, g, 0.1).sup == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(modulus_of_continuity(from([](double) { return 3.0; }, 5), 0, g, 0.3).sup == 0.0);

  const auto ind = from(step, 0);
  for (double rho : {0.05, 0.25, 0.5}) {
    const auto r = modulus_of_continuity(ind, 0, g, rho, 1.0);
    CHECK(std::abs(r.averaged - 2.0 * rho) <= 3e-3);
    CHECK(r.sup == 1.0);
  }

  double prev = 0.0;
  for (double rho : {0.0, 0.01, 0.05, 0.1, 0.4, 1.0}) {
    const double w = modulus_of_continuity(from([](double x) { return std::sin(3 * x); }, 4), 1, g, rho).sup;
    CHECK(w >= prev);
    prev = w;
  }

  const auto inner = Grid::uniform(1, 1001, -0.5, 0.5);
  const auto sq = from([](double x) { return x * x; }, 4);
  CHECK(modulus_of_continuity(sq, 0, inner, 0.2).sup <= modulus_of_continuity(sq, 0, g, 0.2).sup);

  CHECK_THROWS_AS(modulus_of_continuity(abs_f, 1, g, 0.1), std::invalid_argument);
}

TEST_CASE("exact and finite-difference derivatives agree") {
  const Polynomial x = Polynomial::variable(1, 0);
  const auto g = Grid::uniform(1, 201);
  const auto exact = modulus_of_continuity(x.pow(3), 1, g, 0.1);
  CHECK(exact.sup == doctest::Approx(3.0 * (1.0 - 0.81)).epsilon(1e-12));
  const auto fd = modulus_of_continuity(as_callable(x.pow(3)), 1, g, 0.1);
  CHECK(std::abs(fd.sup - exact.sup) <= 1e-6);

  const Polynomial a = Polynomial::variable(2, 0), b = Polynomial::variable(2, 1);
  const auto g2 = Grid::uniform(2, 21);
  const auto e2 = modulus_of_continuity(a * a * b, 2, g2, 0.2);
  const auto f2 = modulus_of_continuity(as_callable(a * a * b), 2, g2, 0.2);
  CHECK(std::abs(e2.sup - f2.sup) <= 1e-4);
}

TEST_CASE("least squares fits") {
  const auto g = Grid::chebyshev(1, 101);
  const auto lin = poly_approx(g, sample(g, [](double x) { return x; }), 1);
  CHECK(lin.sup_residual <= 1e-12);
  CHECK(approx_equal(lin.p, Polynomial::variable(1, 0), 1e-12));
  CHECK(poly_approx(g, sample(g, [](double x) { return std::exp(x); }), 5).sup_residual <= 1e-3);
  CHECK(poly_approx(g, sample(g, [](double x) { return std::abs(x); }), 2).sup_residual >= 0.1);
  const auto coarse = Grid::uniform(1, 3);
  CHECK_THROWS_AS(poly_approx(coarse, sample(coarse, [](double x) { return x; }), 5), std::runtime_error);
}

TEST_CASE("one-sided shift") {
  const auto g = Grid::uniform(1, 401);
  const Polynomial x = Polynomial::variable(1, 0);
  const auto same = one_sided_shift(g, sample(g, [](double t) { return t * t; }), x * x);
  CHECK(std::abs(same.shift) <= 1e-8);

  const auto lin = one_sided_shift(g, sample(g, [](double t) { return t; }), Polynomial(1));
  CHECK(lin.shift == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(lin.l1_excess == doctest::Approx(2.0).epsilon(1e-8));

  const auto values = sample(g, step);
  double prev = std::numeric_limits<double>::infinity();
  for (int d : {1, 3, 5, 7, 9, 11}) {
    const auto fit = poly_approx(g, values, d);
    const auto up = one_sided_shift(g, values, fit.p);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(up.p.eval(g.points[i]) >= values[i]);
    CHECK(up.l1_excess <= prev);
    prev = up.l1_excess;
  }
}

TEST_CASE("OCP perturbation") {
  CHECK(ocp_perturbation_shift(1.0, 10, 1.0, 1.0, 0.1) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(ocp_perturbation_shift(1.0, 1000000, 1.0, 1.0, 1e-9) < 1e-5);
  const Polynomial y = Polynomial::variable(1, 0);
  const Polynomial v = y * y - 0.5 * y.pow(3);
  const Polynomial shifted = ocp_perturbation(v, 1.0, 10, 1.0, 1.0, 0.1);
  CHECK(approx_equal(v - shifted, Polynomial::constant(1, 0.3), 1e-15));
  const auto g0 = grad(v), g1 = grad(shifted);
  CHECK(approx_equal(g0[0], g1[0], 0.0));
  CHECK_THROWS(ocp_perturbation_shift(1.0, 0, 1.0, 1.0, 0.1));
  CHECK_THROWS(ocp_perturbation_shift(1.0, 3, 1.0, 1.0, 0.0));
}

TEST_CASE("perturbed polynomial value function is strictly HJB-feasible") {
  // V*(y) = y^2 - 2|y| + 2 - 2 exp(-|y|) for dy = u, g = y^2, beta = 1.
  auto vstar = [](double y) { return y * y - 2 * std::abs(y) + 2 - 2 * std::exp(-std::abs(y)); };
  auto dvstar = [](double y) {
    const double s = (y > 0) - (y < 0);
    return 2 * y - 2 * s + 2 * s * std::exp(-std::abs(y));
  };
  const int d = 8;
  const auto g = Grid::chebyshev(1, 201);
  const auto fit = poly_approx(g, sample(g, vstar), d);
  const Polynomial dp = fit.p.derivative(0);
  double e0 = 0.0, e1 = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double y = -1.0 + i / 2000.0;
    e0 = std::max(e0, std::abs(vstar(y) - fit.p.eval(std::span<const double>(&y, 1))));
    e1 = std::max(e1, std::abs(dvstar(y) - dp.eval(std::span<const double>(&y, 1))));
  }
  const double c1 = d * std::max(e0, e1);  // measured stand-in
  const double eta = 0.05;
  const Polynomial v = ocp_perturbation(fit.p, c1, d, 1.0, 1.0, eta);

  OcpSpec spec;
  const Polynomial yy = Polynomial::variable(2, 0), u = Polynomial::variable(2, 1);
  spec.f = {u};
  spec.g = yy * yy;
  spec.state_set = unit_box(1);
  spec.control_set = unit_box(1);
  spec.assumptions_asserted = true;
  const auto model = build_ocp(spec);
  const auto slack = slack_lower_bound(model, {v}, eta / 2, 4);
  REQUIRE(slack.size() == 1);
  CHECK(slack[0].certified);
  CHECK(slack[0].rho > 0.0);
  // The HJB residual itself is at least beta * eta on sampled points.
  const Polynomial resid = model.constraints[0].apply({v}) - model.constraints[0].offset;
  for (int i = 0; i <= 40; ++i) {
    for (int j = 0; j <= 10; ++j) {
      const double p[2] = {-1.0 + 0.05 * i, -1.0 + 0.2 * j};
      CHECK(resid.eval(p) >= eta - 1e-9);
    }
  }
}

TEST_CASE("Jackson ratios") {
  const auto g = Grid::chebyshev(1, 201);
  // Taylor polynomial of sin(2x) of degree 11, used as a smooth surrogate.
  const Polynomial x = Polynomial::variable(1, 0);
  Polynomial s(1);
  double fact = 1.0;
  for (int k = 1; k <= 11; k += 2) {
    if (k > 1) fact *= (k - 1) * k;
    s += ((k / 2) % 2 ? -1.0 : 1.0) * std::pow(2.0, k) / fact * x.pow(k);
  }
  const auto rows = jackson_ratio_report(as_callable(s), 1, 2, 8, g);
  REQUIRE(rows.size() == 7);
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.ratio));
    CHECK(r.ratio >= 0.0);
    CHECK(r.ratio < 10.0);
  }
  const auto exact = jackson_ratio_report(as_callable(x.pow(3) - x), 1, 3, 5, g);
  for (const auto& r : exact) CHECK(r.ratio == 0.0);
  CHECK_THROWS_AS(jackson_ratio_report(from([](double t) { return std::abs(t); }, 0), 1, 2, 4, g),
                  std::invalid_argument);
}
