#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "momsos/conic.hpp"

using namespace momsos;

namespace {

// minimize x  s.t.  [[x,1],[1,x]] PSD
ConicProgram two_by_two() {
  ConicProgram p;
  const int x = p.add_free();
  p.c_free[static_cast<std::size_t>(x)] = 1.0;
  const int b = p.add_block(2);
  p.add_row({{{x, -1.0}}, {{b, 0, 0, 1.0}}}, 0.0);
  p.add_row({{{x, -1.0}}, {{b, 1, 1, 1.0}}}, 0.0);
  p.add_row({{}, {{b, 0, 1, 1.0}}}, 1.0);
  return p;
}

// Lovasz theta of the 5-cycle as a minimization: -sqrt(5).
ConicProgram theta_c5() {
  ConicProgram p;
  const int b = p.add_block(5);
  for (int i = 0; i < 5; ++i) {
    for (int j = i; j < 5; ++j) p.c_psd.push_back({b, i, j, i == j ? -1.0 : -2.0});
  }
  LinearRow tr;
  for (int i = 0; i < 5; ++i) tr.psd.push_back({b, i, i, 1.0});
  p.add_row(tr, 1.0);
  for (int i = 0; i < 5; ++i) p.add_row({{}, {{b, std::min(i, (i + 1) % 5), std::max(i, (i + 1) % 5), 1.0}}}, 0.0);
  return p;
}

ConicProgram random_feasible(std::mt19937_64& rng, int n, int m, int nfree) {
  std::normal_distribution<double> g;
  ConicProgram p;
  p.add_free(nfree);
  const int b = p.add_block(n);
  Eigen::MatrixXd r = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return g(rng); });
  const Eigen::MatrixXd x0 = r * r.transpose() + Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd s0 = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return g(rng); });
  s0 = s0 * s0.transpose() + Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd y0 = Eigen::VectorXd::NullaryExpr(m, [&] { return g(rng); });
  Eigen::MatrixXd c = s0;
  std::vector<double> cf(static_cast<std::size_t>(nfree), 0.0);
  for (int k = 0; k < m; ++k) {
    LinearRow row;
    double rhs = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const double v = g(rng);
        row.psd.push_back({b, i, j, v});
        rhs += v * x0(i, j);
        if (i == j) c(i, i) += y0(k) * v;
        else { c(i, j) += 0.5 * y0(k) * v; c(j, i) += 0.5 * y0(k) * v; }
      }
    }
    for (int j = 0; j < nfree; ++j) {
      if ((k + j) % 3 == 0) {
        row.free.push_back({j, 1.0});
        cf[static_cast<std::size_t>(j)] += y0(k);
      }
    }
    p.add_row(row, rhs);
  }
  p.c_free = cf;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) p.c_psd.push_back({b, i, j, i == j ? c(i, i) : 2.0 * c(i, j)});
  }
  return p;
}

}  // namespace

TEST_CASE("2x2 eigenvalue condition gives x = 1") {
  const auto sol = solve(two_by_two());
  REQUIRE(sol.status == ConicStatus::optimal);
  CHECK(sol.free_values[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-7));
  const auto r = residuals(two_by_two(), sol);
  CHECK(r.primal_infeasibility <= 2e-8);
  CHECK(r.dual_infeasibility <= 2e-8);
  CHECK(r.gap <= 2e-8);
}

TEST_CASE("feasibility program with fixed block") {
  ConicProgram p;
  const int b = p.add_block(1);
  p.add_row({{}, {{b, 0, 0, 1.0}}}, 1.0);
  const auto sol = solve(p);
  REQUIRE(sol.status == ConicStatus::optimal);
  CHECK(std::abs(sol.objective) <= 1e-8);
  CHECK(sol.blocks[0](0, 0) == doctest::Approx(1.0));
}

TEST_CASE("0 = 1 is infeasible") {
  ConicProgram p;
  p.add_block(1);
  p.add_row({}, 1.0);
  CHECK(solve(p).status == ConicStatus::infeasible);
}

TEST_CASE("negative diagonal is infeasible through a dual ray") {
  ConicProgram p;
  const int b = p.add_block(2);
  p.add_row({{}, {{b, 0, 0, 1.0}}}, -1.0);
  p.add_row({{}, {{b, 1, 1, 1.0}}}, 1.0);
  CHECK(solve(p).status == ConicStatus::infeasible);
}

TEST_CASE("unbounded direction is detected") {
  ConicProgram p;
  const int x = p.add_free();
  p.c_free[0] = -1.0;
  const int b = p.add_block(1);
  p.add_row({{{x, -1.0}}, {{b, 0, 0, 1.0}}}, 0.0);
  CHECK(solve(p).status == ConicStatus::unbounded);

  ConicProgram q;
  q.add_free();
  q.c_free[0] = 1.0;
  q.add_block(1);
  q.add_row({{}, {{0, 0, 0, 1.0}}}, 1.0);
  CHECK(solve(q).status == ConicStatus::unbounded);
}

TEST_CASE("hand-built point x = 2 has zero primal residual and gap 1") {
  const auto p = two_by_two();
  ConicSolution s;
  s.free_values = {2.0};
  s.blocks = {(Eigen::MatrixXd(2, 2) << 2, 1, 1, 2).finished()};
  s.duals = {-0.5, -0.5, 1.0};
  const auto r = residuals(p, s);
  CHECK(r.primal_infeasibility == doctest::Approx(0.0));
  CHECK(r.dual_infeasibility == doctest::Approx(0.0));
  CHECK(r.gap_abs == doctest::Approx(1.0));

  // Perturbing away from the optimum widens the gap.
  auto opt = solve(p);
  const double g0 = opt.residuals.gap;
  opt.free_values[0] += 0.5;
  opt.blocks[0](0, 0) += 0.5;
  opt.blocks[0](1, 1) += 0.5;
  CHECK(residuals(p, opt).gap > g0);
}

TEST_CASE("Lovasz theta of C5") {
  const auto sol = solve(theta_c5());
  REQUIRE(sol.status == ConicStatus::optimal);
  CHECK(sol.objective == doctest::Approx(-std::sqrt(5.0)).epsilon(1e-7));
}

TEST_CASE("dependent free columns are handled") {
  // x1 + x2 appear only together, equal costs: a kernel direction with zero cost.
  ConicProgram p;
  p.add_free(2);
  p.c_free = {1.0, 1.0};
  const int b = p.add_block(2);
  p.add_row({{{0, -1.0}, {1, -1.0}}, {{b, 0, 0, 1.0}}}, 0.0);
  p.add_row({{{0, -1.0}, {1, -1.0}}, {{b, 1, 1, 1.0}}}, 0.0);
  p.add_row({{}, {{b, 0, 1, 1.0}}}, 1.0);
  const auto sol = solve(p);
  REQUIRE(sol.status == ConicStatus::optimal);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-7));

  p.c_free = {1.0, 2.0};
  CHECK(solve(p).status == ConicStatus::unbounded);
}

TEST_CASE("rows with only free variables") {
  // minimize x + X00  s.t.  x = 3, X00 - x >= ... encoded as X00 - x = 0 with x fixed.
  ConicProgram p;
  p.add_free();
  p.c_free = {1.0};
  const int b = p.add_block(1);
  p.c_psd.push_back({b, 0, 0, 1.0});
  p.add_row({{{0, 1.0}}, {}}, 3.0);
  p.add_row({{{0, -1.0}}, {{b, 0, 0, 1.0}}}, 0.0);
  const auto sol = solve(p);
  REQUIRE(sol.status == ConicStatus::optimal);
  CHECK(sol.objective == doctest::Approx(6.0).epsilon(1e-7));
}

TEST_CASE("random feasible programs: optimality, weak duality, determinism") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + trial % 4;
    const auto p = random_feasible(rng, n, n + 2, trial % 3);
    SolverOptions opts;
    const auto a = solve(p, opts);
    INFO("trial " << trial << " " << a.message);
    REQUIRE(a.status == ConicStatus::optimal);
    const auto r = residuals(p, a);
    CHECK(r.primal_infeasibility <= 2 * opts.tol);
    CHECK(r.dual_infeasibility <= 2 * opts.tol);
    CHECK(r.gap <= 2 * opts.tol);
    CHECK(r.primal_objective >= r.dual_objective - 10 * opts.tol * (1 + std::abs(r.primal_objective) + std::abs(r.dual_objective)));
    const auto b = solve(p, opts);
    CHECK(a.iterations == b.iterations);
    CHECK(a.objective == b.objective);
  }
}

TEST_CASE("validation and dump") {
  ConicProgram p;
  p.add_block(2);
  p.add_row({{}, {{0, 2, 0, 1.0}}}, 0.0);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  std::ostringstream os;
  dump(two_by_two(), os);
  CHECK(os.str().find("blocks 1 2") != std::string::npos);
  CHECK(os.str().find("rhs 2 1") != std::string::npos);
}
