#include <cmath>
#include <random>

#include "doctest.h"
#include "momsos/sos.hpp"

using namespace momsos;

namespace {

Polynomial x1() { return Polynomial::variable(1, 0); }

SemialgebraicSet interval() { return SemialgebraicSet(1, {1.0 - x1() * x1()}); }

Polynomial random_poly(std::mt19937_64& rng, int dim, int deg) {
  std::normal_distribution<double> g;
  Polynomial::TermMap t;
  for (const auto& a : monomials_up_to(dim, deg)) t[a] = g(rng);
  return Polynomial(dim, t);
}

}  // namespace

TEST_CASE("module layout drops generators of too high degree") {
  const Polynomial x = Polynomial::variable(1, 0);
  QuadraticModuleSpec spec{SemialgebraicSet(1, {1.0 - x * x, x.pow(4)}), 1};
  const auto gens = spec.active_generators();
  REQUIRE(gens.size() == 2);
  CHECK(gens[0].index == -1);
  CHECK(gens[0].basis_degree == 1);
  CHECK(gens[1].basis_degree == 0);
  CHECK(spec.dropped_generators() == std::vector<int>{1});

  ConicProgram prog;
  const auto enc = encode_membership(prog, AffineFamily(x * x), spec);
  CHECK(enc.notes.size() == 1);
  CHECK(prog.num_rows() == 3);
  CHECK(prog.block_sizes == std::vector<int>{2, 1});
}

TEST_CASE("degree overflow is rejected") {
  ConicProgram prog;
  CHECK_THROWS_AS(encode_membership(prog, AffineFamily(x1().pow(3)), {interval(), 1}), std::invalid_argument);
}

TEST_CASE("1 - x^2 and x^2 belong to Q_1(1 - x^2)") {
  auto r = check_membership(1.0 - x1() * x1(), interval(), 1);
  REQUIRE(r.certified());
  CHECK(r.certificate->residual <= 1e-6);

  r = check_membership(x1() * x1(), interval(), 1);
  REQUIRE(r.certified());
  // sigma_0 = x^2, so the (x, x) Gram entry is 1.
  CHECK(r.certificate->grams[0](1, 1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("x and -1 are never certified") {
  for (int l = 1; l <= 3; ++l) {
    CHECK_FALSE(check_membership(x1(), interval(), l).certified());
    const auto r = check_membership(Polynomial::constant(1, -1.0), interval(), l);
    CHECK(r.outcome == MembershipResult::Outcome::infeasible);
  }
}

TEST_CASE("explicit SoS plus margin and the 1 + x identity") {
  const SemialgebraicSet half(1, {0.5 * (1.0 - x1() * x1())});
  const Polynomial q = x1() * x1() - 0.5;
  auto r = check_membership(q * q + 1e-3, half, 2);
  REQUIRE(r.certified());
  CHECK(r.verification.residual <= 1e-6);

  r = check_membership(1.0 + x1(), interval(), 1);
  REQUIRE(r.certified());
}

TEST_CASE("verify_certificate rejects bad certificates") {
  SosCertificate c;
  c.level = 1;
  c.target = x1() * x1();
  c.generator_indices = {-1};
  c.generators = {Polynomial::constant(1, 1.0)};
  c.bases = {monomials_up_to(1, 1)};
  c.grams = {(Eigen::MatrixXd(2, 2) << 0, 0, 0, 1).finished()};
  auto rep = verify_certificate(c, c.target);
  CHECK(rep.ok);
  CHECK(rep.residual <= 1e-12);

  c.grams[0](0, 0) = -0.1;
  rep = verify_certificate(c, c.target - 0.1);
  CHECK_FALSE(rep.ok);
  CHECK(rep.reason == "not PSD");

  c.grams[0](0, 0) = 0.0;
  rep = verify_certificate(c, x1());
  CHECK_FALSE(rep.ok);
  CHECK(rep.residual == doctest::Approx(1.0));

  c.grams[0] = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(verify_certificate(c, x1()), std::invalid_argument);
}

TEST_CASE("Archimedean checks") {
  CHECK(check_archimedean(interval(), 1.0, 1));
  CHECK_FALSE(check_archimedean(SemialgebraicSet(1, {x1() + 1.0}), 1.0, 1));
  const auto disk = normalize(SemialgebraicSet(2, {Polynomial::constant(2, 0.25)}), 1.0);
  CHECK(check_archimedean(disk, 1.0, 1));
}

TEST_CASE("certified memberships are sound and persist to higher levels") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 1 + trial % 2;
    Polynomial ball = Polynomial::constant(dim, 1.0);
    for (int i = 0; i < dim; ++i) ball -= Polynomial::variable(dim, i) * Polynomial::variable(dim, i);
    const SemialgebraicSet s(dim, {ball});
    const Polynomial a = random_poly(rng, dim, 1), b = random_poly(rng, dim, 1);
    const Polynomial p = a * a + std::abs(b.coef(MultiIndex(dim))) * ball + b * b * ball + 0.01;
    const auto r = check_membership(p, s, 2);
    INFO(trial << ": " << r.message << " " << p.str());
    REQUIRE(r.certified());
    CHECK(r.verification.min_eigenvalue >= -1e-8);
    CHECK(check_membership(p, s, 3).certified());
    std::vector<double> x(static_cast<std::size_t>(dim));
    int inside = 0;
    while (inside < 10000) {
      for (auto& v : x) v = u(rng);
      if (!contains(s, x)) continue;
      ++inside;
      if (p.eval(x) < -1e-6) FAIL("certified polynomial negative on S");
    }
  }
}
