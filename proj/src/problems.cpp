#include "momsos/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace momsos {

namespace {

std::vector<int> identity_map(int n, int first = 0) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), first);
  return v;
}

MultiIndex unit(int dim, int i) { return MultiIndex(dim).with(i, 1); }

OperatorBlock identity_op(int unknown, int dim, double c = 1.0) {
  return {unknown, identity_map(dim), {{Polynomial::constant(dim, c), MultiIndex(dim)}}};
}

int max_degree(const std::vector<Polynomial>& ps) {
  int d = 0;
  for (const auto& p : ps) d = std::max(d, p.degree());
  return d;
}

}  // namespace

void OcpSpec::validate() const {
  state_set.validate();
  control_set.validate();
  const int m = state_dim() + control_dim();
  if (static_cast<int>(f.size()) != state_dim()) throw DimensionError("OcpSpec: f needs one entry per state");
  for (const auto& fi : f) {
    if (fi.dim() != m) throw DimensionError("OcpSpec: f must be a polynomial in (y, u)");
  }
  if (g.dim() != m) throw DimensionError("OcpSpec: g must be a polynomial in (y, u)");
  if (!(beta > 0.0)) throw std::invalid_argument("OcpSpec: beta must be positive");
  if (mu0 && mu0->dim() != state_dim()) throw DimensionError("OcpSpec: mu0 lives on the state space");
}

void ExitSpec::with_diffusion(PolyMatrix diffusion) {
  F = std::move(diffusion);
  const std::size_t m = F.size();
  a.assign(m, std::vector<Polynomial>(m, Polynomial(set.dim)));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      Polynomial s(set.dim);
      for (std::size_t k = 0; k < F[i].size(); ++k) s += F[i][k] * F[j][k];
      a[i][j] = s;
    }
  }
}

void ExitSpec::validate() const {
  set.validate();
  const auto m = static_cast<std::size_t>(set.dim);
  if (f0.size() != m) throw DimensionError("ExitSpec: f0 needs one entry per coordinate");
  if (a.size() != m) throw DimensionError("ExitSpec: a must be m x m");
  for (std::size_t i = 0; i < m; ++i) {
    if (a[i].size() != m) throw DimensionError("ExitSpec: a must be m x m");
    for (std::size_t j = 0; j < m; ++j) {
      if (!approx_equal(a[i][j], a[j][i])) throw std::invalid_argument("ExitSpec: a must be symmetric");
    }
  }
  if (x0.size() != m) throw DimensionError("ExitSpec: x0 has the wrong length");
  if (!contains(set, x0)) throw std::invalid_argument("ExitSpec: x0 lies outside S(h)");
  if (g.dim() != set.dim) throw DimensionError("ExitSpec: g has the wrong dimension");
}

SemialgebraicSet unit_box(int dim) {
  std::vector<Polynomial> h;
  for (int i = 0; i < dim; ++i) {
    const Polynomial x = Polynomial::variable(dim, i);
    h.push_back(1.0 - x * x);
  }
  return SemialgebraicSet(dim, std::move(h));
}

GmpDualModel build_pop(const Polynomial& f, const SemialgebraicSet& s) {
  if (f.dim() != s.dim) throw DimensionError("build_pop: f and S differ in dimension");
  const int m = s.dim;
  GmpDualModel model;
  model.name = "pop";
  model.orientation = Orientation::maximize;
  std::vector<double> origin(static_cast<std::size_t>(m), 0.0);
  model.unknowns.push_back({"w", m, DegreeRule{0, 0}, MomentFunctional::dirac(origin)});
  model.constraints.push_back({"f - w", s, {identity_op(0, m, -1.0)}, -f});
  return model;
}

GmpDualModel build_volume_standard(const SemialgebraicSet& x) {
  const int m = x.dim;
  const double r = std::sqrt(static_cast<double>(m));
  GmpDualModel model;
  model.name = "volume";
  model.orientation = Orientation::minimize;
  model.unknowns.push_back({"w", m, DegreeRule{2, 0}, MomentFunctional::box(m)});
  model.constraints.push_back({"X", normalize(x, r), {identity_op(0, m)}, Polynomial::constant(m, 1.0)});
  model.constraints.push_back({"K", normalize(unit_box(m), r), {identity_op(0, m)}, Polynomial(m)});
  return model;
}

GmpDualModel build_volume_stokes(const SemialgebraicSet& x, std::optional<SemialgebraicSet> boundary) {
  x.validate();
  if (x.ineqs.size() != 1) throw std::invalid_argument("build_volume_stokes: X must be defined by a single polynomial");
  const int m = x.dim;
  const Polynomial& h = x.ineqs.front();
  if (h.degree() < 1) throw std::invalid_argument("build_volume_stokes: h must be nonconstant");
  const double r = std::sqrt(static_cast<double>(m));
  if (!boundary) boundary = SemialgebraicSet(m, {h, -h});

  GmpDualModel model;
  model.name = "volume_stokes";
  model.orientation = Orientation::minimize;
  model.unknowns.push_back({"w", m, DegreeRule{2, 0}, MomentFunctional::box(m)});
  for (int i = 0; i < m; ++i) {
    model.unknowns.push_back({"u" + std::to_string(i + 1), m, DegreeRule{2, 1 - h.degree()}, std::nullopt});
  }

  // w - div u - 1 on X
  GmpConstraint cx{"X", normalize(x, r), {identity_op(0, m)}, Polynomial::constant(m, 1.0)};
  for (int i = 0; i < m; ++i) {
    cx.ops.push_back({i + 1, identity_map(m), {{Polynomial::constant(m, -1.0), unit(m, i)}}});
  }
  model.constraints.push_back(std::move(cx));

  // -u . grad h on the boundary
  const auto gh = grad(h);
  GmpConstraint cb{"boundary", normalize(*boundary, r), {}, Polynomial(m)};
  for (int i = 0; i < m; ++i) {
    if (gh[static_cast<std::size_t>(i)].is_zero()) continue;
    cb.ops.push_back({i + 1, identity_map(m), {{-gh[static_cast<std::size_t>(i)], MultiIndex(m)}}});
  }
  model.constraints.push_back(std::move(cb));

  model.constraints.push_back({"K", normalize(unit_box(m), r), {identity_op(0, m)}, Polynomial(m)});
  return model;
}

GmpDualModel build_ocp(const OcpSpec& spec) {
  spec.validate();
  const int n = spec.state_dim(), p = spec.control_dim(), m = n + p;
  std::vector<Polynomial> h;
  const auto ymap = identity_map(n), umap = identity_map(p, n);
  for (const auto& hy : spec.state_set.ineqs) h.push_back(hy.embed(m, ymap));
  for (const auto& hu : spec.control_set.ineqs) h.push_back(hu.embed(m, umap));
  const SemialgebraicSet yu = normalize(SemialgebraicSet(m, std::move(h)), std::sqrt(static_cast<double>(m)));

  GmpDualModel model;
  model.name = "ocp";
  model.orientation = Orientation::maximize;
  std::optional<MomentFunctional> mu0 = spec.mu0;
  if (!mu0) mu0 = MomentFunctional::dirac(std::vector<double>(static_cast<std::size_t>(n), 0.0));
  model.unknowns.push_back({"V", n, DegreeRule{2, -std::max(0, max_degree(spec.f) - 1)}, mu0});

  // g - beta V - f . grad V
  OperatorBlock op{0, ymap, {{Polynomial::constant(m, -spec.beta), MultiIndex(m)}}};
  for (int i = 0; i < n; ++i) op.terms.push_back({-spec.f[static_cast<std::size_t>(i)], unit(m, i)});
  model.constraints.push_back({"hjb", yu, {op}, -spec.g});
  return model;
}

GmpDualModel build_exit(const ExitSpec& spec) {
  spec.validate();
  const int m = spec.set.dim;
  const double r = std::sqrt(static_cast<double>(m));
  int deg_a = 0;
  for (const auto& row : spec.a) deg_a = std::max(deg_a, max_degree(row));
  const int drop = std::max({0, max_degree(spec.f0) - 1, deg_a - 2});

  GmpDualModel model;
  model.name = "exit";
  model.orientation = Orientation::maximize;
  model.unknowns.push_back({"v", m, DegreeRule{2, -drop}, MomentFunctional::dirac(spec.x0)});

  // -L v = sum_ij a_ij d_ij v - f0 . grad v
  OperatorBlock op{0, identity_map(m), {}};
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const auto& aij = spec.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (!aij.is_zero()) op.terms.push_back({aij, unit(m, i) + unit(m, j)});
    }
    const auto& fi = spec.f0[static_cast<std::size_t>(i)];
    if (!fi.is_zero()) op.terms.push_back({-fi, unit(m, i)});
  }
  model.constraints.push_back({"generator", normalize(spec.set, r), {op}, Polynomial(m)});

  SemialgebraicSet bd = spec.boundary;
  if (bd.ineqs.empty()) {
    std::vector<Polynomial> hs;
    for (const auto& h : spec.set.ineqs) {
      hs.push_back(h);
      hs.push_back(-h);
    }
    bd = SemialgebraicSet(m, std::move(hs));
  }
  model.constraints.push_back({"boundary", normalize(bd, r), {identity_op(0, m, -1.0)}, -spec.g});
  return model;
}

namespace {

// Bounds of the 1-D set S(h) inside [-1,1], refined by bisection.
std::pair<double, double> interval_of(const SemialgebraicSet& s, std::optional<double> around = std::nullopt) {
  auto in = [&](double x) { return contains(s, std::span<const double>(&x, 1)); };
  auto refine = [&](double inside, double outside) {
    for (int k = 0; k < 60; ++k) {
      const double mid = 0.5 * (inside + outside);
      (in(mid) ? inside : outside) = mid;
    }
    return inside;
  };
  const int n = 20001;
  const double h = 2.0 / (n - 1);
  if (around) {
    const double x0 = *around;
    if (!in(x0)) throw std::invalid_argument("interval_of: point outside the set");
    double l = x0, r = x0;
    while (l - h >= -1.0 && in(l - h)) l -= h;
    while (r + h <= 1.0 && in(r + h)) r += h;
    if (l - h >= -1.0) l = refine(l, l - h);
    else if (in(-1.0)) l = -1.0;
    if (r + h <= 1.0) r = refine(r, r + h);
    else if (in(1.0)) r = 1.0;
    return {l, r};
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < n; ++i) {
    const double x = -1.0 + i * h;
    if (in(x)) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (!(lo <= hi)) throw std::runtime_error("interval_of: set has no grid point in [-1,1]");
  if (lo > -1.0) lo = refine(lo, lo - h);
  if (hi < 1.0) hi = refine(hi, hi + h);
  return {lo, hi};
}

// Start index and weights of the 4-point Lagrange stencil at x.
void cubic_stencil(const std::vector<double>& grid, double x, int& start, double w[4]) {
  const int n = static_cast<int>(grid.size());
  const double h = grid[1] - grid[0];
  int i = static_cast<int>(std::floor((x - grid[0]) / h));
  start = std::clamp(i - 1, 0, std::max(0, n - 4));
  const int k = std::min(4, n);
  for (int a = 0; a < 4; ++a) w[a] = 0.0;
  for (int a = 0; a < k; ++a) {
    double l = 1.0;
    for (int b = 0; b < k; ++b) {
      if (b != a) l *= (x - grid[static_cast<std::size_t>(start + b)]) / (grid[static_cast<std::size_t>(start + a)] - grid[static_cast<std::size_t>(start + b)]);
    }
    w[a] = l;
  }
}

double eval2(const Polynomial& p, double y, double u) {
  const double x[2] = {y, u};
  return p.eval(x);
}

}  // namespace

double OcpOracle::value(double y) const {
  const double lo = grid_.front(), hi = grid_.back();
  const double slack = 1e-12 * (1.0 + hi - lo);
  if (y < lo - slack || y > hi + slack) throw std::out_of_range("OcpOracle::value: point outside Y");
  int s = 0;
  double w[4];
  cubic_stencil(grid_, std::clamp(y, lo, hi), s, w);
  double v = 0.0;
  for (int a = 0; a < 4 && s + a < static_cast<int>(values_.size()); ++a) v += w[a] * values_[static_cast<std::size_t>(s + a)];
  return v;
}

double OcpOracle::expectation(const MomentFunctional& mu0) const {
  if (mu0.dim() != 1) throw DimensionError("OcpOracle::expectation: 1-D functional expected");
  switch (mu0.kind()) {
    case MomentFunctional::Kind::dirac: return value(mu0.point().front());
    case MomentFunctional::Kind::box:
    case MomentFunctional::Kind::ball: {
      const auto [x, w] = gauss_legendre(4);
      const double lo = -1.0, hi = 1.0;
      const int cells = static_cast<int>(grid_.size()) - 1;
      const double h = (hi - lo) / cells;
      double s = 0.0;
      for (int c = 0; c < cells; ++c) {
        for (std::size_t k = 0; k < x.size(); ++k) s += 0.5 * h * w[k] * value(lo + h * (c + 0.5 * (x[k] + 1.0)));
      }
      return s;
    }
    default: throw std::invalid_argument("OcpOracle::expectation: tabulated functionals are not supported");
  }
}

OcpOracle oracle_ocp_1d(const OcpSpec& spec, const OcpOracleOptions& opts) {
  spec.validate();
  if (spec.state_dim() != 1 || spec.control_dim() != 1) {
    throw std::invalid_argument("oracle_ocp_1d: one state and one control expected");
  }
  if (!spec.assumptions_asserted) {
    throw std::invalid_argument("oracle_ocp_1d: regularity and convexity must be asserted for the instance");
  }
  if (opts.grid_points < 4 || opts.controls < 1 || !(opts.dt > 0.0)) {
    throw std::invalid_argument("oracle_ocp_1d: bad discretization");
  }
  const auto [yl, yr] = interval_of(spec.state_set);
  const auto [ul, ur] = interval_of(spec.control_set);
  const int n = opts.grid_points, nc = opts.controls;
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = yl + (yr - yl) * i / (n - 1);
  const double dt = opts.dt, disc = std::exp(-spec.beta * dt);
  const Polynomial& f = spec.f.front();
  const double tol_y = 1e-12 * (1.0 + yr - yl);

  // Transitions are fixed across sweeps, so they are tabulated once.
  struct Move {
    double cost;
    int start;
    double w[4];
  };
  std::vector<std::vector<Move>> moves(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double y = grid[static_cast<std::size_t>(i)];
    for (int k = 0; k < nc; ++k) {
      const double u = nc == 1 ? 0.5 * (ul + ur) : ul + (ur - ul) * k / (nc - 1);
      const double f1 = eval2(f, y, u);
      const double y1 = y + dt * f1;
      const double y2 = y + 0.5 * dt * (f1 + eval2(f, y1, u));
      if (y2 < yl - tol_y || y2 > yr + tol_y) continue;
      Move mv;
      mv.cost = 0.5 * dt * (eval2(spec.g, y, u) + disc * eval2(spec.g, y2, u));
      cubic_stencil(grid, std::clamp(y2, yl, yr), mv.start, mv.w);
      moves[static_cast<std::size_t>(i)].push_back(mv);
    }
    if (moves[static_cast<std::size_t>(i)].empty()) {
      throw std::runtime_error("oracle_ocp_1d: every control leaves Y from y = " + std::to_string(y));
    }
  }

  std::vector<double> v(static_cast<std::size_t>(n), 0.0), next(v);
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    double diff = 0.0, vmax = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& mv : moves[static_cast<std::size_t>(i)]) {
        double c = 0.0;
        for (int a = 0; a < 4; ++a) c += mv.w[a] * v[static_cast<std::size_t>(mv.start + a)];
        best = std::min(best, mv.cost + disc * c);
      }
      next[static_cast<std::size_t>(i)] = best;
      diff = std::max(diff, std::abs(best - v[static_cast<std::size_t>(i)]));
      vmax = std::max(vmax, std::abs(best));
    }
    v.swap(next);
    if (diff <= opts.sweep_tol * (1.0 + vmax)) return OcpOracle(std::move(grid), std::move(v), sweep);
  }
  throw std::runtime_error("oracle_ocp_1d: value iteration did not converge");
}

double oracle_exit_1d(const ExitSpec& spec) {
  spec.validate();
  if (spec.set.dim != 1) throw std::invalid_argument("oracle_exit_1d: one dimension expected");
  const double x0 = spec.x0.front();
  const auto [xl, xr] = interval_of(spec.set, x0);
  if (!(xr > xl)) throw std::runtime_error("oracle_exit_1d: degenerate interval");
  const Polynomial& a = spec.a[0][0];
  const Polynomial& f0 = spec.f0.front();
  auto at = [](const Polynomial& p, double x) { return p.eval(std::span<const double>(&x, 1)); };
  for (int i = 0; i <= 1000; ++i) {
    const double x = xl + (xr - xl) * i / 1000.0;
    if (!(at(a, x) > 0.0)) throw std::runtime_error("oracle_exit_1d: diffusion vanishes on the interval");
  }

  const auto [gx, gw] = gauss_legendre(8);
  const int cells = 400;
  // Phi(b) = int_xl^b exp(I(t)) dt with I(t) = int_xl^t f0/a.
  auto ratio = [&](double t) { return at(f0, t) / at(a, t); };
  auto integral = [&](auto&& fn, double lo, double hi) {
    double s = 0.0;
    for (std::size_t k = 0; k < gx.size(); ++k) s += gw[k] * fn(lo + 0.5 * (hi - lo) * (gx[k] + 1.0));
    return 0.5 * (hi - lo) * s;
  };
  auto phi = [&](double b) {
    const double h = (b - xl) / cells;
    double acc_i = 0.0, out = 0.0;
    for (int c = 0; c < cells; ++c) {
      const double lo = xl + c * h, hi = lo + h;
      out += integral([&](double t) { return std::exp(acc_i + integral(ratio, lo, t)); }, lo, hi);
      acc_i += integral(ratio, lo, hi);
    }
    return out;
  };
  const double gl = at(spec.g, xl), gr = at(spec.g, xr);
  if (x0 <= xl) return gl;
  return gl + (gr - gl) * phi(x0) / phi(xr);
}

VolumeEstimate volume_reference(const SemialgebraicSet& s, std::size_t n_samples, std::uint64_t seed) {
  s.validate();
  if (n_samples == 0) throw std::invalid_argument("volume_reference: no samples");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(s.dim));
  std::size_t hits = 0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    for (auto& v : x) v = u(rng);
    if (contains(s, x)) ++hits;
  }
  const double box = std::pow(2.0, s.dim);
  const double p = static_cast<double>(hits) / static_cast<double>(n_samples);
  return {box * p, box * std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples)), n_samples};
}

}  // namespace momsos
