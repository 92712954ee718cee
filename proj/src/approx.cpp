#include "momsos/approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace momsos {

namespace {

std::vector<double> trapezoid_weights(const std::vector<double>& nodes) {
  const std::size_t n = nodes.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = nodes[i + 1] - nodes[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

Grid tensor(int dim, std::vector<double> axis) {
  if (dim <= 0) throw std::invalid_argument("Grid: dimension must be positive");
  const std::size_t n = axis.size();
  double total = 1.0;
  for (int d = 0; d < dim; ++d) total *= static_cast<double>(n);
  if (total > 5e6) throw std::invalid_argument("Grid: too many points");
  const auto w1 = trapezoid_weights(axis);
  Grid g;
  g.dim = dim;
  g.axis = std::move(axis);
  std::vector<std::size_t> idx(static_cast<std::size_t>(dim), 0);
  const auto count = static_cast<std::size_t>(total);
  g.points.reserve(count);
  g.weights.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<double> p(static_cast<std::size_t>(dim));
    double w = 1.0;
    for (int d = 0; d < dim; ++d) {
      p[static_cast<std::size_t>(d)] = g.axis[idx[static_cast<std::size_t>(d)]];
      w *= w1[idx[static_cast<std::size_t>(d)]];
    }
    g.points.push_back(std::move(p));
    g.weights.push_back(w);
    for (int d = dim - 1; d >= 0; --d) {
      if (++idx[static_cast<std::size_t>(d)] < n) break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
  }
  return g;
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Tensor central difference of multi-order alpha at x.
double central_difference(const Callable& f, const MultiIndex& alpha, std::span<const double> x, double h) {
  const int m = alpha.dim();
  std::vector<int> j(static_cast<std::size_t>(m), 0);
  std::vector<double> pt(x.begin(), x.end());
  double sum = 0.0;
  while (true) {
    double c = 1.0;
    for (int i = 0; i < m; ++i) {
      const int a = alpha[i], ji = j[static_cast<std::size_t>(i)];
      c *= ((ji % 2) ? -1.0 : 1.0) * binom(a, ji);
      pt[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + (0.5 * a - ji) * h;
    }
    sum += c * f(pt);
    int i = m - 1;
    for (; i >= 0; --i) {
      if (++j[static_cast<std::size_t>(i)] <= alpha[i]) break;
      j[static_cast<std::size_t>(i)] = 0;
    }
    if (i < 0) break;
  }
  return sum / std::pow(h, alpha.degree());
}

std::vector<MultiIndex> orders_of_degree(int dim, int k) {
  std::vector<MultiIndex> out;
  for (const auto& a : monomials_up_to(dim, k)) {
    if (a.degree() == k) out.push_back(a);
  }
  return out;
}

ModulusReport modulus_from_values(const std::vector<std::vector<double>>& deriv, int k, const Grid& grid,
                                  double rho, double s, const std::optional<std::vector<double>>& weights) {
  if (!(rho >= 0.0)) throw std::invalid_argument("modulus_of_continuity: rho must be nonnegative");
  if (!(s >= 1.0)) throw std::invalid_argument("modulus_of_continuity: s must be >= 1");
  const std::vector<double>& w = weights ? *weights : grid.weights;
  if (w.size() != grid.size()) throw DimensionError("modulus_of_continuity: one weight per grid point");

  ModulusReport rep;
  rep.order = k;
  rep.rho = rho;
  rep.s = s;
  rep.pointwise.assign(grid.size(), 0.0);
  const int m = grid.dim;
  const auto n = static_cast<long>(grid.axis.size());
  const double r2 = rho * rho * (1.0 + 1e-12) + 1e-24;

  // Tensor index of each point and the axis window within rho.
  std::vector<long> lo_idx(static_cast<std::size_t>(n)), hi_idx(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const double x = grid.axis[static_cast<std::size_t>(i)];
    lo_idx[static_cast<std::size_t>(i)] =
        std::lower_bound(grid.axis.begin(), grid.axis.end(), x - rho - 1e-12) - grid.axis.begin();
    hi_idx[static_cast<std::size_t>(i)] =
        std::upper_bound(grid.axis.begin(), grid.axis.end(), x + rho + 1e-12) - grid.axis.begin() - 1;
  }
  std::vector<long> idx(static_cast<std::size_t>(m)), nb(static_cast<std::size_t>(m));
  for (std::size_t p = 0; p < grid.size(); ++p) {
    std::size_t rest = p;
    for (int d = m - 1; d >= 0; --d) {
      idx[static_cast<std::size_t>(d)] = static_cast<long>(rest % static_cast<std::size_t>(n));
      rest /= static_cast<std::size_t>(n);
    }
    for (int d = 0; d < m; ++d) nb[static_cast<std::size_t>(d)] = lo_idx[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])];
    double best = 0.0;
    while (true) {
      std::size_t q = 0;
      double dist2 = 0.0;
      for (int d = 0; d < m; ++d) {
        q = q * static_cast<std::size_t>(n) + static_cast<std::size_t>(nb[static_cast<std::size_t>(d)]);
        const double diff = grid.axis[static_cast<std::size_t>(nb[static_cast<std::size_t>(d)])] -
                            grid.axis[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])];
        dist2 += diff * diff;
      }
      if (dist2 <= r2) {
        for (const auto& dv : deriv) best = std::max(best, std::abs(dv[p] - dv[q]));
      }
      int d = m - 1;
      for (; d >= 0; --d) {
        auto& c = nb[static_cast<std::size_t>(d)];
        if (++c <= hi_idx[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])]) break;
        c = lo_idx[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])];
      }
      if (d < 0) break;
    }
    rep.pointwise[p] = best;
  }
  double acc = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    rep.sup = std::max(rep.sup, rep.pointwise[p]);
    acc += w[p] * std::pow(rep.pointwise[p], s);
  }
  rep.averaged = std::pow(acc, 1.0 / s);
  return rep;
}

}  // namespace

Grid Grid::uniform(int dim, int n_per_axis, double lo, double hi) {
  if (n_per_axis < 2 || !(hi > lo)) throw std::invalid_argument("Grid::uniform: need >= 2 points on a proper interval");
  std::vector<double> axis(static_cast<std::size_t>(n_per_axis));
  for (int i = 0; i < n_per_axis; ++i) axis[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n_per_axis - 1);
  axis.back() = hi;
  return tensor(dim, std::move(axis));
}

Grid Grid::chebyshev(int dim, int n_per_axis, double lo, double hi) {
  if (n_per_axis < 2 || !(hi > lo)) throw std::invalid_argument("Grid::chebyshev: need >= 2 points on a proper interval");
  std::vector<double> axis(static_cast<std::size_t>(n_per_axis));
  for (int i = 0; i < n_per_axis; ++i) {
    const double t = -std::cos(std::numbers::pi * i / (n_per_axis - 1));
    axis[static_cast<std::size_t>(i)] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t;
  }
  axis.front() = lo;
  axis.back() = hi;
  return tensor(dim, std::move(axis));
}

Callable as_callable(const Polynomial& p) {
  return {[p](std::span<const double> x) { return p.eval(x); }, p.dim(), std::numeric_limits<int>::max()};
}

ModulusReport modulus_of_continuity(const Callable& f, int k, const Grid& grid, double rho, double s,
                                    std::optional<std::vector<double>> weights) {
  if (k < 0) throw std::invalid_argument("modulus_of_continuity: negative order");
  if (k > f.smoothness) {
    throw std::invalid_argument("modulus_of_continuity: order " + std::to_string(k) + " exceeds smoothness " +
                                std::to_string(f.smoothness));
  }
  if (f.dim != grid.dim) throw DimensionError("modulus_of_continuity: grid dimension");
  const double h = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (k + 2));
  std::vector<std::vector<double>> deriv;
  for (const auto& a : orders_of_degree(grid.dim, k)) {
    std::vector<double> v(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
      v[p] = k == 0 ? f(grid.points[p]) : central_difference(f, a, grid.points[p], h);
    }
    deriv.push_back(std::move(v));
  }
  return modulus_from_values(deriv, k, grid, rho, s, weights);
}

ModulusReport modulus_of_continuity(const Polynomial& p, int k, const Grid& grid, double rho, double s,
                                    std::optional<std::vector<double>> weights) {
  if (k < 0) throw std::invalid_argument("modulus_of_continuity: negative order");
  if (p.dim() != grid.dim) throw DimensionError("modulus_of_continuity: grid dimension");
  std::vector<std::vector<double>> deriv;
  for (const auto& a : orders_of_degree(grid.dim, k)) {
    const Polynomial dp = p.derivative(a);
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = dp.eval(grid.points[i]);
    deriv.push_back(std::move(v));
  }
  return modulus_from_values(deriv, k, grid, rho, s, weights);
}

ApproxResult poly_approx(const Grid& grid, std::span<const double> values, int d) {
  if (d < 0) throw std::invalid_argument("poly_approx: negative degree");
  if (values.size() != grid.size()) throw DimensionError("poly_approx: one value per grid point");
  const auto basis = monomials_up_to(grid.dim, d);
  const auto rows = static_cast<Eigen::Index>(grid.size());
  const auto cols = static_cast<Eigen::Index>(basis.size());
  if (rows < cols) throw std::runtime_error("poly_approx: grid too coarse for degree " + std::to_string(d));
  Eigen::MatrixXd v(rows, cols);
  Eigen::VectorXd f(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& x = grid.points[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < cols; ++j) {
      double t = 1.0;
      const auto& a = basis[static_cast<std::size_t>(j)];
      for (int k = 0; k < grid.dim; ++k) t *= std::pow(x[static_cast<std::size_t>(k)], a[k]);
      v(i, j) = t;
    }
    f(i) = values[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(v);
  if (qr.rank() < cols) {
    throw std::runtime_error("poly_approx: rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                             std::to_string(cols) + ")");
  }
  const Eigen::VectorXd c = qr.solve(f);
  Polynomial::TermMap terms;
  for (Eigen::Index j = 0; j < cols; ++j) terms[basis[static_cast<std::size_t>(j)]] = c(j);
  ApproxResult out{Polynomial(grid.dim, std::move(terms))};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = std::abs(values[i] - out.p.eval(grid.points[i]));
    out.sup_residual = std::max(out.sup_residual, r);
    out.l1_residual += grid.weights[i] * r;
  }
  return out;
}

ShiftResult one_sided_shift(const Grid& grid, std::span<const double> values, const Polynomial& p_d) {
  if (values.size() != grid.size()) throw DimensionError("one_sided_shift: one value per grid point");
  if (p_d.dim() != grid.dim) throw DimensionError("one_sided_shift: grid dimension");
  double worst = 0.0;
  std::vector<double> pv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    pv[i] = p_d.eval(grid.points[i]);
    worst = std::max(worst, values[i] - pv[i]);
  }
  ShiftResult out;
  out.shift = worst + 1e-9;
  out.p = p_d + out.shift;
  for (std::size_t i = 0; i < grid.size(); ++i) out.l1_excess += grid.weights[i] * (pv[i] + out.shift - values[i]);
  return out;
}

double ocp_perturbation_shift(double c1, int d, double f_norm, double beta, double eta) {
  if (d < 1) throw std::invalid_argument("ocp_perturbation: d must be >= 1");
  if (!(eta > 0.0)) throw std::invalid_argument("ocp_perturbation: eta must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("ocp_perturbation: beta must be positive");
  return c1 / d * (1.0 + f_norm / beta) + eta;
}

Polynomial ocp_perturbation(const Polynomial& v_d, double c1, int d, double f_norm, double beta, double eta) {
  return v_d - ocp_perturbation_shift(c1, d, f_norm, beta, eta);
}

std::vector<JacksonRow> jackson_ratio_report(const Callable& f, int k, int d_min, int d_max, const Grid& grid) {
  if (k > f.smoothness) {
    throw std::invalid_argument("jackson_ratio_report: f is not C^" + std::to_string(k));
  }
  if (d_min < 1 || d_max < d_min) throw std::invalid_argument("jackson_ratio_report: bad degree range");
  std::vector<double> values(grid.size());
  double fmax = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = f(grid.points[i]);
    fmax = std::max(fmax, std::abs(values[i]));
  }
  std::vector<JacksonRow> rows;
  for (int d = d_min; d <= d_max; ++d) {
    const auto fit = poly_approx(grid, values, d);
    JacksonRow r;
    r.degree = d;
    r.sup_residual = fit.sup_residual;
    r.l1_residual = fit.l1_residual;
    r.modulus = modulus_of_continuity(f, k, grid, 1.0 / d).sup;
    if (r.sup_residual <= 1e-12 * (1.0 + fmax)) {
      r.ratio = 0.0;
    } else {
      const double denom = std::pow(static_cast<double>(d), -k) * r.modulus;
      r.ratio = denom > 0.0 ? r.sup_residual / denom : std::numeric_limits<double>::infinity();
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace momsos
