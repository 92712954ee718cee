#include "momsos/semialg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace momsos {

namespace {

Polynomial ball_polynomial(int dim, double radius) {
  Polynomial p = Polynomial::constant(dim, radius * radius);
  for (int i = 0; i < dim; ++i) {
    const Polynomial xi = Polynomial::variable(dim, i);
    p -= xi * xi;
  }
  return p;
}

// True if p = c * q for some c > 0.
bool positive_multiple(const Polynomial& p, const Polynomial& q) {
  if (p.is_zero() || q.is_zero() || p.terms().size() != q.terms().size()) return false;
  const auto& [a0, c0] = *q.terms().begin();
  const double ratio = p.coef(a0) / c0;
  if (!(ratio > 0.0)) return false;
  for (const auto& [a, c] : q.terms()) {
    if (std::abs(p.coef(a) - ratio * c) > 1e-12 * std::max(1.0, std::abs(ratio * c))) return false;
  }
  return true;
}

double dist2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

using Point = std::vector<double>;

std::vector<Point> sample_feasible(const SemialgebraicSet& s, std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point> cloud;
  Point p(static_cast<std::size_t>(s.dim));
  for (std::size_t k = 0; k < n; ++k) {
    for (auto& v : p) v = u(rng);
    if (contains(s, p)) cloud.push_back(p);
  }
  return cloud;
}

// Largest t in [0,1] (by bisection) with from + t (to - from) in S, given
// that `from` is in S.
Point push_toward(const SemialgebraicSet& s, const Point& from, std::span<const double> to) {
  Point q(from.size());
  auto at = [&](double t) {
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = from[i] + t * (to[i] - from[i]);
    return q;
  };
  if (contains(s, at(1.0))) return q;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (contains(s, at(mid))) lo = mid; else hi = mid;
  }
  return at(lo);
}

double refine_distance(const SemialgebraicSet& s, std::span<const double> x,
                       const std::vector<Point>& cloud) {
  std::vector<std::size_t> order(cloud.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t keep = std::min<std::size_t>(5, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) { return dist2(cloud[a], x) < dist2(cloud[b], x); });

  Point best;
  double best_d2 = INFINITY;
  for (std::size_t k = 0; k < keep; ++k) {
    Point b = push_toward(s, cloud[order[k]], x);
    const double d2 = dist2(b, x);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = std::move(b);
    }
  }

  // Pattern search along coordinate directions, re-projecting toward x.
  const int m = s.dim;
  double step = std::max(1e-3, 0.25 * std::sqrt(best_d2));
  while (step > 1e-10) {
    bool improved = false;
    for (int i = 0; i < m && !improved; ++i) {
      for (double sign : {1.0, -1.0}) {
        Point q = best;
        q[static_cast<std::size_t>(i)] += sign * step;
        if (!contains(s, q)) continue;
        Point r = push_toward(s, q, x);
        const double d2 = dist2(r, x);
        if (d2 < best_d2 - 1e-16) {
          best_d2 = d2;
          best = std::move(r);
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return std::sqrt(best_d2);
}

}  // namespace

SemialgebraicSet::SemialgebraicSet(int dim_, std::vector<Polynomial> ineqs_)
    : dim(dim_), ineqs(std::move(ineqs_)), scale_factors(ineqs.size(), 1.0) {
  validate();
}

void SemialgebraicSet::validate() const {
  if (dim <= 0) throw DimensionError("SemialgebraicSet: dimension must be positive");
  if (ineqs.empty()) throw std::invalid_argument("SemialgebraicSet: need at least one inequality");
  for (const auto& h : ineqs) {
    if (h.dim() != dim) throw DimensionError("SemialgebraicSet: inequality dimension mismatch");
  }
}

SemialgebraicSet normalize(const SemialgebraicSet& s, double radius, const NormalizeOptions& opts) {
  s.validate();
  if (!(radius > 0.0)) throw std::invalid_argument("normalize: radius must be positive");
  SemialgebraicSet out = s;
  if (out.scale_factors.size() != out.ineqs.size()) out.scale_factors.assign(out.ineqs.size(), 1.0);
  out.radius = radius;

  if (!out.archimedean_augmented) {
    const Polynomial ball = ball_polynomial(s.dim, radius);
    const bool present = std::any_of(out.ineqs.begin(), out.ineqs.end(),
                                     [&](const Polynomial& h) { return positive_multiple(h, ball); });
    if (!present) {
      out.ineqs.push_back(ball);
      out.scale_factors.push_back(1.0);
    }
    out.archimedean_augmented = true;
  }

  // A coarser grid is used automatically when the requested one would exceed the cap.
  int n = opts.grid_points_per_axis;
  while (n > 2 && std::pow(static_cast<double>(n), s.dim) > static_cast<double>(opts.max_grid_points)) {
    n = (n - 1) / 2 + 1;
  }
  for (std::size_t i = 0; i < out.ineqs.size(); ++i) {
    const double norm = sup_norm_box(out.ineqs[i], n, opts.max_grid_points);
    if (norm > 0.5) {
      const double f = 0.5 / norm;
      out.ineqs[i] *= f;
      out.scale_factors[i] *= f;
    }
  }
  return out;
}

bool contains(const SemialgebraicSet& s, std::span<const double> x, double tol) {
  for (const auto& h : s.ineqs) {
    if (h.eval(x) < -tol) return false;
  }
  return true;
}

double violation_H(const SemialgebraicSet& s, std::span<const double> x) {
  double m = 0.0;
  for (const auto& h : s.ineqs) m = std::min(m, h.eval(x));
  return std::abs(m);
}

DistanceEstimate distance_D(const SemialgebraicSet& s, std::span<const double> x,
                            std::size_t n_samples, std::uint64_t seed) {
  s.validate();
  if (static_cast<int>(x.size()) != s.dim) throw DimensionError("distance_D: point dimension");
  if (contains(s, x)) return {0.0, 0, 0};
  std::mt19937_64 rng(seed);
  const auto cloud = sample_feasible(s, n_samples, rng);
  if (cloud.empty()) {
    throw std::runtime_error("distance_D: no feasible sample found; set possibly empty at this resolution");
  }
  return {refine_distance(s, x, cloud), n_samples, cloud.size()};
}

LojasiewiczEstimate estimate_lojasiewicz(const SemialgebraicSet& s, std::size_t n_samples,
                                         std::uint64_t seed) {
  s.validate();
  std::mt19937_64 rng(seed);
  const auto cloud = sample_feasible(s, n_samples, rng);
  if (cloud.empty()) {
    throw std::runtime_error("estimate_lojasiewicz: no feasible sample found; set possibly empty");
  }

  // Exterior points: rejection samples of the box complement.
  const std::size_t n_ext = std::min<std::size_t>(n_samples, 400);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> log_h, log_d, h_vals, d_vals;
  Point p(static_cast<std::size_t>(s.dim));
  for (std::size_t tries = 0; tries < 50 * n_ext && log_h.size() < n_ext; ++tries) {
    for (auto& v : p) v = u(rng);
    const double h = violation_H(s, p);
    if (h <= 1e-10) continue;
    const double d = refine_distance(s, p, cloud);
    if (d <= 1e-12) continue;
    log_h.push_back(std::log(h));
    log_d.push_back(std::log(d));
    h_vals.push_back(h);
    d_vals.push_back(d);
  }
  if (log_h.size() < 10) {
    throw std::runtime_error("estimate_lojasiewicz: fewer than 10 usable exterior samples");
  }

  // log D = a + slope log H, so D^(1/slope) ~ c H.
  const double n = static_cast<double>(log_h.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < log_h.size(); ++i) { mx += log_h[i]; my += log_d[i]; }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < log_h.size(); ++i) {
    sxx += (log_h[i] - mx) * (log_h[i] - mx);
    sxy += (log_h[i] - mx) * (log_d[i] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 1.0;
  const double intercept = my - slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < log_h.size(); ++i) {
    const double r = log_d[i] - (intercept + slope * log_h[i]);
    rss += r * r;
  }

  LojasiewiczEstimate est;
  est.fitted_slope = slope;
  est.exponent = slope > 0.0 ? std::max(1.0, 1.0 / slope) : 1.0;
  est.sample_count = log_h.size();
  est.fit_residual = std::sqrt(rss / n);
  double c = 0.0;
  for (std::size_t i = 0; i < h_vals.size(); ++i) {
    c = std::max(c, std::pow(d_vals[i], est.exponent) / h_vals[i]);
  }
  est.constant = c;
  return est;
}

}  // namespace momsos
