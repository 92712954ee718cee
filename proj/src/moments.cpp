#include "momsos/moments.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace momsos {

double box_moment(const MultiIndex& alpha) {
  double r = 1.0;
  for (int i = 0; i < alpha.dim(); ++i) {
    if (alpha[i] % 2 != 0) return 0.0;
    r *= 2.0 / (alpha[i] + 1);
  }
  return r;
}

double ball_moment(const MultiIndex& alpha) {
  const int m = alpha.dim();
  double log_num = 0.0;
  for (int i = 0; i < m; ++i) {
    if (alpha[i] % 2 != 0) return 0.0;
    log_num += std::lgamma(0.5 * (alpha[i] + 1));
  }
  return std::exp(log_num - std::lgamma(0.5 * (m + alpha.degree()) + 1.0));
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(n - 1 - i);
    x[a] = -z;
    x[b] = z;
    w[a] = w[b] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

MomentFunctional MomentFunctional::box(int dim) {
  if (dim <= 0) throw DimensionError("MomentFunctional::box: dimension must be positive");
  return MomentFunctional(Kind::box, dim);
}

MomentFunctional MomentFunctional::ball(int dim) {
  if (dim <= 0) throw DimensionError("MomentFunctional::ball: dimension must be positive");
  return MomentFunctional(Kind::ball, dim);
}

MomentFunctional MomentFunctional::dirac(std::vector<double> point) {
  if (point.empty()) throw DimensionError("MomentFunctional::dirac: empty point");
  MomentFunctional t(Kind::dirac, static_cast<int>(point.size()));
  t.point_ = std::move(point);
  return t;
}

MomentFunctional MomentFunctional::table(int dim, int max_degree,
                                         std::map<MultiIndex, double> entries) {
  if (dim <= 0) throw DimensionError("MomentFunctional::table: dimension must be positive");
  for (const auto& [a, v] : entries) {
    if (a.dim() != dim) throw DimensionError("MomentFunctional::table: entry dimension");
    (void)v;
  }
  MomentFunctional t(Kind::table, dim);
  t.max_degree_ = max_degree;
  t.entries_ = std::move(entries);
  return t;
}

MomentFunctional MomentFunctional::lebesgue_on_box(std::vector<double> lo, std::vector<double> hi,
                                                   int max_degree) {
  if (lo.size() != hi.size() || lo.empty()) {
    throw DimensionError("lebesgue_on_box: bound vectors must have equal positive length");
  }
  const int m = static_cast<int>(lo.size());
  std::map<MultiIndex, double> entries;
  for (const auto& a : monomials_up_to(m, max_degree)) {
    double v = 1.0;
    for (int i = 0; i < m; ++i) {
      const auto k = static_cast<std::size_t>(i);
      v *= (std::pow(hi[k], a[i] + 1) - std::pow(lo[k], a[i] + 1)) / (a[i] + 1);
    }
    entries.emplace(a, v);
  }
  return table(m, max_degree, std::move(entries));
}

double MomentFunctional::moment(const MultiIndex& alpha) const {
  if (alpha.dim() != dim_) throw DimensionError("MomentFunctional::moment: dimension mismatch");
  switch (kind_) {
    case Kind::box:
      return box_moment(alpha);
    case Kind::ball:
      return ball_moment(alpha);
    case Kind::dirac:
      return Polynomial::monomial(alpha).eval(point_);
    case Kind::table: {
      auto it = entries_.find(alpha);
      if (it == entries_.end()) {
        if (max_degree_ >= 0 && alpha.degree() <= max_degree_) return 0.0;
        throw std::out_of_range("MomentFunctional: table does not cover " + alpha.str());
      }
      return it->second;
    }
  }
  return 0.0;
}

double pair(const MomentFunctional& t, const Polynomial& p) {
  if (t.dim() != p.dim()) throw DimensionError("pair: functional and polynomial dimensions differ");
  if (t.kind() == MomentFunctional::Kind::dirac) return p.eval(t.point());
  double s = 0.0;
  for (const auto& [a, c] : p.terms()) s += c * t.moment(a);
  return s;
}

const char* to_string(MomentFunctional::Kind kind) {
  switch (kind) {
    case MomentFunctional::Kind::box: return "box";
    case MomentFunctional::Kind::ball: return "ball";
    case MomentFunctional::Kind::dirac: return "dirac";
    case MomentFunctional::Kind::table: return "table";
  }
  return "unknown";
}

}  // namespace momsos
