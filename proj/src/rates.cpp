#include "momsos/rates.hpp"

#include <cmath>
#include <stdexcept>

namespace momsos {

void RateParams::validate() const {
  if (m < 1) throw std::invalid_argument("RateParams: m must be >= 1");
  if (!(loja >= 1.0) || !(loja_boundary >= 1.0) || !(loja_hat >= 1.0)) {
    throw std::invalid_argument("RateParams: Lojasiewicz exponents must be >= 1");
  }
  if (!(gamma >= 1.0)) throw std::invalid_argument("RateParams: gamma must be >= 1");
  if (!(big_gamma > 0.0)) throw std::invalid_argument("RateParams: Gamma must be positive");
  if (!(s > 0.0)) throw std::invalid_argument("RateParams: s must be positive");
}

double putinar_degree_bound(const RateParams& p, int deg_p, double ratio) {
  p.validate();
  if (deg_p < 1) throw std::invalid_argument("putinar_degree_bound: deg_p must be >= 1");
  if (!(ratio >= 1.0)) throw std::invalid_argument("putinar_degree_bound: ratio must be >= 1");
  const double e = p.m * p.loja;
  return p.gamma * std::pow(deg_p, 3.5 * e) * std::pow(ratio, 2.5 * e);
}

double gamma_upper_bound(double big_gamma, int m, int r, double loja, double c, int deg_h) {
  if (!(big_gamma > 0.0) || m < 1 || r < 1 || !(loja >= 1.0) || !(c > 0.0) || deg_h < 1) {
    throw std::invalid_argument("gamma_upper_bound: arguments must be positive (L >= 1)");
  }
  const double v = big_gamma * std::pow(m, 3) * std::pow(2.0, 5.0 * loja - 1.0) * std::pow(r, m) *
                   std::pow(c, 2.0 * m) * std::pow(deg_h, m);
  return std::max(1.0, v);
}

double pop_rate(const RateParams& p, double level, double f_norm, int deg_f) {
  p.validate();
  if (!(level > 0.0)) throw std::invalid_argument("pop_rate: level must be positive");
  if (!(f_norm >= 0.0) || deg_f < 1) throw std::invalid_argument("pop_rate: need ||f|| >= 0 and deg f >= 1");
  return std::pow(p.gamma / level, 1.0 / (2.5 * p.m * p.loja)) * 3.0 * f_norm * std::pow(deg_f, 1.4);
}

double pop_level_for(const RateParams& p, double eps, double f_norm, int deg_f) {
  p.validate();
  if (!(eps > 0.0) || !(eps <= f_norm)) throw std::domain_error("pop_level_for: need 0 < eps <= ||f||");
  if (deg_f < 1) throw std::invalid_argument("pop_level_for: deg f must be >= 1");
  const double e = p.m * p.loja;
  return p.gamma * std::pow(deg_f, 3.5 * e) * std::pow(3.0 * f_norm / eps, 2.5 * e);
}

double ocp_degree_bound(const RateParams& p, int d, double eta, int deg_f) {
  p.validate();
  if (d < 1) throw std::invalid_argument("ocp_degree_bound: d must be >= 1");
  if (!(eta > 0.0)) throw std::invalid_argument("ocp_degree_bound: eta must be positive");
  if (deg_f < 0) throw std::invalid_argument("ocp_degree_bound: deg f must be >= 0");
  const double e = p.m * p.loja;
  const double df = deg_f + d;
  const double first = p.A / eta + p.B / (eta * d) + 1.0;
  const double second = 1.0 + std::pow(p.C, df + 1.0) * df * df / 4.0;
  return p.gamma * std::pow(df, 3.5 * e) * std::pow(first, 2.5 * e) * std::pow(second, 2.5 * e);
}

double volume_degree_bound(const RateParams& p, double eps) {
  p.validate();
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("volume_degree_bound: eps must lie in (0,1)");
  const double e = p.m * p.loja_hat;
  return p.gamma * std::pow(p.vol_C / eps, 3.5 * e) *
         std::pow(1.0 + std::pow(2.0, p.m + 1) * p.c_G / eps, 2.5 * e);
}

RateKind parse_rate_kind(const std::string& name) {
  if (name == "pop") return RateKind::pop;
  if (name == "ocp_generic") return RateKind::ocp_generic;
  if (name == "ocp_smooth") return RateKind::ocp_smooth;
  if (name == "exit") return RateKind::exit;
  if (name == "volume_standard") return RateKind::volume_standard;
  if (name == "volume_stokes") return RateKind::volume_stokes;
  throw std::invalid_argument("unknown rate kind: " + name);
}

const char* to_string(RateKind k) {
  switch (k) {
    case RateKind::pop: return "pop";
    case RateKind::ocp_generic: return "ocp_generic";
    case RateKind::ocp_smooth: return "ocp_smooth";
    case RateKind::exit: return "exit";
    case RateKind::volume_standard: return "volume_standard";
    case RateKind::volume_stokes: return "volume_stokes";
  }
  return "?";
}

Exponent theoretical_exponent(RateKind kind, const RateParams& p) {
  p.validate();
  Exponent e;
  switch (kind) {
    case RateKind::pop:
      e.alpha = 1.0 / (2.5 * p.m * p.loja);
      e.formula = "1/(2.5 m L)";
      break;
    case RateKind::ocp_generic:
      e.logarithmic = true;
      e.formula = "O(1/log l)";
      break;
    case RateKind::ocp_smooth:
      e.alpha = 1.0 / (6.0 * p.m * p.loja);
      e.formula = "1/(6 m L)";
      break;
    case RateKind::exit:
    case RateKind::volume_stokes:
      e.alpha = 1.0 / ((2.5 + p.s) * p.m * p.loja_hat);
      e.formula = "1/((2.5 + s) m L^)";
      break;
    case RateKind::volume_standard:
      e.alpha = 1.0 / (6.0 * p.m * p.loja_hat);
      e.formula = "1/(6 m L^)";
      break;
  }
  return e;
}

RateFit fit_rate(const std::vector<double>& levels, const std::vector<double>& gaps) {
  if (levels.size() != gaps.size()) throw std::invalid_argument("fit_rate: levels and gaps differ in length");
  if (levels.size() < 3) throw std::invalid_argument("fit_rate: need at least 3 points");
  const auto n = static_cast<double>(levels.size());
  double sx = 0.0, sy = 0.0;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0)) throw std::invalid_argument("fit_rate: levels must be positive");
    if (!(gaps[i] > 0.0)) throw std::invalid_argument("fit_rate: gaps must be positive");
    lx.push_back(std::log(levels[i]));
    ly.push_back(std::log(gaps[i]));
    sx += lx.back();
    sy += ly.back();
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_rate: levels must not all coincide");
  const double slope = sxy / sxx;
  RateFit fit;
  fit.alpha = -slope;
  fit.c = std::exp(my - slope * mx);
  fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  fit.points = lx.size();
  return fit;
}

OcpProofConstants ocp_proof_constants(double q_norm, double f_norm, double beta, double c1, double b) {
  if (!(beta > 0.0)) throw std::invalid_argument("ocp_proof_constants: beta must be positive");
  if (!(b > 0.0 && b <= 1.0)) throw std::invalid_argument("ocp_proof_constants: b must lie in (0,1]");
  OcpProofConstants k;
  k.q_norm = q_norm;
  k.f_norm = f_norm;
  k.b = b;
  k.A = q_norm / beta;
  k.B = 2.0 * (beta + f_norm) * c1 / beta;
  k.C = 2.0 / b;
  return k;
}

namespace {

// Calls fn on every point of the uniform tensor grid of [-w,w]^m.
template <class Fn>
void for_grid(int m, int n, double w, Fn&& fn) {
  std::vector<int> idx(static_cast<std::size_t>(m), 0);
  std::vector<double> x(static_cast<std::size_t>(m));
  while (true) {
    for (int d = 0; d < m; ++d) x[static_cast<std::size_t>(d)] = -w + 2.0 * w * idx[static_cast<std::size_t>(d)] / (n - 1);
    if (!fn(x)) return;
    int d = m - 1;
    for (; d >= 0; --d) {
      if (++idx[static_cast<std::size_t>(d)] < n) break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
    if (d < 0) return;
  }
}

}  // namespace

double sup_norm_on_set(const Polynomial& p, const SemialgebraicSet& s, int grid_points_per_axis) {
  if (p.dim() != s.dim) throw DimensionError("sup_norm_on_set: dimension mismatch");
  if (grid_points_per_axis < 2) throw std::invalid_argument("sup_norm_on_set: need >= 2 points per axis");
  if (std::pow(grid_points_per_axis, s.dim) > 1e7) throw std::invalid_argument("sup_norm_on_set: grid too large");
  double best = 0.0;
  for_grid(s.dim, grid_points_per_axis, 1.0, [&](const std::vector<double>& x) {
    if (contains(s, x)) best = std::max(best, std::abs(p.eval(x)));
    return true;
  });
  return best;
}

double inscribed_box_halfwidth(const SemialgebraicSet& s, int steps, int points_per_axis) {
  if (steps < 1 || points_per_axis < 2) throw std::invalid_argument("inscribed_box_halfwidth: bad resolution");
  if (std::pow(points_per_axis, s.dim) > 1e6) throw std::invalid_argument("inscribed_box_halfwidth: grid too large");
  double best = 0.0;
  for (int k = 1; k <= steps; ++k) {
    const double b = static_cast<double>(k) / steps;
    bool inside = true;
    for_grid(s.dim, points_per_axis, b, [&](const std::vector<double>& x) {
      inside = contains(s, x);
      return inside;
    });
    if (!inside) break;
    best = b;
  }
  return best;
}

}  // namespace momsos
