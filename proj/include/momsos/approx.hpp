#ifndef MOMSOS_APPROX_HPP_
#define MOMSOS_APPROX_HPP_

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "momsos/poly.hpp"

namespace momsos {

/// Tensor grid on prod [lo, hi] with product quadrature weights.
struct Grid {
  int dim = 1;
  std::vector<double> axis;                 // nodes per axis, increasing
  std::vector<std::vector<double>> points;  // row-major over the tensor
  std::vector<double> weights;              // trapezoid rule on the axis nodes

  std::size_t size() const { return points.size(); }

  static Grid uniform(int dim, int n_per_axis, double lo = -1.0, double hi = 1.0);
  /// Chebyshev-Lobatto nodes cos(pi k / (n-1)) mapped to [lo, hi].
  static Grid chebyshev(int dim, int n_per_axis, double lo = -1.0, double hi = 1.0);
};

/// A function known only through evaluations. `smoothness` is the number of
/// continuous derivatives the caller vouches for.
struct Callable {
  std::function<double(std::span<const double>)> f;
  int dim = 1;
  int smoothness = 0;

  double operator()(std::span<const double> x) const { return f(x); }
};

Callable as_callable(const Polynomial& p);

struct ModulusReport {
  int order = 0;
  double rho = 0.0;
  std::vector<double> pointwise;  // omega(y, rho) at each grid point
  double sup = 0.0;               // L-infinity modulus
  double s = 1.0;
  double averaged = 0.0;          // (sum_i w_i omega_i^s)^(1/s)
};

/// omega_{f,k}(y, rho) = max_{|a|=k} sup_{|y-y'|<=rho} |d^a f(y) - d^a f(y')|
/// over grid points. Callables are differentiated by central differences and
/// need k <= smoothness; polynomials use exact derivatives. `weights`
/// overrides the grid quadrature weights for the L^s average.
ModulusReport modulus_of_continuity(const Callable& f, int k, const Grid& grid, double rho, double s = 1.0,
                                    std::optional<std::vector<double>> weights = std::nullopt);
ModulusReport modulus_of_continuity(const Polynomial& p, int k, const Grid& grid, double rho, double s = 1.0,
                                    std::optional<std::vector<double>> weights = std::nullopt);

struct ApproxResult {
  Polynomial p;
  double sup_residual = 0.0;
  double l1_residual = 0.0;  // grid quadrature of |f - p|
};

/// Degree-d least squares in the graded-lex monomial basis (column-pivoted
/// QR). Throws std::runtime_error when the grid cannot determine all
/// coefficients.
ApproxResult poly_approx(const Grid& grid, std::span<const double> values, int d);

struct ShiftResult {
  Polynomial p;
  double shift = 0.0;      // constant added to p_d
  double l1_excess = 0.0;  // grid quadrature of p - f
};

/// p_d + max(0, max_grid(f - p_d)) + 1e-9, which is >= f on every grid point.
ShiftResult one_sided_shift(const Grid& grid, std::span<const double> values, const Polynomial& p_d);

/// (c1/d)(1 + f_norm/beta) + eta.
double ocp_perturbation_shift(double c1, int d, double f_norm, double beta, double eta);
/// V_d minus ocp_perturbation_shift.
Polynomial ocp_perturbation(const Polynomial& v_d, double c1, int d, double f_norm, double beta, double eta);

struct JacksonRow {
  int degree = 0;
  double sup_residual = 0.0;
  double l1_residual = 0.0;
  double modulus = 0.0;  // omega_{f,k}(1/d) in the sup norm
  double ratio = 0.0;    // sup_residual / (d^-k omega)
};

/// Least-squares fits of degree d_min..d_max with the Jackson-type ratio.
/// Residuals below 1e-12 (1 + max|f|) count as exact and give ratio 0.
/// Throws std::invalid_argument when k exceeds f.smoothness.
std::vector<JacksonRow> jackson_ratio_report(const Callable& f, int k, int d_min, int d_max, const Grid& grid);

}  // namespace momsos

#endif  // MOMSOS_APPROX_HPP_
