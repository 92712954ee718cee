#ifndef MOMSOS_POLY_HPP_
#define MOMSOS_POLY_HPP_

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace momsos {

/// Thrown when two objects living in different ambient dimensions meet.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exponent vector of a monomial x^alpha.
///
/// Ordering is graded lexicographic: lower total degree first, and within a
/// degree x1 precedes x2 precedes ... (so the basis reads 1, x1, x2, x1^2,
/// x1 x2, x2^2, ...). Every basis vector layout in the library follows it.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(int dim) : exps_(static_cast<std::size_t>(dim), 0) {}
  explicit MultiIndex(std::vector<int> exps);
  MultiIndex(std::initializer_list<int> exps);

  int dim() const { return static_cast<int>(exps_.size()); }
  int degree() const { return degree_; }
  int operator[](int i) const { return exps_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& exps() const { return exps_; }

  MultiIndex operator+(const MultiIndex& other) const;
  /// Componentwise difference; the caller guarantees divisibility.
  MultiIndex operator-(const MultiIndex& other) const;
  bool divides(const MultiIndex& other) const;
  MultiIndex with(int var, int exponent) const;

  bool operator==(const MultiIndex& other) const { return exps_ == other.exps_; }
  std::strong_ordering operator<=>(const MultiIndex& other) const;

  std::string str() const;

 private:
  std::vector<int> exps_;
  int degree_ = 0;
};

/// All multi-indices of the given dimension with total degree <= max_degree,
/// in graded lexicographic order.
std::vector<MultiIndex> monomials_up_to(int dim, int max_degree);

/// Number of monomials of degree <= d in `dim` variables, C(dim + d, dim).
std::size_t monomial_count(int dim, int max_degree);

/// Sparse multivariate real polynomial.
///
/// Coefficients whose magnitude falls below kPruneThreshold after an
/// arithmetic operation are dropped, so the zero polynomial has no terms.
class Polynomial {
 public:
  static constexpr double kPruneThreshold = 1e-14;
  using TermMap = std::map<MultiIndex, double>;

  explicit Polynomial(int dim = 1);
  Polynomial(int dim, TermMap terms);

  static Polynomial constant(int dim, double c);
  static Polynomial variable(int dim, int var);
  static Polynomial monomial(const MultiIndex& alpha, double coef = 1.0);

  int dim() const { return dim_; }
  /// Highest stored total degree; 0 for the zero polynomial.
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  const TermMap& terms() const { return terms_; }
  double coef(const MultiIndex& alpha) const;
  /// Largest coefficient magnitude.
  double max_abs_coef() const;

  double eval(std::span<const double> x) const;
  double operator()(std::span<const double> x) const { return eval(x); }
  double operator()(std::initializer_list<double> x) const;

  Polynomial operator-() const;
  Polynomial& operator+=(const Polynomial& q);
  Polynomial& operator-=(const Polynomial& q);
  Polynomial& operator*=(double s);

  Polynomial pow(int k) const;
  Polynomial derivative(int var) const;
  /// Partial derivative of multi-order `order`.
  Polynomial derivative(const MultiIndex& order) const;

  /// Re-express in `new_dim` variables; variable i of *this becomes variable
  /// var_map[i] of the result.
  Polynomial embed(int new_dim, std::span<const int> var_map) const;

  /// Substitute x -> scale * x (componentwise by the same factor).
  Polynomial scale_variables(double scale) const;

  std::string str() const;

 private:
  void prune();

  int dim_;
  TermMap terms_;
};

Polynomial operator+(Polynomial p, const Polynomial& q);
Polynomial operator-(Polynomial p, const Polynomial& q);
Polynomial operator*(const Polynomial& p, const Polynomial& q);
Polynomial operator*(double s, Polynomial p);
Polynomial operator*(Polynomial p, double s);
Polynomial operator+(Polynomial p, double c);
Polynomial operator+(double c, Polynomial p);
Polynomial operator-(Polynomial p, double c);
Polynomial operator-(double c, const Polynomial& p);

/// Coefficientwise comparison with absolute tolerance.
bool approx_equal(const Polynomial& p, const Polynomial& q, double tol = 1e-12);

std::vector<Polynomial> grad(const Polynomial& p);
Polynomial div(std::span<const Polynomial> v);
Polynomial dot(std::span<const Polynomial> a, std::span<const Polynomial> b);

using PolyMatrix = std::vector<std::vector<Polynomial>>;

/// L v = -sum_ij a_ij d^2 v / dx_i dx_j + sum_i f0_i d v / dx_i.
Polynomial apply_generator(const Polynomial& v, std::span<const Polynomial> f0,
                           const PolyMatrix& a);

/// Chebyshev polynomial of the first kind via the three-term recurrence.
double cheb_eval(int k, double s);

/// 1 + deg^2/4 * (2/b)^(deg+1): bounds the sup norm on [-1,1]^m of a
/// polynomial nonnegative on a set containing [-b,b]^m by its sup on that set.
double norm_equiv_factor(int deg, double b);

/// max |p| over a uniform tensor grid of [-1,1]^m. This is a lower estimate
/// of the true sup norm.
double sup_norm_box(const Polynomial& p, int grid_points_per_axis,
                    std::size_t max_points = 1'000'000);

}  // namespace momsos

#endif  // MOMSOS_POLY_HPP_
