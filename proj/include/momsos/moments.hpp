#ifndef MOMSOS_MOMENTS_HPP_
#define MOMSOS_MOMENTS_HPP_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "momsos/poly.hpp"

namespace momsos {

/// Lebesgue moment of x^alpha over [-1,1]^m.
double box_moment(const MultiIndex& alpha);

/// Lebesgue moment of x^alpha over the unit ball of R^m (m = alpha.dim()):
/// prod Gamma((a_i+1)/2) / Gamma((m+|a|)/2 + 1), zero if any a_i is odd.
double ball_moment(const MultiIndex& alpha);

/// Gauss-Legendre nodes and weights on [-1,1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

/// Linear functional on polynomials given by its values on monomials.
class MomentFunctional {
 public:
  enum class Kind { box, ball, dirac, table };

  static MomentFunctional box(int dim);
  static MomentFunctional ball(int dim);
  static MomentFunctional dirac(std::vector<double> point);
  static MomentFunctional table(int dim, int max_degree, std::map<MultiIndex, double> entries);

  /// Lebesgue measure restricted to the axis-aligned box prod [lo_i, hi_i],
  /// tabulated exactly up to max_degree.
  static MomentFunctional lebesgue_on_box(std::vector<double> lo, std::vector<double> hi,
                                          int max_degree);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  int max_degree() const { return max_degree_; }
  const std::vector<double>& point() const { return point_; }
  const std::map<MultiIndex, double>& entries() const { return entries_; }

  std::string label;

  /// Value on the monomial x^alpha. Throws std::out_of_range for a table miss.
  double moment(const MultiIndex& alpha) const;

 private:
  MomentFunctional(Kind kind, int dim) : kind_(kind), dim_(dim) {}

  Kind kind_;
  int dim_;
  int max_degree_ = -1;  // -1: unbounded
  std::vector<double> point_;
  std::map<MultiIndex, double> entries_;
};

/// <T, p> = sum_alpha c_alpha T(x^alpha); Dirac kinds evaluate p.
double pair(const MomentFunctional& t, const Polynomial& p);

const char* to_string(MomentFunctional::Kind kind);

}  // namespace momsos

#endif  // MOMSOS_MOMENTS_HPP_
