#ifndef MOMSOS_SEMIALG_HPP_
#define MOMSOS_SEMIALG_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "momsos/poly.hpp"

namespace momsos {

/// Basic semialgebraic set S(h) = { x : h_i(x) >= 0 for all i }.
struct SemialgebraicSet {
  int dim = 1;
  std::vector<Polynomial> ineqs;
  /// True once a ball constraint R^2 - x'x (suitably scaled) is among ineqs.
  bool archimedean_augmented = false;
  /// Multiplier applied to each ineq by normalize(); 1 for untouched entries.
  std::vector<double> scale_factors;
  /// Radius of the enclosing ball asserted by the caller, 0 if unknown.
  double radius = 0.0;

  SemialgebraicSet() = default;
  SemialgebraicSet(int dim, std::vector<Polynomial> ineqs);

  void validate() const;
};

struct NormalizeOptions {
  int grid_points_per_axis = 101;
  std::size_t max_grid_points = 1'000'000;
};

/// Appends the ball constraint R^2 - x'x (unless an equivalent generator is
/// already present) and rescales every generator so its grid-estimated sup
/// norm on [-1,1]^m is at most 1/2. The point set is unchanged.
SemialgebraicSet normalize(const SemialgebraicSet& s, double radius,
                           const NormalizeOptions& opts = {});

bool contains(const SemialgebraicSet& s, std::span<const double> x, double tol = 1e-12);

/// |min(h_1(x), ..., h_r(x), 0)|
double violation_H(const SemialgebraicSet& s, std::span<const double> x);

struct DistanceEstimate {
  double value = 0.0;
  std::size_t samples_used = 0;
  std::size_t feasible_samples = 0;
};

/// Upper estimate of the Euclidean distance from x to S(h), obtained from
/// rejection samples of S inside [-1,1]^m followed by a local boundary search.
/// Throws std::runtime_error if no sample lands in S.
DistanceEstimate distance_D(const SemialgebraicSet& s, std::span<const double> x,
                            std::size_t n_samples, std::uint64_t seed = 1);

struct LojasiewiczEstimate {
  double exponent = 1.0;  // >= 1
  double constant = 1.0;  // > 0
  std::size_t sample_count = 0;
  double fit_residual = 0.0;
  double fitted_slope = 1.0;
};

/// Heuristic fit of D(x)^L <= c H(x) over exterior samples of [-1,1]^m \ S.
/// Diagnostic only: the pair is conservative on the samples used but is not
/// a certified exponent.
LojasiewiczEstimate estimate_lojasiewicz(const SemialgebraicSet& s, std::size_t n_samples,
                                         std::uint64_t seed = 1);

}  // namespace momsos

#endif  // MOMSOS_SEMIALG_HPP_
