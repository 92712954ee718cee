#ifndef MOMSOS_PROBLEMS_HPP_
#define MOMSOS_PROBLEMS_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "momsos/gmp.hpp"
#include "momsos/moments.hpp"
#include "momsos/poly.hpp"
#include "momsos/semialg.hpp"

namespace momsos {

/// Optimal control data. States y come first, controls u after: f and g are
/// polynomials in (y, u), h_Y in y only and h_U in u only.
struct OcpSpec {
  std::vector<Polynomial> f;
  Polynomial g;
  double beta = 1.0;
  SemialgebraicSet state_set;
  SemialgebraicSet control_set;
  std::optional<MomentFunctional> mu0;
  /// The caller vouches for V* in C^{1,1} and the convexity condition; the
  /// tool cannot check either.
  bool assumptions_asserted = false;

  int state_dim() const { return state_set.dim; }
  int control_dim() const { return control_set.dim; }
  void validate() const;
};

/// Exit-location data for dX = f0 dt + F dB on X = S(h).
struct ExitSpec {
  std::vector<Polynomial> f0;
  PolyMatrix F;
  PolyMatrix a;  // F F', filled by with_diffusion()
  Polynomial g;
  SemialgebraicSet set;
  /// Boundary description; empty ineqs means (h, -h) built from set.ineqs.
  SemialgebraicSet boundary;
  std::vector<double> x0;

  /// Sets F and a = F F'.
  void with_diffusion(PolyMatrix diffusion);
  void validate() const;
};

/// Box constraints (1 - x_i^2)_i.
SemialgebraicSet unit_box(int dim);

/// maximize w  s.t.  f - w in Q_l(h). S should already be normalized.
GmpDualModel build_pop(const Polynomial& f, const SemialgebraicSet& s);

/// minimize <lambda_box, w>  s.t.  w - 1 in Q_l(h_X), w in Q_l(box).
/// X is normalized with R = sqrt(m) and must lie inside [-1,1]^m.
GmpDualModel build_volume_standard(const SemialgebraicSet& x);

/// Standard volume model with Stokes constraints: unknowns (w, u_1..u_m),
/// constraints w - div u - 1 on X, -u . grad h on S(h_boundary), w on the box.
/// Requires a single defining polynomial; boundary defaults to (h, -h).
GmpDualModel build_volume_stokes(const SemialgebraicSet& x,
                                 std::optional<SemialgebraicSet> boundary = std::nullopt);

/// maximize <mu0, V>  s.t.  g - beta V - f . grad_y V in Q_l(h_Y, h_U).
/// deg V = 2l - max(0, deg f - 1).
GmpDualModel build_ocp(const OcpSpec& spec);

/// maximize v(x0)  s.t.  -L v in Q_l(h), g - v in Q_l(h_boundary).
/// deg v = 2l - max(0, deg f0 - 1, deg a - 2).
GmpDualModel build_exit(const ExitSpec& spec);

struct OcpOracleOptions {
  int grid_points = 401;
  double dt = 0.005;
  int controls = 41;
  int max_sweeps = 200000;
  double sweep_tol = 1e-13;
};

/// Semi-Lagrangian value iteration for 1-D state / 1-D control problems.
class OcpOracle {
 public:
  OcpOracle(std::vector<double> grid, std::vector<double> values, int sweeps)
      : grid_(std::move(grid)), values_(std::move(values)), sweeps_(sweeps) {}

  /// Cubic Lagrange interpolation of the grid values; throws outside Y.
  double value(double y) const;
  /// <mu0, V*> for Dirac or Lebesgue (box/ball) mu0.
  double expectation(const MomentFunctional& mu0) const;

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  int sweeps() const { return sweeps_; }

 private:
  std::vector<double> grid_;
  std::vector<double> values_;
  int sweeps_;
};

/// V(y) = min_u [ int_0^dt e^{-beta t} g dt + e^{-beta dt} V(y + dt f) ] on a
/// grid over Y, with trapezoid cost, Heun state steps and cubic interpolation.
/// Transitions leaving Y are inadmissible. Throws std::runtime_error when the
/// sweeps do not converge or no control keeps a grid point in Y.
OcpOracle oracle_ocp_1d(const OcpSpec& spec, const OcpOracleOptions& opts = {});

/// v*(x0) for -a v'' + f0 v' = 0 on the interval of S(h) holding x0, v = g at
/// its endpoints. Uses v = g(l) + (g(r) - g(l)) Phi(x) / Phi(r) with
/// Phi' = exp(int f0 / a). Throws when a <= 0 on the interval.
double oracle_exit_1d(const ExitSpec& spec);

struct VolumeEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Seeded Monte-Carlo estimate of the Lebesgue volume of S inside [-1,1]^m.
VolumeEstimate volume_reference(const SemialgebraicSet& s, std::size_t n_samples, std::uint64_t seed = 1);

}  // namespace momsos

#endif  // MOMSOS_PROBLEMS_HPP_
