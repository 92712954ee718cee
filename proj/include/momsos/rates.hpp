#ifndef MOMSOS_RATES_HPP_
#define MOMSOS_RATES_HPP_

#include <optional>
#include <string>
#include <vector>

#include "momsos/poly.hpp"
#include "momsos/semialg.hpp"

namespace momsos {

struct RateParams {
  int m = 1;
  double loja = 1.0;           // L
  double loja_boundary = 1.0;  // L on the boundary set
  double loja_hat = 1.0;       // max of the two
  double gamma = 1.0;
  double big_gamma = 1.0;
  // Optimal control constants.
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  // Volume constants.
  double vol_C = 1.0;
  double c_G = 0.0;
  // Exit / Stokes smoothness parameter.
  double s = 0.5;

  /// Throws std::invalid_argument unless m >= 1, L >= 1, gamma >= 1.
  void validate() const;
};

/// gamma deg_p^(3.5 m L) ratio^(2.5 m L).
double putinar_degree_bound(const RateParams& p, int deg_p, double ratio);

/// max(1, Gamma m^3 2^(5L-1) r^m c^(2m) deg_h^m).
double gamma_upper_bound(double big_gamma, int m, int r, double loja, double c, int deg_h);

/// (gamma/l)^(1/(2.5 m L)) 3 ||f|| deg(f)^(7/5).
double pop_rate(const RateParams& p, double level, double f_norm, int deg_f);
/// gamma deg(f)^(3.5 m L) (3 ||f|| / eps)^(2.5 m L); requires 0 < eps <= ||f||.
double pop_level_for(const RateParams& p, double eps, double f_norm, int deg_f);

/// gamma d_f^(3.5 m L) (A/eta + B/(eta d) + 1)^(2.5 m L) (1 + C^(d_f+1) d_f^2/4)^(2.5 m L)
/// with d_f = deg_f + d.
double ocp_degree_bound(const RateParams& p, int d, double eta, int deg_f);

/// gamma (C/eps)^(3.5 m L^) (1 + 2^(m+1) c_G/eps)^(2.5 m L^), eps in (0,1).
double volume_degree_bound(const RateParams& p, double eps);

enum class RateKind { pop, ocp_generic, ocp_smooth, exit, volume_standard, volume_stokes };

RateKind parse_rate_kind(const std::string& name);
const char* to_string(RateKind k);

struct Exponent {
  bool logarithmic = false;
  double alpha = 0.0;  // gap in O(l^-alpha) when not logarithmic
  std::string formula;
};

Exponent theoretical_exponent(RateKind kind, const RateParams& p);

struct RateFit {
  double alpha = 0.0;
  double c = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Least squares on log gap = log C - alpha log l. Needs >= 3 points and
/// strictly positive gaps.
RateFit fit_rate(const std::vector<double>& levels, const std::vector<double>& gaps);

struct OcpProofConstants {
  double A = 0.0;  // ||q|| / beta
  double B = 0.0;  // 2 (beta + ||f||) c1 / beta
  double C = 0.0;  // 2 / b
  double q_norm = 0.0;
  double f_norm = 0.0;
  double b = 0.0;
  std::string label = "proof-pattern candidates";
};

/// Candidate A, B, C following the proof pattern of the OCP degree bound.
OcpProofConstants ocp_proof_constants(double q_norm, double f_norm, double beta, double c1, double b);

/// Grid-estimated max |p| over the grid points of [-1,1]^m inside S.
double sup_norm_on_set(const Polynomial& p, const SemialgebraicSet& s, int grid_points_per_axis = 101);

/// Largest b on a grid of step 1/steps such that the grid points of [-b,b]^m
/// all lie in S. 0 when no b > 0 works.
double inscribed_box_halfwidth(const SemialgebraicSet& s, int steps = 100, int points_per_axis = 21);

}  // namespace momsos

#endif  // MOMSOS_RATES_HPP_
