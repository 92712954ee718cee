#ifndef MOMSOS_GMP_HPP_
#define MOMSOS_GMP_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "momsos/conic.hpp"
#include "momsos/moments.hpp"
#include "momsos/poly.hpp"
#include "momsos/semialg.hpp"
#include "momsos/sos.hpp"

namespace momsos {

/// Raised when an unknown's degree rule cannot fit a constraint at a level.
class DegreeRuleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// d_l = per_level * l + offset.
struct DegreeRule {
  int per_level = 2;
  int offset = 0;
  int degree(int level) const { return per_level * level + offset; }
};

struct Unknown {
  std::string name;
  int dim = 1;
  DegreeRule rule;
  /// Objective functional T_j; absent means the unknown has zero cost.
  std::optional<MomentFunctional> objective;
};

/// coef * d^order applied to the embedded unknown.
struct DiffTerm {
  Polynomial coef;
  MultiIndex order;
};

/// Contribution of one unknown to A'_i w: sum_t coef_t * d^order_t (w o embed).
/// The unknown's variable k becomes variable var_map[k] of the constraint set.
struct OperatorBlock {
  int unknown = 0;
  std::vector<int> var_map;
  std::vector<DiffTerm> terms;

  Polynomial apply(const Polynomial& w, int target_dim) const;
};

/// A'_i w - g_i in C(X_i)_+.
struct GmpConstraint {
  std::string name;
  SemialgebraicSet set;
  std::vector<OperatorBlock> ops;
  Polynomial offset;

  /// A'_i w (without the offset); w holds one polynomial per unknown.
  Polynomial apply(const std::vector<Polynomial>& w) const;
  /// phi_beta: image of the monomial x^beta of unknown j.
  Polynomial phi(int unknown, const MultiIndex& beta) const;
};

enum class Orientation { minimize, maximize };

const char* to_string(Orientation o);

struct GmpDualModel {
  std::string name;
  std::vector<Unknown> unknowns;
  std::vector<GmpConstraint> constraints;
  Orientation orientation = Orientation::minimize;

  void validate() const;
  /// sum_j <T_j, w_j> in the model's own orientation.
  double objective(const std::vector<Polynomial>& w) const;
};

/// Conic program of the level-l SoS tightening plus the bookkeeping needed to
/// read a solution back.
struct Tightening {
  int level = 0;
  ConicProgram program;
  std::vector<int> first_free;                      // per unknown
  std::vector<std::vector<MultiIndex>> unknown_basis;  // per unknown
  std::vector<MembershipEncoding> encodings;         // per constraint
  double sign = 1.0;  // +1 minimize, -1 maximize
};

/// Free variables are the coefficients of each unknown up to d_l; every
/// constraint becomes an encode_membership block in Q_l(h_i). The conic
/// objective is sign * sum_j <T_j, w_j>. Throws DegreeRuleError.
Tightening build_tightening(const GmpDualModel& model, int level);

struct HierarchyResult {
  int level = 0;
  /// Value in the model's orientation. +inf (minimize) / -inf (maximize) for
  /// an infeasible level, the opposite infinity when unbounded, NaN on failure.
  double value = 0.0;
  ConicStatus status = ConicStatus::numerical_failure;
  std::vector<Polynomial> solution;
  /// Z_l per constraint, a table on monomials of degree <= 2l.
  std::vector<MomentFunctional> pseudo_moments;
  double gap = 0.0;      // relative duality gap
  double gap_abs = 0.0;  // primal - dual objective of the conic program
  double time_ms = 0.0;
  std::string message;
  std::vector<std::string> notes;

  bool solved() const { return status == ConicStatus::optimal; }
};

HierarchyResult solve_level(const GmpDualModel& model, int level, const SolverOptions& opts = {});

/// Moment matrix [Z(z_a + z_b)] over monomials of degree <= order.
Eigen::MatrixXd moment_matrix(const MomentFunctional& z, int order);

struct MonotonicityViolation {
  int from_level = 0;
  int to_level = 0;
  double excess = 0.0;
};

struct HierarchyRun {
  std::vector<HierarchyResult> results;
  std::vector<MonotonicityViolation> violations;
  bool monotone() const { return violations.empty(); }
};

/// Solves each level in order. Values must move in the tightening direction
/// (nonincreasing for minimize, nondecreasing for maximize); moves the wrong
/// way by more than 10 tol (1 + |v|) are recorded.
HierarchyRun run_hierarchy(const GmpDualModel& model, int level_min, int level_max,
                           const SolverOptions& opts = {});

struct SlackBound {
  double rho = 0.0;
  bool certified = false;
  /// Set when the fallback sampling found the constraint violated.
  bool negative = false;
  double sampled_min = 0.0;
  int level = 0;
  std::string note;
};

struct SlackOptions {
  std::size_t samples = 20000;
  std::uint64_t seed = 1;
  int bisection_steps = 12;
};

/// Largest rho with q - rho certified in Q_level(set). The maximal rho is
/// first computed as an SDP and its certificate verified; when that fails, a
/// grid starting at rho_guess is bisected with check_membership. Without any
/// certificate the sampled minimum of q over the set is returned, uncertified.
SlackBound certified_slack(const SemialgebraicSet& set, const Polynomial& q, double rho_guess,
                           int level, const SolverOptions& opts = {}, const SlackOptions& sopts = {});

/// certified_slack of A'_i w - g_i for every constraint.
std::vector<SlackBound> slack_lower_bound(const GmpDualModel& model, const std::vector<Polynomial>& w,
                                          double rho_guess, int level_check,
                                          const SolverOptions& opts = {}, const SlackOptions& sopts = {});

struct PerturbResult {
  std::vector<Polynomial> w_hat;
  double theta = 0.0;
  std::vector<SlackBound> direction_margin;  // certified A'_i phi > 0
  std::vector<SlackBound> margin;            // certified slack of w_hat
  double objective_before = 0.0;
  double objective_after = 0.0;
  double degradation = 0.0;  // theta |sum_j <T_j, phi_j>|
};

/// w_hat = w + theta phi with theta = min(1, eps / (3 |sum_j <T_j, phi_j>|)),
/// theta = 1 when the pairing vanishes. Throws std::runtime_error when A'_i phi
/// is not certified positive on some X_i.
PerturbResult perturb_inward(const GmpDualModel& model, const std::vector<Polynomial>& w,
                             const std::vector<Polynomial>& phi, double eps, int level_check,
                             const SolverOptions& opts = {}, const SlackOptions& sopts = {});

}  // namespace momsos

#endif  // MOMSOS_GMP_HPP_
