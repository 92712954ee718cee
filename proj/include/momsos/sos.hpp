#ifndef MOMSOS_SOS_HPP_
#define MOMSOS_SOS_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "momsos/conic.hpp"
#include "momsos/poly.hpp"
#include "momsos/semialg.hpp"

namespace momsos {

/// Truncated quadratic module Q_l(h): sigma_0 + sum_i sigma_i h_i with
/// deg(sigma_i h_i) <= 2l.
struct QuadraticModuleSpec {
  SemialgebraicSet set;
  int level = 1;

  struct Generator {
    int index = -1;  // -1 for the constant generator, else position in set.ineqs
    Polynomial poly;
    int basis_degree = 0;
  };

  /// Constant generator first, then each h_i whose basis degree
  /// l - ceil(deg h_i / 2) is nonnegative.
  std::vector<Generator> active_generators() const;
  /// Indices of generators excluded at this level.
  std::vector<int> dropped_generators() const;
};

/// p(w) = constant + sum_k w_k * terms[k].second, w_k being free variable
/// terms[k].first of the surrounding conic program.
struct AffineFamily {
  Polynomial constant;
  std::vector<std::pair<int, Polynomial>> terms;

  AffineFamily() = default;
  explicit AffineFamily(Polynomial p) : constant(std::move(p)) {}
  int degree() const;
};

/// Rows and blocks appended by encode_membership.
struct MembershipEncoding {
  std::vector<QuadraticModuleSpec::Generator> generators;
  std::vector<int> blocks;                   // one PSD block per generator
  std::vector<std::vector<MultiIndex>> bases;  // Gram basis per generator
  std::vector<MultiIndex> monomials;          // row k <-> monomials[k]
  int first_row = 0;
  std::vector<std::string> notes;
};

/// Appends one equality per monomial |alpha| <= 2l:
///   sum_k coef(p_k, alpha) w_k - sum_j <G_j, B_j^alpha> = -coef(p_0, alpha).
/// With this sign the equality multipliers are pseudo-moments whose localizing
/// matrices are PSD. Throws std::invalid_argument when deg p > 2l.
MembershipEncoding encode_membership(ConicProgram& prog, const AffineFamily& p,
                                     const QuadraticModuleSpec& spec);

struct SosCertificate {
  int level = 0;
  std::vector<int> generator_indices;  // -1 for the constant generator
  std::vector<Polynomial> generators;
  std::vector<std::vector<MultiIndex>> bases;
  std::vector<Eigen::MatrixXd> grams;
  Polynomial target;
  double residual = 0.0;

  /// sum_j (z_j' G_j z_j) g_j
  Polynomial reconstruct() const;
};

struct VerificationReport {
  bool ok = false;
  double residual = 0.0;
  double min_eigenvalue = 0.0;
  std::string reason;
};

/// Symbolic reconstruction plus eigenvalue check, independent of the solver.
/// Throws std::invalid_argument if block and basis shapes disagree.
VerificationReport verify_certificate(const SosCertificate& cert, const Polynomial& p,
                                      double eig_tol = 1e-8, double coef_tol = 1e-6);

struct MembershipResult {
  enum class Outcome { certified, infeasible, rejected, solver_failure };
  Outcome outcome = Outcome::solver_failure;
  std::optional<SosCertificate> certificate;
  VerificationReport verification;
  ConicStatus solver_status = ConicStatus::numerical_failure;
  std::string message;

  bool certified() const { return outcome == Outcome::certified; }
};

const char* to_string(MembershipResult::Outcome o);

/// Solves the feasibility program (minimizing the trace of the constant
/// generator's Gram block) and verifies any certificate it returns.
MembershipResult check_membership(const Polynomial& p, const SemialgebraicSet& set, int level,
                                  const SolverOptions& opts = {});

/// True iff R^2 - x'x is certified in Q_l(h).
bool check_archimedean(const SemialgebraicSet& set, double radius, int level,
                       const SolverOptions& opts = {});

}  // namespace momsos

#endif  // MOMSOS_SOS_HPP_
