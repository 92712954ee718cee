#ifndef MOMSOS_CONIC_HPP_
#define MOMSOS_CONIC_HPP_

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace momsos {

/// Coefficient `value` multiplying entry (row, col), row <= col, of PSD block
/// `block`. An off-diagonal entry stands for the symmetric pair, so the
/// inner product with X contributes value * X(row, col).
struct BlockEntry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

struct LinearRow {
  std::vector<std::pair<int, double>> free;  // (free variable index, coefficient)
  std::vector<BlockEntry> psd;
};

/// minimize  c_free' y + sum_j <C_j, X_j>
/// s.t.      row_k(y, X) = rhs_k,  X_j PSD,  y free.
struct ConicProgram {
  int num_free = 0;
  std::vector<int> block_sizes;
  std::vector<double> c_free;
  std::vector<BlockEntry> c_psd;
  std::vector<LinearRow> rows;
  std::vector<double> rhs;

  int add_free(int count = 1);
  int add_block(int size);
  int add_row(LinearRow row, double rhs_value);
  int num_rows() const { return static_cast<int>(rows.size()); }

  /// Throws std::invalid_argument on out-of-range references.
  void validate() const;
};

enum class ConicStatus { optimal, infeasible, unbounded, max_iters, numerical_failure };
const char* to_string(ConicStatus s);

struct ResidualMetrics {
  double primal_infeasibility = 0.0;  // relative, includes PSD violation of X
  double dual_infeasibility = 0.0;    // relative, S recomputed as C - A*(lambda)
  double gap = 0.0;                   // |pobj - dobj| / (1 + |pobj| + |dobj|)
  double gap_abs = 0.0;               // pobj - dobj
  double primal_objective = 0.0;
  double dual_objective = 0.0;
};

struct ConicSolution {
  ConicStatus status = ConicStatus::numerical_failure;
  std::vector<double> free_values;
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<double> duals;  // one per equality row
  std::vector<Eigen::MatrixXd> dual_slacks;
  double objective = 0.0;
  ResidualMetrics residuals;
  int iterations = 0;
  std::string message;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iters = 200;
  /// Normalized violation accepted for a primal or dual infeasibility ray.
  double infeasibility_threshold = 1e-10;
  double diagonal_regularization = 1e-12;
  bool verbose = false;
};

/// Primal-dual path-following interior point method with Nesterov-Todd
/// scaling and Mehrotra predictor-corrector steps. Free variables are handled
/// through an augmented Schur system; dependent free columns with zero cost
/// are fixed at zero in presolve.
ConicSolution solve(const ConicProgram& prog, const SolverOptions& opts = {});

/// Recomputes all residuals of (free_values, blocks, duals) from scratch.
ResidualMetrics residuals(const ConicProgram& prog, const ConicSolution& sol);

/// Plain-text dump: block sizes, objective, and triplet-form equalities.
void dump(const ConicProgram& prog, std::ostream& os);

}  // namespace momsos

#endif  // MOMSOS_CONIC_HPP_
