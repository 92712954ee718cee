#include "momsos/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace momsos {

using Eigen::MatrixXd;
using Eigen::VectorXd;

int ConicProgram::add_free(int count) {
  const int first = num_free;
  num_free += count;
  c_free.resize(static_cast<std::size_t>(num_free), 0.0);
  return first;
}

int ConicProgram::add_block(int size) {
  if (size <= 0) throw std::invalid_argument("ConicProgram::add_block: size must be positive");
  block_sizes.push_back(size);
  return static_cast<int>(block_sizes.size()) - 1;
}

int ConicProgram::add_row(LinearRow row, double rhs_value) {
  rows.push_back(std::move(row));
  rhs.push_back(rhs_value);
  return static_cast<int>(rows.size()) - 1;
}

void ConicProgram::validate() const {
  if (static_cast<int>(c_free.size()) != num_free) {
    throw std::invalid_argument("ConicProgram: c_free length differs from num_free");
  }
  if (rows.size() != rhs.size()) throw std::invalid_argument("ConicProgram: rows/rhs length mismatch");
  auto check_entry = [&](const BlockEntry& e) {
    if (e.block < 0 || e.block >= static_cast<int>(block_sizes.size())) {
      throw std::invalid_argument("ConicProgram: entry references an undeclared block");
    }
    const int n = block_sizes[static_cast<std::size_t>(e.block)];
    if (e.row < 0 || e.col < 0 || e.row >= n || e.col >= n) {
      throw std::invalid_argument("ConicProgram: entry outside its block");
    }
  };
  for (const auto& e : c_psd) check_entry(e);
  for (const auto& r : rows) {
    for (const auto& [j, v] : r.free) {
      if (j < 0 || j >= num_free) throw std::invalid_argument("ConicProgram: row references an undeclared free variable");
      (void)v;
    }
    for (const auto& e : r.psd) check_entry(e);
  }
}

const char* to_string(ConicStatus s) {
  switch (s) {
    case ConicStatus::optimal: return "optimal";
    case ConicStatus::infeasible: return "infeasible";
    case ConicStatus::unbounded: return "unbounded";
    case ConicStatus::max_iters: return "max_iters";
    case ConicStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

struct Entry {
  int r, c;
  double v;
};

struct RowBlock {
  int row;
  std::vector<Entry> entries;
};

double min_eig(const MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

void add_sym(MatrixXd& z, const Entry& e, double scale) {
  if (e.r == e.c) {
    z(e.r, e.r) += scale * e.v;
  } else {
    z(e.r, e.c) += 0.5 * scale * e.v;
    z(e.c, e.r) += 0.5 * scale * e.v;
  }
}

double inner(const std::vector<Entry>& entries, const MatrixXd& x) {
  double s = 0.0;
  for (const auto& e : entries) s += e.v * x(e.r, e.c);
  return s;
}

// Canonical upper-triangular entry list with duplicates merged.
std::vector<Entry> canonical(const std::vector<BlockEntry>& in, int block) {
  std::map<std::pair<int, int>, double> acc;
  for (const auto& e : in) {
    if (e.block != block) continue;
    const int r = std::min(e.row, e.col), c = std::max(e.row, e.col);
    acc[{r, c}] += e.value;
  }
  std::vector<Entry> out;
  for (const auto& [rc, v] : acc) {
    if (v != 0.0) out.push_back({rc.first, rc.second, v});
  }
  return out;
}

// Preprocessed and scaled problem data.
struct Model {
  int m = 0;
  int nf = 0;
  std::vector<int> n;
  std::vector<std::vector<RowBlock>> a;  // per block
  MatrixXd bf;                           // m x nf
  VectorXd b, cf;
  std::vector<MatrixXd> c;

  std::vector<int> row_map;   // model row -> original row
  std::vector<int> free_map;  // model free column -> original free column
  VectorXd row_scale;
  double b_scale = 1.0;
  double c_scale = 1.0;

  VectorXd apply_a(const std::vector<MatrixXd>& x) const {
    VectorXd r = VectorXd::Zero(m);
    for (std::size_t j = 0; j < n.size(); ++j) {
      for (const auto& rb : a[j]) r(rb.row) += inner(rb.entries, x[j]);
    }
    return r;
  }

  MatrixXd apply_adjoint(const VectorXd& lambda, std::size_t j) const {
    MatrixXd z = MatrixXd::Zero(n[j], n[j]);
    for (const auto& rb : a[j]) {
      const double l = lambda(rb.row);
      if (l == 0.0) continue;
      for (const auto& e : rb.entries) add_sym(z, e, l);
    }
    return z;
  }
};

struct Presolved {
  Model model;
  bool decided = false;
  ConicStatus status = ConicStatus::optimal;
  std::string message;
};

Presolved presolve(const ConicProgram& prog) {
  Presolved out;
  Model& md = out.model;
  const int nblocks = static_cast<int>(prog.block_sizes.size());
  md.n = prog.block_sizes;
  md.a.assign(static_cast<std::size_t>(nblocks), {});

  double bnorm = 0.0;
  for (double v : prog.rhs) bnorm = std::max(bnorm, std::abs(v));

  // Rows: merge duplicates, drop empty ones.
  struct CleanRow {
    std::map<int, double> free;
    std::vector<std::vector<Entry>> blocks;
    double rhs;
    int orig;
  };
  std::vector<CleanRow> rows;
  for (int k = 0; k < prog.num_rows(); ++k) {
    const auto& row = prog.rows[static_cast<std::size_t>(k)];
    CleanRow cr;
    cr.rhs = prog.rhs[static_cast<std::size_t>(k)];
    cr.orig = k;
    for (const auto& [j, v] : row.free) cr.free[j] += v;
    std::erase_if(cr.free, [](const auto& kv) { return kv.second == 0.0; });
    cr.blocks.resize(static_cast<std::size_t>(nblocks));
    bool empty = cr.free.empty();
    for (int j = 0; j < nblocks; ++j) {
      cr.blocks[static_cast<std::size_t>(j)] = canonical(row.psd, j);
      if (!cr.blocks[static_cast<std::size_t>(j)].empty()) empty = false;
    }
    if (empty) {
      if (std::abs(cr.rhs) > 1e-12 * (1.0 + bnorm)) {
        out.decided = true;
        out.status = ConicStatus::infeasible;
        std::ostringstream os;
        os << "row " << k << " reads 0 = " << cr.rhs;
        out.message = os.str();
        return out;
      }
      continue;
    }
    rows.push_back(std::move(cr));
  }
  md.m = static_cast<int>(rows.size());

  // Free columns.
  MatrixXd bfull = MatrixXd::Zero(md.m, prog.num_free);
  for (int k = 0; k < md.m; ++k) {
    for (const auto& [j, v] : rows[static_cast<std::size_t>(k)].free) bfull(k, j) = v;
  }
  VectorXd cfull(prog.num_free);
  for (int j = 0; j < prog.num_free; ++j) cfull(j) = prog.c_free[static_cast<std::size_t>(j)];
  const double cnorm = cfull.size() ? cfull.cwiseAbs().maxCoeff() : 0.0;

  std::vector<int> keep;
  if (prog.num_free > 0 && md.m > 0) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(bfull);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    const auto perm = qr.colsPermutation().indices();
    for (int i = 0; i < rank; ++i) keep.push_back(perm(i));
    std::sort(keep.begin(), keep.end());
    MatrixXd bk(md.m, static_cast<int>(keep.size()));
    VectorXd ck(static_cast<int>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
      bk.col(static_cast<int>(i)) = bfull.col(keep[i]);
      ck(static_cast<int>(i)) = cfull(keep[i]);
    }
    Eigen::ColPivHouseholderQR<MatrixXd> qk;
    if (!keep.empty()) qk.compute(bk);
    for (int j = 0; j < prog.num_free; ++j) {
      if (std::find(keep.begin(), keep.end(), j) != keep.end()) continue;
      // Column j = bk t; moving along e_j - t leaves every row unchanged.
      VectorXd t = keep.empty() ? VectorXd() : VectorXd(qk.solve(bfull.col(j)));
      const double cost = cfull(j) - (keep.empty() ? 0.0 : ck.dot(t));
      if (std::abs(cost) > 1e-9 * (1.0 + cnorm)) {
        out.decided = true;
        out.status = ConicStatus::unbounded;
        out.message = "free variable " + std::to_string(j) + " moves the objective without affecting any constraint";
        return out;
      }
    }
  } else {
    for (int j = 0; j < prog.num_free; ++j) {
      if (cfull(j) != 0.0) {
        out.decided = true;
        out.status = ConicStatus::unbounded;
        out.message = "free variable " + std::to_string(j) + " appears in no constraint but has nonzero cost";
        return out;
      }
    }
  }
  md.free_map = keep;
  md.nf = static_cast<int>(keep.size());

  // Row equilibration: unit infinity norm.
  md.row_scale = VectorXd::Ones(md.m);
  for (int k = 0; k < md.m; ++k) {
    double mx = 0.0;
    const auto& cr = rows[static_cast<std::size_t>(k)];
    for (int j : keep) mx = std::max(mx, std::abs(bfull(k, j)));
    for (const auto& bl : cr.blocks) {
      for (const auto& e : bl) mx = std::max(mx, std::abs(e.v));
    }
    if (mx > 0.0) md.row_scale(k) = 1.0 / mx;
  }

  md.b.resize(md.m);
  md.bf = MatrixXd::Zero(md.m, md.nf);
  md.row_map.resize(static_cast<std::size_t>(md.m));
  for (int k = 0; k < md.m; ++k) {
    const auto& cr = rows[static_cast<std::size_t>(k)];
    const double s = md.row_scale(k);
    md.row_map[static_cast<std::size_t>(k)] = cr.orig;
    md.b(k) = s * cr.rhs;
    for (int i = 0; i < md.nf; ++i) md.bf(k, i) = s * bfull(k, keep[static_cast<std::size_t>(i)]);
    for (int j = 0; j < nblocks; ++j) {
      const auto& bl = cr.blocks[static_cast<std::size_t>(j)];
      if (bl.empty()) continue;
      RowBlock rb{k, bl};
      for (auto& e : rb.entries) e.v *= s;
      md.a[static_cast<std::size_t>(j)].push_back(std::move(rb));
    }
  }

  md.cf.resize(md.nf);
  for (int i = 0; i < md.nf; ++i) md.cf(i) = cfull(keep[static_cast<std::size_t>(i)]);
  md.c.resize(static_cast<std::size_t>(nblocks));
  for (int j = 0; j < nblocks; ++j) {
    md.c[static_cast<std::size_t>(j)] = MatrixXd::Zero(md.n[static_cast<std::size_t>(j)], md.n[static_cast<std::size_t>(j)]);
    for (const auto& e : canonical(prog.c_psd, j)) add_sym(md.c[static_cast<std::size_t>(j)], e, 1.0);
  }

  // Objective and right-hand side scaling.
  md.b_scale = std::max(1.0, md.b.size() ? md.b.cwiseAbs().maxCoeff() : 0.0);
  double cmax = md.cf.size() ? md.cf.cwiseAbs().maxCoeff() : 0.0;
  for (const auto& cj : md.c) cmax = std::max(cmax, cj.cwiseAbs().maxCoeff());
  md.c_scale = std::max(1.0, cmax);
  md.b /= md.b_scale;
  md.cf /= md.c_scale;
  for (auto& cj : md.c) cj /= md.c_scale;
  return out;
}

// Nesterov-Todd scaling of one block: W = G G', G^-1 X G^-T = G' S G = diag(d).
struct NtScaling {
  MatrixXd g, ginv, w;
  VectorXd d;
};

bool nt_scaling(const MatrixXd& x, const MatrixXd& s, NtScaling& out) {
  Eigen::LLT<MatrixXd> lx(x), ls(s);
  if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) return false;
  const MatrixXd l = lx.matrixL();
  const MatrixXd r = ls.matrixL();
  Eigen::JacobiSVD<MatrixXd> svd(r.transpose() * l, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.d = svd.singularValues();
  if (out.d.minCoeff() <= 0.0) return false;
  const VectorXd isq = out.d.cwiseSqrt().cwiseInverse();
  out.g = l * svd.matrixV() * isq.asDiagonal();
  // G^-1 = diag(sqrt d) V' L^-1
  const MatrixXd linv = lx.matrixL().solve(MatrixXd::Identity(x.rows(), x.cols()));
  out.ginv = out.d.cwiseSqrt().asDiagonal() * svd.matrixV().transpose() * linv;
  out.w = out.g * out.g.transpose();
  return true;
}

// Largest step alpha with x + alpha dx PSD (x positive definite).
double max_step(const MatrixXd& x, const MatrixXd& dx) {
  Eigen::LLT<MatrixXd> lx(x);
  if (lx.info() != Eigen::Success) return 0.0;
  MatrixXd z = lx.matrixL().solve(dx);
  z = lx.matrixL().solve(z.transpose()).transpose();
  const double lmin = min_eig(0.5 * (z + z.transpose()));
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

class Solver {
 public:
  Solver(const ConicProgram& prog, const Model& md, const SolverOptions& opts);

  ConicSolution run();

 private:
  struct Direction {
    std::vector<MatrixXd> dx, ds;
    VectorXd dl, dy;
  };

  bool factorize();
  // Solves [M B; B' 0] (dl, dy) = (f, g) with M = J'J.
  void solve_kkt(const VectorXd& f, const VectorXd& g, VectorXd& dl, VectorXd& dy) const;
  Direction solve_newton(const std::vector<MatrixXd>& rc);
  ConicSolution unscale(ConicStatus status) const;

  const ConicProgram& prog_;
  const Model& md_;
  const SolverOptions& opts_;

  std::vector<MatrixXd> x_, s_;
  VectorXd lambda_, y_;
  VectorXd rp_, rf_;
  std::vector<MatrixXd> rd_;
  std::vector<NtScaling> nt_;

  // M = J'J where column k of J stacks svec(G' A_k G) over blocks. Working
  // with J instead of M keeps the conditioning at sqrt(cond M).
  MatrixXd j_;
  MatrixXd null_;     // basis of ker B' (identity when there are no free columns)
  MatrixXd range_;    // Q1 of B = Q1 Rb
  MatrixXd rb_;
  Eigen::HouseholderQR<MatrixXd> kqr_;
  int k_ = 0;
  int iterations_ = 0;
};

Solver::Solver(const ConicProgram& prog, const Model& md, const SolverOptions& opts)
    : prog_(prog), md_(md), opts_(opts) {
  const int m = md_.m, nf = md_.nf;
  if (nf == 0) {
    null_ = MatrixXd::Identity(m, m);
    return;
  }
  Eigen::HouseholderQR<MatrixXd> qr(md_.bf);
  const MatrixXd q = qr.householderQ() * MatrixXd::Identity(m, m);
  range_ = q.leftCols(nf);
  null_ = q.rightCols(m - nf);
  rb_ = qr.matrixQR().topRows(nf).triangularView<Eigen::Upper>();
}

bool Solver::factorize() {
  const int m = md_.m;
  int rows = 0;
  for (int nj : md_.n) rows += nj * (nj + 1) / 2;
  j_ = MatrixXd::Zero(rows, m);
  const double r2 = std::sqrt(2.0);
  int off = 0;
  for (std::size_t b = 0; b < md_.n.size(); ++b) {
    const MatrixXd& g = nt_[b].g;
    const int n = md_.n[b];
    for (const auto& rb : md_.a[b]) {
      MatrixXd h = MatrixXd::Zero(n, n);
      for (const auto& e : rb.entries) {
        const double v = e.r == e.c ? e.v : 0.5 * e.v;
        h.noalias() += v * g.row(e.r).transpose() * g.row(e.c);
        if (e.r != e.c) h.noalias() += v * g.row(e.c).transpose() * g.row(e.r);
      }
      int idx = off;
      for (int c = 0; c < n; ++c) {
        j_(idx++, rb.row) = h(c, c);
        for (int r = c + 1; r < n; ++r) j_(idx++, rb.row) = r2 * 0.5 * (h(r, c) + h(c, r));
      }
    }
    off += n * (n + 1) / 2;
  }
  if (!j_.allFinite()) return false;
  const MatrixXd k = j_ * null_;
  k_ = static_cast<int>(k.cols());
  // R'R = K'K + reg I: the Cholesky factor of the regularized reduced Schur matrix.
  const double reg = opts_.diagonal_regularization;
  MatrixXd stacked(k.rows() + k_, k_);
  stacked << k, std::sqrt(reg) * MatrixXd::Identity(k_, k_);
  kqr_.compute(stacked);
  return true;
}

void Solver::solve_kkt(const VectorXd& f, const VectorXd& g, VectorXd& dl, VectorXd& dy) const {
  const int nf = md_.nf;
  VectorXd xp = VectorXd::Zero(md_.m);
  if (nf > 0) {
    const VectorXd t = rb_.transpose().triangularView<Eigen::Lower>().solve(g);
    xp = range_ * t;
  }
  VectorXd z = VectorXd::Zero(k_);
  if (k_ > 0) {
    const VectorXd rhs = null_.transpose() * (f - j_.transpose() * (j_ * xp));
    const auto r = kqr_.matrixQR().topRows(k_).triangularView<Eigen::Upper>();
    z = r.transpose().solve(rhs);
    z = r.solve(z);
  }
  dl = xp + null_ * z;
  dy = VectorXd::Zero(nf);
  if (nf > 0) {
    const VectorXd res = f - j_.transpose() * (j_ * dl);
    dy = rb_.triangularView<Eigen::Upper>().solve(range_.transpose() * res);
  }
}

Solver::Direction Solver::solve_newton(const std::vector<MatrixXd>& rc) {
  const std::size_t nb = md_.n.size();
  const int m = md_.m, nf = md_.nf;
  // h = rp - A(Rc - W Rd W)
  std::vector<MatrixXd> t(nb);
  for (std::size_t j = 0; j < nb; ++j) t[j] = rc[j] - nt_[j].w * rd_[j] * nt_[j].w;
  const VectorXd h = rp_ - md_.apply_a(t);

  Direction d;
  d.dl = VectorXd::Zero(m);
  d.dy = VectorXd::Zero(nf);
  d.ds.resize(nb);
  d.dx.resize(nb);
  auto recover = [&] {
    for (std::size_t j = 0; j < nb; ++j) {
      d.ds[j] = rd_[j] - md_.apply_adjoint(d.dl, j);
      const MatrixXd dx = rc[j] - nt_[j].w * d.ds[j] * nt_[j].w;
      d.dx[j] = 0.5 * (dx + dx.transpose());
    }
  };
  auto correct = [&](const VectorXd& r1, const VectorXd& r2) {
    VectorXd a, b;
    solve_kkt(r1, r2, a, b);
    d.dl += a;
    d.dy += b;
  };
  correct(h, rf_);
  {
    const VectorXd r1 = h - j_.transpose() * (j_ * d.dl) - md_.bf * d.dy;
    const VectorXd r2 = rf_ - md_.bf.transpose() * d.dl;
    correct(r1, r2);
  }
  recover();
  // One more pass against the linearized equations themselves, kept only if
  // it shrinks their residual.
  auto lin_res = [&] {
    const VectorXd r1 = rp_ - md_.apply_a(d.dx) - md_.bf * d.dy;
    const VectorXd r2 = rf_ - md_.bf.transpose() * d.dl;
    return std::pair{r1, r2};
  };
  for (int it = 0; it < 2; ++it) {
    const auto [r1, r2] = lin_res();
    const double before = std::hypot(r1.norm(), r2.norm());
    if (before == 0.0) break;
    const Direction keep = d;
    correct(r1, r2);
    recover();
    const auto [s1, s2] = lin_res();
    if (std::hypot(s1.norm(), s2.norm()) >= before) {
      d = keep;
      break;
    }
  }
  return d;
}

ConicSolution Solver::unscale(ConicStatus status) const {
  ConicSolution sol;
  sol.status = status;
  sol.iterations = iterations_;
  sol.free_values.assign(static_cast<std::size_t>(prog_.num_free), 0.0);
  for (int i = 0; i < md_.nf; ++i) {
    sol.free_values[static_cast<std::size_t>(md_.free_map[static_cast<std::size_t>(i)])] = y_(i) * md_.b_scale;
  }
  sol.blocks.resize(md_.n.size());
  sol.dual_slacks.resize(md_.n.size());
  for (std::size_t j = 0; j < md_.n.size(); ++j) {
    sol.blocks[j] = x_[j] * md_.b_scale;
    sol.dual_slacks[j] = s_[j] * md_.c_scale;
  }
  sol.duals.assign(static_cast<std::size_t>(prog_.num_rows()), 0.0);
  for (int k = 0; k < md_.m; ++k) {
    sol.duals[static_cast<std::size_t>(md_.row_map[static_cast<std::size_t>(k)])] =
        lambda_(k) * md_.row_scale(k) * md_.c_scale;
  }
  sol.residuals = residuals(prog_, sol);
  sol.objective = sol.residuals.primal_objective;
  return sol;
}

ConicSolution Solver::run() {
  const std::size_t nb = md_.n.size();
  const int m = md_.m, nf = md_.nf;
  int ntotal = 0;
  for (int nj : md_.n) ntotal += nj;

  // Initial point.
  double amax = 0.0, ratio = 0.0;
  std::vector<double> row_norm(static_cast<std::size_t>(m), 0.0);
  for (std::size_t j = 0; j < nb; ++j) {
    for (const auto& rb : md_.a[j]) {
      for (const auto& e : rb.entries) {
        row_norm[static_cast<std::size_t>(rb.row)] += e.v * e.v * (e.r == e.c ? 1.0 : 0.5);
      }
    }
  }
  for (int k = 0; k < m; ++k) {
    const double nk = std::sqrt(row_norm[static_cast<std::size_t>(k)]);
    amax = std::max(amax, nk);
    ratio = std::max(ratio, (1.0 + std::abs(md_.b(k))) / (1.0 + nk));
  }
  double cnorm = md_.cf.norm();
  for (const auto& cj : md_.c) cnorm = std::max(cnorm, cj.norm());

  x_.resize(nb);
  s_.resize(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    const double nj = md_.n[j];
    const double xi = std::max({10.0, std::sqrt(nj), nj * ratio});
    const double eta = std::max({10.0, std::sqrt(nj), amax, cnorm});
    x_[j] = xi * MatrixXd::Identity(md_.n[j], md_.n[j]);
    s_[j] = eta * MatrixXd::Identity(md_.n[j], md_.n[j]);
  }
  lambda_ = VectorXd::Zero(m);
  y_ = VectorXd::Zero(nf);
  nt_.resize(nb);
  rd_.resize(nb);

  const double bnorm = md_.b.norm();
  double cfro = md_.cf.squaredNorm();
  for (const auto& cj : md_.c) cfro += cj.squaredNorm();
  cfro = std::sqrt(cfro);

  double internal_tol = opts_.tol;
  int stall = 0;

  for (iterations_ = 0; iterations_ < opts_.max_iters; ++iterations_) {
    // Residuals.
    rp_ = md_.b - md_.apply_a(x_) - md_.bf * y_;
    rf_ = md_.cf - md_.bf.transpose() * lambda_;
    double rd_sq = rf_.squaredNorm();
    double pobj = md_.cf.dot(y_), dobj = md_.b.dot(lambda_), xs = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      rd_[j] = md_.c[j] - md_.apply_adjoint(lambda_, j) - s_[j];
      rd_sq += rd_[j].squaredNorm();
      pobj += (md_.c[j].array() * x_[j].array()).sum();
      xs += (x_[j].array() * s_[j].array()).sum();
    }
    const double pinf = rp_.norm() / (1.0 + bnorm);
    const double dinf = std::sqrt(rd_sq) / (1.0 + cfro);
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double mu = ntotal > 0 ? xs / ntotal : 0.0;

    if (!std::isfinite(pobj) || !std::isfinite(dobj) || !std::isfinite(mu)) {
      ConicSolution sol = unscale(ConicStatus::numerical_failure);
      sol.message = "iterates became non-finite";
      return sol;
    }
    if (opts_.verbose) {
      std::fprintf(stderr, "%3d pobj=% .10e dobj=% .10e pinf=%.2e dinf=%.2e gap=%.2e mu=%.2e\n",
                   iterations_, pobj, dobj, pinf, dinf, gap, mu);
    }

    // Scaled and original residuals can disagree by the row scaling, so the
    // original ones are checked once the scaled ones are close.
    const double worst = std::max({pinf, dinf, gap});
    if (worst <= 100.0 * opts_.tol) {
      ConicSolution sol = unscale(ConicStatus::optimal);
      const auto& r = sol.residuals;
      if (opts_.verbose) {
        std::fprintf(stderr, "    original pinf=%.2e dinf=%.2e gap=%.2e\n", r.primal_infeasibility,
                     r.dual_infeasibility, r.gap);
      }
      if (r.primal_infeasibility <= opts_.tol && r.dual_infeasibility <= opts_.tol && r.gap <= opts_.tol) {
        return sol;
      }
    }
    if (worst <= internal_tol) {
      internal_tol *= 0.1;
      if (internal_tol < 1e-15) {
        ConicSolution sol = unscale(ConicStatus::numerical_failure);
        sol.message = "could not reach the requested accuracy in the original scaling";
        return sol;
      }
    }

    // Primal infeasibility ray: b'l > 0, B'l = 0, -A*(l) PSD.
    const double bl = md_.b.dot(lambda_);
    if (bl > 0.0 && m > 0) {
      const VectorXd dl = lambda_ / bl;
      double viol = nf > 0 ? (md_.bf.transpose() * dl).cwiseAbs().maxCoeff() : 0.0;
      for (std::size_t j = 0; j < nb; ++j) viol = std::max(viol, -min_eig(-md_.apply_adjoint(dl, j)));
      if (viol <= opts_.infeasibility_threshold) {
        ConicSolution sol = unscale(ConicStatus::infeasible);
        sol.message = "primal infeasibility certificate found";
        return sol;
      }
    }
    // Dual infeasibility ray: <C,X> + cf'y < 0 with A(X) + B y ~ 0.
    double hom = md_.cf.dot(y_);
    for (std::size_t j = 0; j < nb; ++j) hom += (md_.c[j].array() * x_[j].array()).sum();
    if (hom < 0.0) {
      std::vector<MatrixXd> xh(nb);
      for (std::size_t j = 0; j < nb; ++j) xh[j] = x_[j] / -hom;
      const VectorXd r = md_.apply_a(xh) + md_.bf * (y_ / -hom);
      const double viol = m > 0 ? r.cwiseAbs().maxCoeff() : 0.0;
      if (viol <= opts_.infeasibility_threshold) {
        ConicSolution sol = unscale(ConicStatus::unbounded);
        sol.message = "dual infeasibility certificate found";
        return sol;
      }
    }

    for (std::size_t j = 0; j < nb; ++j) {
      if (!nt_scaling(x_[j], s_[j], nt_[j])) {
        ConicSolution sol = unscale(ConicStatus::numerical_failure);
        sol.message = "scaling point lost definiteness in block " + std::to_string(j);
        return sol;
      }
    }
    if (!factorize()) {
      ConicSolution sol = unscale(ConicStatus::numerical_failure);
      sol.message = "Newton system factorization failed";
      return sol;
    }

    // Predictor.
    std::vector<MatrixXd> rc(nb);
    for (std::size_t j = 0; j < nb; ++j) rc[j] = -x_[j];
    Direction aff = solve_newton(rc);
    double ap = 1.0, ad = 1.0;
    for (std::size_t j = 0; j < nb; ++j) {
      ap = std::min(ap, max_step(x_[j], aff.dx[j]));
      ad = std::min(ad, max_step(s_[j], aff.ds[j]));
    }
    double xs_aff = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      xs_aff += ((x_[j] + ap * aff.dx[j]).array() * (s_[j] + ad * aff.ds[j]).array()).sum();
    }
    const double mu_aff = ntotal > 0 ? xs_aff / ntotal : 0.0;
    double sigma = mu > 0.0 ? std::pow(std::max(0.0, mu_aff) / mu, 3.0) : 0.0;
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector in the scaled space.
    for (std::size_t j = 0; j < nb; ++j) {
      const NtScaling& sc = nt_[j];
      const MatrixXd dxt = sc.ginv * aff.dx[j] * sc.ginv.transpose();
      const MatrixXd dst = sc.g.transpose() * aff.ds[j] * sc.g;
      MatrixXd k = -(dxt * dst + dst * dxt);
      k.diagonal().array() += 2.0 * sigma * mu;
      k.diagonal().array() -= 2.0 * sc.d.array().square();
      const int nj = static_cast<int>(sc.d.size());
      for (int a = 0; a < nj; ++a) {
        for (int b = 0; b < nj; ++b) k(a, b) /= sc.d(a) + sc.d(b);
      }
      rc[j] = sc.g * k * sc.g.transpose();
      rc[j] = 0.5 * (rc[j] + rc[j].transpose());
    }
    Direction dir = solve_newton(rc);
    ap = 1.0;
    ad = 1.0;
    for (std::size_t j = 0; j < nb; ++j) {
      ap = std::min(ap, 0.98 * max_step(x_[j], dir.dx[j]));
      ad = std::min(ad, 0.98 * max_step(s_[j], dir.ds[j]));
    }
    if (nb == 0) ap = ad = 1.0;

    for (std::size_t j = 0; j < nb; ++j) {
      x_[j] += ap * dir.dx[j];
      s_[j] += ad * dir.ds[j];
      x_[j] = 0.5 * (x_[j] + x_[j].transpose());
      s_[j] = 0.5 * (s_[j] + s_[j].transpose());
    }
    y_ += ap * dir.dy;
    lambda_ += ad * dir.dl;

    stall = (ap < 1e-10 && ad < 1e-10) ? stall + 1 : 0;
    if (stall >= 3) {
      ConicSolution sol = unscale(ConicStatus::numerical_failure);
      sol.message = "step length collapsed";
      return sol;
    }
  }
  ConicSolution sol = unscale(ConicStatus::max_iters);
  sol.message = "iteration limit reached";
  return sol;
}

}  // namespace

ConicSolution solve(const ConicProgram& prog, const SolverOptions& opts) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("conic::solve: tol must be positive");
  prog.validate();
  Presolved pre = presolve(prog);
  if (pre.decided) {
    ConicSolution sol;
    sol.status = pre.status;
    sol.message = pre.message;
    sol.free_values.assign(static_cast<std::size_t>(prog.num_free), 0.0);
    for (int nj : prog.block_sizes) {
      sol.blocks.push_back(MatrixXd::Zero(nj, nj));
      sol.dual_slacks.push_back(MatrixXd::Zero(nj, nj));
    }
    sol.duals.assign(static_cast<std::size_t>(prog.num_rows()), 0.0);
    sol.residuals = residuals(prog, sol);
    sol.objective = sol.residuals.primal_objective;
    return sol;
  }
  Solver solver(prog, pre.model, opts);
  return solver.run();
}

ResidualMetrics residuals(const ConicProgram& prog, const ConicSolution& sol) {
  ResidualMetrics r;
  const std::size_t nb = prog.block_sizes.size();
  auto block = [&](const std::vector<MatrixXd>& v, std::size_t j) -> MatrixXd {
    if (j < v.size()) return v[j];
    const int n = prog.block_sizes[j];
    return MatrixXd::Zero(n, n);
  };
  auto free_val = [&](int j) {
    return static_cast<std::size_t>(j) < sol.free_values.size() ? sol.free_values[static_cast<std::size_t>(j)] : 0.0;
  };
  auto dual_val = [&](std::size_t k) { return k < sol.duals.size() ? sol.duals[k] : 0.0; };

  std::vector<MatrixXd> xs(nb), cmat(nb), adj(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    xs[j] = block(sol.blocks, j);
    cmat[j] = MatrixXd::Zero(prog.block_sizes[j], prog.block_sizes[j]);
    adj[j] = MatrixXd::Zero(prog.block_sizes[j], prog.block_sizes[j]);
  }
  for (const auto& e : prog.c_psd) {
    add_sym(cmat[static_cast<std::size_t>(e.block)], {std::min(e.row, e.col), std::max(e.row, e.col), e.value}, 1.0);
  }

  double pres_sq = 0.0, bnorm_sq = 0.0;
  VectorXd bt_l = VectorXd::Zero(prog.num_free);
  double dobj = 0.0;
  for (std::size_t k = 0; k < prog.rows.size(); ++k) {
    const auto& row = prog.rows[k];
    double v = 0.0;
    const double l = dual_val(k);
    for (const auto& [j, c] : row.free) {
      v += c * free_val(j);
      bt_l(j) += c * l;
    }
    for (const auto& e : row.psd) {
      v += e.value * xs[static_cast<std::size_t>(e.block)](e.row, e.col);
      add_sym(adj[static_cast<std::size_t>(e.block)], {std::min(e.row, e.col), std::max(e.row, e.col), e.value}, l);
    }
    const double res = v - prog.rhs[k];
    pres_sq += res * res;
    bnorm_sq += prog.rhs[k] * prog.rhs[k];
    dobj += prog.rhs[k] * l;
  }
  double x_psd_viol = 0.0, s_psd_viol = 0.0, cnorm_sq = 0.0, pobj = 0.0;
  for (std::size_t j = 0; j < nb; ++j) {
    x_psd_viol += std::max(0.0, -min_eig(0.5 * (xs[j] + xs[j].transpose())));
    s_psd_viol += std::max(0.0, -min_eig(cmat[j] - adj[j]));
    cnorm_sq += cmat[j].squaredNorm();
    pobj += (cmat[j].array() * xs[j].array()).sum();
  }
  double free_res_sq = 0.0;
  for (int j = 0; j < prog.num_free; ++j) {
    const double c = prog.c_free[static_cast<std::size_t>(j)];
    pobj += c * free_val(j);
    cnorm_sq += c * c;
    free_res_sq += (c - bt_l(j)) * (c - bt_l(j));
  }
  r.primal_infeasibility = (std::sqrt(pres_sq) + x_psd_viol) / (1.0 + std::sqrt(bnorm_sq));
  r.dual_infeasibility = (std::sqrt(free_res_sq) + s_psd_viol) / (1.0 + std::sqrt(cnorm_sq));
  r.primal_objective = pobj;
  r.dual_objective = dobj;
  r.gap_abs = pobj - dobj;
  r.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
  return r;
}

void dump(const ConicProgram& prog, std::ostream& os) {
  os.precision(17);
  os << "free " << prog.num_free << "\n";
  os << "blocks " << prog.block_sizes.size();
  for (int n : prog.block_sizes) os << " " << n;
  os << "\nrows " << prog.rows.size() << "\n";
  os << "# objective: f <var> <coef> | b <block> <row> <col> <coef>\n";
  for (int j = 0; j < prog.num_free; ++j) {
    if (prog.c_free[static_cast<std::size_t>(j)] != 0.0) os << "obj f " << j << " " << prog.c_free[static_cast<std::size_t>(j)] << "\n";
  }
  for (const auto& e : prog.c_psd) os << "obj b " << e.block << " " << e.row << " " << e.col << " " << e.value << "\n";
  os << "# equalities: eq <row> f <var> <coef> | eq <row> b <block> <row> <col> <coef> | rhs <row> <value>\n";
  for (std::size_t k = 0; k < prog.rows.size(); ++k) {
    for (const auto& [j, c] : prog.rows[k].free) os << "eq " << k << " f " << j << " " << c << "\n";
    for (const auto& e : prog.rows[k].psd) {
      os << "eq " << k << " b " << e.block << " " << e.row << " " << e.col << " " << e.value << "\n";
    }
    os << "rhs " << k << " " << prog.rhs[k] << "\n";
  }
}

}  // namespace momsos
