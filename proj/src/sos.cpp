#include "momsos/sos.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace momsos {

std::vector<QuadraticModuleSpec::Generator> QuadraticModuleSpec::active_generators() const {
  std::vector<Generator> out;
  out.push_back({-1, Polynomial::constant(set.dim, 1.0), level});
  for (std::size_t i = 0; i < set.ineqs.size(); ++i) {
    const int d = level - (set.ineqs[i].degree() + 1) / 2;
    if (d >= 0) out.push_back({static_cast<int>(i), set.ineqs[i], d});
  }
  return out;
}

std::vector<int> QuadraticModuleSpec::dropped_generators() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < set.ineqs.size(); ++i) {
    if (level - (set.ineqs[i].degree() + 1) / 2 < 0) out.push_back(static_cast<int>(i));
  }
  return out;
}

int AffineFamily::degree() const {
  int d = constant.degree();
  for (const auto& [k, p] : terms) d = std::max(d, p.degree());
  return d;
}

MembershipEncoding encode_membership(ConicProgram& prog, const AffineFamily& p,
                                     const QuadraticModuleSpec& spec) {
  spec.set.validate();
  if (spec.level < 0) throw std::invalid_argument("encode_membership: negative level");
  const int m = spec.set.dim;
  const int top = 2 * spec.level;
  if (p.constant.dim() != m) throw DimensionError("encode_membership: polynomial dimension differs from set");
  for (const auto& [k, q] : p.terms) {
    if (q.dim() != m) throw DimensionError("encode_membership: polynomial dimension differs from set");
    if (k < 0 || k >= prog.num_free) throw std::invalid_argument("encode_membership: undeclared free variable");
  }
  if (p.degree() > top) {
    throw std::invalid_argument("encode_membership: degree " + std::to_string(p.degree()) +
                                " exceeds 2l = " + std::to_string(top));
  }

  MembershipEncoding enc;
  enc.monomials = monomials_up_to(m, top);
  enc.first_row = prog.num_rows();
  std::map<MultiIndex, std::size_t> row_of;
  for (std::size_t i = 0; i < enc.monomials.size(); ++i) row_of.emplace(enc.monomials[i], i);

  std::vector<LinearRow> rows(enc.monomials.size());
  std::vector<double> rhs(enc.monomials.size(), 0.0);
  for (const auto& [a, c] : p.constant.terms()) rhs[row_of.at(a)] = -c;
  for (const auto& [k, q] : p.terms) {
    for (const auto& [a, c] : q.terms()) rows[row_of.at(a)].free.push_back({k, c});
  }

  enc.generators = spec.active_generators();
  for (int i : spec.dropped_generators()) {
    enc.notes.push_back("generator h" + std::to_string(i) + " of degree " +
                        std::to_string(spec.set.ineqs[static_cast<std::size_t>(i)].degree()) +
                        " dropped at level " + std::to_string(spec.level));
  }
  for (const auto& g : enc.generators) {
    auto basis = monomials_up_to(m, g.basis_degree);
    const int n = static_cast<int>(basis.size());
    const int blk = prog.add_block(n);
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        const MultiIndex ab = basis[static_cast<std::size_t>(a)] + basis[static_cast<std::size_t>(b)];
        const double mult = a == b ? 1.0 : 2.0;
        for (const auto& [gam, c] : g.poly.terms()) {
          rows[row_of.at(ab + gam)].psd.push_back({blk, a, b, -mult * c});
        }
      }
    }
    enc.blocks.push_back(blk);
    enc.bases.push_back(std::move(basis));
  }
  for (std::size_t i = 0; i < rows.size(); ++i) prog.add_row(std::move(rows[i]), rhs[i]);
  return enc;
}

Polynomial SosCertificate::reconstruct() const {
  const int m = target.dim();
  Polynomial out(m);
  for (std::size_t j = 0; j < grams.size(); ++j) {
    const auto& z = bases[j];
    Polynomial::TermMap acc;
    for (std::size_t a = 0; a < z.size(); ++a) {
      for (std::size_t b = 0; b < z.size(); ++b) {
        acc[z[a] + z[b]] += grams[j](static_cast<int>(a), static_cast<int>(b));
      }
    }
    out += Polynomial(m, std::move(acc)) * generators[j];
  }
  return out;
}

VerificationReport verify_certificate(const SosCertificate& cert, const Polynomial& p, double eig_tol,
                                      double coef_tol) {
  if (cert.grams.size() != cert.bases.size() || cert.grams.size() != cert.generators.size()) {
    throw std::invalid_argument("verify_certificate: block, basis and generator counts differ");
  }
  for (std::size_t j = 0; j < cert.grams.size(); ++j) {
    const auto n = static_cast<Eigen::Index>(cert.bases[j].size());
    if (cert.grams[j].rows() != n || cert.grams[j].cols() != n) {
      throw std::invalid_argument("verify_certificate: Gram block " + std::to_string(j) + " does not match its basis");
    }
    if (cert.generators[j].dim() != p.dim()) throw DimensionError("verify_certificate: generator dimension");
  }
  VerificationReport rep;
  rep.min_eigenvalue = INFINITY;
  for (const auto& g : cert.grams) {
    const Eigen::MatrixXd sym = 0.5 * (g + g.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, es.eigenvalues()(0));
  }
  Polynomial diff = cert.reconstruct();
  diff -= p;
  rep.residual = diff.max_abs_coef();
  const bool psd = rep.min_eigenvalue >= -eig_tol;
  const bool match = rep.residual <= coef_tol;
  rep.ok = psd && match;
  if (!psd) rep.reason = "not PSD";
  if (!match) rep.reason += std::string(rep.reason.empty() ? "" : "; ") + "reconstruction residual too large";
  return rep;
}

const char* to_string(MembershipResult::Outcome o) {
  switch (o) {
    case MembershipResult::Outcome::certified: return "certified";
    case MembershipResult::Outcome::infeasible: return "infeasible";
    case MembershipResult::Outcome::rejected: return "rejected";
    case MembershipResult::Outcome::solver_failure: return "solver_failure";
  }
  return "unknown";
}

MembershipResult check_membership(const Polynomial& p, const SemialgebraicSet& set, int level,
                                  const SolverOptions& opts) {
  QuadraticModuleSpec spec{set, level};
  ConicProgram prog;
  const MembershipEncoding enc = encode_membership(prog, AffineFamily(p), spec);
  const int const_block = enc.blocks.front();
  for (std::size_t a = 0; a < enc.bases.front().size(); ++a) {
    prog.c_psd.push_back({const_block, static_cast<int>(a), static_cast<int>(a), 1.0});
  }
  const ConicSolution sol = solve(prog, opts);

  MembershipResult res;
  res.solver_status = sol.status;
  const std::string ctx = "level " + std::to_string(level) + ": ";
  switch (sol.status) {
    case ConicStatus::optimal: break;
    case ConicStatus::infeasible:
      res.outcome = MembershipResult::Outcome::infeasible;
      res.message = ctx + "no certificate exists at this level";
      return res;
    default:
      res.outcome = MembershipResult::Outcome::solver_failure;
      res.message = ctx + "solver returned " + to_string(sol.status) +
                    (sol.message.empty() ? "" : " (" + sol.message + ")");
      return res;
  }

  SosCertificate cert;
  cert.level = level;
  cert.target = p;
  cert.bases = enc.bases;
  for (std::size_t j = 0; j < enc.generators.size(); ++j) {
    cert.generator_indices.push_back(enc.generators[j].index);
    cert.generators.push_back(enc.generators[j].poly);
    cert.grams.push_back(sol.blocks[static_cast<std::size_t>(enc.blocks[j])]);
  }
  res.verification = verify_certificate(cert, p);
  cert.residual = res.verification.residual;
  res.certificate = std::move(cert);
  if (res.verification.ok) {
    res.outcome = MembershipResult::Outcome::certified;
  } else {
    res.outcome = MembershipResult::Outcome::rejected;
    res.message = ctx + "solver certificate failed verification: " + res.verification.reason;
  }
  return res;
}

bool check_archimedean(const SemialgebraicSet& set, double radius, int level, const SolverOptions& opts) {
  if (!(radius > 0.0)) throw std::invalid_argument("check_archimedean: radius must be positive");
  Polynomial ball = Polynomial::constant(set.dim, radius * radius);
  for (int i = 0; i < set.dim; ++i) {
    const Polynomial xi = Polynomial::variable(set.dim, i);
    ball -= xi * xi;
  }
  return check_membership(ball, set, level, opts).certified();
}

}  // namespace momsos
