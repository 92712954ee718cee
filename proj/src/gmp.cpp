#include "momsos/gmp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace momsos {

Polynomial OperatorBlock::apply(const Polynomial& w, int target_dim) const {
  const Polynomial e = w.embed(target_dim, var_map);
  Polynomial out(target_dim);
  for (const auto& t : terms) {
    if (t.coef.dim() != target_dim || t.order.dim() != target_dim) {
      throw DimensionError("OperatorBlock: term dimension differs from the constraint set");
    }
    out += t.coef * e.derivative(t.order);
  }
  return out;
}

Polynomial GmpConstraint::apply(const std::vector<Polynomial>& w) const {
  Polynomial out(set.dim);
  for (const auto& op : ops) out += op.apply(w.at(static_cast<std::size_t>(op.unknown)), set.dim);
  return out;
}

Polynomial GmpConstraint::phi(int unknown, const MultiIndex& beta) const {
  Polynomial out(set.dim);
  const Polynomial mono = Polynomial::monomial(beta);
  for (const auto& op : ops) {
    if (op.unknown == unknown) out += op.apply(mono, set.dim);
  }
  return out;
}

const char* to_string(Orientation o) { return o == Orientation::minimize ? "minimize" : "maximize"; }

void GmpDualModel::validate() const {
  for (const auto& u : unknowns) {
    if (u.dim <= 0) throw std::invalid_argument("GmpDualModel: unknown " + u.name + " has nonpositive dimension");
    if (u.objective && u.objective->dim() != u.dim) {
      throw DimensionError("GmpDualModel: objective of " + u.name + " has the wrong dimension");
    }
  }
  for (const auto& c : constraints) {
    c.set.validate();
    if (c.offset.dim() != c.set.dim) throw DimensionError("GmpDualModel: offset of " + c.name + " has the wrong dimension");
    for (const auto& op : c.ops) {
      if (op.unknown < 0 || op.unknown >= static_cast<int>(unknowns.size())) {
        throw std::invalid_argument("GmpDualModel: constraint " + c.name + " references an undeclared unknown");
      }
      const auto& u = unknowns[static_cast<std::size_t>(op.unknown)];
      if (static_cast<int>(op.var_map.size()) != u.dim) {
        throw DimensionError("GmpDualModel: var_map of " + c.name + " does not match unknown " + u.name);
      }
      for (int v : op.var_map) {
        if (v < 0 || v >= c.set.dim) throw DimensionError("GmpDualModel: var_map of " + c.name + " out of range");
      }
    }
  }
}

double GmpDualModel::objective(const std::vector<Polynomial>& w) const {
  double s = 0.0;
  for (std::size_t j = 0; j < unknowns.size(); ++j) {
    if (unknowns[j].objective) s += pair(*unknowns[j].objective, w.at(j));
  }
  return s;
}

Tightening build_tightening(const GmpDualModel& model, int level) {
  model.validate();
  if (level < 0) throw std::invalid_argument("build_tightening: negative level");
  Tightening t;
  t.level = level;
  t.sign = model.orientation == Orientation::minimize ? 1.0 : -1.0;
  ConicProgram& prog = t.program;

  for (const auto& u : model.unknowns) {
    const int d = u.rule.degree(level);
    if (d < 0) {
      throw DegreeRuleError("build_tightening: unknown " + u.name + " has degree " + std::to_string(d) +
                            " at level " + std::to_string(level));
    }
    auto basis = monomials_up_to(u.dim, d);
    const int first = prog.add_free(static_cast<int>(basis.size()));
    if (u.objective) {
      for (std::size_t k = 0; k < basis.size(); ++k) {
        prog.c_free[static_cast<std::size_t>(first) + k] = t.sign * u.objective->moment(basis[k]);
      }
    }
    t.first_free.push_back(first);
    t.unknown_basis.push_back(std::move(basis));
  }

  for (const auto& c : model.constraints) {
    AffineFamily fam(-c.offset);
    for (const auto& op : c.ops) {
      const auto j = static_cast<std::size_t>(op.unknown);
      const auto& basis = t.unknown_basis[j];
      for (std::size_t k = 0; k < basis.size(); ++k) {
        Polynomial img = op.apply(Polynomial::monomial(basis[k]), c.set.dim);
        if (!img.is_zero()) fam.terms.emplace_back(t.first_free[j] + static_cast<int>(k), std::move(img));
      }
    }
    if (fam.degree() > 2 * level) {
      throw DegreeRuleError("build_tightening: constraint " + c.name + " has degree " +
                            std::to_string(fam.degree()) + " > 2l = " + std::to_string(2 * level));
    }
    t.encodings.push_back(encode_membership(prog, fam, QuadraticModuleSpec{c.set, level}));
  }
  return t;
}

HierarchyResult solve_level(const GmpDualModel& model, int level, const SolverOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  HierarchyResult res;
  res.level = level;
  const Tightening t = build_tightening(model, level);
  for (const auto& e : t.encodings) res.notes.insert(res.notes.end(), e.notes.begin(), e.notes.end());
  const ConicSolution sol = solve(t.program, opts);
  res.status = sol.status;
  res.message = sol.message;
  res.gap = sol.residuals.gap;
  res.gap_abs = sol.residuals.gap_abs;

  const double inf = std::numeric_limits<double>::infinity();
  switch (sol.status) {
    case ConicStatus::optimal: res.value = t.sign * sol.objective; break;
    case ConicStatus::infeasible: res.value = t.sign * inf; break;
    case ConicStatus::unbounded: res.value = -t.sign * inf; break;
    default: res.value = std::numeric_limits<double>::quiet_NaN(); break;
  }

  if (sol.status == ConicStatus::optimal) {
    for (std::size_t j = 0; j < model.unknowns.size(); ++j) {
      Polynomial::TermMap terms;
      const auto& basis = t.unknown_basis[j];
      for (std::size_t k = 0; k < basis.size(); ++k) {
        terms[basis[k]] = sol.free_values[static_cast<std::size_t>(t.first_free[j]) + k];
      }
      res.solution.emplace_back(model.unknowns[j].dim, std::move(terms));
    }
    for (std::size_t i = 0; i < model.constraints.size(); ++i) {
      const auto& enc = t.encodings[i];
      std::map<MultiIndex, double> z;
      for (std::size_t k = 0; k < enc.monomials.size(); ++k) {
        z[enc.monomials[k]] = sol.duals[static_cast<std::size_t>(enc.first_row) + k];
      }
      auto f = MomentFunctional::table(model.constraints[i].set.dim, 2 * level, std::move(z));
      f.label = model.constraints[i].name;
      res.pseudo_moments.push_back(std::move(f));
    }
  }
  res.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return res;
}

Eigen::MatrixXd moment_matrix(const MomentFunctional& z, int order) {
  const auto basis = monomials_up_to(z.dim(), order);
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a; b < n; ++b) {
      m(a, b) = m(b, a) = z.moment(basis[static_cast<std::size_t>(a)] + basis[static_cast<std::size_t>(b)]);
    }
  }
  return m;
}

HierarchyRun run_hierarchy(const GmpDualModel& model, int level_min, int level_max, const SolverOptions& opts) {
  if (level_min > level_max) throw std::invalid_argument("run_hierarchy: empty level range");
  HierarchyRun run;
  for (int l = level_min; l <= level_max; ++l) {
    HierarchyResult r;
    try {
      r = solve_level(model, l, opts);
    } catch (const DegreeRuleError& e) {
      r.level = l;
      r.value = std::numeric_limits<double>::quiet_NaN();
      r.message = e.what();
    }
    run.results.push_back(std::move(r));
  }
  // Compare each value with the last comparable one before it.
  const double sign = model.orientation == Orientation::minimize ? 1.0 : -1.0;
  const HierarchyResult* prev = nullptr;
  for (const auto& r : run.results) {
    if (std::isnan(r.value)) continue;
    if (prev) {
      // Positive excess means the value moved against the tightening direction.
      const double excess = sign * (r.value - prev->value);
      const double slack = 10.0 * opts.tol * (1.0 + std::abs(prev->value));
      if (std::isfinite(excess) && excess > slack) {
        run.violations.push_back({prev->level, r.level, excess});
      } else if (std::isinf(excess) && excess > 0) {
        run.violations.push_back({prev->level, r.level, excess});
      }
    }
    prev = &r;
  }
  return run;
}

namespace {

double sampled_minimum(const SemialgebraicSet& set, const Polynomial& q, const SlackOptions& sopts,
                       std::size_t& hits) {
  std::mt19937_64 rng(sopts.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(set.dim));
  double best = std::numeric_limits<double>::infinity();
  hits = 0;
  for (std::size_t s = 0; s < sopts.samples; ++s) {
    for (auto& v : x) v = u(rng);
    if (!contains(set, x)) continue;
    ++hits;
    best = std::min(best, q.eval(x));
  }
  return best;
}

bool certifies(const SemialgebraicSet& set, const Polynomial& q, double rho, int level, const SolverOptions& opts) {
  return check_membership(q - rho, set, level, opts).certified();
}

}  // namespace

SlackBound certified_slack(const SemialgebraicSet& set, const Polynomial& q, double rho_guess, int level,
                           const SolverOptions& opts, const SlackOptions& sopts) {
  SlackBound out;
  out.level = level;
  if (q.degree() <= 2 * level) {
    // max rho  s.t.  q - rho in Q_l(h)
    ConicProgram prog;
    const int r = prog.add_free();
    prog.c_free[0] = -1.0;
    AffineFamily fam(q);
    fam.terms.emplace_back(r, Polynomial::constant(set.dim, -1.0));
    const QuadraticModuleSpec spec{set, level};
    const MembershipEncoding enc = encode_membership(prog, fam, spec);
    const ConicSolution sol = solve(prog, opts);
    if (sol.status == ConicStatus::optimal) {
      const double rho_max = sol.free_values[0];
      SosCertificate cert;
      cert.level = level;
      cert.target = q - rho_max;
      cert.bases = enc.bases;
      for (std::size_t j = 0; j < enc.generators.size(); ++j) {
        cert.generator_indices.push_back(enc.generators[j].index);
        cert.generators.push_back(enc.generators[j].poly);
        cert.grams.push_back(sol.blocks[static_cast<std::size_t>(enc.blocks[j])]);
      }
      if (rho_max >= 0.0 && verify_certificate(cert, cert.target).ok) {
        out.rho = rho_max;
        out.certified = true;
        return out;
      }
      if (rho_max > 0.0) {
        for (double back : {1e-9, 1e-7, 1e-5, 1e-3}) {
          const double rho = rho_max - back * (1.0 + rho_max);
          if (rho > 0.0 && certifies(set, q, rho, level, opts)) {
            out.rho = rho;
            out.certified = true;
            return out;
          }
        }
      }
    }
    // Grid search from rho_guess: halve until certified, double while
    // certified, then bisect between the bracketing values.
    double lo = 0.0, hi = 0.0;
    bool have_lo = false;
    double rho = rho_guess > 0.0 ? rho_guess : 1.0;
    for (int k = 0; k < 40 && !have_lo; ++k, rho *= 0.5) {
      if (certifies(set, q, rho, level, opts)) {
        lo = rho;
        have_lo = true;
      } else {
        hi = rho;
      }
    }
    if (have_lo) {
      if (hi == 0.0) {
        hi = 2.0 * lo;
        for (int k = 0; k < 40 && certifies(set, q, hi, level, opts); ++k) {
          lo = hi;
          hi *= 2.0;
        }
      }
      for (int k = 0; k < sopts.bisection_steps; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (certifies(set, q, mid, level, opts)) lo = mid;
        else hi = mid;
      }
      out.rho = lo;
      out.certified = true;
      return out;
    }
    if (certifies(set, q, 0.0, level, opts)) {
      out.rho = 0.0;
      out.certified = true;
      out.note = "only rho = 0 certified";
      return out;
    }
  } else {
    out.note = "degree exceeds 2l";
  }

  std::size_t hits = 0;
  out.sampled_min = sampled_minimum(set, q, sopts, hits);
  if (hits == 0) {
    out.sampled_min = std::numeric_limits<double>::quiet_NaN();
    out.note += out.note.empty() ? "no sample landed in the set" : "; no sample landed in the set";
    return out;
  }
  if (out.sampled_min < 0.0) {
    out.negative = true;
    out.rho = 0.0;
  } else {
    out.rho = out.sampled_min;
  }
  if (out.note.empty()) out.note = "uncertified sampled minimum";
  return out;
}

std::vector<SlackBound> slack_lower_bound(const GmpDualModel& model, const std::vector<Polynomial>& w,
                                          double rho_guess, int level_check, const SolverOptions& opts,
                                          const SlackOptions& sopts) {
  model.validate();
  if (w.size() != model.unknowns.size()) throw std::invalid_argument("slack_lower_bound: one polynomial per unknown");
  std::vector<SlackBound> out;
  for (const auto& c : model.constraints) {
    out.push_back(certified_slack(c.set, c.apply(w) - c.offset, rho_guess, level_check, opts, sopts));
  }
  return out;
}

PerturbResult perturb_inward(const GmpDualModel& model, const std::vector<Polynomial>& w,
                             const std::vector<Polynomial>& phi, double eps, int level_check,
                             const SolverOptions& opts, const SlackOptions& sopts) {
  model.validate();
  if (w.size() != model.unknowns.size() || phi.size() != model.unknowns.size()) {
    throw std::invalid_argument("perturb_inward: one polynomial per unknown");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("perturb_inward: eps must be positive");
  PerturbResult res;
  for (const auto& c : model.constraints) {
    SlackBound b = certified_slack(c.set, c.apply(phi), 1.0, level_check, opts, sopts);
    if (!b.certified || !(b.rho > 0.0)) {
      throw std::runtime_error("perturb_inward: direction is not certified positive on constraint " + c.name);
    }
    res.direction_margin.push_back(b);
  }
  const double s = model.objective(phi);
  res.theta = s == 0.0 ? 1.0 : std::min(1.0, eps / (3.0 * std::abs(s)));
  for (std::size_t j = 0; j < w.size(); ++j) res.w_hat.push_back(w[j] + res.theta * phi[j]);
  res.objective_before = model.objective(w);
  res.objective_after = model.objective(res.w_hat);
  // The objective is linear, so the change is theta |<T, phi>| exactly.
  res.degradation = res.theta * std::abs(s);
  res.margin = slack_lower_bound(model, res.w_hat, res.theta, level_check, opts, sopts);
  return res;
}

}  // namespace momsos
