#include "momsos/poly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace momsos {

namespace {

void require_same_dim(int a, int b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionError(os.str());
  }
}

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace

MultiIndex::MultiIndex(std::vector<int> exps) : exps_(std::move(exps)) {
  for (int e : exps_) {
    if (e < 0) throw std::invalid_argument("MultiIndex: negative exponent");
    degree_ += e;
  }
}

MultiIndex::MultiIndex(std::initializer_list<int> exps)
    : MultiIndex(std::vector<int>(exps)) {}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  require_same_dim(dim(), other.dim(), "MultiIndex::operator+");
  MultiIndex r = *this;
  for (std::size_t i = 0; i < exps_.size(); ++i) r.exps_[i] += other.exps_[i];
  r.degree_ = degree_ + other.degree_;
  return r;
}

MultiIndex MultiIndex::operator-(const MultiIndex& other) const {
  require_same_dim(dim(), other.dim(), "MultiIndex::operator-");
  std::vector<int> e(exps_.size());
  for (std::size_t i = 0; i < exps_.size(); ++i) e[i] = exps_[i] - other.exps_[i];
  return MultiIndex(std::move(e));
}

bool MultiIndex::divides(const MultiIndex& other) const {
  if (dim() != other.dim()) return false;
  for (std::size_t i = 0; i < exps_.size(); ++i) {
    if (exps_[i] > other.exps_[i]) return false;
  }
  return true;
}

MultiIndex MultiIndex::with(int var, int exponent) const {
  std::vector<int> e = exps_;
  e.at(static_cast<std::size_t>(var)) = exponent;
  return MultiIndex(std::move(e));
}

std::strong_ordering MultiIndex::operator<=>(const MultiIndex& other) const {
  if (auto c = degree_ <=> other.degree_; c != 0) return c;
  // Same degree: larger leading exponent sorts first.
  for (std::size_t i = 0; i < std::min(exps_.size(), other.exps_.size()); ++i) {
    if (exps_[i] != other.exps_[i]) return other.exps_[i] <=> exps_[i];
  }
  return exps_.size() <=> other.exps_.size();
}

std::string MultiIndex::str() const {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < exps_.size(); ++i) os << (i ? "," : "") << exps_[i];
  os << ")";
  return os.str();
}

std::vector<MultiIndex> monomials_up_to(int dim, int max_degree) {
  std::vector<MultiIndex> out;
  if (dim <= 0 || max_degree < 0) return out;
  // Enumerate by degree, within a degree in decreasing lexicographic order.
  for (int d = 0; d <= max_degree; ++d) {
    std::vector<std::vector<int>> level;
    std::vector<int> cur(static_cast<std::size_t>(dim), 0);
    auto rec = [&](auto&& self, int var, int remaining) -> void {
      if (var == dim - 1) {
        cur[static_cast<std::size_t>(var)] = remaining;
        level.push_back(cur);
        return;
      }
      for (int k = remaining; k >= 0; --k) {
        cur[static_cast<std::size_t>(var)] = k;
        self(self, var + 1, remaining - k);
      }
    };
    rec(rec, 0, d);
    for (auto& v : level) out.emplace_back(std::move(v));
  }
  return out;
}

std::size_t monomial_count(int dim, int max_degree) {
  if (dim <= 0 || max_degree < 0) return 0;
  // C(dim + d, dim) computed incrementally to stay exact.
  std::size_t r = 1;
  for (int i = 1; i <= dim; ++i) {
    r = r * static_cast<std::size_t>(max_degree + i) / static_cast<std::size_t>(i);
  }
  return r;
}

Polynomial::Polynomial(int dim) : dim_(dim) {
  if (dim <= 0) throw DimensionError("Polynomial: dimension must be positive");
}

Polynomial::Polynomial(int dim, TermMap terms) : dim_(dim), terms_(std::move(terms)) {
  if (dim <= 0) throw DimensionError("Polynomial: dimension must be positive");
  for (const auto& [a, c] : terms_) {
    require_same_dim(a.dim(), dim_, "Polynomial");
    (void)c;
  }
  prune();
}

Polynomial Polynomial::constant(int dim, double c) {
  Polynomial p(dim);
  if (std::abs(c) >= kPruneThreshold) p.terms_[MultiIndex(dim)] = c;
  return p;
}

Polynomial Polynomial::variable(int dim, int var) {
  if (var < 0 || var >= dim) throw DimensionError("Polynomial::variable: index out of range");
  Polynomial p(dim);
  p.terms_[MultiIndex(dim).with(var, 1)] = 1.0;
  return p;
}

Polynomial Polynomial::monomial(const MultiIndex& alpha, double coef) {
  Polynomial p(alpha.dim());
  if (std::abs(coef) >= kPruneThreshold) p.terms_[alpha] = coef;
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [a, c] : terms_) d = std::max(d, a.degree());
  return d;
}

double Polynomial::coef(const MultiIndex& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::max_abs_coef() const {
  double m = 0.0;
  for (const auto& [a, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

double Polynomial::eval(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) {
    throw DimensionError("Polynomial::eval: point has wrong dimension");
  }
  double sum = 0.0;
  for (const auto& [a, c] : terms_) {
    double t = c;
    for (int i = 0; i < dim_; ++i) t *= ipow(x[static_cast<std::size_t>(i)], a[i]);
    sum += t;
  }
  return sum;
}

double Polynomial::operator()(std::initializer_list<double> x) const {
  return eval(std::span<const double>(x.begin(), x.size()));
}

Polynomial Polynomial::operator-() const {
  Polynomial r = *this;
  for (auto& [a, c] : r.terms_) c = -c;
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& q) {
  require_same_dim(dim_, q.dim_, "Polynomial::operator+");
  for (const auto& [a, c] : q.terms_) terms_[a] += c;
  prune();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& q) {
  require_same_dim(dim_, q.dim_, "Polynomial::operator-");
  for (const auto& [a, c] : q.terms_) terms_[a] -= c;
  prune();
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  for (auto& [a, c] : terms_) c *= s;
  prune();
  return *this;
}

Polynomial Polynomial::pow(int k) const {
  if (k < 0) throw std::invalid_argument("Polynomial::pow: negative exponent");
  Polynomial result = constant(dim_, 1.0);
  Polynomial base = *this;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k) base = base * base;
  }
  return result;
}

Polynomial Polynomial::derivative(int var) const {
  if (var < 0 || var >= dim_) throw DimensionError("Polynomial::derivative: bad variable");
  Polynomial r(dim_);
  for (const auto& [a, c] : terms_) {
    const int e = a[var];
    if (e == 0) continue;
    r.terms_[a.with(var, e - 1)] += c * e;
  }
  r.prune();
  return r;
}

Polynomial Polynomial::derivative(const MultiIndex& order) const {
  require_same_dim(order.dim(), dim_, "Polynomial::derivative");
  Polynomial r = *this;
  for (int i = 0; i < dim_; ++i) {
    for (int k = 0; k < order[i]; ++k) r = r.derivative(i);
  }
  return r;
}

Polynomial Polynomial::embed(int new_dim, std::span<const int> var_map) const {
  if (static_cast<int>(var_map.size()) != dim_) {
    throw DimensionError("Polynomial::embed: var_map length must equal dim");
  }
  Polynomial r(new_dim);
  for (const auto& [a, c] : terms_) {
    std::vector<int> e(static_cast<std::size_t>(new_dim), 0);
    for (int i = 0; i < dim_; ++i) {
      const int target = var_map[static_cast<std::size_t>(i)];
      if (target < 0 || target >= new_dim) {
        throw DimensionError("Polynomial::embed: target variable out of range");
      }
      e[static_cast<std::size_t>(target)] += a[i];
    }
    r.terms_[MultiIndex(std::move(e))] += c;
  }
  r.prune();
  return r;
}

Polynomial Polynomial::scale_variables(double scale) const {
  Polynomial r(dim_);
  for (const auto& [a, c] : terms_) r.terms_[a] = c * ipow(scale, a.degree());
  r.prune();
  return r;
}

std::string Polynomial::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(6);
  bool first = true;
  for (const auto& [a, c] : terms_) {
    os << (first ? "" : " + ") << c;
    for (int i = 0; i < dim_; ++i) {
      if (a[i] == 0) continue;
      os << "*x" << (i + 1);
      if (a[i] > 1) os << "^" << a[i];
    }
    first = false;
  }
  return os.str();
}

void Polynomial::prune() {
  std::erase_if(terms_, [](const auto& kv) { return std::abs(kv.second) < kPruneThreshold; });
}

Polynomial operator+(Polynomial p, const Polynomial& q) { return p += q; }
Polynomial operator-(Polynomial p, const Polynomial& q) { return p -= q; }

Polynomial operator*(const Polynomial& p, const Polynomial& q) {
  require_same_dim(p.dim(), q.dim(), "Polynomial::operator*");
  Polynomial::TermMap t;
  for (const auto& [a, c] : p.terms()) {
    for (const auto& [b, d] : q.terms()) t[a + b] += c * d;
  }
  return Polynomial(p.dim(), std::move(t));
}

Polynomial operator*(double s, Polynomial p) { return p *= s; }
Polynomial operator*(Polynomial p, double s) { return p *= s; }
Polynomial operator+(Polynomial p, double c) { return p += Polynomial::constant(p.dim(), c); }
Polynomial operator+(double c, Polynomial p) { return p += Polynomial::constant(p.dim(), c); }
Polynomial operator-(Polynomial p, double c) { return p -= Polynomial::constant(p.dim(), c); }
Polynomial operator-(double c, const Polynomial& p) { return Polynomial::constant(p.dim(), c) - p; }

bool approx_equal(const Polynomial& p, const Polynomial& q, double tol) {
  if (p.dim() != q.dim()) return false;
  const Polynomial d = p - q;
  return d.max_abs_coef() <= tol;
}

std::vector<Polynomial> grad(const Polynomial& p) {
  std::vector<Polynomial> g;
  g.reserve(static_cast<std::size_t>(p.dim()));
  for (int i = 0; i < p.dim(); ++i) g.push_back(p.derivative(i));
  return g;
}

Polynomial div(std::span<const Polynomial> v) {
  if (v.empty()) throw DimensionError("div: empty vector field");
  const int m = v[0].dim();
  if (static_cast<int>(v.size()) != m) {
    throw DimensionError("div: vector length must equal ambient dimension");
  }
  Polynomial r(m);
  for (int i = 0; i < m; ++i) {
    require_same_dim(v[static_cast<std::size_t>(i)].dim(), m, "div");
    r += v[static_cast<std::size_t>(i)].derivative(i);
  }
  return r;
}

Polynomial dot(std::span<const Polynomial> a, std::span<const Polynomial> b) {
  if (a.size() != b.size() || a.empty()) throw DimensionError("dot: length mismatch");
  Polynomial r(a[0].dim());
  for (std::size_t i = 0; i < a.size(); ++i) r += a[i] * b[i];
  return r;
}

Polynomial apply_generator(const Polynomial& v, std::span<const Polynomial> f0,
                           const PolyMatrix& a) {
  const int m = v.dim();
  if (static_cast<int>(f0.size()) != m || static_cast<int>(a.size()) != m) {
    throw DimensionError("apply_generator: f0 and a must match the dimension of v");
  }
  Polynomial r(m);
  const auto g = grad(v);
  for (int i = 0; i < m; ++i) {
    const auto& row = a[static_cast<std::size_t>(i)];
    if (static_cast<int>(row.size()) != m) throw DimensionError("apply_generator: a is not square");
    for (int j = 0; j < m; ++j) {
      const Polynomial& aij = row[static_cast<std::size_t>(j)];
      if (aij.is_zero()) continue;
      r -= aij * g[static_cast<std::size_t>(i)].derivative(j);
    }
    r += f0[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(i)];
  }
  return r;
}

double cheb_eval(int k, double s) {
  if (k < 0) throw std::invalid_argument("cheb_eval: negative order");
  if (k == 0) return 1.0;
  double prev = 1.0, cur = s;
  for (int i = 1; i < k; ++i) {
    const double next = 2.0 * s * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double norm_equiv_factor(int deg, double b) {
  if (!(b > 0.0 && b <= 1.0)) throw std::domain_error("norm_equiv_factor: b must lie in (0,1]");
  if (deg < 0) throw std::invalid_argument("norm_equiv_factor: negative degree");
  const double k = static_cast<double>(deg);
  return 1.0 + k * k / 4.0 * std::pow(2.0 / b, k + 1.0);
}

double sup_norm_box(const Polynomial& p, int grid_points_per_axis, std::size_t max_points) {
  if (grid_points_per_axis < 2) throw std::invalid_argument("sup_norm_box: need >= 2 points per axis");
  const int m = p.dim();
  double total = 1.0;
  for (int i = 0; i < m; ++i) total *= grid_points_per_axis;
  if (total > static_cast<double>(max_points)) {
    throw std::length_error("sup_norm_box: grid exceeds the configured point cap");
  }
  if (p.is_zero()) return 0.0;
  const int n = grid_points_per_axis;
  std::vector<double> axis(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) axis[static_cast<std::size_t>(k)] = -1.0 + 2.0 * k / (n - 1);
  std::vector<int> idx(static_cast<std::size_t>(m), 0);
  std::vector<double> x(static_cast<std::size_t>(m));
  double best = 0.0;
  while (true) {
    for (int i = 0; i < m; ++i) x[static_cast<std::size_t>(i)] = axis[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    best = std::max(best, std::abs(p.eval(x)));
    int i = 0;
    while (i < m && ++idx[static_cast<std::size_t>(i)] == n) idx[static_cast<std::size_t>(i++)] = 0;
    if (i == m) break;
  }
  return best;
}

}  // namespace momsos
