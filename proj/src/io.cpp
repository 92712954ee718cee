#include "momsos/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace momsos::io {

namespace {

const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ParseError(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(path + "." + key, "missing field");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ParseError(path, "expected an integer");
  return j.get<int>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ParseError(path, "expected true or false");
  return j.get<bool>();
}

std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ParseError(path, "expected a string");
  return j.get<std::string>();
}

const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "expected an array");
  return j;
}

std::vector<double> numbers(const json& j, const std::string& path) {
  std::vector<double> v;
  for (std::size_t i = 0; i < array(j, path).size(); ++i) v.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

std::vector<int> integers(const json& j, const std::string& path) {
  std::vector<int> v;
  for (std::size_t i = 0; i < array(j, path).size(); ++i) v.push_back(integer(j[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

MultiIndex multi_index(const json& j, const std::string& path) {
  auto e = integers(j, path);
  for (int x : e) {
    if (x < 0) throw ParseError(path, "exponents must be nonnegative");
  }
  return MultiIndex(std::move(e));
}

std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

std::vector<Polynomial> polynomials(const json& j, int dim, const std::string& path) {
  std::vector<Polynomial> out;
  for (std::size_t i = 0; i < array(j, path).size(); ++i) out.push_back(parse_polynomial(j[i], dim, idx(path, i)));
  return out;
}

// A set given inline, as a bare list of polynomials, or as a file reference.
SemialgebraicSet set_like(const json& j, int dim, const std::string& path, const std::filesystem::path& base) {
  if (j.is_string()) {
    const std::filesystem::path file = base / j.get<std::string>();
    json inner;
    try {
      inner = read_json_file(file);
    } catch (const ParseError& e) {
      throw ParseError(path, e.what());
    }
    return parse_set(inner, path + "<" + file.string() + ">");
  }
  if (j.is_array()) {
    if (dim < 1) throw ParseError(path, "a bare inequality list needs a known dimension");
    try {
      return SemialgebraicSet(dim, polynomials(j, dim, path));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(path, e.what());
    }
  }
  return parse_set(j, path);
}

double radius_of(const json& j, int dim) {
  if (j.is_object() && j.contains("radius_R")) return number(j["radius_R"], "radius_R");
  return std::sqrt(static_cast<double>(dim));
}

}  // namespace

json to_json(const Polynomial& p) {
  json a = json::array();
  for (const auto& [alpha, c] : p.terms()) a.push_back({{"exps", alpha.exps()}, {"coef", c}});
  return a;
}

Polynomial parse_polynomial(const json& j, int dim, const std::string& path) {
  if (j.is_number()) {
    if (dim < 1) throw ParseError(path, "a constant needs a known dimension");
    return Polynomial::constant(dim, j.get<double>());
  }
  array(j, path);
  if (dim < 0) {
    if (j.empty()) throw ParseError(path, "cannot infer the dimension of an empty polynomial");
    dim = static_cast<int>(array(field(j[0], "exps", idx(path, 0)), idx(path, 0) + ".exps").size());
    if (dim < 1) throw ParseError(idx(path, 0) + ".exps", "empty exponent vector");
  }
  Polynomial::TermMap terms;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = idx(path, i);
    const MultiIndex a = multi_index(field(j[i], "exps", p), p + ".exps");
    if (a.dim() != dim) {
      throw ParseError(p + ".exps", "expected " + std::to_string(dim) + " exponents, got " + std::to_string(a.dim()));
    }
    terms[a] += number(field(j[i], "coef", p), p + ".coef");
  }
  return Polynomial(dim, std::move(terms));
}

json to_json(const SemialgebraicSet& s) {
  json ineqs = json::array();
  for (const auto& h : s.ineqs) ineqs.push_back(to_json(h));
  json j{{"dim", s.dim}, {"ineqs", ineqs}};
  if (s.radius > 0.0) j["radius_R"] = s.radius;
  if (!s.scale_factors.empty()) j["scale_factors"] = s.scale_factors;
  if (s.archimedean_augmented) j["archimedean_augmented"] = true;
  return j;
}

SemialgebraicSet parse_set(const json& j, const std::string& path) {
  const int dim = integer(field(j, "dim", path), path + ".dim");
  if (dim < 1) throw ParseError(path + ".dim", "must be positive");
  auto ineqs = polynomials(field(j, "ineqs", path), dim, path + ".ineqs");
  if (ineqs.empty()) throw ParseError(path + ".ineqs", "need at least one inequality");
  SemialgebraicSet s(dim, std::move(ineqs));
  if (j.contains("radius_R")) {
    s.radius = number(j["radius_R"], path + ".radius_R");
    if (!(s.radius > 0.0)) throw ParseError(path + ".radius_R", "must be positive");
  }
  if (j.contains("scale_factors")) s.scale_factors = numbers(j["scale_factors"], path + ".scale_factors");
  if (j.contains("archimedean_augmented")) {
    s.archimedean_augmented = boolean(j["archimedean_augmented"], path + ".archimedean_augmented");
  }
  return s;
}

json to_json(const MomentFunctional& t) {
  json j{{"kind", to_string(t.kind())}, {"dim", t.dim()}};
  if (!t.label.empty()) j["label"] = t.label;
  switch (t.kind()) {
    case MomentFunctional::Kind::dirac: j["point"] = t.point(); break;
    case MomentFunctional::Kind::table: {
      j["max_degree"] = t.max_degree();
      json e = json::array();
      for (const auto& [a, v] : t.entries()) e.push_back({{"exps", a.exps()}, {"value", v}});
      j["entries"] = e;
      break;
    }
    default: break;
  }
  return j;
}

MomentFunctional parse_functional(const json& j, const std::string& path) {
  const std::string kind = string(field(j, "kind", path), path + ".kind");
  if (kind == "dirac") {
    const auto pt = numbers(field(j, "point", path), path + ".point");
    if (pt.empty()) throw ParseError(path + ".point", "empty point");
    return MomentFunctional::dirac(pt);
  }
  const int dim = integer(field(j, "dim", path), path + ".dim");
  if (dim < 1) throw ParseError(path + ".dim", "must be positive");
  if (kind == "box") return MomentFunctional::box(dim);
  if (kind == "ball") return MomentFunctional::ball(dim);
  if (kind == "table") {
    const int md = integer(field(j, "max_degree", path), path + ".max_degree");
    std::map<MultiIndex, double> entries;
    const std::string ep = path + ".entries";
    const json& e = array(field(j, "entries", path), ep);
    for (std::size_t i = 0; i < e.size(); ++i) {
      const MultiIndex a = multi_index(field(e[i], "exps", idx(ep, i)), idx(ep, i) + ".exps");
      if (a.dim() != dim) throw ParseError(idx(ep, i) + ".exps", "wrong number of exponents");
      entries[a] = number(field(e[i], "value", idx(ep, i)), idx(ep, i) + ".value");
    }
    return MomentFunctional::table(dim, md, std::move(entries));
  }
  throw ParseError(path + ".kind", "unknown functional kind '" + kind + "'");
}

json to_json(const SosCertificate& c) {
  json gens = json::array();
  for (std::size_t k = 0; k < c.generators.size(); ++k) {
    gens.push_back({{"index", c.generator_indices[k]}, {"polynomial", to_json(c.generators[k])}});
  }
  json blocks = json::array();
  for (std::size_t k = 0; k < c.grams.size(); ++k) {
    const auto& g = c.grams[k];
    std::vector<double> entries;
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      for (Eigen::Index s = 0; s < g.cols(); ++s) entries.push_back(g(r, s));
    }
    json basis = json::array();
    for (const auto& a : c.bases[k]) basis.push_back(a.exps());
    blocks.push_back({{"generator_index", c.generator_indices[k]},
                      {"size", g.rows()},
                      {"basis", basis},
                      {"entries", entries}});
  }
  return {{"level", c.level},
          {"target", to_json(c.target)},
          {"generators", gens},
          {"blocks", blocks},
          {"residual", c.residual}};
}

json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError(file.string(), "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(file.string(), std::string("invalid JSON: ") + e.what());
  }
}

Problem parse_problem(const json& j, const std::filesystem::path& base_dir) {
  Problem pr;
  pr.kind = string(field(j, "kind", "problem"), "problem.kind");
  if (j.contains("reference")) pr.reference = number(j["reference"], "problem.reference");
  try {
    if (pr.kind == "pop") {
      const SemialgebraicSet s = set_like(field(j, "set", "problem"), -1, "problem.set", base_dir);
      const Polynomial f = parse_polynomial(field(j, "f", "problem"), s.dim, "problem.f");
      pr.pop_f = f;
      pr.pop_set = normalize(s, radius_of(j["set"], s.dim));
      pr.model = build_pop(f, *pr.pop_set);
    } else if (pr.kind == "volume") {
      const SemialgebraicSet s = set_like(field(j, "set", "problem"), -1, "problem.set", base_dir);
      pr.volume_set = s;
      const bool stokes = j.contains("stokes") && boolean(j["stokes"], "problem.stokes");
      if (stokes) {
        std::optional<SemialgebraicSet> bd;
        if (j.contains("boundary")) bd = set_like(j["boundary"], s.dim, "problem.boundary", base_dir);
        pr.model = build_volume_stokes(s, bd);
      } else {
        pr.model = build_volume_standard(s);
      }
    } else if (pr.kind == "ocp") {
      OcpSpec o;
      o.state_set = set_like(field(j, "state_set", "problem"), -1, "problem.state_set", base_dir);
      o.control_set = set_like(field(j, "control_set", "problem"), -1, "problem.control_set", base_dir);
      const int m = o.state_dim() + o.control_dim();
      o.f = polynomials(field(j, "f", "problem"), m, "problem.f");
      o.g = parse_polynomial(field(j, "g", "problem"), m, "problem.g");
      o.beta = number(field(j, "beta", "problem"), "problem.beta");
      if (!(o.beta > 0.0)) throw ParseError("problem.beta", "must be positive");
      if (j.contains("mu0")) o.mu0 = parse_functional(j["mu0"], "problem.mu0");
      if (j.contains("assumptions_asserted")) {
        o.assumptions_asserted = boolean(j["assumptions_asserted"], "problem.assumptions_asserted");
      }
      pr.ocp = o;
      pr.model = build_ocp(o);
    } else if (pr.kind == "exit") {
      ExitSpec e;
      e.x0 = numbers(field(j, "x0", "problem"), "problem.x0");
      const int m = static_cast<int>(e.x0.size());
      if (m < 1) throw ParseError("problem.x0", "empty point");
      e.set = set_like(field(j, "h", "problem"), m, "problem.h", base_dir);
      if (j.contains("h_boundary")) e.boundary = set_like(j["h_boundary"], m, "problem.h_boundary", base_dir);
      e.f0 = polynomials(field(j, "f0", "problem"), m, "problem.f0");
      PolyMatrix F;
      const json& fj = array(field(j, "F", "problem"), "problem.F");
      for (std::size_t i = 0; i < fj.size(); ++i) F.push_back(polynomials(fj[i], m, idx("problem.F", i)));
      e.with_diffusion(F);
      e.g = parse_polynomial(field(j, "g", "problem"), m, "problem.g");
      pr.exit = e;
      pr.model = build_exit(e);
    } else if (pr.kind == "gmp") {
      GmpDualModel& md = pr.model;
      md.name = j.contains("name") ? string(j["name"], "problem.name") : "gmp";
      const std::string o = j.contains("orientation") ? string(j["orientation"], "problem.orientation") : "minimize";
      if (o == "minimize") md.orientation = Orientation::minimize;
      else if (o == "maximize") md.orientation = Orientation::maximize;
      else throw ParseError("problem.orientation", "expected minimize or maximize");
      const json& us = array(field(j, "unknowns", "problem"), "problem.unknowns");
      for (std::size_t i = 0; i < us.size(); ++i) {
        const std::string p = idx("problem.unknowns", i);
        Unknown u;
        u.name = us[i].contains("name") ? string(us[i]["name"], p + ".name") : "w" + std::to_string(i);
        u.dim = integer(field(us[i], "dim", p), p + ".dim");
        if (u.dim < 1) throw ParseError(p + ".dim", "must be positive");
        if (us[i].contains("degree_rule")) {
          const json& r = us[i]["degree_rule"];
          u.rule.per_level = integer(field(r, "per_level", p + ".degree_rule"), p + ".degree_rule.per_level");
          u.rule.offset = integer(field(r, "offset", p + ".degree_rule"), p + ".degree_rule.offset");
        }
        if (us[i].contains("objective")) {
          u.objective = parse_functional(us[i]["objective"], p + ".objective");
          if (u.objective->dim() != u.dim) throw ParseError(p + ".objective", "dimension differs from the unknown");
        }
        md.unknowns.push_back(std::move(u));
      }
      const json& cs = array(field(j, "constraints", "problem"), "problem.constraints");
      for (std::size_t i = 0; i < cs.size(); ++i) {
        const std::string p = idx("problem.constraints", i);
        GmpConstraint c;
        c.name = cs[i].contains("name") ? string(cs[i]["name"], p + ".name") : "c" + std::to_string(i);
        c.set = set_like(field(cs[i], "set", p), -1, p + ".set", base_dir);
        if (cs[i].contains("radius_R") || (cs[i]["set"].is_object() && cs[i]["set"].contains("radius_R"))) {
          const json& holder = cs[i].contains("radius_R") ? cs[i] : cs[i]["set"];
          c.set = normalize(c.set, number(holder["radius_R"], p + ".radius_R"));
        }
        const int dim = c.set.dim;
        c.offset = cs[i].contains("offset") ? parse_polynomial(cs[i]["offset"], dim, p + ".offset") : Polynomial(dim);
        const json& ops = array(field(cs[i], "ops", p), p + ".ops");
        for (std::size_t k = 0; k < ops.size(); ++k) {
          const std::string q = idx(p + ".ops", k);
          OperatorBlock op;
          op.unknown = integer(field(ops[k], "unknown", q), q + ".unknown");
          if (op.unknown < 0 || op.unknown >= static_cast<int>(md.unknowns.size())) {
            throw ParseError(q + ".unknown", "no such unknown");
          }
          const int udim = md.unknowns[static_cast<std::size_t>(op.unknown)].dim;
          if (ops[k].contains("var_map")) {
            op.var_map = integers(ops[k]["var_map"], q + ".var_map");
          } else {
            for (int v = 0; v < udim; ++v) op.var_map.push_back(v);
          }
          const json& ts = array(field(ops[k], "terms", q), q + ".terms");
          for (std::size_t t = 0; t < ts.size(); ++t) {
            const std::string r = idx(q + ".terms", t);
            DiffTerm term{parse_polynomial(field(ts[t], "coef", r), dim, r + ".coef"), MultiIndex(dim)};
            if (ts[t].contains("order")) {
              term.order = multi_index(ts[t]["order"], r + ".order");
              if (term.order.dim() != dim) throw ParseError(r + ".order", "wrong number of entries");
            }
            op.terms.push_back(std::move(term));
          }
          c.ops.push_back(std::move(op));
        }
        md.constraints.push_back(std::move(c));
      }
      try {
        md.validate();
      } catch (const std::exception& e) {
        throw ParseError("problem", e.what());
      }
    } else {
      throw ParseError("problem.kind", "unknown problem kind '" + pr.kind + "'");
    }
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError("problem", e.what());
  }
  return pr;
}

Problem load_problem(const std::filesystem::path& file) {
  return parse_problem(read_json_file(file), file.parent_path());
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw std::invalid_argument("CsvTable: row width differs from the header");
  for (const auto& cell : row) {
    if (cell.find_first_of(",\n\r") != std::string::npos) throw std::invalid_argument("CsvTable: cell holds a separator");
  }
  rows.push_back(std::move(row));
}

std::string render_csv(const CsvTable& t, const Provenance& p) {
  std::ostringstream os;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(p.config)));
  os << "# momsos " << kVersion << "\n";
  os << "# config_hash fnv1a64:" << hash << "\n";
  os << "# tol " << format_double(p.tol) << "\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << "\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return os.str();
}

std::size_t CsvData::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ParseError("csv." + name, "missing column");
}

CsvData parse_csv(const std::string& text) {
  CsvData d;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (!have_header) {
      d.header = std::move(cells);
      have_header = true;
    } else {
      if (cells.size() != d.header.size()) {
        throw ParseError("csv.line" + std::to_string(lineno), "expected " + std::to_string(d.header.size()) + " cells");
      }
      d.rows.push_back(std::move(cells));
    }
  }
  if (!have_header) throw ParseError("csv", "no header row");
  return d;
}

}  // namespace momsos::io
