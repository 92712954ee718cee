#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "momsos/io.hpp"
#include "momsos/problems.hpp"
#include "momsos/rates.hpp"
#include "momsos/sos.hpp"

namespace momsos::cli {

using io::format_double;
using io::json;
using io::ParseError;

namespace {

SolverOptions solver_options(const RunConfig& c) {
  SolverOptions o;
  o.tol = c.tol;
  return o;
}

// Writes to --out when given, otherwise to the output stream.
void emit(const RunConfig& c, const std::string& text, std::ostream& out) {
  if (c.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + c.out);
  f << text;
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

// Numbers in JSON output go through %.17g as well.
json num(double v) {
  if (!std::isfinite(v)) return format_double(v);
  return json::parse(format_double(v));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct OracleValue {
  double value = 0.0;
  double std_error = 0.0;
  std::string method;
};

double pop_grid_min(const Polynomial& f, const SemialgebraicSet& s) {
  if (s.dim > 3) throw std::runtime_error("pop oracle: grid scan supports m <= 3");
  const double r = s.radius > 0.0 ? s.radius : std::sqrt(static_cast<double>(s.dim));
  const int n = s.dim == 1 ? 20001 : (s.dim == 2 ? 801 : 121);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> idx(static_cast<std::size_t>(s.dim), 0);
  std::vector<double> x(static_cast<std::size_t>(s.dim));
  while (true) {
    for (int d = 0; d < s.dim; ++d) x[static_cast<std::size_t>(d)] = -r + 2.0 * r * idx[static_cast<std::size_t>(d)] / (n - 1);
    if (contains(s, x)) best = std::min(best, f.eval(x));
    int d = s.dim - 1;
    for (; d >= 0; --d) {
      if (++idx[static_cast<std::size_t>(d)] < n) break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
    if (d < 0) break;
  }
  if (!std::isfinite(best)) throw std::runtime_error("pop oracle: no grid point lies in the set");
  return best;
}

OracleValue desk_oracle(const io::Problem& p, const RunConfig& c) {
  if (p.kind == "ocp") {
    if (!p.ocp->mu0) throw std::runtime_error("ocp oracle: the problem has no mu0");
    return {oracle_ocp_1d(*p.ocp).expectation(*p.ocp->mu0), 0.0, "semi-Lagrangian value iteration"};
  }
  if (p.kind == "exit") return {oracle_exit_1d(*p.exit), 0.0, "closed-form quadrature"};
  if (p.kind == "volume") {
    const auto v = volume_reference(*p.volume_set, c.samples, c.seed);
    return {v.value, v.std_error, "Monte Carlo with " + std::to_string(v.samples) + " samples"};
  }
  if (p.kind == "pop") return {pop_grid_min(*p.pop_f, *p.pop_set), 0.0, "grid scan"};
  throw std::runtime_error("no desk oracle for problem kind '" + p.kind + "'");
}

int cmd_hierarchy(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const io::Problem p = io::load_problem(c.input);
  std::optional<double> oracle = p.reference;
  if (!oracle && c.with_oracle) oracle = desk_oracle(p, c).value;

  const auto run = run_hierarchy(p.model, c.level_min, c.level_max, solver_options(c));
  bool any = false;
  io::CsvTable t{{"level", "value", "gap_vs_oracle", "duality_gap", "status", "time_ms"}, {}};
  json rows = json::array();
  for (const auto& r : run.results) {
    any = any || r.solved();
    const std::string gap = oracle && std::isfinite(r.value) ? format_double(r.value - *oracle) : "";
    t.add_row({std::to_string(r.level), format_double(r.value), gap, format_double(r.gap), to_string(r.status),
               format_double(r.time_ms)});
    json row{{"level", r.level},
             {"value", num(r.value)},
             {"duality_gap", num(r.gap)},
             {"status", to_string(r.status)},
             {"time_ms", num(r.time_ms)}};
    row["gap_vs_oracle"] = gap.empty() ? json(nullptr) : num(r.value - *oracle);
    if (!r.message.empty()) row["message"] = r.message;
    rows.push_back(row);
  }
  const io::Provenance prov{c.canonical() + "\n" + slurp(c.input), c.tol};
  if (c.format == "json") {
    json doc{{"version", io::kVersion},
             {"config_hash", io::fnv1a64(prov.config)},
             {"tol", num(c.tol)},
             {"problem", p.model.name},
             {"orientation", to_string(p.model.orientation)},
             {"rows", rows}};
    if (oracle) doc["oracle"] = num(*oracle);
    emit(c, json_text(doc), out);
  } else {
    emit(c, io::render_csv(t, prov), out);
  }
  for (const auto& v : run.violations) {
    err << "warning: value moved against the tightening direction from level " << v.from_level << " to "
        << v.to_level << " by " << format_double(v.excess) << "\n";
  }
  if (!any) {
    err << "error: the solver failed at every level\n";
    return kSolverFailure;
  }
  return kOk;
}

int cmd_certify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const json j = io::read_json_file(c.input);
  const SemialgebraicSet set = io::parse_set(j.contains("set") ? j["set"] : json(), "certify.set");
  if (!j.contains("p")) throw ParseError("certify.p", "missing field");
  const Polynomial p = io::parse_polynomial(j["p"], set.dim, "certify.p");
  int level = c.level_min;
  if (!c.levels_given) {
    if (!j.contains("level") || !j["level"].is_number_integer()) throw ParseError("certify.level", "missing level");
    level = j["level"].get<int>();
  }
  const auto r = check_membership(p, set, level, solver_options(c));
  json doc{{"version", io::kVersion},
           {"level", level},
           {"outcome", to_string(r.outcome)},
           {"solver_status", to_string(r.solver_status)}};
  if (!r.message.empty()) doc["message"] = r.message;
  if (r.certificate) {
    doc["certificate"] = io::to_json(*r.certificate);
    doc["verification"] = {{"ok", r.verification.ok},
                           {"residual", num(r.verification.residual)},
                           {"min_eigenvalue", num(r.verification.min_eigenvalue)}};
    if (!r.verification.reason.empty()) doc["verification"]["reason"] = r.verification.reason;
  }
  emit(c, json_text(doc), out);
  if (!r.certified()) {
    err << "not certified at level " << level << ": " << to_string(r.outcome) << "\n";
    return kNotCertified;
  }
  return kOk;
}

RateParams rate_params(const json& j, RateParams p, const std::string& path) {
  if (j.is_null()) return p;
  if (!j.is_object()) throw ParseError(path, "expected an object");
  for (const auto& [key, v] : j.items()) {
    if (!v.is_number()) throw ParseError(path + "." + key, "expected a number");
    const double x = v.get<double>();
    if (key == "m") {
      if (!v.is_number_integer()) throw ParseError(path + ".m", "expected an integer");
      p.m = v.get<int>();
    } else if (key == "loja") p.loja = x;
    else if (key == "loja_boundary") p.loja_boundary = x;
    else if (key == "loja_hat") p.loja_hat = x;
    else if (key == "gamma") p.gamma = x;
    else if (key == "big_gamma") p.big_gamma = x;
    else if (key == "A") p.A = x;
    else if (key == "B") p.B = x;
    else if (key == "C") p.C = x;
    else if (key == "vol_C") p.vol_C = x;
    else if (key == "c_G") p.c_G = x;
    else if (key == "s") p.s = x;
    else throw ParseError(path + "." + key, "unknown rate parameter");
  }
  return p;
}

double arg(const json& e, const char* key, const std::string& path) {
  if (!e.contains(key) || !e[key].is_number()) throw ParseError(path + "." + key, "missing number");
  return e[key].get<double>();
}

int iarg(const json& e, const char* key, const std::string& path) {
  if (!e.contains(key) || !e[key].is_number_integer()) throw ParseError(path + "." + key, "missing integer");
  return e[key].get<int>();
}

int cmd_bounds(const RunConfig& c, std::ostream& out, std::ostream&) {
  const json j = io::read_json_file(c.input);
  RateParams base = rate_params(j.contains("params") ? j["params"] : json(), RateParams{}, "bounds.params");
  if (c.gamma) base.gamma = *c.gamma;
  if (c.loja) base.loja = base.loja_boundary = base.loja_hat = *c.loja;
  if (c.s_param) base.s = *c.s_param;
  if (!j.contains("bounds") || !j["bounds"].is_array()) throw ParseError("bounds.bounds", "expected an array");

  io::CsvTable t{{"index", "kind", "arguments", "value"}, {}};
  json records = json::array();
  for (std::size_t i = 0; i < j["bounds"].size(); ++i) {
    const json& e = j["bounds"][i];
    const std::string path = "bounds.bounds[" + std::to_string(i) + "]";
    if (!e.contains("kind") || !e["kind"].is_string()) throw ParseError(path + ".kind", "missing string");
    const std::string kind = e["kind"].get<std::string>();
    const RateParams p = rate_params(e.contains("params") ? e["params"] : json(), base, path + ".params");
    std::string args;
    auto note = [&](const char* k, double v) { args += (args.empty() ? "" : ";") + std::string(k) + "=" + format_double(v); };
    double value = 0.0;
    if (kind == "putinar") {
      const int d = iarg(e, "deg_p", path);
      const double r = arg(e, "ratio", path);
      note("m", p.m), note("L", p.loja), note("gamma", p.gamma), note("deg_p", d), note("ratio", r);
      value = putinar_degree_bound(p, d, r);
    } else if (kind == "gamma_upper") {
      const double g = arg(e, "big_gamma", path), L = arg(e, "loja", path), cc = arg(e, "c", path);
      const int m = iarg(e, "m", path), r = iarg(e, "r", path), dh = iarg(e, "deg_h", path);
      note("Gamma", g), note("m", m), note("r", r), note("L", L), note("c", cc), note("deg_h", dh);
      value = gamma_upper_bound(g, m, r, L, cc, dh);
    } else if (kind == "pop_rate") {
      const double l = arg(e, "level", path), fn = arg(e, "f_norm", path);
      const int df = iarg(e, "deg_f", path);
      note("m", p.m), note("L", p.loja), note("gamma", p.gamma), note("level", l), note("f_norm", fn), note("deg_f", df);
      value = pop_rate(p, l, fn, df);
    } else if (kind == "pop_level") {
      const double eps = arg(e, "eps", path), fn = arg(e, "f_norm", path);
      const int df = iarg(e, "deg_f", path);
      note("m", p.m), note("L", p.loja), note("gamma", p.gamma), note("eps", eps), note("f_norm", fn), note("deg_f", df);
      value = pop_level_for(p, eps, fn, df);
    } else if (kind == "ocp") {
      const int d = iarg(e, "d", path), df = iarg(e, "deg_f", path);
      const double eta = arg(e, "eta", path);
      note("m", p.m), note("L", p.loja), note("gamma", p.gamma), note("A", p.A), note("B", p.B), note("C", p.C);
      note("d", d), note("eta", eta), note("deg_f", df);
      value = ocp_degree_bound(p, d, eta, df);
    } else if (kind == "volume") {
      const double eps = arg(e, "eps", path);
      note("m", p.m), note("L_hat", p.loja_hat), note("gamma", p.gamma), note("C", p.vol_C), note("c_G", p.c_G);
      note("eps", eps);
      value = volume_degree_bound(p, eps);
    } else if (kind == "exponent") {
      if (!e.contains("rate") || !e["rate"].is_string()) throw ParseError(path + ".rate", "missing string");
      RateKind rk;
      try {
        rk = parse_rate_kind(e["rate"].get<std::string>());
      } catch (const std::invalid_argument& ex) {
        throw ParseError(path + ".rate", ex.what());
      }
      const auto ex = theoretical_exponent(rk, p);
      args = std::string("rate=") + to_string(rk) + ";formula=" + ex.formula;
      value = ex.logarithmic ? 0.0 : ex.alpha;
    } else {
      throw ParseError(path + ".kind", "unknown bound kind '" + kind + "'");
    }
    t.add_row({std::to_string(i), kind, args, format_double(value)});
    records.push_back({{"index", i}, {"kind", kind}, {"arguments", args}, {"value", num(value)}});
  }
  const io::Provenance prov{c.canonical() + "\n" + slurp(c.input), c.tol};
  if (c.format == "json") {
    emit(c, json_text({{"version", io::kVersion}, {"config_hash", io::fnv1a64(prov.config)}, {"bounds", records}}), out);
  } else {
    emit(c, io::render_csv(t, prov), out);
  }
  return kOk;
}

double cell_number(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError(where, "not a number: '" + s + "'");
  }
  if (used != s.size()) throw ParseError(where, "not a number: '" + s + "'");
  return v;
}

int cmd_rate_fit(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const io::CsvData d = io::parse_csv(slurp(c.input));
  const std::size_t lc = d.column("level");
  std::size_t gc;
  if (!c.gap_column.empty()) {
    gc = d.column(c.gap_column);
  } else {
    try {
      gc = d.column("gap");
    } catch (const ParseError&) {
      gc = d.column("gap_vs_oracle");
    }
  }
  std::vector<double> levels, gaps;
  std::vector<std::string> filtered;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    const std::string where = "csv.row" + std::to_string(i + 1);
    if (d.rows[i][gc].empty()) {
      filtered.push_back(d.rows[i][lc] + ":missing");
      continue;
    }
    const double l = cell_number(d.rows[i][lc], where + ".level");
    const double g = std::abs(cell_number(d.rows[i][gc], where + "." + d.header[gc]));
    if (!std::isfinite(g) || g <= c.tol) {
      filtered.push_back(d.rows[i][lc] + ":" + d.rows[i][gc]);
      continue;
    }
    levels.push_back(l);
    gaps.push_back(g);
  }
  std::string note;
  for (const auto& f : filtered) note += (note.empty() ? "" : ";") + f;
  if (!filtered.empty()) {
    err << "note: " << filtered.size() << " row(s) with |gap| <= " << format_double(c.tol)
        << " or no gap were left out of the fit\n";
  }
  RateFit fit;
  try {
    fit = fit_rate(levels, gaps);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
  std::optional<Exponent> theory;
  if (!c.rate_kind.empty()) {
    RateParams p;
    if (c.loja) p.loja = p.loja_boundary = p.loja_hat = *c.loja;
    if (c.gamma) p.gamma = *c.gamma;
    if (c.s_param) p.s = *c.s_param;
    theory = theoretical_exponent(parse_rate_kind(c.rate_kind), p);
  }
  const io::Provenance prov{c.canonical() + "\n" + slurp(c.input), c.tol};
  if (c.format == "json") {
    json doc{{"version", io::kVersion},
             {"config_hash", io::fnv1a64(prov.config)},
             {"alpha", num(fit.alpha)},
             {"c", num(fit.c)},
             {"r2", num(fit.r2)},
             {"points", fit.points},
             {"filtered", filtered}};
    if (theory) doc["theoretical_alpha"] = theory->logarithmic ? json("logarithmic") : num(theory->alpha);
    emit(c, json_text(doc), out);
  } else {
    io::CsvTable t{{"alpha", "c", "r2", "points", "filtered", "theoretical_alpha"}, {}};
    const std::string th = !theory ? "" : (theory->logarithmic ? "logarithmic" : format_double(theory->alpha));
    t.add_row({format_double(fit.alpha), format_double(fit.c), format_double(fit.r2), std::to_string(fit.points),
               note, th});
    emit(c, io::render_csv(t, prov), out);
  }
  return kOk;
}

int cmd_oracle(const RunConfig& c, std::ostream& out, std::ostream&) {
  const io::Problem p = io::load_problem(c.input);
  const OracleValue v = desk_oracle(p, c);
  const io::Provenance prov{c.canonical() + "\n" + slurp(c.input), c.tol};
  if (c.format == "json") {
    emit(c,
         json_text({{"version", io::kVersion},
                    {"config_hash", io::fnv1a64(prov.config)},
                    {"kind", p.kind},
                    {"oracle", num(v.value)},
                    {"std_error", num(v.std_error)},
                    {"method", v.method}}),
         out);
  } else {
    io::CsvTable t{{"kind", "oracle", "std_error", "method"}, {}};
    t.add_row({p.kind, format_double(v.value), format_double(v.std_error), v.method});
    emit(c, io::render_csv(t, prov), out);
  }
  return kOk;
}

}  // namespace

std::pair<int, int> parse_levels(const std::string& text) {
  const auto dots = text.find("..");
  auto whole = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("--levels: '" + text + "' is not A..B");
    }
    if (used != s.size()) throw std::invalid_argument("--levels: '" + text + "' is not A..B");
    return v;
  };
  if (dots == std::string::npos) {
    const int a = whole(text);
    return {a, a};
  }
  return {whole(text.substr(0, dots)), whole(text.substr(dots + 2))};
}

void RunConfig::validate() const {
  if (level_min < 1) throw std::invalid_argument("--levels: levels start at 1");
  if (level_max < level_min) throw std::invalid_argument("--levels: empty range");
  if (!(tol > 0.0 && tol <= 1e-2)) throw std::invalid_argument("--tol: must lie in (0, 1e-2]");
  if (format != "csv" && format != "json") throw std::invalid_argument("--format: expected csv or json");
  if (samples < 1) throw std::invalid_argument("--samples: must be positive");
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os << "command=" << command << "\nlevels=" << level_min << ".." << level_max << "\ntol=" << format_double(tol)
     << "\nseed=" << seed << "\nformat=" << format << "\nsamples=" << samples
     << "\nwith_oracle=" << with_oracle << "\ngap_column=" << gap_column << "\nrate_kind=" << rate_kind;
  if (gamma) os << "\ngamma=" << format_double(*gamma);
  if (loja) os << "\nloja=" << format_double(*loja);
  if (s_param) os << "\ns=" << format_double(*s_param);
  return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moment-SoS hierarchy toolkit", "momsos"};
  app.set_version_flag("--version", io::kVersion);
  app.require_subcommand(1);

  RunConfig c;
  std::string levels;
  double gamma = 0.0, loja = 0.0, s_param = 0.0;

  auto common = [&](CLI::App* sub, bool with_levels) {
    sub->add_option("input", c.input, "Input file")->required();
    if (with_levels) sub->add_option("--levels", levels, "Level range A..B or a single level");
    sub->add_option("--tol", c.tol, "Solver tolerance");
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--out", c.out, "Output path");
    sub->add_option("--format", c.format, "csv or json");
    sub->add_option("--gamma", gamma, "Override gamma");
    sub->add_option("--loja", loja, "Override the Lojasiewicz exponent");
    sub->add_option("--s-param", s_param, "Override the smoothness parameter s");
  };
  auto* hier = app.add_subcommand("hierarchy", "Solve levels of the SoS tightening of a problem file");
  common(hier, true);
  hier->add_flag("--with-oracle", c.with_oracle, "Run the desk oracle when the file has no reference");
  hier->add_option("--samples", c.samples, "Monte-Carlo samples for volume oracles");
  auto* cert = app.add_subcommand("certify", "Check membership of p in Q_l(h) from {p, set, level}");
  common(cert, true);
  auto* bnd = app.add_subcommand("bounds", "Evaluate degree-bound calculators");
  common(bnd, false);
  auto* fit = app.add_subcommand("rate-fit", "Fit gap = C l^-alpha to a CSV with level and gap columns");
  common(fit, false);
  fit->add_option("--gap-column", c.gap_column, "Gap column (default gap, then gap_vs_oracle)");
  fit->add_option("--kind", c.rate_kind, "Rate kind for the theoretical exponent");
  auto* orc = app.add_subcommand("oracle", "Run the desk oracle of a problem file");
  common(orc, false);
  orc->add_option("--samples", c.samples, "Monte-Carlo samples for volume oracles");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kParseError;
  }

  try {
    c.command = app.get_subcommands().front()->get_name();
    if (!levels.empty()) {
      std::tie(c.level_min, c.level_max) = parse_levels(levels);
      c.levels_given = true;
    }
    for (const auto* sub : app.get_subcommands()) {
      if (sub->count("--gamma")) c.gamma = gamma;
      if (sub->count("--loja")) c.loja = loja;
      if (sub->count("--s-param")) c.s_param = s_param;
    }
    c.validate();
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  }

  try {
    if (c.command == "hierarchy") return cmd_hierarchy(c, out, err);
    if (c.command == "certify") return cmd_certify(c, out, err);
    if (c.command == "bounds") return cmd_bounds(c, out, err);
    if (c.command == "rate-fit") return cmd_rate_fit(c, out, err);
    return cmd_oracle(c, out, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
}

}  // namespace momsos::cli
