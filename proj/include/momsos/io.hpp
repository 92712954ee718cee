#ifndef MOMSOS_IO_HPP_
#define MOMSOS_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "momsos/gmp.hpp"
#include "momsos/moments.hpp"
#include "momsos/poly.hpp"
#include "momsos/problems.hpp"
#include "momsos/semialg.hpp"
#include "momsos/sos.hpp"

namespace momsos::io {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

/// Malformed input. `field` is the JSON path of the offending entry.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// [{"exps": [..], "coef": c}, ...]
json to_json(const Polynomial& p);
/// dim < 0 infers the dimension from the first record; an empty array then
/// needs dim >= 1.
Polynomial parse_polynomial(const json& j, int dim, const std::string& path);

/// {"dim", "ineqs", "radius_R"?, "scale_factors"?}
json to_json(const SemialgebraicSet& s);
SemialgebraicSet parse_set(const json& j, const std::string& path);

/// {"kind": box|ball|dirac|table, "dim", "point"?, "max_degree"?, "entries"?}
json to_json(const MomentFunctional& t);
MomentFunctional parse_functional(const json& j, const std::string& path);

/// {"level", "generators", "blocks": [{"generator_index", "size", "entries"}], "residual"}
json to_json(const SosCertificate& c);

struct Problem {
  std::string kind;  // pop | volume | ocp | exit | gmp
  GmpDualModel model;
  /// True optimum supplied by the file ("reference"), used for gap columns.
  std::optional<double> reference;
  std::optional<OcpSpec> ocp;
  std::optional<ExitSpec> exit;
  std::optional<SemialgebraicSet> volume_set;
  std::optional<Polynomial> pop_f;
  std::optional<SemialgebraicSet> pop_set;
};

/// Builds the model of a problem file. Relative set references in gmp files
/// resolve against `base_dir`. Throws ParseError.
Problem parse_problem(const json& j, const std::filesystem::path& base_dir = {});
Problem load_problem(const std::filesystem::path& file);

json read_json_file(const std::filesystem::path& file);

/// %.17g
std::string format_double(double v);

std::uint64_t fnv1a64(const std::string& s);

/// Comma-separated table with a provenance header of '#' lines.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

struct Provenance {
  std::string config;  // canonical configuration text, hashed
  double tol = 0.0;
};

std::string render_csv(const CsvTable& t, const Provenance& p);

struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index; throws ParseError naming the column when missing.
  std::size_t column(const std::string& name) const;
};

/// Skips '#' lines; the first remaining line is the header.
CsvData parse_csv(const std::string& text);

}  // namespace momsos::io

#endif  // MOMSOS_IO_HPP_
