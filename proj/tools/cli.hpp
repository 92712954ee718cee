#ifndef MOMSOS_TOOLS_CLI_HPP_
#define MOMSOS_TOOLS_CLI_HPP_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace momsos::cli {

enum ExitCode { kOk = 0, kNotCertified = 1, kParseError = 2, kSolverFailure = 3 };

struct RunConfig {
  std::string command;
  std::string input;
  int level_min = 1;
  int level_max = 1;
  double tol = 1e-8;
  std::uint64_t seed = 1;
  std::string out;  // empty: the output stream
  std::string format = "csv";
  std::optional<double> gamma;
  std::optional<double> loja;
  std::optional<double> s_param;
  bool with_oracle = false;
  std::size_t samples = 1000000;
  std::string gap_column;
  std::string rate_kind;
  bool levels_given = false;

  /// Throws std::invalid_argument naming the offending flag.
  void validate() const;
  /// Canonical text hashed into the provenance header.
  std::string canonical() const;
};

/// "A..B" or "A".
std::pair<int, int> parse_levels(const std::string& text);

/// Entry point shared by the binary and the tests. argv[0] is ignored.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace momsos::cli

#endif  // MOMSOS_TOOLS_CLI_HPP_
