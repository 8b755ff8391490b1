#pragma once

#include <json.hpp>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sovchain/reconstruct.hpp"

namespace sovchain::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "1.0.0";

struct RunConfig {
  Model model = Model::Rational;
  int N = 0;
  std::vector<cplx> nu;
  Eigen::Matrix2cd twist = Eigen::Matrix2cd::Identity();
  std::uint64_t seed = 42;
  std::optional<int> samples;  // each command has its own default
  double tol = 1e-10;          // integrator local tolerance
  int flow = 1;
  double t_end = 1.0;
  Convention convention = Convention::Nonstandard;
  std::optional<std::vector<cplx>> point;  // explicit phase point, site-major
  bool reduced = false;                    // sample on the N = 2 reduction

  // Throws ConfigInvalid with the offending field in the message.
  ChainSpec spec() const;
  int samples_or(int fallback) const { return samples.value_or(fallback); }
};

// Parses and validates; every error is ConfigInvalid and names the field.
RunConfig parse_config(const json& j);
json config_to_json(const RunConfig& c);

json complex_to_json(cplx z);
cplx complex_from_json(const json& j, const std::string& field);

struct CheckRecord {
  std::string name;
  std::string paper_anchor;  // the formula the check verifies
  double max_residual = 0.0;
  double threshold = 0.0;
  bool pass = false;
  int samples_used = 0;
  std::string error;  // error kind when the check could not run
};

struct Report {
  std::string command;
  json config;
  std::vector<CheckRecord> checks;
  json result = json::object();
  std::optional<json> error;  // {"kind", "message"} when the command itself failed

  bool pass() const;
  json to_json() const;
};

Report cmd_verify(const RunConfig& cfg);
Report cmd_separate(const RunConfig& cfg);
// `separated` is the "result" object of a separate report (x, p, casimirs, point), or null.
Report cmd_reconstruct(const RunConfig& cfg, const json& separated = json());
Report cmd_evolve(const RunConfig& cfg, std::ostream& csv);

// 0 when every check passed and no error occurred, 1 otherwise.
int exit_code(const Report& r);

}  // namespace sovchain::cli
