#include <cmath>

#include "sovchain/cli.hpp"
#include "sovchain/errors.hpp"

namespace sovchain::cli {

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::ConfigInvalid, field + ": " + what);
}

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j, const std::string& field) {
  if (j.is_number()) return cplx(j.get<double>(), 0.0);
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    invalid(field, "expected a complex number written as [re, im]");
  const cplx z(j[0].get<double>(), j[1].get<double>());
  if (!finite(z)) invalid(field, "entries must be finite");
  return z;
}

RunConfig parse_config(const json& j) {
  if (!j.is_object()) invalid("config", "expected a JSON object");
  static const char* known[] = {"model", "N",  "nu",    "twist",      "seed",  "samples", "tol",
                                "flow",  "t_end", "convention", "point", "reduced"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) invalid(it.key(), "unknown field");
  }
  RunConfig c;

  if (!j.contains("model") || !j["model"].is_string()) invalid("model", "expected \"rational\" or \"trigonometric\"");
  const std::string model = j["model"].get<std::string>();
  if (model == "rational") c.model = Model::Rational;
  else if (model == "trigonometric") c.model = Model::Trigonometric;
  else invalid("model", "expected \"rational\" or \"trigonometric\"");

  if (!j.contains("N") || !j["N"].is_number_integer() || j["N"].get<long long>() < 1 || j["N"].get<long long>() > 64)
    invalid("N", "expected an integer between 1 and 64");
  c.N = j["N"].get<int>();

  if (!j.contains("nu") || !j["nu"].is_array()) invalid("nu", "expected a list of [re, im] pairs");
  if (static_cast<int>(j["nu"].size()) != c.N) invalid("nu", "expected N = " + std::to_string(c.N) + " entries");
  for (std::size_t k = 0; k < j["nu"].size(); ++k) c.nu.push_back(complex_from_json(j["nu"][k], "nu"));

  if (!j.contains("twist")) invalid("twist", "missing");
  const json& t = j["twist"];
  if (!t.is_array() || t.size() != 2 || !t[0].is_array() || t[0].size() != 2 || !t[1].is_array() || t[1].size() != 2)
    invalid("twist", "expected a 2x2 array of [re, im] pairs");
  for (int r = 0; r < 2; ++r)
    for (int col = 0; col < 2; ++col) c.twist(r, col) = complex_from_json(t[r][col], "twist");

  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0) invalid("seed", "expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("samples")) {
    if (!j["samples"].is_number_integer() || j["samples"].get<long long>() < 1 || j["samples"].get<long long>() > 1000000)
      invalid("samples", "expected a positive integer");
    c.samples = j["samples"].get<int>();
  }
  if (j.contains("tol")) {
    if (!j["tol"].is_number() || !(j["tol"].get<double>() > 0.0) || !std::isfinite(j["tol"].get<double>()))
      invalid("tol", "expected a positive number");
    c.tol = j["tol"].get<double>();
  }
  if (j.contains("flow")) {
    if (!j["flow"].is_number_integer()) invalid("flow", "expected an integer");
    c.flow = j["flow"].get<int>();
  }
  if (c.flow < 0 || c.flow > c.N) invalid("flow", "expected an index between 0 and N");
  if (j.contains("t_end")) {
    if (!j["t_end"].is_number() || !std::isfinite(j["t_end"].get<double>())) invalid("t_end", "expected a finite number");
    c.t_end = j["t_end"].get<double>();
  }
  if (j.contains("convention")) {
    if (!j["convention"].is_string()) invalid("convention", "expected \"standard\" or \"nonstandard\"");
    const std::string conv = j["convention"].get<std::string>();
    if (conv == "standard") c.convention = Convention::Standard;
    else if (conv == "nonstandard") c.convention = Convention::Nonstandard;
    else invalid("convention", "expected \"standard\" or \"nonstandard\"");
  }
  if (j.contains("point")) {
    const json& p = j["point"];
    const int want = c.N * site_width(c.model);
    if (!p.is_array() || static_cast<int>(p.size()) != want)
      invalid("point", "expected " + std::to_string(want) + " [re, im] entries");
    std::vector<cplx> v;
    for (const auto& e : p) v.push_back(complex_from_json(e, "point"));
    c.point = std::move(v);
  }
  if (j.contains("reduced")) {
    if (!j["reduced"].is_boolean()) invalid("reduced", "expected true or false");
    c.reduced = j["reduced"].get<bool>();
  }
  c.spec();  // surfaces pole and twist problems now
  return c;
}

ChainSpec RunConfig::spec() const {
  try {
    return ChainSpec::make(model, nu, TwistMatrix(twist));
  } catch (const Error& e) {
    // The spec's own messages start with the field name.
    std::string detail = e.what();
    detail = detail.substr(detail.find(": ") + 2);
    throw Error(ErrorKind::ConfigInvalid, detail);
  }
}

json config_to_json(const RunConfig& c) {
  json j;
  j["model"] = std::string(to_string(c.model));
  j["N"] = c.N;
  j["nu"] = json::array();
  for (const auto& v : c.nu) j["nu"].push_back(complex_to_json(v));
  j["twist"] = json::array();
  for (int r = 0; r < 2; ++r) j["twist"].push_back(json::array({complex_to_json(c.twist(r, 0)), complex_to_json(c.twist(r, 1))}));
  j["seed"] = c.seed;
  if (c.samples) j["samples"] = *c.samples;
  j["tol"] = c.tol;
  j["flow"] = c.flow;
  j["t_end"] = c.t_end;
  j["convention"] = std::string(to_string(c.convention));
  if (c.point) {
    j["point"] = json::array();
    for (const auto& v : *c.point) j["point"].push_back(complex_to_json(v));
  }
  j["reduced"] = c.reduced;
  return j;
}

bool Report::pass() const {
  if (error) return false;
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

json Report::to_json() const {
  json j;
  j["tool"] = "sovchain";
  j["version"] = kToolVersion;
  j["command"] = command;
  j["config"] = config;
  j["checks"] = json::array();
  for (const auto& c : checks) {
    json r;
    r["name"] = c.name;
    r["paper_anchor"] = c.paper_anchor;
    // Non-finite residuals are not representable in JSON numbers.
    if (std::isfinite(c.max_residual)) r["max_residual"] = c.max_residual;
    else r["max_residual"] = nullptr;
    r["threshold"] = c.threshold;
    r["pass"] = c.pass;
    r["samples_used"] = c.samples_used;
    if (!c.error.empty()) r["error"] = c.error;
    j["checks"].push_back(std::move(r));
  }
  j["result"] = result;
  if (error) j["error"] = *error;
  j["pass"] = pass();
  return j;
}

int exit_code(const Report& r) { return r.pass() ? 0 : 1; }

}  // namespace sovchain::cli
