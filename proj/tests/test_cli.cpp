#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "sovchain/cli.hpp"

using namespace sovchain;
using namespace sovchain::cli;
using fixture::kind_of;

namespace {

json rational_n2(json twist = json::array({json::array({json::array({1, 0}), json::array({0, 0})}),
                                           json::array({json::array({0, 0}), json::array({0, 0})})})) {
  return json{{"model", "rational"},
              {"N", 2},
              {"nu", json::array({json::array({1, 0}), json::array({-1, 0})})},
              {"twist", twist},
              {"seed", 42},
              {"samples", 20}};
}

std::string error_message(const json& j) {
  try {
    parse_config(j);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigInvalid);
    return e.what();
  }
  FAIL("expected ConfigInvalid");
  return {};
}

const CheckRecord* find(const Report& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace

TEST_CASE("config parsing and validation") {
  const RunConfig c = parse_config(rational_n2());
  CHECK(c.N == 2);
  CHECK(c.nu[1] == cplx(-1.0, 0.0));
  CHECK(c.seed == 42);
  CHECK(c.twist(0, 0) == cplx(1.0, 0.0));
  CHECK(parse_config(config_to_json(c)).twist == c.twist);

  json trig = rational_n2(json::array({json::array({json::array({1, 0}), json::array({1, 0})}),
                                       json::array({json::array({0, 0}), json::array({0, 0})})}));
  trig["model"] = "trigonometric";
  CHECK(error_message(trig).find("twist") != std::string::npos);

  json bad = rational_n2();
  bad["twist"] = json::array({1, 2});
  CHECK(error_message(bad).find("twist") != std::string::npos);
  bad = rational_n2();
  bad["nu"] = json::array({json::array({1, 0})});
  CHECK(error_message(bad).find("nu") != std::string::npos);
  bad = rational_n2();
  bad["nu"] = json::array({json::array({1, 0}), json::array({1, 0})});
  CHECK(error_message(bad).find("nu") != std::string::npos);
  bad = rational_n2();
  bad["model"] = "elliptic";
  CHECK(error_message(bad).find("model") != std::string::npos);
  bad = rational_n2();
  bad["samples"] = 0;
  CHECK(error_message(bad).find("samples") != std::string::npos);
  bad = rational_n2();
  bad["colour"] = "red";
  CHECK(error_message(bad).find("colour") != std::string::npos);
  bad = rational_n2();
  bad["point"] = json::array({json::array({0, 0})});
  CHECK(error_message(bad).find("point") != std::string::npos);
}

TEST_CASE("verify: degenerate twist passes, identity twist fails separation only") {
  const Report ok = cmd_verify(parse_config(rational_n2()));
  CHECK(ok.pass());
  CHECK(exit_code(ok) == 0);
  CHECK(find(ok, "reconstruction_round_trip") != nullptr);

  const Report id = cmd_verify(parse_config(rational_n2(json::array(
      {json::array({json::array({1, 0}), json::array({0, 0})}), json::array({json::array({0, 0}), json::array({1, 0})})}))));
  CHECK_FALSE(id.pass());
  CHECK(exit_code(id) == 1);
  REQUIRE(find(id, "separation_residual") != nullptr);
  CHECK_FALSE(find(id, "separation_residual")->pass);
  CHECK(find(id, "rmatrix_symmetry_conditions")->pass);
  CHECK(find(id, "twist_compatibility")->pass);
  CHECK(find(id, "sklyanin_bracket")->pass);
  for (const auto& c : id.checks) CHECK_FALSE(c.paper_anchor.empty());
}

TEST_CASE("reports are deterministic") {
  const RunConfig c = parse_config(rational_n2());
  CHECK(cmd_verify(c).to_json().dump() == cmd_verify(c).to_json().dump());
  std::ostringstream a, b;
  const Report ra = cmd_evolve(c, a), rb = cmd_evolve(c, b);
  CHECK(ra.to_json().dump() == rb.to_json().dump());
  CHECK(a.str() == b.str());
  const json j = cmd_verify(c).to_json();
  CHECK(j["pass"].get<bool>());
  CHECK(j["version"] == kToolVersion);
  CHECK(j["config"]["seed"] == 42);
}

TEST_CASE("separate: roots of the special quadratic and degenerate spins") {
  const RunConfig c = parse_config(rational_n2());
  const Report r = cmd_separate(c);
  REQUIRE_FALSE(r.error);
  const auto& res = r.result;
  const cplx x1 = complex_from_json(res["x"][0], "x"), x2 = complex_from_json(res["x"][1], "x");
  const cplx i1 = complex_from_json(res["integrals"][1], "i"), i2 = complex_from_json(res["integrals"][2], "i");
  // c11 = 1: x1, x2 are the roots of u^2 + I1 u + I2.
  CHECK(std::abs(x1 * x1 + i1 * x1 + i2) < 1e-10);
  CHECK(std::abs(x2 * x2 + i1 * x2 + i2) < 1e-10);

  json z = rational_n2();
  z["point"] = json::array();
  for (int k = 0; k < 8; ++k) z["point"].push_back(json::array({0, 0}));
  const Report zr = cmd_separate(parse_config(z));
  REQUIRE(zr.error);
  CHECK((*zr.error)["kind"] == "DegenerateDegree");
  CHECK(exit_code(zr) == 1);
}

TEST_CASE("separate output feeds reconstruct") {
  for (const char* model : {"rational", "trigonometric"}) {
    json cfg = rational_n2();
    cfg["model"] = model;
    cfg["reduced"] = true;
    const RunConfig c = parse_config(cfg);
    const Report s = cmd_separate(c);
    REQUIRE_FALSE(s.error);
    // Round trip through text, as the command line does.
    const json reread = json::parse(s.to_json().dump());
    const Report r = cmd_reconstruct(parse_config(reread["config"]), reread["result"]);
    REQUIRE_FALSE(r.error);
    CHECK(r.result["round_trip_error"].get<double>() < 1e-7);
    CHECK(r.pass());
  }
  json n3 = rational_n2();
  n3["N"] = 3;
  n3["nu"].push_back(json::array({0.5, 0}));
  CHECK(kind_of([&] { cmd_reconstruct(parse_config(n3)); }) == ErrorKind::ConfigInvalid);
}

TEST_CASE("evolve: angle slopes, conservation, zero time") {
  json cfg = rational_n2();
  cfg["t_end"] = 1.0;
  std::ostringstream csv;
  const Report r = cmd_evolve(parse_config(cfg), csv);
  CHECK(r.pass());
  const json& a0 = r.result["angles"][0];
  // t_1 flow with c11 = 1: phi_1 grows with unit slope.
  CHECK(std::abs(complex_from_json(a0["fitted_slope"], "s") - cplx(1.0, 0.0)) < 1e-6);
  CHECK(find(r, "conservation_casimirs")->max_residual < 1e-8);
  CHECK(csv.str().rfind("t,", 0) == 0);

  cfg["t_end"] = 0.0;
  std::ostringstream csv0;
  const Report z = cmd_evolve(parse_config(cfg), csv0);
  CHECK(z.result["samples"] == 1);
  for (const auto& c : z.checks) CHECK(c.max_residual == 0.0);
  const std::string text = csv0.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}
