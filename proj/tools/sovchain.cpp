#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sovchain/cli.hpp"
#include "sovchain/errors.hpp"

using sovchain::Error;
using sovchain::ErrorKind;
using namespace sovchain::cli;

namespace {

void emit(const json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ConfigInvalid, "out: cannot open " + path);
  out << text;
}

json config_error(const std::string& command, const std::string& message) {
  json j;
  j["tool"] = "sovchain";
  j["version"] = kToolVersion;
  j["command"] = command;
  j["error"] = json{{"kind", "ConfigInvalid"}, {"message", message}};
  j["pass"] = false;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Separation of variables for classical XXX/XXZ chains with a degenerate twist"};
  app.require_subcommand(1, 1);

  std::string config_path, out_path, report_path, convention;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples, flow;
  std::optional<double> tol, t_end;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config JSON (or a separate report, for reconstruct)")->required();
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--samples", samples, "sample points (verify, reconstruct) or time samples (evolve)");
    sub->add_option("--tol", tol, "integrator local tolerance");
    sub->add_option("--convention", convention, "standard or nonstandard");
  };
  CLI::App* verify = app.add_subcommand("verify", "run every identity check on random points");
  CLI::App* separate = app.add_subcommand("separate", "compute separated variables at one point");
  CLI::App* evolve = app.add_subcommand("evolve", "integrate a commuting flow and check the Abel equations");
  CLI::App* reconstruct = app.add_subcommand("reconstruct", "invert the N = 2 separation");
  for (CLI::App* sub : {verify, separate, evolve, reconstruct}) add_common(sub);
  for (CLI::App* sub : {verify, separate, reconstruct}) sub->add_option("--out", out_path, "report path (default stdout)");
  evolve->add_option("--out", out_path, "trajectory CSV path (default trajectory.csv)");
  evolve->add_option("--report", report_path, "report path (default stdout)");
  evolve->add_option("--flow", flow, "index k of the Hamiltonian I_k");
  evolve->add_option("--t-end", t_end, "final time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  json raw, separated;
  try {
    std::ifstream in(config_path);
    if (!in) throw Error(ErrorKind::ConfigInvalid, "config: cannot open " + config_path);
    try {
      raw = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::ConfigInvalid, std::string("config: not valid JSON (") + e.what() + ")");
    }
    // A separate report carries its config and the separated data.
    if (raw.is_object() && raw.contains("command") && raw.contains("config")) {
      if (raw.contains("result")) separated = raw["result"];
      raw = json(raw["config"]);
    }
    if (seed) raw["seed"] = *seed;
    if (samples) raw["samples"] = *samples;
    if (tol) raw["tol"] = *tol;
    if (!convention.empty()) raw["convention"] = convention;
    if (flow) raw["flow"] = *flow;
    if (t_end) raw["t_end"] = *t_end;
    const RunConfig cfg = parse_config(raw);

    Report rep;
    if (command == "verify") {
      rep = cmd_verify(cfg);
      emit(rep.to_json(), out_path);
    } else if (command == "separate") {
      rep = cmd_separate(cfg);
      emit(rep.to_json(), out_path);
    } else if (command == "reconstruct") {
      rep = cmd_reconstruct(cfg, separated);
      emit(rep.to_json(), out_path);
    } else {
      const std::string csv_path = out_path.empty() ? "trajectory.csv" : out_path;
      std::ofstream csv(csv_path);
      if (!csv) throw Error(ErrorKind::ConfigInvalid, "out: cannot open " + csv_path);
      rep = cmd_evolve(cfg, csv);
      json j = rep.to_json();
      j["result"]["csv"] = csv_path;
      emit(j, report_path);
    }
    return exit_code(rep);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ConfigInvalid) {
      std::cerr << e.what() << "\n";
      return 1;
    }
    std::string msg = e.what();
    emit(config_error(command, msg.substr(msg.find(": ") + 2)), command == "evolve" ? report_path : out_path);
    return 2;
  }
}
