// afkg: run, validate and list experiments.
//
//   afkg run <config> [--seed S] [--out DIR]
//   afkg validate <config>
//   afkg list-experiments
//
// Exit codes: 0 success, 2 validation failure, 3 runtime rejection.
// AFKG_WORKERS caps the worker pool.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "afkg/harness.hpp"
#include "afkg/lattice.hpp"

namespace {

constexpr int kValidationExit = 2;
constexpr int kRuntimeExit = 3;

int report_validation(const afkg::harness::ValidationError& e) {
  for (const auto& d : e.diagnostics()) std::cerr << "invalid: " << d << '\n';
  return kValidationExit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate FKG experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "run an experiment config and write its output bundle");
  run->add_option("config", config_path, "config file (JSON)")->required();
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out", out_dir, "output directory (overrides the config)");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "statically validate a config");
  validate->add_option("config", validate_path, "config file (JSON)")->required();

  auto* list = app.add_subcommand("list-experiments", "list experiment kinds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationExit;
  }

  using namespace afkg::harness;
  if (*list) {
    for (const auto& k : experiment_kinds()) std::cout << k.name << "\t" << k.description << '\n';
    return 0;
  }

  if (*validate) {
    try {
      const auto diags = afkg::harness::validate(load_json_file(validate_path));
      for (const auto& d : diags) std::cout << d << '\n';
      if (!diags.empty()) return kValidationExit;
      std::cout << "ok\n";
      return 0;
    } catch (const ValidationError& e) {
      return report_validation(e);
    }
  }

  ExperimentConfig config;
  try {
    auto doc = load_json_file(config_path);
    if (seed) doc["seed"] = *seed;
    config = parse_config(doc);
  } catch (const ValidationError& e) {
    return report_validation(e);
  }
  std::string dir = out_dir;
  if (dir.empty()) dir = config.output.value_or("");
  if (dir.empty()) {
    std::cerr << "invalid: no output directory (use --out or set \"output\")\n";
    return kValidationExit;
  }
  try {
    const auto bundle = afkg::harness::run(config, dir);
    std::cout << "wrote " << bundle.files.size() << " files to " << dir << '\n';
    for (const auto& f : bundle.files)
      if (f.name != "manifest.json") std::cout << "  " << f.name << "  " << sha256_hex(f.content) << '\n';
    return 0;
  } catch (const afkg::Rejected& e) {
    std::cerr << "rejected: " << e.what() << '\n';
    return kRuntimeExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeExit;
  }
}
