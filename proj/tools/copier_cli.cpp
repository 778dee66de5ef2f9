// Command-line front end: copier generate | train | evaluate | check.

#include "copier/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace copier::harness;

int main(int argc, char** argv) {
  CLI::App app{"Two-view policy co-training experiments"};
  app.fallthrough();
  app.require_subcommand(0, 1);

  std::string config_path, mode_name = "copier", out = "run";
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool print_config = false;
  app.add_option("--config", config_path, "key = value settings file")->check(CLI::ExistingFile);
  app.add_option("--mode", mode_name, "copier, single-A or single-B");
  auto* seed_opt = app.add_option("--seed", seed, "run seed");
  app.add_option("--out", out, "run directory");
  app.add_option("--set", overrides, "override one setting, key=value (repeatable)");
  app.add_flag("--print-config", print_config, "print the effective settings and exit");

  auto* generate = app.add_subcommand("generate", "write instances and the train/validation/test manifest");
  auto* train = app.add_subcommand("train", "train policies on the run directory's instances");
  auto* evaluate = app.add_subcommand("evaluate", "evaluate checkpoints on the test split");
  auto* check = app.add_subcommand("check", "exit nonzero if the run directory is incomplete");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = RunConfig::defaults();
    // Later commands reuse the settings echoed by generate unless a file is given.
    const auto echoed = std::filesystem::path(out) / "config.txt";
    if (!config_path.empty())
      cfg.load(config_path);
    else if (!generate->parsed() && std::filesystem::exists(echoed))
      cfg.load(echoed.string());
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed_opt->count() > 0) cfg.set("seed", std::to_string(seed));
    const RunMode mode = parse_run_mode(mode_name);

    if (print_config) {
      cfg.write(std::cout);
      return 0;
    }
    if (generate->parsed()) {
      const auto set = cmd_generate(cfg, out);
      std::cout << "wrote " << set.instances.size() << " instances to " << out << '\n';
    } else if (train->parsed()) {
      const auto outcome = cmd_train(cfg, out, mode);
      std::cout << "trained " << to_string(mode) << " for " << outcome.history.records.size() << " iterations\n";
    } else if (evaluate->parsed()) {
      const auto rows = cmd_evaluate(cfg, out, mode);
      double sum = 0;
      for (const auto& r : rows) sum += r.final_reward;
      std::cout << "evaluated " << rows.size() << " test instances, mean final reward "
                << format_number(rows.empty() ? 0.0 : sum / static_cast<double>(rows.size())) << '\n';
    } else if (check->parsed()) {
      const auto missing = missing_outputs(out, mode);
      for (const auto& f : missing) std::cout << "missing " << f << '\n';
      if (!missing.empty()) return 1;
      std::cout << "complete\n";
    } else {
      std::cout << app.help();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
