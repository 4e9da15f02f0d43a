#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "neuronlab/acceptance.hpp"
#include "neuronlab/config.hpp"
#include "neuronlab/errors.hpp"
#include "neuronlab/experiments.hpp"

namespace {

int cmd_list() {
  for (const auto& spec : neuronlab::builtin_registry()) {
    std::cout << spec.name << "  " << spec.description << '\n';
  }
  return 0;
}

int cmd_run(const std::string& name, const std::string& seed,
            const std::string& trials, const std::vector<std::string>& sets,
            const std::string& config) {
  neuronlab::ExperimentSpec spec = neuronlab::find_experiment(name);
  if (!config.empty()) {
    for (const auto& line : neuronlab::read_config_lines(config)) {
      spec.apply_override(line);
    }
  }
  if (!trials.empty()) spec.apply_override("trials=" + trials);
  if (!seed.empty()) spec.apply_override("seed=" + seed);
  for (const auto& s : sets) spec.apply_override(s);

  const neuronlab::RunManifest m = neuronlab::run_experiment(spec);
  std::cout << m.to_text();
  std::cout << "output: " << m.directory << '\n';
  std::cout << "wall_seconds: " << m.wall_seconds << '\n';
  return m.passed() ? 0 : 1;
}

int cmd_check_all(std::uint64_t seed, const std::vector<int>& only) {
  neuronlab::AcceptanceOptions opts;
  opts.seed = seed;
  std::error_code ec;
  const auto self = std::filesystem::read_symlink("/proc/self/exe", ec);
  if (!ec) opts.cli_path = self.string();
  opts.scratch_dir = neuronlab::default_output_root() + "/check-all";

  const std::vector<int> ids = only.empty() ? neuronlab::criterion_ids() : only;
  bool all = true;
  for (int id : ids) {
    const auto r = neuronlab::run_criterion(id, opts);
    std::cout << neuronlab::format_result(r) << std::endl;
    all = all && r.passed;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neuronlab: single-neuron teacher-student experiments"};
  app.require_subcommand(1);

  app.add_subcommand("list", "List registered experiments");

  auto* run = app.add_subcommand("run", "Run one experiment");
  std::string name;
  std::string seed;
  std::string trials;
  std::string config;
  std::vector<std::string> sets;
  run->add_option("name", name, "Experiment name")->required();
  run->add_option("--seed", seed, "Base seed (unsigned 64-bit)");
  run->add_option("--trials", trials, "Number of trials");
  run->add_option("--set", sets, "Parameter override key=value")->take_all();
  run->add_option("--config", config, "File of key=value lines");

  auto* check = app.add_subcommand("check-all", "Run the acceptance suite");
  std::uint64_t check_seed = 1;
  std::vector<int> only;
  check->add_option("--seed", check_seed, "Base seed");
  check->add_option("--only", only, "Run only these criterion numbers");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("list")) return cmd_list();
    if (app.got_subcommand("run")) return cmd_run(name, seed, trials, sets, config);
    return cmd_check_all(check_seed, only);
  } catch (const neuronlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
