// Acceptance driver: one PASS/FAIL line per criterion.
//
//   neuronlab_acceptance            all criteria
//   neuronlab_acceptance 3 9        just these
//
// Tolerances and budgets live with each criterion in core/src/acceptance.cpp.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "neuronlab/acceptance.hpp"

int main(int argc, char** argv) {
  neuronlab::AcceptanceOptions opts;
  opts.cli_path = NEURONLAB_CLI_PATH;
  opts.scratch_dir =
      (std::filesystem::current_path() / "acceptance_scratch").string();

  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    int id = 0;
    const auto [p, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), id);
    if (ec != std::errc() || p != arg.data() + arg.size()) {
      std::cerr << "not a criterion id: " << arg << '\n';
      return 2;
    }
    ids.push_back(id);
  }
  if (ids.empty()) ids = neuronlab::criterion_ids();

  bool all = true;
  for (int id : ids) {
    const auto r = neuronlab::run_criterion(id, opts);
    std::cout << neuronlab::format_result(r) << std::endl;
    for (const auto& rep : r.reports) {
      if (rep.passed || rep.informational || rep.note.empty()) continue;
      std::cout << "  " << rep.theorem_id << ": " << rep.note << '\n';
    }
    all = all && r.passed;
  }
  return all ? EXIT_SUCCESS : EXIT_FAILURE;
}
