#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "neuronlab/theory.hpp"

namespace neuronlab {

struct AcceptanceOptions {
  std::uint64_t seed = 1;
  // neuronlab executable for the determinism gate; empty runs fig1
  // in-process instead.
  std::string cli_path;
  // Scratch space for the determinism gate's output trees.
  std::string scratch_dir = "acceptance_scratch";
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
  std::vector<TheoremReport> reports;
};

// 1..12.
std::vector<int> criterion_ids();

// Runs one criterion. Errors are caught and turned into a failed result.
CriterionResult run_criterion(int id, const AcceptanceOptions& opts);

// "PASS [3] title: detail (12.3 s / 300 s)".
std::string format_result(const CriterionResult& r);

}  // namespace neuronlab
