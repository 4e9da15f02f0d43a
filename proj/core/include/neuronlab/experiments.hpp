#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "neuronlab/config.hpp"
#include "neuronlab/optimize.hpp"
#include "neuronlab/theory.hpp"

namespace neuronlab {

// In-memory outcome of an experiment, before anything touches disk.
struct ExperimentResult {
  std::vector<TheoremReport> reports;
  // (file stem, trajectory); written as <stem>.csv.
  std::vector<std::pair<std::string, Trajectory>> trajectories;
  // (file name, contents) for anything else the experiment produces.
  std::vector<std::pair<std::string, std::string>> files;
  // Per-trial failures that did not abort the batch.
  std::vector<std::string> trial_errors;

  bool passed() const;
};

struct RunManifest {
  ExperimentSpec spec;
  std::string directory;
  std::vector<std::string> files;  // relative to directory
  std::vector<TheoremReport> reports;
  std::vector<std::string> trial_errors;
  double wall_seconds = 0.0;  // printed, never written, so reruns match
  std::string version;

  bool passed() const;
  std::string to_text() const;
};

std::string artifact_version();

// The twelve named experiments with desk-scale defaults.
std::vector<ExperimentSpec> builtin_registry();

// Shifted-Gaussian GD from three fixed starts, angle tracked per iterate.
ExperimentSpec builtin_fig1();

// Registry lookup; ConfigError for unknown names.
ExperimentSpec find_experiment(std::string_view name);

// Runs the experiment and returns its reports and artifacts without
// writing files.
ExperimentResult execute_experiment(const ExperimentSpec& spec);

// NEURONLAB_OUT if set, else "out".
std::string default_output_root();

// Executes, writes <root>/<name>/<seed>/{*.csv, report.txt, manifest.txt}
// and returns the manifest. The manifest is written last, atomically.
RunManifest run_experiment(const ExperimentSpec& spec,
                           const std::string& output_root = default_output_root());

// For every trajectory CSV in the manifest writes angle_<k>.csv
// (iter,angle_rad) and path_<k>.csv (iter,w0,w1) and appends them to
// manifest.files. Returns the new paths.
std::vector<std::string> emit_plot_data(RunManifest& manifest);

// Parses "gaussian:tau=0.1", "normal:mean=0,sd=0.2", "uniform:lo=-1,hi=1",
// "fixed:(a,b,...)", "zero", "sphere:r=1".
Initializer parse_initializer(std::string_view key);

}  // namespace neuronlab
