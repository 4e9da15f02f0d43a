#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "neuronlab/config.hpp"
#include "neuronlab/errors.hpp"
#include "neuronlab/experiments.hpp"

using namespace neuronlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& leaf) {
  const fs::path p = fs::temp_directory_path() / "neuronlab_harness_test" / leaf;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// A small fig1 so the harness tests run in seconds.
ExperimentSpec small_fig1() {
  ExperimentSpec s = builtin_fig1();
  s.apply_override("iterations=200");
  s.apply_override("mc_samples=2000");
  s.apply_override("grid=10");
  s.apply_override("grid_samples=200");
  return s;
}

}  // namespace

TEST(Harness, RegistryNames) {
  std::set<std::string> names;
  for (const auto& s : builtin_registry()) names.insert(s.name);
  const std::set<std::string> expect = {
      "thm31_failure", "thm33_strict_rate", "thm42_correlation", "lemB1_pie_slice",
      "lem51_init_prob", "thm53_gd_rate", "thm53_sgd", "lem61_angle",
      "lem62_norm_region", "thm63_flow_rate", "sec32_variance", "fig1"};
  EXPECT_EQ(names, expect);
  const auto t = find_experiment("thm31_failure");
  EXPECT_EQ(t.trials, 1000);
  EXPECT_EQ(t.get_int("dim"), 20);
  EXPECT_THROW(find_experiment("nope"), ConfigError);
}

TEST(Harness, Overrides) {
  ExperimentSpec s = find_experiment("lem51_init_prob");
  s.apply_override("seed=9");
  s.apply_override("trials=3");
  s.apply_override("samples=1e4");
  EXPECT_EQ(s.seed, 9u);
  EXPECT_EQ(s.trials, 3);
  EXPECT_EQ(s.get_int("samples"), 10000);
  EXPECT_THROW(s.apply_override("sampels=10"), ConfigError);
  EXPECT_THROW(s.apply_override("novalue"), ConfigError);
  EXPECT_THROW(s.get_double("dims"), ConfigError);
}

TEST(Harness, ListSplitting) {
  const auto parts = split_list("(-1,1),(-1,0.5),zero");
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts[0], "(-1,1)");
  EXPECT_EQ(parts[2], "zero");
  EXPECT_THROW(parse_double("abc", "x"), ConfigError);
  EXPECT_EQ(parse_int("100000", "n"), 100000);
}

TEST(Harness, BadActivationKeyIsNamed) {
  ExperimentSpec s = find_experiment("thm42_correlation");
  s.apply_override("act=rleu");
  try {
    execute_experiment(s);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("rleu"), std::string::npos);
  }
}

TEST(Harness, InitializerKeys) {
  EXPECT_TRUE(parse_initializer("normal:mean=0,sd=0.2").is_product());
  EXPECT_FALSE(parse_initializer("sphere:r=1").is_product());
  EXPECT_EQ(initialize(parse_initializer("fixed:(-1,0.5)"), 2, 0)[1], 0.5);
  EXPECT_THROW(parse_initializer("gaussian:tau=-1"), ConfigError);
}

TEST(Harness, Fig1RunWritesPlotFilesDeterministically) {
  const auto spec = small_fig1();
  const fs::path a = scratch("a");
  const fs::path b = scratch("b");
  const auto ma = run_experiment(spec, a.string());
  run_experiment(spec, b.string());

  int angle = 0, path = 0, traj = 0;
  for (const auto& f : ma.files) {
    angle += f.rfind("angle_", 0) == 0;
    path += f.rfind("path_", 0) == 0;
    traj += f.rfind("trajectory_", 0) == 0;
  }
  EXPECT_EQ(traj, 3);
  EXPECT_EQ(angle + path, 6);

  const fs::path dir = fs::path(ma.directory);
  const std::string angle0 = slurp(dir / "angle_0.csv");
  EXPECT_EQ(angle0.substr(0, angle0.find('\n')), "iter,angle_rad");
  const std::string path0 = slurp(dir / "path_0.csv");
  EXPECT_EQ(path0.substr(0, path0.find('\n')), "iter,w0,w1");
  EXPECT_TRUE(fs::exists(dir / "manifest.txt"));

  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a);
    EXPECT_EQ(slurp(entry.path()), slurp(b / rel)) << rel;
  }
}

TEST(Harness, AnglesStayInRange) {
  const auto res = execute_experiment(small_fig1());
  ASSERT_EQ(res.trajectories.size(), 3u);
  for (const auto& [stem, traj] : res.trajectories) {
    for (const auto& e : traj.entries) {
      ASSERT_TRUE(e.angle.has_value());
      EXPECT_GT(*e.angle, 0.0);
      EXPECT_LE(*e.angle, 3.14159265358979324);
    }
  }
}
