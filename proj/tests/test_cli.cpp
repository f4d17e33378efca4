#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cli.hpp"
#include "specinv/algebra.hpp"
#include "specinv/algebra_json.hpp"

using namespace specinv;
using cli::run;

namespace {

nlohmann::json without_time(nlohmann::json j) {
  j.erase("wall_time_s");
  return j;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("specinv_test_" + name)).string();
}

}  // namespace

TEST(Cli, SpectralOfCosine) {
  auto r = run({"spectral", "--base", "s1:256", "--expr", "cos(x1)"});
  ASSERT_EQ(r.exit_code, cli::kExitPass) << r.report.dump();
  EXPECT_EQ(r.report["schema"], "v1");
  EXPECT_EQ(r.report["command"], "spectral");
  EXPECT_EQ(r.report["verdict"], "pass");
  EXPECT_NEAR(r.report["results"]["gamma"].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(r.report["results"]["beta"].get<double>(), 0.0, 1e-12);
  for (const char* key : {"inputs", "seed", "tolerance", "results", "failures", "wall_time_s"})
    EXPECT_TRUE(r.report.contains(key)) << key;
}

TEST(Cli, KsCheckFailsOnQuartic) {
  auto r = run({"ks-check", "--base", "point", "--fiber", "1:513:4", "--expr", "xi1^4 - 2*xi1^2"});
  EXPECT_EQ(r.exit_code, cli::kExitFail) << r.report.dump();
  EXPECT_EQ(r.report["verdict"], "fail");
  EXPECT_EQ(r.report["results"]["holds"], false);
  EXPECT_NEAR(r.report["results"]["beta"].get<double>(), 1.0, 0.02);
  EXPECT_NEAR(r.report["results"]["gamma"].get<double>(), 0.0, 0.02);
  EXPECT_FALSE(r.report["failures"].empty());
}

TEST(Cli, KsCheckPassesOnGraph) {
  auto r = run({"ks-check", "--base", "t2:16x16", "--expr", "sin(x1)*cos(x2)"});
  EXPECT_EQ(r.exit_code, cli::kExitPass) << r.report.dump();
}

TEST(Cli, InputErrors) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"spectral", "--expr", "cos(y)"},
           {"spectral", "--bogus"},
           {"spectral"},
           {"spectral", "--base", "s3:9", "--expr", "0"},
           {"spectral", "--base", "point", "--fiber", "1:2", "--expr", "xi1^2"},
           {"nonsense"},
           {},
           {"fuzz", "--check", "nope"},
           {"algebra-check", "--file", "/nonexistent/system.json"}}) {
    auto r = run(args);
    EXPECT_EQ(r.exit_code, cli::kExitInput) << r.report.dump();
    EXPECT_EQ(r.report["verdict"], "input-error");
    EXPECT_TRUE(r.report.contains("error"));
  }
}

TEST(Cli, MarginViolationIsInputError) {
  auto r = run({"spectral", "--base", "point", "--fiber", "1:65:2", "--cutoff", "5:6", "--expr", "xi1^4"});
  EXPECT_EQ(r.exit_code, cli::kExitInput) << r.report.dump();
}

TEST(Cli, Deterministic) {
  const std::vector<std::string> args{"fuzz", "--check", "oscillation", "--trials", "4", "--seed", "11"};
  auto a = run(args), b = run(args);
  EXPECT_EQ(a.exit_code, cli::kExitPass);
  EXPECT_EQ(without_time(a.report), without_time(b.report));
  auto c = run({"fuzz", "--check", "oscillation", "--trials", "4", "--seed", "12"});
  EXPECT_NE(without_time(a.report)["trials"], without_time(c.report)["trials"]);
}

TEST(Cli, AlgebraCheckFromFile) {
  const auto path = temp_path("system.json");
  {
    std::ofstream f(path);
    f << algebra::to_json(algebra::random_system(3)).dump();
  }
  auto r = run({"algebra-check", "--file", path});
  EXPECT_EQ(r.exit_code, cli::kExitPass) << r.report.dump();
  EXPECT_EQ(r.report["results"]["valid"], true);

  auto bad = algebra::random_system(3);
  std::mt19937_64 rng(1);
  algebra::mutate(bad, rng);
  {
    std::ofstream f(path);
    f << algebra::to_json(bad).dump();
  }
  auto rb = run({"algebra-check", "--file", path});
  EXPECT_EQ(rb.exit_code, cli::kExitFail);
  EXPECT_FALSE(rb.report["results"]["violations"].empty());

  {
    std::ofstream f(path);
    f << "{ not json";
  }
  EXPECT_EQ(run({"algebra-check", "--file", path}).exit_code, cli::kExitInput);
  std::remove(path.c_str());
}

TEST(Cli, ShiftTest) {
  auto r = run({"shift-test", "--base", "s1:128", "--expr", "cos(x1)"});
  EXPECT_EQ(r.exit_code, cli::kExitPass) << r.report.dump();
  EXPECT_NEAR(r.report["results"]["ratio"].get<double>(), 2.0, 0.05);
}

TEST(Cli, PullbackAndCsv) {
  const auto csv = temp_path("barcode.csv");
  auto r = run({"barcode", "--base", "s1:64", "--expr", "cos(x1)", "--csv", csv});
  ASSERT_EQ(r.exit_code, cli::kExitPass) << r.report.dump();
  std::ifstream f(csv);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header, "degree,birth,death");
  std::remove(csv.c_str());
  EXPECT_EQ(run({"pullback", "--base", "s1:128", "--expr", "sin(x1)", "--map", "2"}).exit_code, cli::kExitPass);
  EXPECT_EQ(run({"pullback", "--base", "s1:128", "--expr", "sin(x1)", "--map", "const"}).exit_code, cli::kExitPass);
}

TEST(Cli, EveryTrialCheckRuns) {
  for (const auto& name : cli::trial_checks()) {
    if (name == "reduce-inverse" || name == "glue") continue;  // covered by the acceptance binary
    auto t = cli::run_trial(name, 5);
    EXPECT_TRUE(t.pass) << name << ": " << t.detail.dump();
  }
  EXPECT_THROW(cli::run_trial("nope", 0), ValidationError);
}
