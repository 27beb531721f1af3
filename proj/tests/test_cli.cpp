#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / ("rigidgrasp_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result run(const std::string& args) {
  const fs::path log = scratch() / "stdout.txt";
  const std::string cmd = std::string(RIGIDGRASP_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read(log);
  return r;
}

std::string scenario(const std::string& name) { return std::string(SCENARIO_DIR) + "/" + name; }

bool contains(const std::string& s, const std::string& needle) { return s.find(needle) != std::string::npos; }

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("bogus").code, 2);
  EXPECT_EQ(run("simulate --config " + scenario("canonical3.json")).code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, SimulateWritesOutputs) {
  const fs::path out = scratch() / "canonical";
  const auto r = run("simulate --config " + scenario("canonical3.json") + " --out " + out.string() +
                     " --duration 0.05");
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream csv(out / "trajectory.csv");
  std::string line;
  int rows = -1;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 51);
  const auto summary = nlohmann::json::parse(read(out / "summary.json"));
  EXPECT_EQ(summary["agents"], 3);
  EXPECT_EQ(summary["samples"], 51);
}

TEST(Cli, SimulateTransportScenarioFullLength) {
  const fs::path out = scratch() / "transport";
  const auto r = run("simulate --config " + scenario("paper_scenario.json") + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream csv(out / "trajectory.csv");
  std::string header, line;
  std::getline(csv, header);
  EXPECT_EQ(header, "t,e_p_norm,e_O,e_v_norm,h_int_norm,h_int_norm_th2,V,constraint_residual,"
                    "u_norm_1,u_norm_2,u_norm_3,u_norm_4");
  int rows = 0;
  std::string last;
  while (std::getline(csv, line)) {
    ++rows;
    last = line;
  }
  EXPECT_EQ(rows, 15001);
  EXPECT_EQ(last.substr(0, last.find(',')), "15");
  const auto summary = nlohmann::json::parse(read(out / "summary.json"));
  EXPECT_TRUE(summary["converged"]["position"].get<bool>());
  EXPECT_TRUE(summary["internal_force_free"].get<bool>());
}

TEST(Cli, SimulateInputErrors) {
  const fs::path out = scratch() / "bad";
  auto r = run("simulate --config " + scenario("two_agents.json") + " --out " + out.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(contains(r.out, "degenerate framework (N=2)")) << r.out;
  EXPECT_EQ(run("simulate --config " + scenario("collinear3.json") + " --out " + out.string()).code, 2);
  EXPECT_EQ(run("simulate --config " + scenario("negative_mass.json") + " --out " + out.string()).code, 2);
  EXPECT_EQ(run("simulate --config " + scenario("missing.json") + " --out " + out.string()).code, 2);
  EXPECT_EQ(run("simulate --config " + scenario("canonical3.json") + " --out " + out.string() + " --dt 0.5").code, 2);
}

TEST(Cli, SimulateRuntimeFailure) {
  const auto r = run("simulate --config " + scenario("euler_singularity.json") + " --out " +
                     (scratch() / "singular").string());
  EXPECT_EQ(r.code, 3);
  EXPECT_TRUE(contains(r.out, "EulerRateSingularity")) << r.out;
}

TEST(Cli, Verify) {
  const auto r = run("verify --seed 7 --trials 4 --agents 3,4");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(contains(r.out, "nullspace_range_duality"));
  EXPECT_TRUE(contains(r.out, "degenerate, detected"));
  EXPECT_TRUE(contains(r.out, "all checks passed"));
  EXPECT_EQ(run("verify --seed 7 --trials 4 --agents 3,4").out, r.out);
  EXPECT_EQ(run("verify --trials 0").code, 2);
  EXPECT_EQ(run("verify --agents 2").code, 2);
}

TEST(Cli, Rigidity) {
  auto r = run("rigidity --config " + scenario("canonical3.json"));
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(contains(r.out, "rank 12 / 12, rigid")) << r.out;
  EXPECT_TRUE(contains(r.out, "infinitesimally rigid yes"));
  r = run("rigidity --config " + scenario("collinear3.json"));
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(contains(r.out, "degenerate yes")) << r.out;
  r = run("rigidity --config " + scenario("square4.json"));
  EXPECT_TRUE(contains(r.out, "rank 18 / 18, rigid")) << r.out;
  r = run("rigidity --config " + scenario("two_agents.json"));
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(contains(r.out, "rank 5 / 6, degenerate")) << r.out;
  EXPECT_TRUE(contains(r.out, "degenerate yes"));
  EXPECT_EQ(run("rigidity --config " + scenario("missing.json")).code, 2);
}
