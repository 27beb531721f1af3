// rigidgrasp: simulate scenarios, run the verification battery, and report
// rigidity of grasp configurations.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rigidgrasp/rigidgrasp.hpp"
#include "rigidgrasp/scenario_io.hpp"

namespace rg = rigidgrasp;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kBadInput = 2;
constexpr int kNumericFailure = 3;
constexpr int kCheckFailed = 4;

int fail(int code, const std::string& message) {
  std::cerr << "error: " << message << '\n';
  return code;
}

struct SimulateArgs {
  std::string config;
  std::string out;
  double dt = 0.0;
  double duration = -1.0;
};

int simulate(const SimulateArgs& args) {
  rg::sim::Scenario sc;
  try {
    sc = rg::io::load_scenario(args.config);
    if (args.dt > 0.0) sc.dt = args.dt;
    if (args.duration >= 0.0) sc.duration = args.duration;
    sc.validate();
  } catch (const rg::Error& e) {
    return fail(kBadInput, e.what());
  }

  std::error_code ec;
  fs::create_directories(args.out, ec);
  if (ec) return fail(kBadInput, "cannot create output directory '" + args.out + "'");

  rg::sim::SimLog log;
  try {
    log = rg::sim::run_scenario(sc);
  } catch (const rg::Error& e) {
    return fail(kNumericFailure, std::string(rg::to_string(e.kind())) + ": " + e.what());
  }

  std::ofstream csv(fs::path(args.out) / "trajectory.csv");
  std::ofstream summary(fs::path(args.out) / "summary.json");
  if (!csv || !summary) return fail(kBadInput, "cannot write to '" + args.out + "'");
  rg::io::write_csv(csv, log);
  summary << rg::io::summary(sc, log).dump(2) << '\n';
  if (!csv || !summary) return fail(kBadInput, "cannot write to '" + args.out + "'");
  std::cout << "wrote " << log.samples.size() << " samples to " << args.out << '\n';
  return kOk;
}

struct VerifyArgs {
  std::uint64_t seed = 1;
  std::uint64_t trials = 50;
  std::vector<int> agents{3, 4, 5};
};

int verify(const VerifyArgs& args) {
  rg::verify::VerifyReport report;
  try {
    report = rg::verify::run_verification(args.seed, args.trials, args.agents);
  } catch (const rg::Error& e) {
    return fail(kBadInput, e.what());
  }

  std::cout << "seed " << args.seed << ", " << args.trials << " trials per N, N =";
  for (int n : args.agents) std::cout << ' ' << n;
  std::cout << '\n';
  for (const auto& c : report.checks) {
    const char* rel = c.bound == rg::verify::Bound::Upper ? "<" : ">";
    std::printf("%-32s worst %-12.4e %s %-10.3g %s\n", c.name.c_str(), c.worst, rel, c.threshold,
                c.pass() ? "PASS" : "FAIL");
  }
  const auto& d = report.degeneracy;
  std::printf("%-32s rank %lld / %lld, dim null(G) %lld, range(R^T) %s null(G): %s\n",
              "collinear_degeneracy", static_cast<long long>(d.rank),
              static_cast<long long>(d.expected_rank), static_cast<long long>(d.null_dimension),
              d.strict_containment ? "strictly inside" : "not strictly inside",
              d.detected && d.strict_containment ? "degenerate, detected" : "FAIL");
  if (!report.pass()) return fail(kCheckFailed, "check failed: " + report.first_failure());
  std::cout << "all checks passed\n";
  return kOk;
}

int rigidity_report(const std::string& config) {
  try {
    const auto sc = rg::io::load_scenario(config);
    if (sc.plant.offsets.size() < 2) return fail(kBadInput, "at least two agents required");
    const rg::grasp::GraspConfiguration gc{sc.initial.pose, sc.plant.offsets};
    const auto fw = gc.framework();
    const auto eval = rg::rigidity::rigidity_matrix(fw);
    const auto null = rg::linalg::nullspace_basis(eval.matrix, rg::rigidity::kRankTolerance);
    const auto trivial = rg::linalg::column_space_basis(rg::rigidity::trivial_motion_basis(fw),
                                                       rg::rigidity::kRankTolerance);
    const Eigen::Index expected = 6 * fw.size() - 6;
    std::cout << "N " << fw.size() << '\n';
    std::cout << "rank " << eval.rank << " / " << expected << ", "
              << (eval.degenerate ? "degenerate" : "rigid") << '\n';
    std::cout << "trivial motions " << trivial.dimension() << ", nullspace dimension "
              << null.dimension() << '\n';
    std::cout << "infinitesimally rigid " << (eval.degenerate ? "no" : "yes") << '\n';
    std::cout << "degenerate " << (eval.degenerate ? "yes" : "no") << '\n';
  } catch (const rg::Error& e) {
    return fail(kBadInput, e.what());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rigidly grasped cooperative manipulation: simulation and verification"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "integrate a scenario and write trajectory.csv and summary.json");
  sim->add_option("--config", sim_args.config, "scenario JSON")->required();
  sim->add_option("--out", sim_args.out, "output directory")->required();
  sim->add_option("--dt", sim_args.dt, "override the time step (s)");
  sim->add_option("--duration", sim_args.duration, "override the duration (s)");

  VerifyArgs ver_args;
  auto* ver = app.add_subcommand("verify", "run the randomized identity battery");
  ver->add_option("--seed", ver_args.seed, "64-bit seed");
  ver->add_option("--trials", ver_args.trials, "trials per agent count");
  ver->add_option("--agents", ver_args.agents, "agent counts, e.g. 3,4,5")->delimiter(',');

  std::string rig_config;
  auto* rig = app.add_subcommand("rigidity", "report rigidity of a configuration");
  rig->add_option("--config", rig_config, "scenario JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  if (*sim) return simulate(sim_args);
  if (*ver) return verify(ver_args);
  return rigidity_report(rig_config);
}
