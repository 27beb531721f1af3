#pragma once

// Randomized verification of the rigidity / grasp identities.
//
// Every trial draws a nondegenerate configuration with random SPD inertias
// from its own generator, seeded by splitmix64(seed, N, trial), so a trial can
// be re-run in isolation and trials may execute in any order.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "rigidgrasp/dynamics.hpp"
#include "rigidgrasp/errors.hpp"
#include "rigidgrasp/forces.hpp"
#include "rigidgrasp/grasp.hpp"
#include "rigidgrasp/linalg.hpp"
#include "rigidgrasp/rigidity.hpp"
#include "rigidgrasp/types.hpp"

namespace rigidgrasp::verify {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t seed, int agents, std::uint64_t trial) {
  std::uint64_t x = splitmix64(seed);
  x = splitmix64(x ^ static_cast<std::uint64_t>(agents));
  return splitmix64(x ^ trial);
}

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline VecX gaussian(Rng& rng, Eigen::Index n, double sigma = 1.0) {
  std::normal_distribution<double> d(0.0, sigma);
  VecX v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

inline MatX gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> d(0.0, 1.0);
  MatX m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = d(rng);
  return m;
}

inline Mat3 random_rotation(Rng& rng) {
  const VecX q = gaussian(rng, 4);
  return Eigen::Quaterniond(q(0), q(1), q(2), q(3)).normalized().toRotationMatrix();
}

/// Q diag(U[0.05, 1]) Q^T with Q a random rotation.
inline Mat3 random_inertia(Rng& rng) {
  const Mat3 q = random_rotation(rng);
  const Vec3 d(uniform(rng, 0.05, 1.0), uniform(rng, 0.05, 1.0), uniform(rng, 0.05, 1.0));
  return q * d.asDiagonal() * q.transpose();
}

/// Random square matrix with singular values in [0.1, 10].
inline MatX random_invertible(Rng& rng, Eigen::Index n) {
  const MatX q1 = Eigen::HouseholderQR<MatX>(gaussian_matrix(rng, n, n)).householderQ();
  const MatX q2 = Eigen::HouseholderQR<MatX>(gaussian_matrix(rng, n, n)).householderQ();
  VecX s(n);
  for (Eigen::Index i = 0; i < n; ++i) s(i) = std::pow(10.0, uniform(rng, -1.0, 1.0));
  return q1 * s.asDiagonal() * q2.transpose();
}

/// A grasped system with a rigid-motion state and arbitrary agent inputs.
struct RandomSystem {
  grasp::GraspConfiguration grasp;
  std::vector<dynamics::RigidBodyParams> agents;
  dynamics::RigidBodyParams object;
  Twist6 object_twist = Twist6::Zero();
  VecX u;

  dynamics::SystemSnapshot snapshot() const {
    return dynamics::make_snapshot(grasp, object_twist, agents, object);
  }
};

/// Smallest retained singular value relative to the largest, for a matrix of
/// expected rank `rank`.
inline double conditioning(const MatX& m, Eigen::Index rank) {
  const VecX s = Eigen::JacobiSVD<MatX>(m).singularValues();
  if (rank <= 0 || rank > s.size() || s(0) == 0.0) return 0.0;
  return s(rank - 1) / s(0);
}

/// Offsets in [-1, 1]^3, pairwise at least 0.3 apart and at least 0.2 from the
/// object centre; samples whose rigidity matrices are poorly conditioned are
/// redrawn.
inline grasp::GraspConfiguration random_configuration(Rng& rng, int n) {
  if (n < 3) throw Error(ErrorKind::InvalidArgument, "random_configuration: N >= 3 required");
  for (int attempt = 0; attempt < 10000; ++attempt) {
    grasp::GraspConfiguration gc;
    gc.object.position = Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    gc.object.rotation = random_rotation(rng);
    bool ok = true;
    while (static_cast<int>(gc.offsets.size()) < n && ok) {
      int tries = 0;
      for (;; ++tries) {
        if (tries > 1000) {
          ok = false;
          break;
        }
        const Vec3 p(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
        if (p.norm() < 0.2) continue;
        const bool far = std::all_of(gc.offsets.begin(), gc.offsets.end(),
                                     [&](const grasp::GraspOffset& o) { return (o.position - p).norm() >= 0.3; });
        if (!far) continue;
        gc.offsets.push_back({p, random_rotation(rng)});
        break;
      }
    }
    if (!ok) continue;
    const auto fw = gc.framework();
    const auto ext = rigidity::extended_rigidity_matrix(fw, gc.object);
    if (conditioning(rigidity::rigidity_jacobian(fw), 6 * n - 6) < 1e-3) continue;
    if (conditioning(ext.matrix, 6 * n) < 1e-3) continue;
    return gc;
  }
  throw Error(ErrorKind::DegenerateConfiguration, "random_configuration: no acceptable sample");
}

inline dynamics::RigidBodyParams random_body(Rng& rng) {
  dynamics::RigidBodyParams b;
  b.mass = uniform(rng, 1.0, 10.0);
  b.inertia_body = random_inertia(rng);
  return b;
}

inline RandomSystem random_system(Rng& rng, int n) {
  RandomSystem s;
  s.grasp = random_configuration(rng, n);
  for (int i = 0; i < n; ++i) s.agents.push_back(random_body(rng));
  s.object = random_body(rng);
  s.object_twist = gaussian(rng, 6);
  s.u = gaussian(rng, 6 * n, 10.0);
  return s;
}

// --- individual checks --------------------------------------------------------

struct DualityResult {
  double max_angle = 0.0;
  Eigen::Index rank = 0;
  Eigen::Index null_dimension = 0;
  bool ranks_ok = false;
};

/// range(R^T) against null(G).
inline DualityResult duality(const grasp::GraspConfiguration& gc) {
  const int n = gc.agent_count();
  const MatX r = rigidity::rigidity_jacobian(gc.framework());
  const MatX g = grasp::grasp_matrix(gc);
  const auto row = linalg::row_space_basis(r, rigidity::kRankTolerance);
  const auto null = linalg::nullspace_basis(g, rigidity::kRankTolerance);
  DualityResult out;
  out.rank = row.dimension();
  out.null_dimension = null.dimension();
  out.ranks_ok = out.rank == 6 * n - 6 && out.null_dimension == 6 * n - 6;
  out.max_angle = out.ranks_ok ? linalg::max_principal_angle(row, null)
                               : std::numeric_limits<double>::infinity();
  return out;
}

struct OptimalityResult {
  double oracle_deviation = 0.0;          ///< ||Z z*|| / ||h_d||
  double moore_penrose_cost_ratio = 0.0;  ///< ||h_MP||_{M^-1} / ||h_d||_{M^-1}
  double moore_penrose_internal = 0.0;    ///< ||h_int(h_MP)|| / ||h_d||
};

/// Brute-force check that h_d = G*_1 h_O,d minimizes ||(I - M G^T (G M G^T)^-1 G) h||
/// over {h : G h = h_O,d}: parameterize h = h_d + Z z with Z an orthonormal
/// basis of null(G) and solve the normal equations of the quadratic in z.
inline OptimalityResult optimality(const MatX& g, const MatX& m, const Wrench6& h_o) {
  const Eigen::Index n = m.rows();
  const MatX gm = g * m;
  const MatX p = MatX::Identity(n, n) - gm.transpose() * (gm * g.transpose()).fullPivLu().solve(g);
  const VecX h_d = grasp::right_inverse(g, m, grasp::RightInverseKind::InertiaWeighted) * h_o;
  const MatX z = linalg::nullspace_basis(g, rigidity::kRankTolerance).columns;
  const MatX pz = p * z;
  const VecX z_star = (pz.transpose() * pz).ldlt().solve(-pz.transpose() * (p * h_d));

  const VecX h_mp = grasp::right_inverse(g, m, grasp::RightInverseKind::MoorePenrose) * h_o;
  const MatX m_inv = Eigen::LLT<MatX>(m).solve(MatX::Identity(n, n));
  const auto energy = [&](const VecX& h) { return std::sqrt(h.dot(m_inv * h)); };
  OptimalityResult out;
  out.oracle_deviation = (z * z_star).norm() / h_d.norm();
  out.moore_penrose_cost_ratio = energy(h_mp) / energy(h_d);
  out.moore_penrose_internal = (p * h_mp).norm() / h_d.norm();
  return out;
}

struct ExtendedResult {
  double block_identity = 0.0;  ///< ||G R_O1^T + R_O2^T||_F / ||R_O2||_F
  double grasp_consistency = 0.0;
  double form_agreement = 0.0;
  double closed_form_agreement = 0.0;  ///< Gauss h vs closed-form h
};

inline ExtendedResult extended_consistency(const RandomSystem& sys) {
  const auto snap = sys.snapshot();
  const auto ext = rigidity::extended_rigidity_matrix(snap.framework(), sys.grasp.object);
  ExtendedResult out;
  out.block_identity = (snap.G * ext.object_agents.transpose() + ext.object_object.transpose()).norm() /
                       ext.object_object.norm();
  const auto f = forces::interaction_forces_gauss(snap, sys.u);
  out.grasp_consistency = f.grasp_consistency;
  out.form_agreement = f.form_agreement;
  out.closed_form_agreement = linalg::relative_difference(f.h, forces::interaction_forces_closed(snap, sys.u));
  return out;
}

struct ForceFreeResult {
  double inside_residual = 0.0;  ///< range component and h_int for u built to be force free
  double outside_range = 0.0;    ///< the same quantities for arbitrary u
  double outside_internal = 0.0;
};

/// Inputs u = M (G^T a + dG^T/dt v_O) + C v + g produce agent accelerations
/// that already respect the grasp; arbitrary inputs in general do not.
inline ForceFreeResult internal_force_free(const RandomSystem& sys, Rng& rng) {
  const auto snap = sys.snapshot();
  const auto fw = snap.framework();
  const VecX a = gaussian(rng, 6);
  const VecX u_free = snap.agents.M * (snap.G.transpose() * a + snap.G_rate.transpose() * snap.object_twist) +
                      snap.agents.C * snap.agent_twists + snap.agents.g;
  const auto in = forces::internal_force_free_condition(fw, snap.agent_twists, snap.agents, u_free);
  const VecX h_in = forces::internal_forces_gauss(fw, snap.agent_twists, snap.agents, u_free).h_int;
  const double scale = 1.0 + u_free.norm();
  ForceFreeResult out;
  out.inside_residual = std::max(in.range_component / (1.0 + in.constraint_term.norm() + scale), h_in.norm() / scale);
  const auto o = forces::internal_force_free_condition(fw, snap.agent_twists, snap.agents, sys.u);
  out.outside_range = o.range_component / (1.0 + sys.u.norm());
  out.outside_internal =
      forces::internal_forces_gauss(fw, snap.agent_twists, snap.agents, sys.u).h_int.norm() / (1.0 + sys.u.norm());
  return out;
}

// --- battery ------------------------------------------------------------------

enum class Bound { Upper, Lower };

struct CheckSpec {
  const char* name;
  double threshold;
  Bound bound;
};

inline const std::vector<CheckSpec>& checks() {
  static const std::vector<CheckSpec> specs = {
      {"nullspace_range_duality", 1e-7, Bound::Upper},
      {"rigidity_rank", 0.5, Bound::Upper},
      {"projection_identity", 1e-8, Bound::Upper},
      {"rigidity_function_invariance", 1e-7, Bound::Upper},
      {"internal_force_projection", 1e-6, Bound::Upper},
      {"optimal_right_inverse", 1e-7, Bound::Upper},
      {"moore_penrose_excess", 1.0 + 1e-3, Bound::Lower},
      {"moore_penrose_internal_force", 1e-3, Bound::Lower},
      {"extended_block_identity", 1e-9, Bound::Upper},
      {"object_wrench_consistency", 1e-7, Bound::Upper},
      {"gauss_closed_form_agreement", 1e-6, Bound::Upper},
      {"internal_force_free_condition", 1e-8, Bound::Upper},
      {"internal_force_present", 1e-6, Bound::Lower},
  };
  return specs;
}

/// One value per entry of checks(), in order.
struct TrialResult {
  int agents = 0;
  std::uint64_t trial = 0;
  std::vector<double> values;
  std::string error;
};

inline TrialResult run_trial(std::uint64_t seed, int n, std::uint64_t trial) {
  TrialResult out;
  out.agents = n;
  out.trial = trial;
  try {
    Rng rng(trial_seed(seed, n, trial));
    const RandomSystem sys = random_system(rng, n);
    const auto snap = sys.snapshot();
    const auto fw = snap.framework();
    const MatX r = rigidity::rigidity_jacobian(fw);
    const auto d = duality(sys.grasp);

    const double identity = forces::projection_identity_residual(snap.agents.M, snap.G, r);
    const MatX p = random_invertible(rng, r.rows());
    const auto inv = forces::rigidity_invariance_check(fw, snap.agent_twists, snap.agents, sys.u, p);

    const VecX h = forces::interaction_forces_closed(snap, sys.u);
    const VecX h_int_th2 = forces::internal_from_interaction(snap.agents.M, snap.G, h);
    const VecX h_int = forces::internal_forces_gauss(fw, snap.agent_twists, snap.agents, sys.u).h_int;

    const auto opt = optimality(snap.G, snap.agents.M, gaussian(rng, 6, 10.0));
    const auto ext = extended_consistency(sys);
    const auto free = internal_force_free(sys, rng);

    out.values = {d.max_angle,
                  d.ranks_ok ? 0.0 : 1.0,
                  identity,
                  inv.deviation,
                  linalg::relative_difference(h_int, h_int_th2),
                  opt.oracle_deviation,
                  opt.moore_penrose_cost_ratio,
                  opt.moore_penrose_internal,
                  ext.block_identity,
                  ext.grasp_consistency,
                  ext.closed_form_agreement,
                  free.inside_residual,
                  std::min(free.outside_range, free.outside_internal)};
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

struct CheckSummary {
  std::string name;
  double threshold = 0.0;
  Bound bound = Bound::Upper;
  double worst = 0.0;  ///< max over trials for upper bounds, min for lower bounds
  int failures = 0;
  bool pass() const { return failures == 0; }
};

/// Collinear grasp points: the agent framework loses N - 1 ranks and
/// range(R^T) is a proper subspace of null(G).
struct DegeneracyReport {
  int agents = 3;
  Eigen::Index rank = 0;
  Eigen::Index expected_rank = 0;
  Eigen::Index null_dimension = 0;
  double containment = 0.0;  ///< ||G R^T|| / ||R||
  bool detected = false;
  bool strict_containment = false;
};

inline DegeneracyReport collinear_degeneracy(int n = 3) {
  grasp::GraspConfiguration gc;
  gc.object.position = Vec3(0.1, -0.2, 0.3);
  gc.object.rotation = linalg::rot_z(0.4) * linalg::rot_x(0.3);
  for (int i = 0; i < n; ++i) {
    gc.offsets.push_back({Vec3(0.4 * (i - 0.5 * (n - 1)) + 0.05, 0.0, 0.0), linalg::rot_y(0.2 * i)});
  }
  DegeneracyReport out;
  out.agents = n;
  const auto eval = rigidity::rigidity_matrix(gc.framework());
  const MatX g = grasp::grasp_matrix(gc);
  out.rank = eval.rank;
  out.expected_rank = 6 * n - 6;
  out.null_dimension = linalg::nullspace_basis(g, rigidity::kRankTolerance).dimension();
  out.containment = (g * eval.matrix.transpose()).norm() / eval.matrix.norm();
  out.detected = eval.degenerate;
  out.strict_containment = out.containment < 1e-9 && out.rank < out.null_dimension;
  return out;
}

struct VerifyReport {
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  std::vector<int> agent_counts;
  std::vector<CheckSummary> checks;
  std::vector<TrialResult> results;  ///< ordered by (N, trial)
  DegeneracyReport degeneracy;

  bool pass() const {
    if (!degeneracy.detected || !degeneracy.strict_containment) return false;
    for (const auto& r : results)
      if (!r.error.empty()) return false;
    return std::all_of(checks.begin(), checks.end(), [](const CheckSummary& c) { return c.pass(); });
  }

  /// First failing check, or an empty string.
  std::string first_failure() const {
    for (const auto& r : results) {
      if (!r.error.empty()) return "trial_error (N=" + std::to_string(r.agents) + ", trial " +
                                   std::to_string(r.trial) + "): " + r.error;
    }
    for (const auto& c : checks)
      if (!c.pass()) return c.name;
    if (!degeneracy.detected || !degeneracy.strict_containment) return "degeneracy_detection";
    return {};
  }
};

inline VerifyReport run_verification(std::uint64_t seed, std::uint64_t trials,
                                     const std::vector<int>& agent_counts,
                                     unsigned threads = std::thread::hardware_concurrency()) {
  if (trials == 0) throw Error(ErrorKind::InvalidArgument, "verify: trials must be >= 1");
  for (int n : agent_counts) {
    if (n < 3) throw Error(ErrorKind::InvalidArgument, "verify: agent counts must be >= 3");
  }
  VerifyReport report;
  report.seed = seed;
  report.trials = trials;
  report.agent_counts = agent_counts;

  struct Job {
    int n;
    std::uint64_t trial;
  };
  std::vector<Job> jobs;
  for (int n : agent_counts)
    for (std::uint64_t t = 0; t < trials; ++t) jobs.push_back({n, t});
  report.results.resize(jobs.size());

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      report.results[k] = run_trial(seed, jobs[k].n, jobs[k].trial);
    }
  };
  const unsigned count = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < count; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t c = 0; c < checks().size(); ++c) {
    const auto& spec = checks()[c];
    CheckSummary s{spec.name, spec.threshold, spec.bound,
                   spec.bound == Bound::Upper ? 0.0 : std::numeric_limits<double>::infinity(), 0};
    for (const auto& r : report.results) {
      if (!r.error.empty()) continue;
      const double v = r.values[c];
      if (spec.bound == Bound::Upper) {
        s.worst = std::max(s.worst, v);
        if (!(v < spec.threshold)) ++s.failures;
      } else {
        s.worst = std::min(s.worst, v);
        if (!(v > spec.threshold)) ++s.failures;
      }
    }
    report.checks.push_back(s);
  }
  report.degeneracy = collinear_degeneracy();
  return report;
}

}  // namespace rigidgrasp::verify
