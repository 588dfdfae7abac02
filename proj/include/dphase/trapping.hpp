#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dphase/problem.hpp"
#include "dphase/solver.hpp"

namespace dphase {

/// Constant-band region u_k in [h_k, k_k]; requires h_k <= k_k.
TrappingRegion constant_region(const std::array<double, 2>& h, const std::array<double, 2>& k,
                               const Mesh& mesh);

/// Intermediate-state sampling for verify_pair. The sub/supersolution
/// inequalities quantify over every state w inside the region; the checker
/// evaluates them at lower, upper, midpoint plus `random_samples` seeded
/// random nodal states. A PASS therefore certifies the sampled states only.
struct SamplingPolicy {
  int random_samples = 8;
  std::uint64_t seed = 7781;
  double tolerance = 1e-9;
};

struct VerificationFinding {
  int component = 0;  // 1-based
  int node = 0;       // hat-function index
  int sample = 0;     // index into the sampled w states
  bool sub = true;    // true: subsolution inequality, false: supersolution
  double value = 0.0; // signed inequality value (violation magnitude)
};

struct VerificationReport {
  bool pass = true;
  double max_sub_violation = 0.0;    // positive excess of the sub inequality
  double max_super_violation = 0.0;  // positive deficit of the super inequality
  std::vector<VerificationFinding> findings;
  int samples_used = 0;
  std::string note;
};

/// Evaluates the discrete sub/supersolution inequalities against every nodal
/// hat function (one component slot at a time) and the sampled intermediate
/// states. PASS iff no violation exceeds the policy tolerance.
VerificationReport verify_pair(const TrappingRegion& region, const ProblemSpec& spec,
                               const SamplingPolicy& policy = {});

struct Band {
  std::array<double, 2> lower{0.0, 0.0};  // h_i
  std::array<double, 2> upper{0.0, 0.0};  // k_i
};

/// Separated constant bands; direction is +1 (increasing), -1 (decreasing)
/// per component, 0 for ladders of length < 2.
struct BandLadder {
  std::vector<Band> bands;
  std::array<int, 2> direction{0, 0};
};

/// Per-band formulas in the variable n.
struct LadderFormulas {
  expr::Expr h1, k1, h2, k2;
};

/// Evaluates the formulas at n = 0..n_max and validates the band ordering and
/// strict separation between consecutive bands.
BandLadder enumerate_bands(const LadderFormulas& formulas, int n_max);

/// Validates an explicitly listed ladder.
BandLadder make_ladder(std::vector<Band> bands);

struct BandSolveResult {
  Band band;
  bool solved = false;
  std::array<double, 2> lambda{0.0, 0.0};
  SystemState state;
  SolveReport report;
};

struct MultiSolveResult {
  std::vector<BandSolveResult> bands;  // partial on failure
  bool all_solved = true;
  bool ordering_ok = true;
  bool distinct_ok = true;
  std::string failure_reason;
  bool ok() const { return all_solved && ordering_ok && distinct_ok; }
};

/// One enclosed solve per band (each band is verified first), then the
/// node-wise ordering and pairwise-distinctness post-checks.
MultiSolveResult multi_solve(const ProblemSpec& spec, const BandLadder& ladder,
                             const SolveOptions& opts, const SamplingPolicy& policy = {});

/// Builds the Dirichlet bracket region by solving the auxiliary problems
/// A_k(u) = phi_hat_k (lower) and A_k(u) = psi_hat_k (upper). Requires
/// 0 <= phi_hat <= psi_hat at quadrature points and phi_hat not identically
/// zero; asserts the resulting ordering.
TrappingRegion dirichlet_bracket(const ProblemSpec& spec,
                                 const std::array<ScalarField, 2>& phi_hat,
                                 const std::array<ScalarField, 2>& psi_hat,
                                 const SolveOptions& opts);

}  // namespace dphase
