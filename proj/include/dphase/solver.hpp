#pragma once

#include <string>
#include <vector>

#include "dphase/assembly.hpp"
#include "dphase/problem.hpp"

namespace dphase {

struct SolveOptions {
  double newton_tol = 1e-11;       // residual norm target (Euclidean)
  int max_newton = 120;            // per inner solve
  int max_picard = 120;            // outer fixed-point iterations
  double picard_tol = 1e-10;       // successive-iterate sup norm
  double damping = 0.5;            // line-search backtracking factor in (0,1)
  double lambda_init = 1.0;
  double lambda_growth = 10.0;     // > 1
  double lambda_max = 1e10;
  double epsilon_reg = 1e-10;      // gradient regularization
  double comparison_tol = 1e-8;
  double comparison_relax_h2 = 1.0;  // effective tol = comparison_tol + relax * h^2

  void validate() const;
  double effective_comparison_tol(const Mesh& mesh) const;
};

struct SolveReport {
  bool converged = false;
  int picard_iterations = 0;
  int newton_iterations_total = 0;
  double final_residual_norm = 0.0;
  std::array<double, 2> lambda_used{0.0, 0.0};
  double enclosure_violation = 0.0;  // max node-wise distance to [lower, upper]
  std::vector<double> residual_history;
  std::string failure_reason;
};

struct ComparisonStats {
  std::array<double, 2> overshoot{0.0, 0.0};    // node-wise max above upper
  std::array<double, 2> undershoot{0.0, 0.0};   // node-wise max below lower
  std::array<double, 2> overshoot_modular{0.0, 0.0};   // int (u - upper)_+^{q(x)}
  std::array<double, 2> undershoot_modular{0.0, 0.0};  // int (lower - u)_+^{q(x)}
  double max_violation() const;
};

ComparisonStats comparison_check(const SystemState& state, const TrappingRegion& region,
                                 const ProblemSpec& spec);

/// Solves the penalized truncated system
///   A_k(u_k) + lambda_k B_k(u_k) = F_k(state) + G_k(state)
/// by Picard iteration on the frozen reaction/boundary arguments, with a
/// damped Newton solve of the remaining monotone problem per component.
/// lambda is fixed at opts.lambda_init for the whole solve; use select_lambda
/// for the adaptive schedule. Convergence means the full residual (reaction
/// refreshed at the returned state) is <= newton_tol.
std::pair<SystemState, SolveReport> solve_truncated(const ProblemSpec& spec,
                                                    const TrappingRegion& region,
                                                    const SystemState& init,
                                                    const SolveOptions& opts);

struct LambdaScheduleResult {
  bool accepted = false;
  std::array<double, 2> lambda{0.0, 0.0};
  SystemState state;
  SolveReport report;  // report of the last attempt
  int attempts = 0;
  std::string failure_reason;
};

/// Adaptive penalty schedule: solve_truncated at lambda, growing lambda by
/// lambda_growth whenever the solve fails or the enclosure violation exceeds
/// the effective comparison tolerance, up to lambda_max.
LambdaScheduleResult select_lambda(const ProblemSpec& spec, const TrappingRegion& region,
                                   const SolveOptions& opts);

/// Decoupled monotone Dirichlet solves A_k(u_k) = h_k with zero boundary
/// values eliminated. Throws std::runtime_error on non-convergence.
SystemState solve_monotone_rhs(const ProblemSpec& spec, const std::array<ScalarField, 2>& rhs,
                               const SolveOptions& opts, SolveReport* report = nullptr);

}  // namespace dphase
