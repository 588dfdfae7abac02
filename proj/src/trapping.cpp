#include "dphase/trapping.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace dphase {

TrappingRegion constant_region(const std::array<double, 2>& h, const std::array<double, 2>& k,
                               const Mesh& mesh) {
  for (int i = 0; i < 2; ++i) {
    if (!(h[static_cast<std::size_t>(i)] <= k[static_cast<std::size_t>(i)]))
      throw std::invalid_argument("constant_region: h > k for component " + std::to_string(i + 1));
  }
  TrappingRegion region;
  region.lower = constant_state(mesh, h[0], h[1]);
  region.upper = constant_state(mesh, k[0], k[1]);
  return region;
}

VerificationReport verify_pair(const TrappingRegion& region, const ProblemSpec& spec,
                               const SamplingPolicy& policy) {
  check_region(region, spec.mesh, spec.boundary_kind);
  const Mesh& mesh = *spec.mesh;
  const bool neumann = spec.boundary_kind == BoundaryKind::neumann_nonlinear;

  VerificationReport report;
  report.note =
      "intermediate states w sampled finitely (lower, upper, midpoint, " +
      std::to_string(policy.random_samples) +
      " random); PASS certifies the sampled states only";

  // Sampled intermediate states.
  std::vector<SystemState> samples;
  samples.push_back(region.lower);
  samples.push_back(region.upper);
  samples.push_back(region_midpoint(region));
  std::mt19937_64 rng(policy.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < policy.random_samples; ++s) {
    SystemState w = region.lower;
    for (int k = 0; k < 2; ++k) {
      auto& fld = w.component(k);
      const auto& lo = region.lower.component(k);
      const auto& up = region.upper.component(k);
      for (Eigen::Index i = 0; i < fld.size(); ++i)
        fld[i] = lo[i] + unit(rng) * (up[i] - lo[i]);
    }
    samples.push_back(std::move(w));
  }
  report.samples_used = static_cast<int>(samples.size());

  // Operator terms depend on the bound only; assemble once per side/component.
  std::array<Eigen::VectorXd, 2> a_lower, a_upper;
  for (int k = 0; k < 2; ++k) {
    const auto& data = spec.comp[static_cast<std::size_t>(k)].exponents;
    a_lower[static_cast<std::size_t>(k)] =
        apply_operator(region.lower.component(k), data, mesh, 0.0);
    a_upper[static_cast<std::size_t>(k)] =
        apply_operator(region.upper.component(k), data, mesh, 0.0);
  }

  // Under Dirichlet the test functions live in the zero-trace subspace.
  auto hat_is_active = [&](int node) {
    return spec.boundary_kind == BoundaryKind::neumann_nonlinear || !mesh.is_boundary_vertex(node);
  };

  auto record = [&](int component, int node, int sample, bool sub, double violation) {
    if (violation <= policy.tolerance) return;
    report.pass = false;
    report.findings.push_back({component + 1, node, sample, sub, violation});
    if (sub)
      report.max_sub_violation = std::max(report.max_sub_violation, violation);
    else
      report.max_super_violation = std::max(report.max_super_violation, violation);
  };

  for (int si = 0; si < static_cast<int>(samples.size()); ++si) {
    const SystemState& w = samples[static_cast<std::size_t>(si)];
    for (int k = 0; k < 2; ++k) {
      const auto& comp = spec.comp[static_cast<std::size_t>(k)];
      // Slot k holds the bound; the other slot holds the sampled state.
      const NodalField& w_other = (k == 0) ? w.u2 : w.u1;
      auto lhs_for = [&](const SystemState& bound,
                         const Eigen::VectorXd& a_term) -> Eigen::VectorXd {
        const NodalField& own = bound.component(k);
        const NodalField& slot1 = (k == 0) ? own : w_other;
        const NodalField& slot2 = (k == 0) ? w_other : own;
        Eigen::VectorXd lhs = a_term - reaction_residual(comp.f, slot1, slot2, mesh);
        if (neumann) lhs -= boundary_residual(comp.g, slot1, slot2, mesh);
        return lhs;
      };
      const Eigen::VectorXd sub_lhs = lhs_for(region.lower, a_lower[static_cast<std::size_t>(k)]);
      const Eigen::VectorXd super_lhs =
          lhs_for(region.upper, a_upper[static_cast<std::size_t>(k)]);
      for (int node = 0; node < mesh.n_vertices(); ++node) {
        if (!hat_is_active(node)) continue;
        record(k, node, si, true, sub_lhs[node]);    // requires <= 0
        record(k, node, si, false, -super_lhs[node]); // requires >= 0
      }
    }
  }

  std::sort(report.findings.begin(), report.findings.end(),
            [](const VerificationFinding& a, const VerificationFinding& b) {
              return a.value > b.value;
            });
  return report;
}

namespace {

void validate_band(const Band& band, int n) {
  for (int i = 0; i < 2; ++i) {
    if (!(band.lower[static_cast<std::size_t>(i)] <= band.upper[static_cast<std::size_t>(i)]))
      throw std::invalid_argument("band " + std::to_string(n) + ": h > k for component " +
                                  std::to_string(i + 1));
  }
}

BandLadder validate_ladder(std::vector<Band> bands) {
  BandLadder ladder;
  for (std::size_t n = 0; n < bands.size(); ++n) validate_band(bands[n], static_cast<int>(n));
  for (int i = 0; i < 2; ++i) {
    int direction = 0;
    for (std::size_t n = 0; n + 1 < bands.size(); ++n) {
      const double k_n = bands[n].upper[static_cast<std::size_t>(i)];
      const double h_n = bands[n].lower[static_cast<std::size_t>(i)];
      const double k_next = bands[n + 1].upper[static_cast<std::size_t>(i)];
      const double h_next = bands[n + 1].lower[static_cast<std::size_t>(i)];
      int step;
      if (k_n < h_next)
        step = +1;
      else if (k_next < h_n)
        step = -1;
      else
        throw std::invalid_argument("ladder separation violated between bands " +
                                    std::to_string(n) + " and " + std::to_string(n + 1) +
                                    " for component " + std::to_string(i + 1) +
                                    " (strict inequality required)");
      if (direction == 0)
        direction = step;
      else if (direction != step)
        throw std::invalid_argument("ladder direction flips between bands " + std::to_string(n) +
                                    " and " + std::to_string(n + 1) + " for component " +
                                    std::to_string(i + 1));
    }
    ladder.direction[static_cast<std::size_t>(i)] = direction;
  }
  ladder.bands = std::move(bands);
  return ladder;
}

}  // namespace

BandLadder enumerate_bands(const LadderFormulas& formulas, int n_max) {
  if (n_max < 0) return BandLadder{};
  std::vector<Band> bands;
  for (int n = 0; n <= n_max; ++n) {
    expr::Bindings env;
    env.set(expr::Var::n, static_cast<double>(n));
    Band band;
    band.lower = {formulas.h1.evaluate(env), formulas.h2.evaluate(env)};
    band.upper = {formulas.k1.evaluate(env), formulas.k2.evaluate(env)};
    bands.push_back(band);
  }
  return validate_ladder(std::move(bands));
}

BandLadder make_ladder(std::vector<Band> bands) { return validate_ladder(std::move(bands)); }

MultiSolveResult multi_solve(const ProblemSpec& spec, const BandLadder& ladder,
                             const SolveOptions& opts, const SamplingPolicy& policy) {
  MultiSolveResult result;
  const double eff_tol = opts.effective_comparison_tol(*spec.mesh);

  for (std::size_t n = 0; n < ladder.bands.size(); ++n) {
    const Band& band = ladder.bands[n];
    BandSolveResult entry;
    entry.band = band;

    TrappingRegion region = constant_region(band.lower, band.upper, *spec.mesh);
    VerificationReport verification = verify_pair(region, spec, policy);
    if (!verification.pass) {
      result.all_solved = false;
      result.failure_reason = "band " + std::to_string(n) + " failed verify_pair";
      result.bands.push_back(std::move(entry));
      return result;
    }

    LambdaScheduleResult schedule = select_lambda(spec, region, opts);
    entry.solved = schedule.accepted;
    entry.lambda = schedule.lambda;
    entry.state = std::move(schedule.state);
    entry.report = std::move(schedule.report);
    result.bands.push_back(std::move(entry));
    if (!schedule.accepted) {
      result.all_solved = false;
      result.failure_reason = "band " + std::to_string(n) + " solve failed: " +
                              (schedule.failure_reason.empty() ? schedule.report.failure_reason
                                                               : schedule.failure_reason);
      return result;
    }
  }

  // Ordering and distinctness post-checks between consecutive bands.
  for (std::size_t n = 0; n + 1 < result.bands.size(); ++n) {
    const auto& a = result.bands[n];
    const auto& b = result.bands[n + 1];
    for (int i = 0; i < 2; ++i) {
      const int dir = ladder.direction[static_cast<std::size_t>(i)];
      if (dir == 0) continue;
      const auto& ua = a.state.component(i);
      const auto& ub = b.state.component(i);
      const double diff_min = (dir > 0) ? (ub - ua).minCoeff() : (ua - ub).minCoeff();
      if (diff_min < -eff_tol) {
        result.ordering_ok = false;
        result.failure_reason = "ordering violated between bands " + std::to_string(n) + " and " +
                                std::to_string(n + 1) + " for component " + std::to_string(i + 1);
      }
      const double gap =
          (dir > 0)
              ? b.band.lower[static_cast<std::size_t>(i)] - a.band.upper[static_cast<std::size_t>(i)]
              : a.band.lower[static_cast<std::size_t>(i)] -
                    b.band.upper[static_cast<std::size_t>(i)];
      const double sup_gap = (ub - ua).lpNorm<Eigen::Infinity>();
      if (sup_gap < gap - 2.0 * eff_tol) {
        result.distinct_ok = false;
        result.failure_reason = "distinctness gap violated between bands " + std::to_string(n) +
                                " and " + std::to_string(n + 1) + " for component " +
                                std::to_string(i + 1);
      }
    }
  }
  return result;
}

TrappingRegion dirichlet_bracket(const ProblemSpec& spec,
                                 const std::array<ScalarField, 2>& phi_hat,
                                 const std::array<ScalarField, 2>& psi_hat,
                                 const SolveOptions& opts) {
  if (spec.boundary_kind != BoundaryKind::dirichlet_zero)
    throw std::invalid_argument("dirichlet_bracket: requires dirichlet_zero boundary kind");
  const Mesh& mesh = *spec.mesh;

  // 0 <= phi_hat <= psi_hat at quadrature points, phi_hat not identically 0.
  for (int k = 0; k < 2; ++k) {
    double max_phi = 0.0;
    for (const auto& qp : mesh.cell_qp) {
      const double phi = phi_hat[static_cast<std::size_t>(k)](qp.x[0], qp.x[1]);
      const double psi = psi_hat[static_cast<std::size_t>(k)](qp.x[0], qp.x[1]);
      if (phi < 0.0)
        throw std::invalid_argument("dirichlet_bracket: phi_hat must be nonnegative");
      if (phi > psi)
        throw std::invalid_argument("dirichlet_bracket: requires phi_hat <= psi_hat");
      max_phi = std::max(max_phi, phi);
    }
    if (max_phi == 0.0)
      throw std::invalid_argument("dirichlet_bracket: phi_hat" + std::to_string(k + 1) +
                                  " is identically zero");
  }

  TrappingRegion region;
  region.lower = solve_monotone_rhs(spec, phi_hat, opts);
  region.upper = solve_monotone_rhs(spec, psi_hat, opts);

  const double eff_tol = opts.effective_comparison_tol(mesh);
  for (int k = 0; k < 2; ++k) {
    const auto& lo = region.lower.component(k);
    const auto& up = region.upper.component(k);
    if (lo.minCoeff() < -eff_tol)
      throw std::runtime_error(
          "dirichlet_bracket: lower solution is negative beyond tolerance (solver or quadrature "
          "problem)");
    if (lo.lpNorm<Eigen::Infinity>() <= eff_tol)
      throw std::runtime_error("dirichlet_bracket: lower solution is numerically zero");
    if ((up - lo).minCoeff() < -eff_tol)
      throw std::runtime_error("dirichlet_bracket: ordering lower <= upper failed");
  }

  // Clip the tiny negative parts allowed by eff_tol so the region invariant
  // holds exactly.
  for (int k = 0; k < 2; ++k) {
    auto& lo = region.lower.component(k);
    auto& up = region.upper.component(k);
    up = up.cwiseMax(lo);
  }
  check_region(region, &mesh, spec.boundary_kind);
  return region;
}

}  // namespace dphase
