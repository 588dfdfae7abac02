#include "dphase/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace dphase {

void SolveOptions::validate() const {
  if (!(newton_tol > 0.0) || !(picard_tol > 0.0) || !(comparison_tol > 0.0))
    throw std::invalid_argument("SolveOptions: tolerances must be positive");
  if (!(lambda_growth > 1.0))
    throw std::invalid_argument("SolveOptions: lambda_growth must exceed 1");
  if (!(damping > 0.0 && damping < 1.0))
    throw std::invalid_argument("SolveOptions: damping must lie in (0,1)");
  if (max_newton < 1 || max_picard < 1)
    throw std::invalid_argument("SolveOptions: iteration limits must be >= 1");
  if (epsilon_reg < 0.0 || lambda_init < 0.0 || lambda_max < lambda_init)
    throw std::invalid_argument("SolveOptions: inconsistent lambda/epsilon settings");
}

double SolveOptions::effective_comparison_tol(const Mesh& mesh) const {
  return comparison_tol + comparison_relax_h2 * mesh.h_max * mesh.h_max;
}

double ComparisonStats::max_violation() const {
  double v = 0.0;
  for (int k = 0; k < 2; ++k) {
    v = std::max(v, overshoot[static_cast<std::size_t>(k)]);
    v = std::max(v, undershoot[static_cast<std::size_t>(k)]);
  }
  return v;
}

namespace {

// Free-node index map; Dirichlet problems constrain boundary vertices to 0.
struct DofMap {
  std::vector<int> full_of_free;
  std::vector<int> free_of_full;  // -1 when constrained

  int n_free() const { return static_cast<int>(full_of_free.size()); }

  Eigen::VectorXd restrict_vec(const Eigen::VectorXd& full) const {
    Eigen::VectorXd out(n_free());
    for (int i = 0; i < n_free(); ++i) out[i] = full[full_of_free[static_cast<std::size_t>(i)]];
    return out;
  }

  SparseMatrix restrict_mat(const SparseMatrix& full) const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(full.nonZeros()));
    for (int col = 0; col < full.outerSize(); ++col) {
      const int fc = free_of_full[static_cast<std::size_t>(col)];
      if (fc < 0) continue;
      for (SparseMatrix::InnerIterator it(full, col); it; ++it) {
        const int fr = free_of_full[static_cast<std::size_t>(it.row())];
        if (fr < 0) continue;
        trips.emplace_back(fr, fc, it.value());
      }
    }
    SparseMatrix out(n_free(), n_free());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
  }

  void scatter_add(const Eigen::VectorXd& free_delta, Eigen::VectorXd& full) const {
    for (int i = 0; i < n_free(); ++i)
      full[full_of_free[static_cast<std::size_t>(i)]] += free_delta[i];
  }
};

DofMap make_dof_map(const Mesh& mesh, BoundaryKind kind) {
  DofMap map;
  map.free_of_full.assign(static_cast<std::size_t>(mesh.n_vertices()), -1);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (kind == BoundaryKind::dirichlet_zero && mesh.is_boundary_vertex(v)) continue;
    map.free_of_full[static_cast<std::size_t>(v)] = static_cast<int>(map.full_of_free.size());
    map.full_of_free.push_back(v);
  }
  return map;
}

// Own-component reaction terms kept live inside the inner Newton solve. The
// cross component and both gradient magnitudes are frozen at the Picard
// iterate; the own value enters through the nodal truncation.
struct LiveReaction {
  const expr::Expr* f = nullptr;
  const expr::Expr* g = nullptr;  // null under Dirichlet
  int own = 0;                    // slot index: 0 -> s1, 1 -> s2
  Eigen::VectorXd other_cell;     // frozen cross values at cell quadrature points
  Eigen::VectorXd other_facet;    // frozen cross values at facet quadrature points
  Eigen::VectorXd g1_cell, g2_cell;  // frozen gradient magnitudes per cell
};

// Inner problem of one Picard sweep for one component:
//   A(u) + lambda B(u) - (live reaction terms) = rhs_frozen.
// With no live reaction this is the gradient of a convex energy and the line
// search runs on it; otherwise the merit is the residual norm.
struct InnerProblem {
  const ExponentData* data = nullptr;
  const Mesh* mesh = nullptr;
  const DofMap* dofs = nullptr;
  const NodalField* lower = nullptr;  // penalty/truncation bounds; null disables
  const NodalField* upper = nullptr;
  double lambda = 0.0;
  Eigen::VectorXd rhs_full;
  double epsilon_reg = 0.0;
  double penalty_floor = 0.0;
  const LiveReaction* live = nullptr;

  bool has_energy() const { return live == nullptr; }

  NodalField truncated(const NodalField& u) const {
    if (!lower) return u;
    return u.cwiseMax(*lower).cwiseMin(*upper);
  }

  double live_f(const QuadPoint& qp, double s_own, double s_other, double g1, double g2) const {
    expr::Bindings env;
    env.set(expr::Var::x1, qp.x[0])
        .set(expr::Var::x2, qp.x[1])
        .set(live->own == 0 ? expr::Var::s1 : expr::Var::s2, s_own)
        .set(live->own == 0 ? expr::Var::s2 : expr::Var::s1, s_other)
        .set(expr::Var::g1, g1)
        .set(expr::Var::g2, g2);
    return live->f->evaluate(env);
  }

  double live_g(const QuadPoint& qp, double s_own, double s_other) const {
    expr::Bindings env;
    env.set(expr::Var::x1, qp.x[0])
        .set(expr::Var::x2, qp.x[1])
        .set(live->own == 0 ? expr::Var::s1 : expr::Var::s2, s_own)
        .set(live->own == 0 ? expr::Var::s2 : expr::Var::s1, s_other);
    return live->g->evaluate(env);
  }

  Eigen::VectorXd residual_full(const NodalField& u) const {
    Eigen::VectorXd r = apply_operator(u, *data, *mesh, epsilon_reg) - rhs_full;
    if (lower) r += lambda * apply_penalty(u, *lower, *upper, *data, *mesh);
    if (live) {
      const NodalField tr = truncated(u);
      const int npc = mesh->nodes_per_cell();
      for (int c = 0; c < mesh->n_cells(); ++c) {
        const auto& cv = mesh->cells[static_cast<std::size_t>(c)];
        for (int iq = 0; iq < mesh->qp_per_cell; ++iq) {
          const int gi = c * mesh->qp_per_cell + iq;
          const auto& qp = mesh->qp(c, iq);
          const double s_own = value_at_qp(*mesh, tr, c, iq);
          const double fv = live_f(qp, s_own, live->other_cell[gi], live->g1_cell[c],
                                   live->g2_cell[c]);
          for (int l = 0; l < npc; ++l)
            r[cv[static_cast<std::size_t>(l)]] -=
                qp.weight * fv * qp.basis[static_cast<std::size_t>(l)];
        }
      }
      if (live->g != nullptr) {
        for (int f = 0; f < mesh->n_facets(); ++f) {
          const auto& facet = mesh->boundary_facets[static_cast<std::size_t>(f)];
          for (int iq = 0; iq < mesh->qp_per_facet; ++iq) {
            const int gi = f * mesh->qp_per_facet + iq;
            const auto& qp = mesh->fqp(f, iq);
            const double s_own = value_at_fqp(*mesh, tr, f, iq);
            const double gv = live_g(qp, s_own, live->other_facet[gi]);
            r[facet.v[0]] -= qp.weight * gv * qp.basis[0];
            if (facet.v[1] >= 0) r[facet.v[1]] -= qp.weight * gv * qp.basis[1];
          }
        }
      }
    }
    return r;
  }

  Eigen::VectorXd residual(const NodalField& u) const { return dofs->restrict_vec(residual_full(u)); }

  SparseMatrix jacobian(const NodalField& u) const {
    SparseMatrix J = operator_jacobian(u, *data, *mesh, epsilon_reg);
    if (lower)
      J = J + SparseMatrix(
                  lambda * penalty_jacobian(u, *lower, *upper, *data, *mesh, penalty_floor));
    if (live) {
      // d/ds of the live terms by central differences; the nodal truncation
      // contributes the indicator factor on the column node.
      std::vector<Eigen::Triplet<double>> trips;
      const NodalField tr = truncated(u);
      Eigen::VectorXd active = Eigen::VectorXd::Ones(u.size());
      if (lower) {
        for (Eigen::Index i = 0; i < u.size(); ++i)
          active[i] = ((*lower)[i] <= u[i] && u[i] <= (*upper)[i]) ? 1.0 : 0.0;
      }
      const int npc = mesh->nodes_per_cell();
      for (int c = 0; c < mesh->n_cells(); ++c) {
        const auto& cv = mesh->cells[static_cast<std::size_t>(c)];
        for (int iq = 0; iq < mesh->qp_per_cell; ++iq) {
          const int gi = c * mesh->qp_per_cell + iq;
          const auto& qp = mesh->qp(c, iq);
          const double s_own = value_at_qp(*mesh, tr, c, iq);
          const double h = 1e-6 * (1.0 + std::fabs(s_own));
          const double fp = live_f(qp, s_own + h, live->other_cell[gi], live->g1_cell[c],
                                   live->g2_cell[c]);
          const double fm = live_f(qp, s_own - h, live->other_cell[gi], live->g1_cell[c],
                                   live->g2_cell[c]);
          const double fs = (fp - fm) / (2.0 * h);
          for (int i = 0; i < npc; ++i)
            for (int j = 0; j < npc; ++j) {
              const int col = cv[static_cast<std::size_t>(j)];
              const double entry = -qp.weight * fs * qp.basis[static_cast<std::size_t>(i)] *
                                   qp.basis[static_cast<std::size_t>(j)] * active[col];
              if (entry != 0.0)
                trips.emplace_back(cv[static_cast<std::size_t>(i)], col, entry);
            }
        }
      }
      if (live->g != nullptr) {
        for (int f = 0; f < mesh->n_facets(); ++f) {
          const auto& facet = mesh->boundary_facets[static_cast<std::size_t>(f)];
          for (int iq = 0; iq < mesh->qp_per_facet; ++iq) {
            const int gi = f * mesh->qp_per_facet + iq;
            const auto& qp = mesh->fqp(f, iq);
            const double s_own = value_at_fqp(*mesh, tr, f, iq);
            const double h = 1e-6 * (1.0 + std::fabs(s_own));
            const double gp = live_g(qp, s_own + h, live->other_facet[gi]);
            const double gm = live_g(qp, s_own - h, live->other_facet[gi]);
            const double gs = (gp - gm) / (2.0 * h);
            const int verts[2] = {facet.v[0], facet.v[1]};
            for (int i = 0; i < 2; ++i) {
              if (verts[i] < 0) continue;
              for (int j = 0; j < 2; ++j) {
                if (verts[j] < 0) continue;
                const double entry = -qp.weight * gs * qp.basis[static_cast<std::size_t>(i)] *
                                     qp.basis[static_cast<std::size_t>(j)] * active[verts[j]];
                if (entry != 0.0) trips.emplace_back(verts[i], verts[j], entry);
              }
            }
          }
        }
      }
      SparseMatrix Jlive(mesh->n_vertices(), mesh->n_vertices());
      Jlive.setFromTriplets(trips.begin(), trips.end());
      J = J + Jlive;
    }
    return dofs->restrict_mat(J);
  }

  double energy(const NodalField& u) const {
    double e = operator_energy(u, *data, *mesh, epsilon_reg) - rhs_full.dot(u);
    if (lower) e += lambda * penalty_energy(u, *lower, *upper, *data, *mesh);
    return e;
  }
};

struct NewtonOutcome {
  bool converged = false;
  int iterations = 0;
  double residual_norm = std::numeric_limits<double>::infinity();
  std::string reason;
};

// Damped Newton with a Levenberg shift. The merit is the exact energy when
// the problem is a gradient system, the residual norm otherwise. The shift
// grows on factorization failure, absurd steps, or failed line searches, and
// decays after accepted steps.
NewtonOutcome damped_newton(const InnerProblem& prob, NodalField& u, const SolveOptions& opts,
                            double tol) {
  NewtonOutcome out;
  Eigen::VectorXd r = prob.residual(u);
  out.residual_norm = r.norm();

  const bool use_energy = prob.has_energy();
  double sigma = 0.0;

  for (int it = 0; it < opts.max_newton; ++it) {
    if (!std::isfinite(out.residual_norm)) {
      out.reason = "non-finite residual";
      return out;
    }
    if (out.residual_norm <= tol) {
      out.converged = true;
      return out;
    }
    ++out.iterations;

    SparseMatrix J = prob.jacobian(u);
    double diag_scale = 1.0;
    for (int k = 0; k < J.outerSize(); ++k)
      for (SparseMatrix::InnerIterator itj(J, k); itj; ++itj)
        if (itj.row() == itj.col()) diag_scale = std::max(diag_scale, std::fabs(itj.value()));
    const double step_cap = 1e3 * (1.0 + u.lpNorm<Eigen::Infinity>());

    bool stepped = false;
    for (int attempt = 0; attempt < 24 && !stepped; ++attempt) {
      SparseMatrix Js = J;
      if (sigma > 0.0) {
        SparseMatrix I(J.rows(), J.cols());
        I.setIdentity();
        Js = J + SparseMatrix(sigma * I);
      }

      Eigen::VectorXd delta;
      bool factorized = false;
      if (use_energy) {
        Eigen::SimplicialLDLT<SparseMatrix> ldlt(Js);
        if (ldlt.info() == Eigen::Success) {
          delta = ldlt.solve(-r);
          factorized = true;
        }
      } else {
        Eigen::SparseLU<SparseMatrix> lu;
        lu.compute(Js);
        if (lu.info() == Eigen::Success) {
          delta = lu.solve(-r);
          factorized = true;
        }
      }
      const bool plausible = factorized && delta.allFinite() &&
                             delta.lpNorm<Eigen::Infinity>() <= step_cap &&
                             (!use_energy || r.dot(delta) < 0.0);
      if (!plausible) {
        sigma = (sigma == 0.0) ? 1e-12 * diag_scale : sigma * 100.0;
        continue;
      }

      const double e0 = use_energy ? prob.energy(u) : out.residual_norm;
      const double slope = r.dot(delta);
      double t = 1.0;
      NodalField trial = u;
      Eigen::VectorXd r_trial;
      bool accepted = false;
      for (int ls = 0; ls < 50; ++ls) {
        trial = u;
        prob.dofs->scatter_add(t * delta, trial);
        if (use_energy) {
          const double e1 = prob.energy(trial);
          if (std::isfinite(e1) && e1 <= e0 + 1e-4 * t * slope) {
            r_trial = prob.residual(trial);
            accepted = true;
            break;
          }
        } else {
          r_trial = prob.residual(trial);
          const double n1 = r_trial.norm();
          if (std::isfinite(n1) && n1 <= (1.0 - 1e-4 * t) * e0) {
            accepted = true;
            break;
          }
        }
        t *= opts.damping;
      }
      if (!accepted) {
        sigma = (sigma == 0.0) ? 1e-10 * diag_scale : sigma * 100.0;
        continue;
      }
      u = trial;
      r = r_trial;
      out.residual_norm = r.norm();
      sigma *= 0.25;
      if (sigma < 1e-14 * diag_scale) sigma = 0.0;
      stepped = true;
    }
    if (!stepped) {
      out.reason = "linear solve breakdown (singular Jacobian after regularization)";
      return out;
    }
  }
  if (out.residual_norm <= tol) {
    out.converged = true;
  } else {
    out.reason = "Newton iteration limit reached";
  }
  return out;
}

double system_residual_norm(const SystemState& state, const ProblemSpec& spec,
                            const TrappingRegion& region, const std::array<double, 2>& lambda,
                            const SolveOptions& opts, const DofMap& dofs) {
  auto reaction = apply_reaction(state, spec, region);
  std::array<Eigen::VectorXd, 2> rhs = reaction;
  if (spec.boundary_kind == BoundaryKind::neumann_nonlinear) {
    auto bdry = apply_boundary(state, spec, region);
    rhs[0] += bdry[0];
    rhs[1] += bdry[1];
  }
  double sq = 0.0;
  for (int k = 0; k < 2; ++k) {
    const auto& comp = spec.comp[static_cast<std::size_t>(k)];
    Eigen::VectorXd r =
        apply_operator(state.component(k), comp.exponents, *spec.mesh, opts.epsilon_reg) +
        lambda[static_cast<std::size_t>(k)] *
            apply_penalty(state.component(k), region.lower.component(k),
                          region.upper.component(k), comp.exponents, *spec.mesh) -
        rhs[static_cast<std::size_t>(k)];
    sq += dofs.restrict_vec(r).squaredNorm();
  }
  return std::sqrt(sq);
}

void zero_constrained(SystemState& state, const Mesh& mesh, BoundaryKind kind) {
  if (kind != BoundaryKind::dirichlet_zero) return;
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (mesh.is_boundary_vertex(v)) {
      state.u1[v] = 0.0;
      state.u2[v] = 0.0;
    }
  }
}

}  // namespace

ComparisonStats comparison_check(const SystemState& state, const TrappingRegion& region,
                                 const ProblemSpec& spec) {
  ComparisonStats stats;
  const Mesh& mesh = *spec.mesh;
  for (int k = 0; k < 2; ++k) {
    const auto& u = state.component(k);
    const auto& lo = region.lower.component(k);
    const auto& up = region.upper.component(k);
    stats.overshoot[static_cast<std::size_t>(k)] = std::max(0.0, (u - up).maxCoeff());
    stats.undershoot[static_cast<std::size_t>(k)] = std::max(0.0, (lo - u).maxCoeff());

    const auto& q_cell = spec.comp[static_cast<std::size_t>(k)].exponents.q_cell;
    double over_mod = 0.0, under_mod = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
      for (int iq = 0; iq < mesh.qp_per_cell; ++iq) {
        const int gi = c * mesh.qp_per_cell + iq;
        const double w = mesh.cell_qp[static_cast<std::size_t>(gi)].weight;
        const double uv = value_at_qp(mesh, u, c, iq);
        const double overv = uv - value_at_qp(mesh, up, c, iq);
        const double underv = value_at_qp(mesh, lo, c, iq) - uv;
        if (overv > 0.0) over_mod += w * std::pow(overv, q_cell[gi]);
        if (underv > 0.0) under_mod += w * std::pow(underv, q_cell[gi]);
      }
    }
    stats.overshoot_modular[static_cast<std::size_t>(k)] = over_mod;
    stats.undershoot_modular[static_cast<std::size_t>(k)] = under_mod;
  }
  return stats;
}

std::pair<SystemState, SolveReport> solve_truncated(const ProblemSpec& spec,
                                                    const TrappingRegion& region,
                                                    const SystemState& init,
                                                    const SolveOptions& opts) {
  opts.validate();
  check_region(region, spec.mesh, spec.boundary_kind);
  const Mesh& mesh = *spec.mesh;
  if (init.u1.size() != mesh.n_vertices() || init.u2.size() != mesh.n_vertices())
    throw std::invalid_argument("solve_truncated: init lives on a different mesh");

  const DofMap dofs = make_dof_map(mesh, spec.boundary_kind);
  const bool neumann = spec.boundary_kind == BoundaryKind::neumann_nonlinear;
  const std::array<double, 2> lambda{opts.lambda_init, opts.lambda_init};
  const double penalty_floor = std::sqrt(opts.epsilon_reg);

  // A component is solved with its own reaction value live whenever f_k (or
  // g_k) actually uses it; otherwise its right-hand side is fully frozen and
  // the inner problem is an exact gradient system.
  std::array<bool, 2> live_component{};
  for (int k = 0; k < 2; ++k) {
    const auto own_var = (k == 0) ? expr::Var::s1 : expr::Var::s2;
    live_component[static_cast<std::size_t>(k)] =
        spec.comp[static_cast<std::size_t>(k)].f.uses(own_var) ||
        (neumann && spec.comp[static_cast<std::size_t>(k)].g.uses(own_var));
  }

  SystemState u = init;
  zero_constrained(u, mesh, spec.boundary_kind);

  SolveReport report;
  report.lambda_used = lambda;

  double full_res = system_residual_norm(u, spec, region, lambda, opts, dofs);
  report.residual_history.push_back(full_res);
  report.final_residual_norm = full_res;

  if (full_res <= opts.newton_tol) {
    report.converged = true;
  } else {
    double prev_res = full_res;
    for (int m = 0; m < opts.max_picard; ++m) {
      ++report.picard_iterations;

      const NodalField t1 = truncate(u.u1, region.lower.u1, region.upper.u1);
      const NodalField t2 = truncate(u.u2, region.lower.u2, region.upper.u2);

      SystemState next = u;
      bool inner_ok = true;
      for (int k = 0; k < 2 && inner_ok; ++k) {
        const auto& comp = spec.comp[static_cast<std::size_t>(k)];
        InnerProblem prob;
        prob.data = &comp.exponents;
        prob.mesh = &mesh;
        prob.dofs = &dofs;
        prob.lower = &region.lower.component(k);
        prob.upper = &region.upper.component(k);
        prob.lambda = lambda[static_cast<std::size_t>(k)];
        prob.epsilon_reg = opts.epsilon_reg;
        prob.penalty_floor = penalty_floor;
        prob.rhs_full = Eigen::VectorXd::Zero(mesh.n_vertices());

        LiveReaction live;
        if (live_component[static_cast<std::size_t>(k)]) {
          live.f = &comp.f;
          live.g = neumann ? &comp.g : nullptr;
          live.own = k;
          const NodalField& other = (k == 0) ? t2 : t1;
          const auto qv_other = eval_at_quadrature(other, mesh);
          live.other_cell = qv_other.values;
          live.other_facet.resize(mesh.n_facets() * mesh.qp_per_facet);
          for (int f = 0; f < mesh.n_facets(); ++f)
            for (int iq = 0; iq < mesh.qp_per_facet; ++iq)
              live.other_facet[f * mesh.qp_per_facet + iq] = value_at_fqp(mesh, other, f, iq);
          live.g1_cell.resize(mesh.n_cells());
          live.g2_cell.resize(mesh.n_cells());
          for (int c = 0; c < mesh.n_cells(); ++c) {
            const auto ga = cell_gradient(mesh, t1, c);
            const auto gb = cell_gradient(mesh, t2, c);
            live.g1_cell[c] = std::hypot(ga[0], ga[1]);
            live.g2_cell[c] = std::hypot(gb[0], gb[1]);
          }
          prob.live = &live;
        } else {
          prob.rhs_full = reaction_residual(comp.f, t1, t2, mesh);
          if (neumann) prob.rhs_full += boundary_residual(comp.g, t1, t2, mesh);
        }

        NewtonOutcome outcome =
            damped_newton(prob, next.component(k), opts, 0.5 * opts.newton_tol);
        report.newton_iterations_total += outcome.iterations;
        if (!outcome.converged) {
          inner_ok = false;
          report.failure_reason = "inner Newton failed for component " + std::to_string(k + 1) +
                                  ": " + outcome.reason;
        }
      }
      if (!inner_ok) break;

      const double step = std::max((next.u1 - u.u1).lpNorm<Eigen::Infinity>(),
                                   (next.u2 - u.u2).lpNorm<Eigen::Infinity>());
      u = next;
      full_res = system_residual_norm(u, spec, region, lambda, opts, dofs);
      report.residual_history.push_back(full_res);
      report.final_residual_norm = full_res;

      if (full_res <= opts.newton_tol) {
        report.converged = true;
        break;
      }
      // Stagnation: the iterates stopped moving and the residual stopped
      // contracting (the residual floor tracks the successive-step size).
      const bool contracting = full_res < 0.9 * prev_res;
      const double machine_step =
          1e-15 * (1.0 + std::max(u.u1.lpNorm<Eigen::Infinity>(),
                                  u.u2.lpNorm<Eigen::Infinity>()));
      if ((step <= opts.picard_tol && !contracting) || step <= machine_step) {
        report.failure_reason = "Picard stagnation above tolerance";
        break;
      }
      prev_res = full_res;
      if (m + 1 == opts.max_picard) report.failure_reason = "Picard iteration limit reached";
    }
  }

  ComparisonStats stats = comparison_check(u, region, spec);
  report.enclosure_violation = stats.max_violation();
  return {std::move(u), std::move(report)};
}

LambdaScheduleResult select_lambda(const ProblemSpec& spec, const TrappingRegion& region,
                                   const SolveOptions& opts) {
  opts.validate();
  LambdaScheduleResult result;
  const double eff_tol = opts.effective_comparison_tol(*spec.mesh);

  double lambda = opts.lambda_init;
  for (;;) {
    ++result.attempts;
    SolveOptions attempt = opts;
    attempt.lambda_init = lambda;
    auto [state, report] = solve_truncated(spec, region, region_midpoint(region), attempt);
    result.state = std::move(state);
    result.report = std::move(report);
    result.lambda = {lambda, lambda};
    if (result.report.converged && result.report.enclosure_violation <= eff_tol) {
      result.accepted = true;
      return result;
    }
    const double next = lambda * opts.lambda_growth;
    if (next > opts.lambda_max) {
      result.failure_reason =
          "lambda_max exceeded without an enclosed solution (last violation " +
          std::to_string(result.report.enclosure_violation) + ")";
      return result;
    }
    lambda = next;
  }
}

SystemState solve_monotone_rhs(const ProblemSpec& spec, const std::array<ScalarField, 2>& rhs,
                               const SolveOptions& opts, SolveReport* report) {
  opts.validate();
  if (spec.boundary_kind != BoundaryKind::dirichlet_zero)
    throw std::invalid_argument("solve_monotone_rhs: requires dirichlet_zero boundary kind");
  const Mesh& mesh = *spec.mesh;
  const DofMap dofs = make_dof_map(mesh, spec.boundary_kind);

  SolveReport local;
  SystemState u = constant_state(mesh, 0.0, 0.0);

  // Seed from the p = 2 solve; avoids the degenerate zero-gradient start.
  const SparseMatrix S = dofs.restrict_mat(p2_stiffness(mesh));
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(S);

  for (int k = 0; k < 2; ++k) {
    InnerProblem prob;
    prob.data = &spec.comp[static_cast<std::size_t>(k)].exponents;
    prob.mesh = &mesh;
    prob.dofs = &dofs;
    prob.rhs_full = load_vector(rhs[static_cast<std::size_t>(k)], mesh);
    prob.epsilon_reg = opts.epsilon_reg;

    if (ldlt.info() == Eigen::Success) {
      const Eigen::VectorXd seed = ldlt.solve(dofs.restrict_vec(prob.rhs_full));
      if (seed.allFinite()) dofs.scatter_add(seed, u.component(k));
    }

    NewtonOutcome outcome =
        damped_newton(prob, u.component(k), opts, opts.newton_tol / std::sqrt(2.0));
    local.newton_iterations_total += outcome.iterations;
    local.final_residual_norm = std::hypot(local.final_residual_norm, outcome.residual_norm);
    if (!outcome.converged) {
      local.failure_reason =
          "monotone solve failed for component " + std::to_string(k + 1) + ": " + outcome.reason;
      if (report) *report = local;
      throw std::runtime_error("solve_monotone_rhs: " + local.failure_reason);
    }
  }
  local.converged = true;
  local.residual_history.push_back(local.final_residual_norm);
  if (report) *report = local;
  return u;
}

}  // namespace dphase
