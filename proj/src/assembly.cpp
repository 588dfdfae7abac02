#include "dphase/assembly.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace dphase {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

double flux_coefficient(double grad2, double p, double q, double mu) {
  return std::pow(grad2, 0.5 * (p - 2.0)) + mu * std::pow(grad2, 0.5 * (q - 2.0));
}

std::string point_string(const std::array<double, 2>& x, int dim) {
  char buf[80];
  if (dim == 1)
    std::snprintf(buf, sizeof buf, "x = %.6g", x[0]);
  else
    std::snprintf(buf, sizeof buf, "x = (%.6g, %.6g)", x[0], x[1]);
  return buf;
}

}  // namespace

Eigen::VectorXd apply_operator(const NodalField& u, const ExponentData& data, const Mesh& mesh,
                               double epsilon_reg) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh.n_vertices());
  const int npc = mesh.nodes_per_cell();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto g = cell_gradient(mesh, u, c);
    const double grad2 = g[0] * g[0] + g[1] * g[1] + epsilon_reg;
    if (grad2 == 0.0) continue;  // zero gradient, zero flux
    const auto& cv = mesh.cells[static_cast<std::size_t>(c)];
    const auto& grads = mesh.cell_grad[static_cast<std::size_t>(c)];
    for (int iq = 0; iq < mesh.qp_per_cell; ++iq) {
      const int gi = c * mesh.qp_per_cell + iq;
      const double a =
          flux_coefficient(grad2, data.p_cell[gi], data.q_cell[gi], data.mu_cell[gi]);
      const double w = mesh.cell_qp[static_cast<std::size_t>(gi)].weight * a;
      for (int l = 0; l < npc; ++l) {
        const auto& gphi = grads[static_cast<std::size_t>(l)];
        r[cv[static_cast<std::size_t>(l)]] += w * (g[0] * gphi[0] + g[1] * gphi[1]);
      }
    }
  }
  return r;
}

SparseMatrix operator_jacobian(const NodalField& u, const ExponentData& data, const Mesh& mesh,
                               double epsilon_reg) {
  Triplets trips;
  trips.reserve(static_cast<std::size_t>(mesh.n_cells()) * 9);
  const int npc = mesh.nodes_per_cell();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto g = cell_gradient(mesh, u, c);
    const double grad2 = g[0] * g[0] + g[1] * g[1] + epsilon_reg;
    const auto& cv = mesh.cells[static_cast<std::size_t>(c)];
    const auto& grads = mesh.cell_grad[static_cast<std::size_t>(c)];
    for (int iq = 0; iq < mesh.qp_per_cell; ++iq) {
      const int gi = c * mesh.qp_per_cell + iq;
      const double p = data.p_cell[gi], q = data.q_cell[gi], mu = data.mu_cell[gi];
      const double w = mesh.cell_qp[static_cast<std::size_t>(gi)].weight;
      const double a = flux_coefficient(grad2, p, q, mu);
      // d/d(grad u) [a(|grad u|^2 + eps) grad u] = a I + 2 a' grad u (x) grad u
      const double ap = 0.5 * (p - 2.0) * std::pow(grad2, 0.5 * p - 2.0) +
                        mu * 0.5 * (q - 2.0) * std::pow(grad2, 0.5 * q - 2.0);
      for (int i = 0; i < npc; ++i) {
        const auto& gi_phi = grads[static_cast<std::size_t>(i)];
        const double gu_dot_i = g[0] * gi_phi[0] + g[1] * gi_phi[1];
        for (int j = 0; j < npc; ++j) {
          const auto& gj_phi = grads[static_cast<std::size_t>(j)];
          const double dot_ij = gi_phi[0] * gj_phi[0] + gi_phi[1] * gj_phi[1];
          const double gu_dot_j = g[0] * gj_phi[0] + g[1] * gj_phi[1];
          const double entry = w * (a * dot_ij + 2.0 * ap * gu_dot_i * gu_dot_j);
          trips.emplace_back(cv[static_cast<std::size_t>(i)], cv[static_cast<std::size_t>(j)],
                             entry);
        }
      }
    }
  }
  SparseMatrix J(mesh.n_vertices(), mesh.n_vertices());
  J.setFromTriplets(trips.begin(), trips.end());
  return J;
}

double operator_energy(const NodalField& u, const ExponentData& data, const Mesh& mesh,
                       double epsilon_reg) {
  double e = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto g = cell_gradient(mesh, u, c);
    const double grad2 = g[0] * g[0] + g[1] * g[1] + epsilon_reg;
    for (int iq = 0; iq < mesh.qp_per_cell; ++iq) {
      const int gi = c * mesh.qp_per_cell + iq;
      const double p = data.p_cell[gi], q = data.q_cell[gi], mu = data.mu_cell[gi];
      e += mesh.cell_qp[static_cast<std::size_t>(gi)].weight *
           (std::pow(grad2, 0.5 * p) / p + mu * std::pow(grad2, 0.5 * q) / q);
    }
  }
  return e;
}

NodalField truncate(const NodalField& u, const NodalField& lower, const NodalField& upper) {
  if (((upper - lower).array() < 0.0).any())
    throw std::invalid_argument("truncate: lower > upper at some node");
  return u.cwiseMax(lower).cwiseMin(upper);
}

Eigen::VectorXd apply_penalty(const NodalField& u, const NodalField& lower,
                              const NodalField& upper, const ExponentData& data,
                              const Mesh& mesh) {
  if (((upper - lower).array() < 0.0).any())
    throw std::invalid_argument("apply_penalty: lower > upper at some node");
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh.n_vertices());
  const int npc = mesh.nodes_per_cell();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& cv = mesh.cells[static_cast<std::size_t>(c)];
    for (int iq = 0; iq < mesh.qp_per_cell; ++iq) {
      const int gi = c * mesh.qp_per_cell + iq;
      const double s = value_at_qp(mesh, u, c, iq);
      const double lo = value_at_qp(mesh, lower, c, iq);
      const double up = value_at_qp(mesh, upper, c, iq);
      double b = 0.0;
      if (s > up)
        b = std::pow(s - up, data.q_cell[gi] - 1.0);
      else if (s < lo)
        b = -std::pow(lo - s, data.q_cell[gi] - 1.0);
      else
        continue;
      const auto& qp = mesh.cell_qp[static_cast<std::size_t>(gi)];
      for (int l = 0; l < npc; ++l)
        r[cv[static_cast<std::size_t>(l)]] += qp.weight * b * qp.basis[static_cast<std::size_t>(l)];
    }
  }
  return r;
}

SparseMatrix penalty_jacobian(const NodalField& u, const NodalField& lower,
                              const NodalField& upper, const ExponentData& data, const Mesh& mesh,
                              double derivative_floor) {
  Triplets trips;
  const int npc = mesh.nodes_per_cell();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& cv = mesh.cells[static_cast<std::size_t>(c)];
    for (int iq = 0; iq < mesh.qp_per_cell; ++iq) {
      const int gi = c * mesh.qp_per_cell + iq;
      const double s = value_at_qp(mesh, u, c, iq);
      const double lo = value_at_qp(mesh, lower, c, iq);
      const double up = value_at_qp(mesh, upper, c, iq);
      double dist = 0.0;
      if (s > up)
        dist = s - up;
      else if (s < lo)
        dist = lo - s;
      else
        continue;
      const double q = data.q_cell[gi];
      const double db = (q - 1.0) * std::pow(std::max(dist, derivative_floor), q - 2.0);
      const auto& qp = mesh.cell_qp[static_cast<std::size_t>(gi)];
      for (int i = 0; i < npc; ++i)
        for (int j = 0; j < npc; ++j)
          trips.emplace_back(cv[static_cast<std::size_t>(i)], cv[static_cast<std::size_t>(j)],
                             qp.weight * db * qp.basis[static_cast<std::size_t>(i)] *
                                 qp.basis[static_cast<std::size_t>(j)]);
    }
  }
  SparseMatrix B(mesh.n_vertices(), mesh.n_vertices());
  B.setFromTriplets(trips.begin(), trips.end());
  return B;
}

double penalty_energy(const NodalField& u, const NodalField& lower, const NodalField& upper,
                      const ExponentData& data, const Mesh& mesh) {
  double e = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    for (int iq = 0; iq < mesh.qp_per_cell; ++iq) {
      const int gi = c * mesh.qp_per_cell + iq;
      const double s = value_at_qp(mesh, u, c, iq);
      const double lo = value_at_qp(mesh, lower, c, iq);
      const double up = value_at_qp(mesh, upper, c, iq);
      const double q = data.q_cell[gi];
      double dist = 0.0;
      if (s > up)
        dist = s - up;
      else if (s < lo)
        dist = lo - s;
      else
        continue;
      e += mesh.cell_qp[static_cast<std::size_t>(gi)].weight * std::pow(dist, q) / q;
    }
  }
  return e;
}

Eigen::VectorXd reaction_residual(const expr::Expr& f, const NodalField& a, const NodalField& b,
                                  const Mesh& mesh) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh.n_vertices());
  const int npc = mesh.nodes_per_cell();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& cv = mesh.cells[static_cast<std::size_t>(c)];
    const auto ga = cell_gradient(mesh, a, c);
    const auto gb = cell_gradient(mesh, b, c);
    const double g1 = std::hypot(ga[0], ga[1]);
    const double g2 = std::hypot(gb[0], gb[1]);
    for (int iq = 0; iq < mesh.qp_per_cell; ++iq) {
      const auto& qp = mesh.qp(c, iq);
      const double s1 = value_at_qp(mesh, a, c, iq);
      const double s2 = value_at_qp(mesh, b, c, iq);
      expr::Bindings env;
      env.set(expr::Var::x1, qp.x[0])
          .set(expr::Var::x2, qp.x[1])
          .set(expr::Var::s1, s1)
          .set(expr::Var::s2, s2)
          .set(expr::Var::g1, g1)
          .set(expr::Var::g2, g2);
      double value = 0.0;
      try {
        value = f.evaluate(env);
      } catch (const expr::EvalError& err) {
        char args[160];
        std::snprintf(args, sizeof args, "s1 = %.6g, s2 = %.6g, g1 = %.6g, g2 = %.6g", s1, s2, g1,
                      g2);
        throw expr::EvalError(std::string("reaction evaluation failed (") + err.what() + ") at " +
                                  point_string(qp.x, mesh.dim) + " with " + args,
                              err.offset());
      }
      for (int l = 0; l < npc; ++l)
        r[cv[static_cast<std::size_t>(l)]] +=
            qp.weight * value * qp.basis[static_cast<std::size_t>(l)];
    }
  }
  return r;
}

Eigen::VectorXd boundary_residual(const expr::Expr& g, const NodalField& a, const NodalField& b,
                                  const Mesh& mesh) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh.n_vertices());
  for (int f = 0; f < mesh.n_facets(); ++f) {
    const auto& facet = mesh.boundary_facets[static_cast<std::size_t>(f)];
    for (int iq = 0; iq < mesh.qp_per_facet; ++iq) {
      const auto& qp = mesh.fqp(f, iq);
      const double s1 = value_at_fqp(mesh, a, f, iq);
      const double s2 = value_at_fqp(mesh, b, f, iq);
      expr::Bindings env;
      env.set(expr::Var::x1, qp.x[0])
          .set(expr::Var::x2, qp.x[1])
          .set(expr::Var::s1, s1)
          .set(expr::Var::s2, s2);
      double value = 0.0;
      try {
        value = g.evaluate(env);
      } catch (const expr::EvalError& err) {
        char args[120];
        std::snprintf(args, sizeof args, "s1 = %.6g, s2 = %.6g", s1, s2);
        throw expr::EvalError(std::string("boundary evaluation failed (") + err.what() + ") at " +
                                  point_string(qp.x, mesh.dim) + " with " + args,
                              err.offset());
      }
      r[facet.v[0]] += qp.weight * value * qp.basis[0];
      if (facet.v[1] >= 0) r[facet.v[1]] += qp.weight * value * qp.basis[1];
    }
  }
  return r;
}

std::array<Eigen::VectorXd, 2> apply_reaction(const SystemState& state, const ProblemSpec& spec,
                                              const TrappingRegion& region) {
  const NodalField t1 = truncate(state.u1, region.lower.u1, region.upper.u1);
  const NodalField t2 = truncate(state.u2, region.lower.u2, region.upper.u2);
  return {reaction_residual(spec.comp[0].f, t1, t2, *spec.mesh),
          reaction_residual(spec.comp[1].f, t1, t2, *spec.mesh)};
}

std::array<Eigen::VectorXd, 2> apply_boundary(const SystemState& state, const ProblemSpec& spec,
                                              const TrappingRegion& region) {
  if (spec.boundary_kind != BoundaryKind::neumann_nonlinear)
    throw std::logic_error("apply_boundary: problem has Dirichlet boundary conditions");
  const NodalField t1 = truncate(state.u1, region.lower.u1, region.upper.u1);
  const NodalField t2 = truncate(state.u2, region.lower.u2, region.upper.u2);
  return {boundary_residual(spec.comp[0].g, t1, t2, *spec.mesh),
          boundary_residual(spec.comp[1].g, t1, t2, *spec.mesh)};
}

std::array<Eigen::VectorXd, 2> weak_residual(const SystemState& state, const ProblemSpec& spec,
                                             double epsilon_reg) {
  std::array<Eigen::VectorXd, 2> out;
  for (int k = 0; k < 2; ++k) {
    out[static_cast<std::size_t>(k)] =
        apply_operator(state.component(k), spec.comp[static_cast<std::size_t>(k)].exponents,
                       *spec.mesh, epsilon_reg) -
        reaction_residual(spec.comp[static_cast<std::size_t>(k)].f, state.u1, state.u2,
                          *spec.mesh);
    if (spec.boundary_kind == BoundaryKind::neumann_nonlinear)
      out[static_cast<std::size_t>(k)] -= boundary_residual(
          spec.comp[static_cast<std::size_t>(k)].g, state.u1, state.u2, *spec.mesh);
  }
  return out;
}

Eigen::VectorXd load_vector(const ScalarField& h, const Mesh& mesh) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh.n_vertices());
  const int npc = mesh.nodes_per_cell();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& cv = mesh.cells[static_cast<std::size_t>(c)];
    for (int iq = 0; iq < mesh.qp_per_cell; ++iq) {
      const auto& qp = mesh.qp(c, iq);
      const double value = h(qp.x[0], qp.x[1]);
      for (int l = 0; l < npc; ++l)
        r[cv[static_cast<std::size_t>(l)]] +=
            qp.weight * value * qp.basis[static_cast<std::size_t>(l)];
    }
  }
  return r;
}

SparseMatrix p2_stiffness(const Mesh& mesh) {
  Triplets trips;
  trips.reserve(static_cast<std::size_t>(mesh.n_cells()) * 9);
  const int npc = mesh.nodes_per_cell();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& cv = mesh.cells[static_cast<std::size_t>(c)];
    const auto& grads = mesh.cell_grad[static_cast<std::size_t>(c)];
    const double m = mesh.cell_measure[static_cast<std::size_t>(c)];
    for (int i = 0; i < npc; ++i)
      for (int j = 0; j < npc; ++j)
        trips.emplace_back(cv[static_cast<std::size_t>(i)], cv[static_cast<std::size_t>(j)],
                           m * (grads[static_cast<std::size_t>(i)][0] *
                                    grads[static_cast<std::size_t>(j)][0] +
                                grads[static_cast<std::size_t>(i)][1] *
                                    grads[static_cast<std::size_t>(j)][1]));
  }
  SparseMatrix S(mesh.n_vertices(), mesh.n_vertices());
  S.setFromTriplets(trips.begin(), trips.end());
  return S;
}

std::vector<std::string> check_growth(const ProblemSpec& spec,
                                      const std::array<double, 2>& s_lower,
                                      const std::array<double, 2>& s_upper, int samples,
                                      std::uint64_t seed) {
  std::vector<std::string> findings;
  const Mesh& mesh = *spec.mesh;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> ximag(0.0, 10.0);

  auto conjugate = [](double p) { return p / (p - 1.0); };

  for (int trial = 0; trial < samples; ++trial) {
    std::uniform_int_distribution<int> cells(0, mesh.n_cells() - 1);
    const int c = cells(rng);
    std::uniform_int_distribution<int> qps(0, mesh.qp_per_cell - 1);
    const int iq = qps(rng);
    const auto& qp = mesh.qp(c, iq);
    const int gi = c * mesh.qp_per_cell + iq;
    const double s1 = s_lower[0] + unit(rng) * (s_upper[0] - s_lower[0]);
    const double s2 = s_lower[1] + unit(rng) * (s_upper[1] - s_lower[1]);
    const double xi1 = ximag(rng), xi2 = ximag(rng);

    const double p1 = spec.comp[0].exponents.p_cell[gi];
    const double p2 = spec.comp[1].exponents.p_cell[gi];

    for (int k = 0; k < 2; ++k) {
      const auto& comp = spec.comp[static_cast<std::size_t>(k)];
      if (!comp.growth_phi || !comp.growth_c) continue;
      expr::Bindings env;
      env.set(expr::Var::x1, qp.x[0])
          .set(expr::Var::x2, qp.x[1])
          .set(expr::Var::s1, s1)
          .set(expr::Var::s2, s2)
          .set(expr::Var::g1, xi1)
          .set(expr::Var::g2, xi2);
      const double fv = std::fabs(comp.f.evaluate(env));
      const double phi = (*comp.growth_phi)(qp.x[0], qp.x[1]);
      double bound = 0.0;
      if (k == 0)
        bound = phi + *comp.growth_c *
                          (std::pow(xi1, p1 - 1.0) + std::pow(xi2, p2 / conjugate(p1)));
      else
        bound = phi + *comp.growth_c *
                          (std::pow(xi1, p1 / conjugate(p2)) + std::pow(xi2, p2 - 1.0));
      if (fv > bound + 1e-12) {
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "|f%d| = %.6g exceeds growth bound %.6g at %s (s1 = %.4g, s2 = %.4g, "
                      "|xi1| = %.4g, |xi2| = %.4g)",
                      k + 1, fv, bound, point_string(qp.x, mesh.dim).c_str(), s1, s2, xi1, xi2);
        findings.emplace_back(buf);
      }
    }
  }

  // Boundary bound |g_k| <= psi_k(x) on sampled facet points.
  for (int trial = 0; trial < samples; ++trial) {
    std::uniform_int_distribution<int> facets(0, mesh.n_facets() - 1);
    const int f = facets(rng);
    std::uniform_int_distribution<int> qps(0, mesh.qp_per_facet - 1);
    const int iq = qps(rng);
    const auto& qp = mesh.fqp(f, iq);
    const double s1 = s_lower[0] + unit(rng) * (s_upper[0] - s_lower[0]);
    const double s2 = s_lower[1] + unit(rng) * (s_upper[1] - s_lower[1]);
    for (int k = 0; k < 2; ++k) {
      const auto& comp = spec.comp[static_cast<std::size_t>(k)];
      if (!comp.growth_psi || comp.g.empty()) continue;
      expr::Bindings env;
      env.set(expr::Var::x1, qp.x[0])
          .set(expr::Var::x2, qp.x[1])
          .set(expr::Var::s1, s1)
          .set(expr::Var::s2, s2);
      const double gv = std::fabs(comp.g.evaluate(env));
      const double psi = (*comp.growth_psi)(qp.x[0], qp.x[1]);
      if (gv > psi + 1e-12) {
        char buf[180];
        std::snprintf(buf, sizeof buf,
                      "|g%d| = %.6g exceeds psi bound %.6g at %s (s1 = %.4g, s2 = %.4g)", k + 1,
                      gv, psi, point_string(qp.x, mesh.dim).c_str(), s1, s2);
        findings.emplace_back(buf);
      }
    }
  }
  return findings;
}

}  // namespace dphase
