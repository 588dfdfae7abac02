#include "dphase/musielak.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace dphase {

namespace {

double bulk_modular(const NodalField& u, const ExponentData& data, const Mesh& mesh,
                    double scale) {
  double sum = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    for (int iq = 0; iq < mesh.qp_per_cell; ++iq) {
      const int gi = c * mesh.qp_per_cell + iq;
      const double v = std::fabs(value_at_qp(mesh, u, c, iq) * scale);
      sum += mesh.cell_qp[static_cast<std::size_t>(gi)].weight *
             (std::pow(v, data.p_cell[gi]) + data.mu_cell[gi] * std::pow(v, data.q_cell[gi]));
    }
  }
  return sum;
}

double grad_modular(const NodalField& u, const ExponentData& data, const Mesh& mesh,
                    double scale) {
  double sum = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto g = cell_gradient(mesh, u, c);
    const double v = std::hypot(g[0], g[1]) * std::fabs(scale);
    for (int iq = 0; iq < mesh.qp_per_cell; ++iq) {
      const int gi = c * mesh.qp_per_cell + iq;
      sum += mesh.cell_qp[static_cast<std::size_t>(gi)].weight *
             (std::pow(v, data.p_cell[gi]) + data.mu_cell[gi] * std::pow(v, data.q_cell[gi]));
    }
  }
  return sum;
}

double surface_modular(const NodalField& u, const ExponentData& data, const Mesh& mesh,
                       double scale) {
  double sum = 0.0;
  for (int f = 0; f < mesh.n_facets(); ++f) {
    for (int iq = 0; iq < mesh.qp_per_facet; ++iq) {
      const int gi = f * mesh.qp_per_facet + iq;
      const double v = std::fabs(value_at_fqp(mesh, u, f, iq) * scale);
      sum += mesh.facet_qp[static_cast<std::size_t>(gi)].weight *
             (std::pow(v, data.p_facet[gi]) + data.mu_facet[gi] * std::pow(v, data.q_facet[gi]));
    }
  }
  return sum;
}

// Bracketing + bisection on the strictly decreasing map lambda -> rho(u/lambda).
NormValue luxemburg_from(const std::function<double(double)>& rho_scaled, bool zero_field) {
  if (zero_field) return {0.0, 0.0};

  double lo = 1.0, hi = 1.0;
  while (rho_scaled(1.0 / hi) > 1.0) {
    hi *= 2.0;
    if (hi > 1e300) break;
  }
  while (rho_scaled(1.0 / lo) < 1.0) {
    lo *= 0.5;
    if (lo < 1e-300) break;
  }
  // rho(u/lo) >= 1 >= rho(u/hi)
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double r = rho_scaled(1.0 / mid);
    if (std::fabs(r - 1.0) <= 1e-15) break;
    if (r > 1.0)
      lo = mid;
    else
      hi = mid;
    if ((hi - lo) <= 1e-16 * mid) break;
  }
  NormValue out;
  out.value = mid;
  out.bisection_residual = std::fabs(rho_scaled(1.0 / mid) - 1.0);
  return out;
}

}  // namespace

ModularValue modular(const NodalField& u, const ExponentData& data, const Mesh& mesh) {
  return {bulk_modular(u, data, mesh, 1.0)};
}

ModularValue gradient_modular(const NodalField& u, const ExponentData& data, const Mesh& mesh) {
  return {grad_modular(u, data, mesh, 1.0)};
}

NormValue luxemburg_norm(const NodalField& u, const ExponentData& data, const Mesh& mesh) {
  const bool zero = (u.size() == 0) || (u.lpNorm<Eigen::Infinity>() == 0.0);
  return luxemburg_from([&](double s) { return bulk_modular(u, data, mesh, s); }, zero);
}

ModularValue boundary_modular(const NodalField& u, const ExponentData& data, const Mesh& mesh) {
  return {surface_modular(u, data, mesh, 1.0)};
}

NormValue boundary_norm(const NodalField& u, const ExponentData& data, const Mesh& mesh) {
  bool zero = true;
  for (int f = 0; f < mesh.n_facets() && zero; ++f) {
    const auto& facet = mesh.boundary_facets[static_cast<std::size_t>(f)];
    if (u[facet.v[0]] != 0.0 || (facet.v[1] >= 0 && u[facet.v[1]] != 0.0)) zero = false;
  }
  return luxemburg_from([&](double s) { return surface_modular(u, data, mesh, s); }, zero);
}

RelationReport check_norm_modular_relations(const NodalField& u, const ExponentData& data,
                                            const Mesh& mesh, double slack) {
  if (u.size() == 0 || u.lpNorm<Eigen::Infinity>() == 0.0)
    throw std::invalid_argument("check_norm_modular_relations: requires a nonzero field");

  RelationReport rep;
  rep.norm = luxemburg_norm(u, data, mesh).value;
  rep.modular = modular(u, data, mesh).value;
  const double n = rep.norm, r = rep.modular;

  rep.sign_agreement = !((n > 1.0 + slack && r < 1.0 - slack) ||
                         (n < 1.0 - slack && r > 1.0 + slack));
  if (n < 1.0) {
    rep.small_norm_bounds = (std::pow(n, data.q_plus) <= r + slack) &&
                            (r <= std::pow(n, data.p_minus) + slack);
  }
  if (n > 1.0) {
    rep.large_norm_bounds = (std::pow(n, data.p_minus) <= r + slack) &&
                            (r <= std::pow(n, data.q_plus) + slack);
  }
  return rep;
}

}  // namespace dphase
