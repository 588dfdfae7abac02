#pragma once

#include "dphase/field.hpp"
#include "dphase/mesh.hpp"

namespace dphase {

/// Residual tolerance of the Luxemburg norm bisection: the returned value
/// lambda satisfies |rho(u/lambda) - 1| <= kNormTol for nonzero fields.
inline constexpr double kNormTol = 1e-10;

struct ModularValue {
  double value = 0.0;
};

struct NormValue {
  double value = 0.0;
  double bisection_residual = 0.0;  // |rho(u/value) - 1| at the returned value
};

/// rho(u) = integral of |u|^p(x) + mu(x)|u|^q(x) over the P1 interpolant.
ModularValue modular(const NodalField& u, const ExponentData& data, const Mesh& mesh);

/// Modular of the piecewise-constant gradient magnitude |grad u|.
ModularValue gradient_modular(const NodalField& u, const ExponentData& data, const Mesh& mesh);

/// Luxemburg norm: the unique lambda > 0 with rho(u/lambda) = 1, found by
/// bracketing and bisection on the strictly decreasing map lambda -> rho(u/lambda).
/// Returns 0 for the identically zero nodal field.
NormValue luxemburg_norm(const NodalField& u, const ExponentData& data, const Mesh& mesh);

/// Boundary counterparts, integrating over the boundary facets (endpoint
/// counting measure in 1D, edge quadrature in 2D).
ModularValue boundary_modular(const NodalField& u, const ExponentData& data, const Mesh& mesh);
NormValue boundary_norm(const NodalField& u, const ExponentData& data, const Mesh& mesh);

/// Norm-modular relation checks:
///   sign_agreement     — ||u|| - 1 and rho(u) - 1 agree in sign
///   small_norm_bounds  — if ||u|| < 1 then ||u||^{q+} <= rho(u) <= ||u||^{p-}
///   large_norm_bounds  — if ||u|| > 1 then ||u||^{p-} <= rho(u) <= ||u||^{q+}
/// each evaluated with the given slack; vacuous implications report true.
struct RelationReport {
  double norm = 0.0;
  double modular = 0.0;
  bool sign_agreement = true;
  bool small_norm_bounds = true;
  bool large_norm_bounds = true;
  bool all() const { return sign_agreement && small_norm_bounds && large_norm_bounds; }
};

RelationReport check_norm_modular_relations(const NodalField& u, const ExponentData& data,
                                            const Mesh& mesh, double slack = 1e-9);

}  // namespace dphase
