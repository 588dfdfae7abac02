#pragma once

#include <Eigen/Sparse>

#include "dphase/problem.hpp"

namespace dphase {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Residual of the double phase operator: entry j equals
///   int_Omega ( (|grad u|^2 + eps)^{(p(x)-2)/2}
///             + mu(x) (|grad u|^2 + eps)^{(q(x)-2)/2} ) grad u . grad phi_j dx.
/// With eps = 0 and zero gradient the flux is taken as 0 (the exact limit).
Eigen::VectorXd apply_operator(const NodalField& u, const ExponentData& data, const Mesh& mesh,
                               double epsilon_reg);

/// Newton linearization of apply_operator; symmetric, positive semidefinite
/// (kernel contained in the constants under Neumann). Requires eps > 0 or
/// gradients bounded away from zero.
SparseMatrix operator_jacobian(const NodalField& u, const ExponentData& data, const Mesh& mesh,
                               double epsilon_reg);

/// Convex potential with gradient apply_operator:
///   int (1/p)(|grad u|^2 + eps)^{p/2} + (mu/q)(|grad u|^2 + eps)^{q/2} dx.
double operator_energy(const NodalField& u, const ExponentData& data, const Mesh& mesh,
                       double epsilon_reg);

/// Node-wise median(lower, u, upper). Throws on lower > upper.
NodalField truncate(const NodalField& u, const NodalField& lower, const NodalField& upper);

/// Cut-off penalty residual: entry j equals int b(x, u(x)) phi_j dx with
///   b(x, s) = (s - upper(x))^{q(x)-1}   above,
///           = -(lower(x) - s)^{q(x)-1}  below,
///           = 0                         inside,
/// evaluated at quadrature points of the P1 interpolants.
Eigen::VectorXd apply_penalty(const NodalField& u, const NodalField& lower,
                              const NodalField& upper, const ExponentData& data, const Mesh& mesh);

/// db/ds mass-type matrix. For q(x) < 2 the derivative blows up at the region
/// boundary; the power base is floored at derivative_floor to keep the Newton
/// model finite (the residual itself is never floored).
SparseMatrix penalty_jacobian(const NodalField& u, const NodalField& lower,
                              const NodalField& upper, const ExponentData& data, const Mesh& mesh,
                              double derivative_floor);

/// Antiderivative of b: int ((u-upper)_+^{q} + (lower-u)_+^{q}) / q dx.
double penalty_energy(const NodalField& u, const NodalField& lower, const NodalField& upper,
                      const ExponentData& data, const Mesh& mesh);

/// Reaction residual for explicit slot fields (no truncation): entry j equals
///   int f(x, a(x), b(x), |grad a|, |grad b|) phi_j dx.
Eigen::VectorXd reaction_residual(const expr::Expr& f, const NodalField& a, const NodalField& b,
                                  const Mesh& mesh);

/// Boundary residual for explicit slot fields: int_dOmega g(x, a, b) phi_j ds.
Eigen::VectorXd boundary_residual(const expr::Expr& g, const NodalField& a, const NodalField& b,
                                  const Mesh& mesh);

/// <F_k, phi_j> with both slots truncated into the region. Gradients of the
/// truncated fields are the gradients of the P1 interpolants of the truncated
/// nodal values.
std::array<Eigen::VectorXd, 2> apply_reaction(const SystemState& state, const ProblemSpec& spec,
                                              const TrappingRegion& region);

/// <G_k, phi_j> over the boundary; requires the Neumann kind.
std::array<Eigen::VectorXd, 2> apply_boundary(const SystemState& state, const ProblemSpec& spec,
                                              const TrappingRegion& region);

/// Residual of the original (untruncated, unpenalized) weak form at `state`:
/// A_k(u_k) - F_k(u) - G_k(u) per component (G omitted under Dirichlet).
std::array<Eigen::VectorXd, 2> weak_residual(const SystemState& state, const ProblemSpec& spec,
                                             double epsilon_reg);

/// Load vector int h(x) phi_j dx.
Eigen::VectorXd load_vector(const ScalarField& h, const Mesh& mesh);

/// Classical P1 stiffness matrix (p = 2, mu = 0 operator); used to seed
/// Newton iterations.
SparseMatrix p2_stiffness(const Mesh& mesh);

/// Diagnostic check of the optional growth metadata: samples |f_k| at
/// quadrature points against phi_k(x) + c_k (|xi_1|^{p_1(x)-1} + ...) on the
/// given constant state box. Returns human-readable violation descriptions.
std::vector<std::string> check_growth(const ProblemSpec& spec,
                                      const std::array<double, 2>& s_lower,
                                      const std::array<double, 2>& s_upper, int samples,
                                      std::uint64_t seed);

}  // namespace dphase
