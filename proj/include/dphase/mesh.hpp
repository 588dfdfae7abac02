#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <vector>

namespace dphase {

/// Nodal coefficient vector of a P1 field; entry per mesh vertex.
using NodalField = Eigen::VectorXd;

struct QuadPoint {
  std::array<double, 2> x{};     // physical coordinates (x2 = 0 in 1D)
  double weight = 0.0;           // includes the cell/facet measure factor
  std::array<double, 3> basis{}; // P1 basis values of the owning entity's vertices
};

struct BoundaryFacet {
  std::array<int, 2> v{-1, -1};   // 1D: {vertex, -1}; 2D: edge endpoints
  double measure = 0.0;           // 1D: 1 (counting measure); 2D: edge length
  std::array<double, 2> normal{}; // unit outward normal
};

/// Structured conforming mesh: uniform interval in 1D, uniform diagonal
/// triangulation of an axis-aligned rectangle in 2D. Immutable after build.
struct Mesh {
  int dim = 0;
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<int, 3>> cells;  // v[2] = -1 for segments
  std::vector<double> cell_measure;
  // Constant gradient of each local P1 basis function, per cell.
  std::vector<std::array<std::array<double, 2>, 3>> cell_grad;

  int qp_per_cell = 0;
  std::vector<QuadPoint> cell_qp;  // size n_cells * qp_per_cell

  std::vector<BoundaryFacet> boundary_facets;
  int qp_per_facet = 0;
  std::vector<QuadPoint> facet_qp;  // size n_facets * qp_per_facet

  std::vector<char> boundary_flag;  // per vertex

  int cell_quadrature_degree = 0;   // polynomial degree integrated exactly
  int facet_quadrature_degree = 0;
  double h_max = 0.0;               // max cell diameter

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_facets() const { return static_cast<int>(boundary_facets.size()); }
  int nodes_per_cell() const { return dim + 1; }

  double domain_measure() const;
  double boundary_measure() const;
  bool is_boundary_vertex(int v) const { return boundary_flag[static_cast<std::size_t>(v)] != 0; }
  std::vector<int> boundary_vertices() const;

  const QuadPoint& qp(int cell, int iq) const { return cell_qp[cell * qp_per_cell + iq]; }
  const QuadPoint& fqp(int facet, int iq) const { return facet_qp[facet * qp_per_facet + iq]; }
};

Mesh build_interval_mesh(double a, double b, int n_cells);
Mesh build_rectangle_mesh(double x_extent, double y_extent, int nx, int ny);

NodalField interpolate(const Mesh& mesh, const std::function<double(double, double)>& f);

/// Value of the P1 interpolant of u at quadrature point iq of a cell.
double value_at_qp(const Mesh& mesh, const NodalField& u, int cell, int iq);
/// Value at quadrature point iq of a boundary facet.
double value_at_fqp(const Mesh& mesh, const NodalField& u, int facet, int iq);
/// Constant gradient of the P1 interpolant on a cell.
std::array<double, 2> cell_gradient(const Mesh& mesh, const NodalField& u, int cell);

struct QuadratureValues {
  Eigen::VectorXd values;                            // per cell quadrature point
  std::vector<std::array<double, 2>> cell_gradient;  // per cell
};
QuadratureValues eval_at_quadrature(const NodalField& u, const Mesh& mesh);

}  // namespace dphase
