#include "dphase/mesh.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dphase {

namespace {

// Gauss-Legendre 5-point rule on [-1, 1], exact through degree 9.
constexpr int kGL5 = 5;
const double kGL5Node[kGL5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                               0.5384693101056831, 0.9061798459386640};
const double kGL5Weight[kGL5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                 0.4786286704993665, 0.2369268850561891};

// Gauss-Legendre 3-point rule on [-1, 1], exact through degree 5.
constexpr int kGL3 = 3;
const double kGL3Node[kGL3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
const double kGL3Weight[kGL3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

// 7-point symmetric triangle rule, exact through degree 5 (barycentric).
constexpr int kTri7 = 7;
struct TriPoint {
  double l0, l1, l2, w;
};
const double kTriA = 0.47014206410511509;  // (6 + sqrt(15)) / 21
const double kTriB = 0.10128650732345634;  // (6 - sqrt(15)) / 21
const double kTriWA = 0.13239415278850618; // (155 + sqrt(15)) / 1200
const double kTriWB = 0.12593918054482715; // (155 - sqrt(15)) / 1200
const TriPoint kTri7Rule[kTri7] = {
    {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0},
    {1.0 - 2.0 * kTriA, kTriA, kTriA, kTriWA},
    {kTriA, 1.0 - 2.0 * kTriA, kTriA, kTriWA},
    {kTriA, kTriA, 1.0 - 2.0 * kTriA, kTriWA},
    {1.0 - 2.0 * kTriB, kTriB, kTriB, kTriWB},
    {kTriB, 1.0 - 2.0 * kTriB, kTriB, kTriWB},
    {kTriB, kTriB, 1.0 - 2.0 * kTriB, kTriWB},
};

void mark_boundary(Mesh& mesh) {
  mesh.boundary_flag.assign(mesh.vertices.size(), 0);
  for (const auto& f : mesh.boundary_facets) {
    mesh.boundary_flag[static_cast<std::size_t>(f.v[0])] = 1;
    if (f.v[1] >= 0) mesh.boundary_flag[static_cast<std::size_t>(f.v[1])] = 1;
  }
}

}  // namespace

double Mesh::domain_measure() const {
  return std::accumulate(cell_measure.begin(), cell_measure.end(), 0.0);
}

double Mesh::boundary_measure() const {
  double s = 0.0;
  for (const auto& f : boundary_facets) s += f.measure;
  return s;
}

std::vector<int> Mesh::boundary_vertices() const {
  std::vector<int> out;
  for (int v = 0; v < n_vertices(); ++v)
    if (boundary_flag[static_cast<std::size_t>(v)]) out.push_back(v);
  return out;
}

Mesh build_interval_mesh(double a, double b, int n_cells) {
  if (!(a < b)) throw std::invalid_argument("build_interval_mesh: requires a < b");
  if (n_cells < 1) throw std::invalid_argument("build_interval_mesh: requires n_cells >= 1");

  Mesh mesh;
  mesh.dim = 1;
  const double h = (b - a) / n_cells;
  mesh.h_max = h;
  mesh.cell_quadrature_degree = 9;
  mesh.facet_quadrature_degree = 0;  // point evaluation

  mesh.vertices.resize(static_cast<std::size_t>(n_cells) + 1);
  for (int i = 0; i <= n_cells; ++i) mesh.vertices[static_cast<std::size_t>(i)] = {a + i * h, 0.0};

  mesh.qp_per_cell = kGL5;
  for (int c = 0; c < n_cells; ++c) {
    const double xa = mesh.vertices[static_cast<std::size_t>(c)][0];
    const double xb = mesh.vertices[static_cast<std::size_t>(c) + 1][0];
    mesh.cells.push_back({c, c + 1, -1});
    mesh.cell_measure.push_back(xb - xa);
    const double inv_h = 1.0 / (xb - xa);
    mesh.cell_grad.push_back({{{-inv_h, 0.0}, {inv_h, 0.0}, {0.0, 0.0}}});
    const double mid = 0.5 * (xa + xb);
    const double half = 0.5 * (xb - xa);
    for (int i = 0; i < kGL5; ++i) {
      QuadPoint qp;
      const double x = mid + half * kGL5Node[i];
      qp.x = {x, 0.0};
      qp.weight = half * kGL5Weight[i];
      qp.basis = {(xb - x) * inv_h, (x - xa) * inv_h, 0.0};
      mesh.cell_qp.push_back(qp);
    }
  }

  // Endpoint facets, counting measure.
  mesh.qp_per_facet = 1;
  BoundaryFacet left;
  left.v = {0, -1};
  left.measure = 1.0;
  left.normal = {-1.0, 0.0};
  BoundaryFacet right;
  right.v = {n_cells, -1};
  right.measure = 1.0;
  right.normal = {1.0, 0.0};
  mesh.boundary_facets = {left, right};
  for (const auto& f : mesh.boundary_facets) {
    QuadPoint qp;
    qp.x = mesh.vertices[static_cast<std::size_t>(f.v[0])];
    qp.weight = 1.0;
    qp.basis = {1.0, 0.0, 0.0};
    mesh.facet_qp.push_back(qp);
  }

  mark_boundary(mesh);
  return mesh;
}

Mesh build_rectangle_mesh(double x_extent, double y_extent, int nx, int ny) {
  if (!(x_extent > 0.0) || !(y_extent > 0.0))
    throw std::invalid_argument("build_rectangle_mesh: extents must be positive");
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("build_rectangle_mesh: cell counts must be >= 1");

  Mesh mesh;
  mesh.dim = 2;
  const double hx = x_extent / nx;
  const double hy = y_extent / ny;
  mesh.h_max = std::hypot(hx, hy);
  mesh.cell_quadrature_degree = 5;
  mesh.facet_quadrature_degree = 5;

  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) mesh.vertices.push_back({i * hx, j * hy});

  mesh.qp_per_cell = kTri7;
  auto add_triangle = [&](int a, int b, int c) {
    const auto& pa = mesh.vertices[static_cast<std::size_t>(a)];
    const auto& pb = mesh.vertices[static_cast<std::size_t>(b)];
    const auto& pc = mesh.vertices[static_cast<std::size_t>(c)];
    const double area2 = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
    const double area = 0.5 * area2;  // positive by construction (CCW)
    mesh.cells.push_back({a, b, c});
    mesh.cell_measure.push_back(area);
    // grad(lambda_i) = (y_j - y_k, x_k - x_j) / (2A), (i, j, k) cyclic
    std::array<std::array<double, 2>, 3> grad{};
    const std::array<const std::array<double, 2>*, 3> p = {&pa, &pb, &pc};
    for (int i = 0; i < 3; ++i) {
      const auto& pj = *p[(i + 1) % 3];
      const auto& pk = *p[(i + 2) % 3];
      grad[static_cast<std::size_t>(i)] = {(pj[1] - pk[1]) / area2, (pk[0] - pj[0]) / area2};
    }
    mesh.cell_grad.push_back(grad);
    for (const auto& t : kTri7Rule) {
      QuadPoint qp;
      qp.x = {t.l0 * pa[0] + t.l1 * pb[0] + t.l2 * pc[0],
              t.l0 * pa[1] + t.l1 * pb[1] + t.l2 * pc[1]};
      qp.weight = t.w * area;
      qp.basis = {t.l0, t.l1, t.l2};
      mesh.cell_qp.push_back(qp);
    }
  };

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      add_triangle(v00, v10, v11);
      add_triangle(v00, v11, v01);
    }
  }

  mesh.qp_per_facet = kGL3;
  auto add_edge = [&](int a, int b, std::array<double, 2> normal) {
    const auto& pa = mesh.vertices[static_cast<std::size_t>(a)];
    const auto& pb = mesh.vertices[static_cast<std::size_t>(b)];
    BoundaryFacet f;
    f.v = {a, b};
    f.measure = std::hypot(pb[0] - pa[0], pb[1] - pa[1]);
    f.normal = normal;
    mesh.boundary_facets.push_back(f);
    for (int i = 0; i < kGL3; ++i) {
      QuadPoint qp;
      const double t = 0.5 * (1.0 + kGL3Node[i]);
      qp.x = {pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])};
      qp.weight = 0.5 * f.measure * kGL3Weight[i];
      qp.basis = {1.0 - t, t, 0.0};
      mesh.facet_qp.push_back(qp);
    }
  };

  for (int i = 0; i < nx; ++i) add_edge(vid(i, 0), vid(i + 1, 0), {0.0, -1.0});
  for (int j = 0; j < ny; ++j) add_edge(vid(nx, j), vid(nx, j + 1), {1.0, 0.0});
  for (int i = 0; i < nx; ++i) add_edge(vid(i + 1, ny), vid(i, ny), {0.0, 1.0});
  for (int j = 0; j < ny; ++j) add_edge(vid(0, j + 1), vid(0, j), {-1.0, 0.0});

  mark_boundary(mesh);
  return mesh;
}

NodalField interpolate(const Mesh& mesh, const std::function<double(double, double)>& f) {
  NodalField u(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const auto& p = mesh.vertices[static_cast<std::size_t>(v)];
    u[v] = f(p[0], p[1]);
  }
  return u;
}

double value_at_qp(const Mesh& mesh, const NodalField& u, int cell, int iq) {
  const auto& qp = mesh.qp(cell, iq);
  const auto& cv = mesh.cells[static_cast<std::size_t>(cell)];
  double s = 0.0;
  for (int l = 0; l < mesh.nodes_per_cell(); ++l)
    s += u[cv[static_cast<std::size_t>(l)]] * qp.basis[static_cast<std::size_t>(l)];
  return s;
}

double value_at_fqp(const Mesh& mesh, const NodalField& u, int facet, int iq) {
  const auto& qp = mesh.fqp(facet, iq);
  const auto& f = mesh.boundary_facets[static_cast<std::size_t>(facet)];
  double s = u[f.v[0]] * qp.basis[0];
  if (f.v[1] >= 0) s += u[f.v[1]] * qp.basis[1];
  return s;
}

std::array<double, 2> cell_gradient(const Mesh& mesh, const NodalField& u, int cell) {
  const auto& cv = mesh.cells[static_cast<std::size_t>(cell)];
  const auto& grads = mesh.cell_grad[static_cast<std::size_t>(cell)];
  std::array<double, 2> g{0.0, 0.0};
  for (int l = 0; l < mesh.nodes_per_cell(); ++l) {
    const double coeff = u[cv[static_cast<std::size_t>(l)]];
    g[0] += coeff * grads[static_cast<std::size_t>(l)][0];
    g[1] += coeff * grads[static_cast<std::size_t>(l)][1];
  }
  return g;
}

QuadratureValues eval_at_quadrature(const NodalField& u, const Mesh& mesh) {
  QuadratureValues out;
  out.values.resize(mesh.n_cells() * mesh.qp_per_cell);
  out.cell_gradient.resize(static_cast<std::size_t>(mesh.n_cells()));
  for (int c = 0; c < mesh.n_cells(); ++c) {
    out.cell_gradient[static_cast<std::size_t>(c)] = cell_gradient(mesh, u, c);
    for (int iq = 0; iq < mesh.qp_per_cell; ++iq)
      out.values[c * mesh.qp_per_cell + iq] = value_at_qp(mesh, u, c, iq);
  }
  return out;
}

}  // namespace dphase
