#include "fracopt/pde.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "fracopt/error.hpp"

namespace fracopt {

PdeMesh::PdeMesh(const Grid& control_grid, int refinement)
    : grid_(control_grid), refinement_(refinement), intervals_(refinement * control_grid.n()) {
  if (refinement < 2) throw Error(ErrorKind::domain, "PDE refinement must be at least 2");
  if (control_grid.dim() != 2) throw Error(ErrorKind::domain, "the PDE is posed in two dimensions");
}

namespace {

void apply_laplacian(const NodalField& u, NodalField& out, int m, double scale) {
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      const std::size_t k = static_cast<std::size_t>(r) * m + c;
      double v = 4.0 * u[k];
      if (c > 0) v -= u[k - 1];
      if (c + 1 < m) v -= u[k + 1];
      if (r > 0) v -= u[k - m];
      if (r + 1 < m) v -= u[k + m];
      out[k] = scale * v;
    }
}

double dot(const NodalField& a, const NodalField& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// Control cells overlapped by the dual interval of node index i (1..N-1) along one axis.
struct AxisWeights {
  int first;
  int count;  // 1 or 2, each with weight 1/count
};

AxisWeights axis_weights(int node, int refinement) {
  if (node % refinement == 0) return {node / refinement - 1, 2};
  return {node / refinement, 1};
}

void require_cells(std::span<const double> cells, const PdeMesh& mesh) {
  if (cells.size() != mesh.control_grid().cell_count())
    throw Error(ErrorKind::incompatible_fields, "control values do not match the mesh's control grid");
}

void require_nodes(const NodalField& field, const PdeMesh& mesh) {
  if (field.size() != mesh.node_count()) throw Error(ErrorKind::incompatible_fields, "nodal field size mismatch");
}

}  // namespace

NodalField solve_nodal(const NodalField& rhs, double nu, const PdeMesh& mesh, const CgOptions& cg) {
  if (!(nu > 0.0)) throw Error(ErrorKind::domain, "nu must be positive");
  require_nodes(rhs, mesh);
  const int m = mesh.side();
  const double scale = nu / (mesh.spacing() * mesh.spacing());
  const std::size_t size = rhs.size();
  NodalField x(size, 0.0);
  const double rhs_norm = std::sqrt(dot(rhs, rhs));
  if (rhs_norm == 0.0) return x;
  NodalField r = rhs;
  NodalField p = r;
  NodalField ap(size);
  double rr = dot(r, r);
  const int max_iter = cg.max_iterations > 0 ? cg.max_iterations : static_cast<int>(10 * size);
  for (int iter = 0; iter < max_iter; ++iter) {
    apply_laplacian(p, ap, m, scale);
    const double step = rr / dot(p, ap);
    for (std::size_t k = 0; k < size; ++k) {
      x[k] += step * p[k];
      r[k] -= step * ap[k];
    }
    const double rr_next = dot(r, r);
    if (std::sqrt(rr_next) <= cg.relative_tolerance * rhs_norm) return x;
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t k = 0; k < size; ++k) p[k] = r[k] + beta * p[k];
  }
  throw Error(ErrorKind::solver_failure, "conjugate gradients did not converge");
}

NodalField inject_control(std::span<const double> cell_values, const PdeMesh& mesh) {
  require_cells(cell_values, mesh);
  const Grid& g = mesh.control_grid();
  const int m = mesh.side();
  NodalField f(mesh.node_count(), 0.0);
  for (int r = 0; r < m; ++r) {
    const AxisWeights wr = axis_weights(r + 1, mesh.refinement());
    for (int c = 0; c < m; ++c) {
      const AxisWeights wc = axis_weights(c + 1, mesh.refinement());
      double v = 0.0;
      for (int a = 0; a < wr.count; ++a)
        for (int b = 0; b < wc.count; ++b) v += cell_values[g.index(wr.first + a, wc.first + b)];
      f[static_cast<std::size_t>(r) * m + c] = v / (wr.count * wc.count);
    }
  }
  return f;
}

NodalField solve_poisson(std::span<const double> cell_values, double nu, const PdeMesh& mesh) {
  return solve_nodal(inject_control(cell_values, mesh), nu, mesh);
}

NodalField solve_poisson(const ControlField& w, double nu, const PdeMesh& mesh) {
  const std::vector<double> v = w.values();
  return solve_poisson(v, nu, mesh);
}

NodalField make_target_ud(Point center, double radius, double nu, const PdeMesh& mesh) {
  if (!(radius >= 0.0) || center.x - radius < 0.0 || center.x + radius > 1.0 || center.y - radius < 0.0 ||
      center.y + radius > 1.0)
    throw Error(ErrorKind::invalid_target, "target disk must lie inside the unit square");
  const int m = mesh.side();
  const double n = mesh.intervals();
  NodalField f(mesh.node_count(), 0.0);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      // offsets formed in node units first so symmetric data stays bit-symmetric
      const double dx = ((c + 1) - center.x * n) / n;
      const double dy = ((r + 1) - center.y * n) / n;
      if (dx * dx + dy * dy < radius * radius) f[static_cast<std::size_t>(r) * m + c] = 1.0;
    }
  return solve_nodal(f, nu, mesh);
}

double nodal_inner(const NodalField& a, const NodalField& b, const PdeMesh& mesh) {
  require_nodes(a, mesh);
  require_nodes(b, mesh);
  return dot(a, b) * mesh.spacing() * mesh.spacing();
}

double objective_F(std::span<const double> cell_values, const NodalField& target, double nu, const PdeMesh& mesh) {
  require_nodes(target, mesh);
  NodalField diff = solve_poisson(cell_values, nu, mesh);
  for (std::size_t k = 0; k < diff.size(); ++k) diff[k] -= target[k];
  return 0.5 * nodal_inner(diff, diff, mesh);
}

double objective_F(const ControlField& w, const NodalField& target, double nu, const PdeMesh& mesh) {
  const std::vector<double> v = w.values();
  return objective_F(v, target, nu, mesh);
}

std::vector<double> gradient_F(std::span<const double> cell_values, const NodalField& target, double nu,
                               const PdeMesh& mesh) {
  require_nodes(target, mesh);
  NodalField diff = solve_poisson(cell_values, nu, mesh);
  for (std::size_t k = 0; k < diff.size(); ++k) diff[k] -= target[k];
  const NodalField p = solve_nodal(diff, nu, mesh);
  // transpose of inject_control, scaled from node to cell area
  const Grid& g = mesh.control_grid();
  std::vector<double> grad(g.cell_count(), 0.0);
  const int m = mesh.side();
  for (int r = 0; r < m; ++r) {
    const AxisWeights wr = axis_weights(r + 1, mesh.refinement());
    for (int c = 0; c < m; ++c) {
      const AxisWeights wc = axis_weights(c + 1, mesh.refinement());
      const double share = p[static_cast<std::size_t>(r) * m + c] / (wr.count * wc.count);
      for (int a = 0; a < wr.count; ++a)
        for (int b = 0; b < wc.count; ++b) grad[g.index(wr.first + a, wc.first + b)] += share;
    }
  }
  const double area_ratio = 1.0 / (mesh.refinement() * mesh.refinement());
  for (double& v : grad) v *= area_ratio;
  return grad;
}

std::vector<double> gradient_F(const ControlField& w, const NodalField& target, double nu, const PdeMesh& mesh) {
  const std::vector<double> v = w.values();
  return gradient_F(v, target, nu, mesh);
}

void write_nodal_csv(const NodalField& field, const PdeMesh& mesh, std::ostream& out) {
  require_nodes(field, mesh);
  const int n = mesh.intervals();
  const int m = mesh.side();
  char buffer[32];
  for (int r = 0; r <= n; ++r) {
    for (int c = 0; c <= n; ++c) {
      const bool interior = r > 0 && r < n && c > 0 && c < n;
      const double v = interior ? field[static_cast<std::size_t>(r - 1) * m + (c - 1)] : 0.0;
      std::snprintf(buffer, sizeof buffer, "%.17g", v);
      out << buffer << (c == n ? '\n' : ',');
    }
  }
}

}  // namespace fracopt
