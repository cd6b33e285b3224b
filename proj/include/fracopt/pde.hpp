#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "fracopt/grid.hpp"

namespace fracopt {

/// Finite-difference mesh with N = refinement * n nodes per side; the
/// (N-1)^2 interior nodes are stored row-major, Dirichlet nodes are implicit.
class PdeMesh {
 public:
  /// Throws ErrorKind::domain for refinement < 2.
  PdeMesh(const Grid& control_grid, int refinement = 4);

  const Grid& control_grid() const noexcept { return grid_; }
  int refinement() const noexcept { return refinement_; }
  int intervals() const noexcept { return intervals_; }  // N
  int side() const noexcept { return intervals_ - 1; }   // interior nodes per side
  double spacing() const noexcept { return 1.0 / intervals_; }
  std::size_t node_count() const noexcept { return static_cast<std::size_t>(side()) * static_cast<std::size_t>(side()); }
  /// Position of interior node (row, col), both in [0, N-2].
  Point node(int row, int col) const noexcept { return {(col + 1) * spacing(), (row + 1) * spacing()}; }

 private:
  Grid grid_;
  int refinement_;
  int intervals_;
};

using NodalField = std::vector<double>;

struct CgOptions {
  double relative_tolerance = 1e-12;
  int max_iterations = 0;  // 0: 10 * unknowns
};

/// Solves (nu / hp^2) L u = f for the 5-point Laplacian L with zero boundary values.
/// Throws ErrorKind::solver_failure when CG does not converge.
NodalField solve_nodal(const NodalField& rhs, double nu, const PdeMesh& mesh, const CgOptions& cg = {});

/// Node sources: area-weighted average of the cell-wise control over each node's dual cell.
NodalField inject_control(std::span<const double> cell_values, const PdeMesh& mesh);

/// -nu Laplace(u) = w in the unit square, u = 0 on the boundary.
NodalField solve_poisson(std::span<const double> cell_values, double nu, const PdeMesh& mesh);
NodalField solve_poisson(const ControlField& w, double nu, const PdeMesh& mesh);

/// u_d = solve(chi_disk sampled at the nodes). Throws ErrorKind::invalid_target
/// unless the closed disk lies in the closed unit square.
NodalField make_target_ud(Point center, double radius, double nu, const PdeMesh& mesh);

/// F = 1/2 ||u - u_d||^2 by nodal quadrature.
double objective_F(std::span<const double> cell_values, const NodalField& target, double nu, const PdeMesh& mesh);
double objective_F(const ControlField& w, const NodalField& target, double nu, const PdeMesh& mesh);

/// L^2 gradient per control cell: area-weighted mean over the cell of the adjoint
/// p solving -nu Laplace(p) = u - u_d. Exact derivative of the discrete F.
std::vector<double> gradient_F(std::span<const double> cell_values, const NodalField& target, double nu,
                               const PdeMesh& mesh);
std::vector<double> gradient_F(const ControlField& w, const NodalField& target, double nu, const PdeMesh& mesh);

/// Discrete L^2 inner product of nodal fields.
double nodal_inner(const NodalField& a, const NodalField& b, const PdeMesh& mesh);

/// (N+1) x (N+1) CSV grid including the boundary zeros, rows ordered by y.
void write_nodal_csv(const NodalField& field, const PdeMesh& mesh, std::ostream& out);

}  // namespace fracopt
