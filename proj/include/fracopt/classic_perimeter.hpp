#pragma once

#include "fracopt/grid.hpp"

namespace fracopt {

/// Constant of the limit regularizer: omega = volume of the unit ball in R^{d-1}.
struct LimitRegularizerSpec {
  double omega = 2.0;
  bool count_domain_boundary = true;

  static LimitRegularizerSpec for_dimension(int dim) { return {dim == 2 ? 2.0 : 1.0, true}; }
};

/// h times the number of cell edges between a member and a non-member
/// (interior or, with zero extension, the exterior of the domain).
double grid_perimeter(const CellSet& set, bool count_domain_boundary = true);

/// R(w) = omega * sum_i |w_i| grid_perimeter(E_i).
double regularizer_R(const ControlField& w, const LimitRegularizerSpec& spec = {});

}  // namespace fracopt
