#include "fracopt/classic_perimeter.hpp"

#include <cstdlib>

namespace fracopt {

double grid_perimeter(const CellSet& set, bool count_domain_boundary) {
  const Grid& g = set.grid();
  long long edges = 0;
  constexpr int dr[4] = {-1, 1, 0, 0};
  constexpr int dc[4] = {0, 0, -1, 1};
  const int directions = g.dim() == 1 ? 2 : 4;
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    if (!set.contains(i)) continue;
    for (int k = 4 - directions; k < 4; ++k) {
      const int r = g.row(i) + dr[k];
      const int c = g.col(i) + dc[k];
      if (!g.contains(r, c)) {
        edges += count_domain_boundary ? 1 : 0;
      } else if (!set.contains(g.index(r, c))) {
        ++edges;
      }
    }
  }
  // in one dimension an "edge" is an endpoint of measure one
  return g.dim() == 1 ? static_cast<double>(edges) : static_cast<double>(edges) * g.h();
}

double regularizer_R(const ControlField& w, const LimitRegularizerSpec& spec) {
  double total = 0.0;
  for (std::size_t l = 0; l < w.labels().size(); ++l) {
    const int weight = std::abs(w.labels().value(l));
    if (weight != 0) total += weight * grid_perimeter(level_set(w, static_cast<int>(l)), spec.count_domain_boundary);
  }
  return spec.omega * total;
}

}  // namespace fracopt
