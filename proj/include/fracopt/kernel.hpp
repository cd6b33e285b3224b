#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "fracopt/grid.hpp"

namespace fracopt {

enum class BaseRule {
  gauss,     ///< tensor Gauss-Legendre on both cells
  midpoint,  ///< one point per cell for far pairs, near pairs still refined
  centers,   ///< kernel at the two cell centers for every pair, no refinement
};

enum class NearFieldMethod {
  polar,        ///< semi-analytic: cell autocorrelation in polar coordinates
  subdivision,  ///< recursive 2^d-way splitting of both cells
};

struct QuadratureSpec {
  BaseRule base_rule = BaseRule::gauss;
  int order = 3;
  int near_field_levels = 6;
  double rel_tol = 1e-3;
  /// Pairs whose centers are at most this many cell widths apart use the near-field method.
  double near_threshold = 3.0;
  NearFieldMethod near_method = NearFieldMethod::polar;

  /// Throws ErrorKind::domain on out-of-range fields.
  void validate() const;
  bool operator==(const QuadratureSpec&) const = default;
};

/// Integer cell offset (row, col); row is always 0 in one dimension.
struct Offset {
  int dr = 0;
  int dc = 0;
  auto operator<=>(const Offset&) const = default;
};

inline constexpr double kUntruncated = std::numeric_limits<double>::infinity();

/// Integral of |x - y|^{-(d+alpha)} over two unit cells at integer offset o != 0.
double unit_pair_weight(Offset offset, int dim, double alpha, const QuadratureSpec& quad);

/// Integral over a unit cell Q of |x - y|^{-(d+alpha)} against its complement R^d \ Q.
double unit_self_complement(int dim, double alpha);

/// Integral of |x - y|^{-(d+alpha)} over the cells i and j of the grid.
/// Throws ErrorKind::self_pair for i == j.
double cell_pair_weight(const Grid& grid, std::size_t i, std::size_t j, double alpha, const QuadratureSpec& quad);

/// Pairwise weights kappa_ij for all interior pairs with center distance at
/// most the truncation radius, plus exterior weights beta_i collecting the
/// interaction of cell i with the zero-extended complement of the domain.
/// Weights depend only on the cell offset, so they are stored per offset.
class KernelTable {
 public:
  KernelTable(const Grid& grid, double alpha, double truncation_radius, const QuadratureSpec& quad, int span,
              std::vector<double> offset_weights, std::vector<double> beta);

  const Grid& grid() const noexcept { return grid_; }
  double alpha() const noexcept { return alpha_; }
  double truncation_radius() const noexcept { return truncation_; }
  bool untruncated() const noexcept { return truncation_ == kUntruncated; }
  const QuadratureSpec& quadrature() const noexcept { return quad_; }

  /// kappa for a signed offset; zero beyond the truncation radius.
  double offset_weight(Offset offset) const noexcept;
  /// kappa_ij; zero for i == j and for pairs beyond the truncation radius.
  double kappa(std::size_t i, std::size_t j) const noexcept;
  /// All signed non-zero offsets with positive weight, in lexicographic order.
  std::span<const Offset> neighbor_offsets() const noexcept { return neighbors_; }
  std::span<const double> beta() const noexcept { return beta_; }
  /// Number of unordered interior pairs (i < j) with positive weight.
  std::size_t stored_pair_count() const;
  /// Exterior layers used for beta: the grid's band, or ceil(R/h) when the grid has none.
  int exterior_band() const noexcept;

 private:
  Grid grid_;
  double alpha_;
  double truncation_;
  QuadratureSpec quad_;
  int span_;
  std::vector<double> weights_;  // (span+1)^d, indexed by (|dr|, |dc|)
  std::vector<Offset> neighbors_;
  std::vector<double> beta_;
};

/// Throws ErrorKind::domain for alpha outside (0,1) and
/// ErrorKind::degenerate_truncation for a radius below one cell width.
KernelTable tabulate_kernel(const Grid& grid, double alpha, double truncation_radius,
                            const QuadratureSpec& quad = {});

/// P_alpha(E) = 2 [ sum_{i in E, j not in E} kappa_ij + sum_{i in E} beta_i ].
double frac_perimeter(const CellSet& set, const KernelTable& table);

/// R_alpha(w) = (1 - alpha) sum_i |w_i| P_alpha(E_i).
double regularizer_Ralpha(const ControlField& w, const KernelTable& table);

/// Closed form 4 l^{1-alpha} / (alpha (1 - alpha)) of the one-dimensional interval [0, l].
double frac_perimeter_1d_exact(double length, double alpha);

/// Text cache format: header `d n alpha truncation quad_order near_levels rel_tol`,
/// then `i j kappa` for every stored pair i < j, then `i beta` for every cell.
void write_kernel_table(const KernelTable& table, std::ostream& out);
KernelTable read_kernel_table(std::istream& in);

}  // namespace fracopt
