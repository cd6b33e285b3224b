#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fracopt/classic_perimeter.hpp"
#include "fracopt/grid.hpp"
#include "fracopt/kernel.hpp"

namespace fracopt {

/// Pairwise form of a perimeter regularizer for two labels {w_1, w_2}:
///   R(w) = factor * [ (|w_1| + |w_2|) sum_{i<j, w_i != w_j} weight_ij + sum_i |w(i)| boundary_i ].
struct CutModel {
  struct Edge {
    std::size_t i;
    std::size_t j;
    double weight;
  };
  double factor = 0.0;
  std::vector<Edge> edges;
  std::vector<double> boundary;
};

/// Either the fractional regularizer R_alpha (through a kernel table) or the
/// grid-edge limit regularizer R.
class Regularizer {
 public:
  static Regularizer fractional(std::shared_ptr<const KernelTable> table);
  static Regularizer limit(const Grid& grid, LimitRegularizerSpec spec = {});

  bool is_limit() const noexcept { return table_ == nullptr; }
  const Grid& grid() const noexcept { return grid_; }
  const KernelTable* table() const noexcept { return table_.get(); }
  std::shared_ptr<const KernelTable> shared_table() const noexcept { return table_; }
  const LimitRegularizerSpec& limit_spec() const noexcept { return spec_; }

  /// Full evaluation through the perimeter modules.
  double value(const ControlField& w) const;
  CutModel cut_model() const;

 private:
  Regularizer(const Grid& grid, std::shared_ptr<const KernelTable> table, LimitRegularizerSpec spec)
      : grid_(grid), table_(std::move(table)), spec_(spec) {}

  Grid grid_;
  std::shared_ptr<const KernelTable> table_;
  LimitRegularizerSpec spec_;
};

/// One trust-region subproblem: minimize <g, w - center> + eta (R(w) - R(center))
/// over two-valued controls with ||w - center||_1 <= radius.
struct SubproblemInstance {
  std::vector<double> linear_cost;  // c_i = g_i h^d
  Regularizer regularizer;
  double eta = 0.0;
  ControlField center;
  double radius = 0.0;

  /// Throws ErrorKind::unsupported_labels for M != 2 and incompatible_fields / domain otherwise.
  void validate() const;
  /// Largest number of cells that may change label.
  std::size_t flip_budget() const;
};

struct SubproblemBudget {
  std::size_t max_nodes = 1000000;
  double max_seconds = 60.0;
};

struct SubproblemSolution {
  ControlField minimizer;
  double objective = 0.0;    // <= 0
  double lower_bound = 0.0;  // certified bound on the optimal objective
  bool exact = true;
  std::size_t nodes = 0;

  double gap() const noexcept { return objective - lower_bound; }
};

SubproblemSolution solve_subproblem_exact(const SubproblemInstance& instance, const SubproblemBudget& budget = {});

struct PenalizedSolution {
  ControlField minimizer;
  double energy = 0.0;  // objective + lambda ||w - center||_1
};

/// Exact minimizer of the objective plus lambda times the L1 deviation, by one
/// minimum cut; ties go to the cut changing fewer cells.
PenalizedSolution solve_unconstrained_mincut(const SubproblemInstance& instance, double lambda);

/// L(lambda) = min (objective + lambda ||w - center||_1) - lambda radius.
double lagrangian_lower_bound(const SubproblemInstance& instance, double lambda);

/// max_{lambda >= 0} of the dual over the integral budget, found exactly by a
/// breakpoint search on the piecewise-linear concave dual.
struct DualResult {
  double bound = 0.0;
  double lambda = 0.0;
};
DualResult maximize_lagrangian(const SubproblemInstance& instance);

/// Exhaustive enumeration for at most 16 cells; throws ErrorKind::oracle_scale_exceeded beyond.
SubproblemSolution brute_force_subproblem(const SubproblemInstance& instance);

/// <g, w - center> + eta (R(w) - R(center)) by full evaluation.
double subproblem_objective(const SubproblemInstance& instance, const ControlField& w);

/// pred = -objective.
double predicted_reduction(const SubproblemInstance& instance, const SubproblemSolution& solution);

/// Text format: header `n alpha eta Delta` (alpha may be `limit`), one cost per
/// line, one zero-based center label per line, then the kernel table path (`-` in limit mode).
void write_instance(const SubproblemInstance& instance, const std::string& table_path, std::ostream& out);
/// Relative table paths are resolved against base_dir. Labels are {0, 1}.
SubproblemInstance read_instance(std::istream& in, const std::string& base_dir = ".");

}  // namespace fracopt
