#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include "fracopt/grid.hpp"
#include "fracopt/pde.hpp"
#include "fracopt/subproblem.hpp"

namespace fracopt {

/// Smooth part F of the objective J = F + eta R.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double value(const ControlField& w) const = 0;
  /// L^2 gradient, one value per control cell.
  virtual std::vector<double> gradient(const ControlField& w) const = 0;
};

/// F(w) = offset + sum_i g_i w_i h^d; the linear model is exact, so ared = pred.
class LinearObjective final : public Objective {
 public:
  LinearObjective(const Grid& grid, std::vector<double> gradient, double offset = 0.0);
  double value(const ControlField& w) const override;
  std::vector<double> gradient(const ControlField&) const override { return gradient_; }

 private:
  Grid grid_;
  std::vector<double> gradient_;
  double offset_;
};

/// F(w) = 1/2 ||u(w) - u_d||^2 with -nu Laplace(u) = w.
class PdeObjective final : public Objective {
 public:
  PdeObjective(PdeMesh mesh, double nu, NodalField target);
  double value(const ControlField& w) const override;
  std::vector<double> gradient(const ControlField& w) const override;

  const PdeMesh& mesh() const noexcept { return mesh_; }
  double nu() const noexcept { return nu_; }
  const NodalField& target() const noexcept { return target_; }

 private:
  PdeMesh mesh_;
  double nu_;
  NodalField target_;
};

struct TrustRegionParams {
  double delta0 = 0.25;
  double sigma = 1e-3;
  double min_radius = 0.0;  // 0: one cell volume
  int max_outer = 1000;
  double pred_tol = 0.0;
  SubproblemBudget budget;

  /// Throws ErrorKind::domain on invalid values.
  void validate() const;
};

enum class Termination { pred_nonpositive, radius_contracted, iteration_cap };
std::string_view to_string(Termination reason);

/// One subproblem solve at outer iteration n and inner iteration k.
struct IterationRecord {
  int outer = 0;
  int inner = 0;
  double radius = 0.0;
  double pred = 0.0;
  double ared = 0.0;  // 0 when no candidate was evaluated
  double F = 0.0;     // at the candidate, or at the center when none was evaluated
  double R = 0.0;
  double J = 0.0;
  bool accepted = false;
  double gap = 0.0;
  bool exact = true;
  double seconds = 0.0;
};

struct TrustRegionResult {
  ControlField control;
  std::vector<IterationRecord> log;
  Termination reason = Termination::iteration_cap;
  int accepted_steps = 0;
  double F = 0.0;
  double R = 0.0;
  double J = 0.0;
  double final_radius = 0.0;  // radius of the last subproblem solved
};

/// ared >= sigma pred; throws ErrorKind::domain unless pred > 0.
bool accept_test(double ared, double pred, double sigma);

/// J(previous) - J(candidate).
inline double actual_reduction(double j_previous, double j_candidate) { return j_previous - j_candidate; }

/// Trust-region loop with radius reset to delta0 at every outer iteration and
/// halving on rejection. Stops when the certified pred is at most pred_tol,
/// when the radius drops below min_radius, or after max_outer outer iterations.
TrustRegionResult run_trust_region(const Objective& objective, const Regularizer& regularizer, double eta,
                                   const TrustRegionParams& params, const ControlField& w0);

/// Columns n, k, Delta, pred, ared, F, R_alpha, J_alpha, accepted, gap, seconds.
/// The seconds column is written as 0 unless with_timing is set.
void write_log_csv(const std::vector<IterationRecord>& log, std::ostream& out, bool with_timing = false);

/// Plain PGM (P2), one pixel per cell, rows in grid row order, 255 for the
/// largest label value and 0 for the smallest.
void write_pgm(const ControlField& w, std::ostream& out);

}  // namespace fracopt
