#include "fracopt/trust_region.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "fracopt/error.hpp"

namespace fracopt {

LinearObjective::LinearObjective(const Grid& grid, std::vector<double> gradient, double offset)
    : grid_(grid), gradient_(std::move(gradient)), offset_(offset) {
  if (gradient_.size() != grid_.cell_count()) throw Error(ErrorKind::incompatible_fields, "one gradient value per cell");
}

double LinearObjective::value(const ControlField& w) const {
  if (!w.grid().compatible(grid_)) throw Error(ErrorKind::incompatible_fields, "field and objective grids differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < gradient_.size(); ++i) sum += gradient_[i] * w.value(i);
  return offset_ + sum * grid_.cell_volume();
}

PdeObjective::PdeObjective(PdeMesh mesh, double nu, NodalField target)
    : mesh_(std::move(mesh)), nu_(nu), target_(std::move(target)) {
  if (!(nu_ > 0.0)) throw Error(ErrorKind::domain, "nu must be positive");
  if (target_.size() != mesh_.node_count()) throw Error(ErrorKind::incompatible_fields, "target size differs from mesh");
}

double PdeObjective::value(const ControlField& w) const { return objective_F(w, target_, nu_, mesh_); }

std::vector<double> PdeObjective::gradient(const ControlField& w) const {
  return gradient_F(w, target_, nu_, mesh_);
}

void TrustRegionParams::validate() const {
  if (!(delta0 > 0.0) || !std::isfinite(delta0)) throw Error(ErrorKind::domain, "delta0 must be positive");
  if (!(sigma > 0.0 && sigma < 1.0)) throw Error(ErrorKind::domain, "sigma must lie in (0, 1)");
  if (!(min_radius >= 0.0)) throw Error(ErrorKind::domain, "min_radius must be non-negative");
  if (max_outer < 1) throw Error(ErrorKind::domain, "max_outer must be at least 1");
  if (!(pred_tol >= 0.0)) throw Error(ErrorKind::domain, "pred_tol must be non-negative");
}

std::string_view to_string(Termination reason) {
  switch (reason) {
    case Termination::pred_nonpositive: return "pred_nonpositive";
    case Termination::radius_contracted: return "radius_contracted";
    case Termination::iteration_cap: return "iteration_cap";
  }
  return "unknown";
}

bool accept_test(double ared, double pred, double sigma) {
  if (!(pred > 0.0)) throw Error(ErrorKind::domain, "acceptance needs a positive predicted reduction");
  return ared >= sigma * pred;
}

TrustRegionResult run_trust_region(const Objective& objective, const Regularizer& regularizer, double eta,
                                   const TrustRegionParams& params, const ControlField& w0) {
  params.validate();
  if (!(eta >= 0.0)) throw Error(ErrorKind::domain, "eta must be non-negative");
  const Grid& grid = w0.grid();
  const double min_radius = params.min_radius > 0.0 ? params.min_radius : grid.cell_volume();

  TrustRegionResult result{w0, {}, Termination::iteration_cap, 0, 0.0, 0.0, 0.0, 0.0};
  result.F = objective.value(w0);
  result.R = regularizer.value(w0);
  result.J = result.F + eta * result.R;
  std::vector<double> gradient = objective.gradient(w0);

  for (int outer = 1; outer <= params.max_outer; ++outer) {
    std::vector<double> cost(gradient.size());
    for (std::size_t i = 0; i < cost.size(); ++i) cost[i] = gradient[i] * grid.cell_volume();
    SubproblemInstance instance{std::move(cost), regularizer, eta, result.control, params.delta0};

    for (int inner = 0;; ++inner) {
      const double radius = std::ldexp(params.delta0, -inner);
      if (radius < min_radius) {
        result.reason = Termination::radius_contracted;
        return result;
      }
      const auto start = std::chrono::steady_clock::now();
      instance.radius = radius;
      const SubproblemSolution sol = solve_subproblem_exact(instance, params.budget);
      IterationRecord rec;
      rec.outer = outer;
      rec.inner = inner;
      rec.radius = radius;
      rec.pred = predicted_reduction(instance, sol);
      rec.gap = sol.gap();
      rec.exact = sol.exact;
      rec.F = result.F;
      rec.R = result.R;
      rec.J = result.J;
      result.final_radius = radius;

      // the certified upper bound on pred decides stationarity
      if (-sol.lower_bound <= params.pred_tol) {
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.log.push_back(rec);
        result.reason = Termination::pred_nonpositive;
        return result;
      }
      bool accepted = false;
      if (rec.pred > 0.0) {
        rec.F = objective.value(sol.minimizer);
        rec.R = regularizer.value(sol.minimizer);
        rec.J = rec.F + eta * rec.R;
        rec.ared = actual_reduction(result.J, rec.J);
        accepted = accept_test(rec.ared, rec.pred, params.sigma);
      }
      rec.accepted = accepted;
      if (accepted) {
        result.control = sol.minimizer;
        result.F = rec.F;
        result.R = rec.R;
        result.J = rec.J;
        ++result.accepted_steps;
        gradient = objective.gradient(result.control);
      }
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      result.log.push_back(rec);
      if (accepted) break;
    }
  }
  result.reason = Termination::iteration_cap;
  return result;
}

void write_log_csv(const std::vector<IterationRecord>& log, std::ostream& out, bool with_timing) {
  out << "n,k,Delta,pred,ared,F,R_alpha,J_alpha,accepted,gap,seconds\n";
  char line[512];
  for (const IterationRecord& r : log) {
    std::snprintf(line, sizeof line, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.6f\n", r.outer, r.inner,
                  r.radius, r.pred, r.ared, r.F, r.R, r.J, r.accepted ? 1 : 0, r.gap, with_timing ? r.seconds : 0.0);
    out << line;
  }
}

void write_pgm(const ControlField& w, std::ostream& out) {
  const Grid& g = w.grid();
  const auto& values = w.labels().values();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const int rows = g.dim() == 1 ? 1 : g.n();
  out << "P2\n" << g.n() << ' ' << rows << "\n255\n";
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < g.n(); ++c) {
      const int v = w.value(g.index(r, c));
      const long level = std::lround(255.0 * (v - *lo) / static_cast<double>(*hi - *lo));
      out << (c ? " " : "") << level;
    }
    out << '\n';
  }
}

}  // namespace fracopt
