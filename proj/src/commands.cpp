#include "fracopt/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "fracopt/classic_perimeter.hpp"
#include "fracopt/pde.hpp"
#include "fracopt/subproblem.hpp"
#include "fracopt/trust_region.hpp"
#include "fracopt/variations.hpp"
#include "json.hpp"

namespace fracopt {

namespace fs = std::filesystem;
using json = nlohmann::json;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage:
    case ErrorKind::io:
    case ErrorKind::domain:
    case ErrorKind::invalid_grid:
    case ErrorKind::invalid_label:
    case ErrorKind::degenerate_truncation:
    case ErrorKind::invalid_target:
    case ErrorKind::unsupported_labels:
    case ErrorKind::oracle_scale_exceeded:
      return exit_usage;
    default:
      return exit_internal;
  }
}

namespace {

std::string fmt(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

void say(const CommandContext& ctx, const std::string& line) {
  if (ctx.message) *ctx.message << line << '\n';
}

fs::path prepare_output(const CommandContext& ctx) {
  const fs::path dir = ctx.output_directory();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory '" + dir.string() + "'");
  return dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  return out;
}

double truncation_radius(const Grid& grid, std::optional<double> cells) {
  return cells ? *cells * grid.h() : kUntruncated;
}

Grid control_grid(const RunConfig& c) { return Grid::build(c.discretization.n, c.discretization.exterior_band); }

int index_of_value(const LabelSet& labels, int value, int fallback) {
  const auto& v = labels.values();
  const auto it = std::find(v.begin(), v.end(), value);
  return it == v.end() ? fallback : static_cast<int>(it - v.begin());
}

ControlField initial_control(const RunConfig& c, const Grid& grid, std::uint64_t seed) {
  const LabelSet labels(c.problem.labels);
  if (c.trust_region.w0 == "zero") return ControlField::constant(grid, labels, index_of_value(labels, 0, 0));
  if (c.trust_region.w0 == "one") return ControlField::constant(grid, labels, index_of_value(labels, 1, 1));
  std::mt19937_64 rng(seed);
  std::vector<int> assignment(grid.cell_count());
  for (int& a : assignment) a = static_cast<int>(rng() % labels.size());
  return ControlField(grid, labels, assignment);
}

Regularizer make_regularizer(const RunConfig& c, const Grid& grid) {
  if (!c.problem.alpha) return Regularizer::limit(grid, LimitRegularizerSpec::for_dimension(grid.dim()));
  return Regularizer::fractional(
      obtain_kernel_table(grid, *c.problem.alpha, c.kernel.truncation, c.kernel.quadrature, c.kernel.cache));
}

PdeObjective make_objective(const RunConfig& c, const Grid& grid) {
  PdeMesh mesh(grid, c.discretization.refinement);
  const Point center{c.problem.target_center[0], c.problem.target_center[1]};
  NodalField target = make_target_ud(center, c.problem.target_radius, c.problem.nu, mesh);
  return PdeObjective(std::move(mesh), c.problem.nu, std::move(target));
}

CellSet rectangle_union(const Grid& grid, const std::vector<Rectangle>& rects) {
  CellSet set(grid);
  const double m = grid.n();
  for (std::size_t k = 0; k < rects.size(); ++k) {
    const Rectangle& r = rects[k];
    const double coords[4] = {r.x0, r.y0, r.x1, r.y1};
    int idx[4];
    for (int q = 0; q < 4; ++q) {
      const double scaled = coords[q] * m;
      if (!(coords[q] >= 0.0 && coords[q] <= 1.0) || std::abs(scaled - std::round(scaled)) > 1e-9)
        throw Error(ErrorKind::usage, "gamma_sweep.set[" + std::to_string(k) + "] is not representable on a " +
                                          std::to_string(grid.n()) + " x " + std::to_string(grid.n()) + " grid");
      idx[q] = static_cast<int>(std::lround(scaled));
    }
    if (idx[0] > idx[2] || idx[1] > idx[3])
      throw Error(ErrorKind::usage, "gamma_sweep.set[" + std::to_string(k) + "] has negative extent");
    for (int row = idx[1]; row < idx[3]; ++row)
      for (int col = idx[0]; col < idx[2]; ++col) set.set(grid.index(row, col), true);
  }
  return set;
}

}  // namespace

std::string kernel_cache_name(const Grid& grid, double alpha, std::optional<double> truncation_cells,
                              const QuadratureSpec& q) {
  const char* rule = q.base_rule == BaseRule::gauss ? "gauss" : q.base_rule == BaseRule::midpoint ? "midpoint" : "centers";
  std::string name = "kernel_d" + std::to_string(grid.dim()) + "_n" + std::to_string(grid.n()) + "_b" +
                     std::to_string(grid.exterior_band()) + "_a" + fmt(alpha) + "_t" +
                     (truncation_cells ? fmt(*truncation_cells) : std::string("inf")) + "_" + rule +
                     std::to_string(q.order) + "_l" + std::to_string(q.near_field_levels) + "_r" + fmt(q.rel_tol) +
                     "_nt" + fmt(q.near_threshold) + (q.near_method == NearFieldMethod::polar ? "_polar" : "_subdiv");
  return name + ".txt";
}

std::shared_ptr<const KernelTable> obtain_kernel_table(const Grid& grid, double alpha,
                                                       std::optional<double> truncation_cells,
                                                       const QuadratureSpec& quad, const std::string& cache_dir) {
  const double radius = truncation_radius(grid, truncation_cells);
  if (!cache_dir.empty()) {
    const fs::path path = fs::path(cache_dir) / kernel_cache_name(grid, alpha, truncation_cells, quad);
    std::ifstream in(path);
    if (in) {
      try {
        auto table = std::make_shared<KernelTable>(read_kernel_table(in));
        if (table->grid().compatible(grid) && table->alpha() == alpha && table->truncation_radius() == radius)
          return table;
      } catch (const Error&) {
        // unreadable cache entries are rebuilt below
      }
    }
  }
  auto table = std::make_shared<KernelTable>(tabulate_kernel(grid, alpha, radius, quad));
  if (!cache_dir.empty()) {
    std::error_code ec;
    fs::create_directories(cache_dir, ec);
    const fs::path path = fs::path(cache_dir) / kernel_cache_name(grid, alpha, truncation_cells, quad);
    const fs::path tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp);
      if (out) write_kernel_table(*table, out);
    }
    fs::rename(tmp, path, ec);
  }
  return table;
}

int cmd_solve(const CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  const Grid grid = control_grid(c);
  const ControlField w0 = initial_control(c, grid, ctx.seed);
  const Regularizer regularizer = make_regularizer(c, grid);
  const PdeObjective objective = make_objective(c, grid);
  TrustRegionParams params;
  params.delta0 = c.trust_region.delta0;
  params.sigma = c.trust_region.sigma;
  params.min_radius = c.trust_region.min_radius;
  params.max_outer = c.trust_region.max_outer;
  params.pred_tol = c.trust_region.pred_tol;
  params.budget.max_nodes = static_cast<std::size_t>(c.trust_region.max_nodes);
  params.budget.max_seconds = c.trust_region.max_seconds;

  const TrustRegionResult r = run_trust_region(objective, regularizer, c.problem.eta, params, w0);

  const fs::path dir = prepare_output(ctx);
  {
    auto out = open_output(dir / "log.csv");
    write_log_csv(r.log, out, c.output.timing);
  }
  {
    auto out = open_output(dir / "control.pgm");
    write_pgm(r.control, out);
  }
  {
    auto out = open_output(dir / "state.csv");
    write_nodal_csv(solve_poisson(r.control, c.problem.nu, objective.mesh()), objective.mesh(), out);
  }
  {
    auto out = open_output(dir / "target.csv");
    write_nodal_csv(objective.target(), objective.mesh(), out);
  }

  // contract checks on the log
  bool ok = true;
  double previous = objective.value(w0) + c.problem.eta * regularizer.value(w0);
  std::size_t inexact = 0;
  double max_gap = 0.0;
  int expected_inner = 0;
  for (const IterationRecord& rec : r.log) {
    if (!rec.exact) ++inexact;
    max_gap = std::max(max_gap, rec.gap);
    ok = ok && rec.inner == expected_inner && rec.radius == std::ldexp(params.delta0, -rec.inner);
    if (rec.accepted) {
      ok = ok && rec.ared >= params.sigma * rec.pred && rec.J < previous;
      previous = rec.J;
      expected_inner = 0;
    } else {
      ++expected_inner;
    }
  }

  json summary = {{"mode", c.problem.alpha ? "fractional" : "limit"},
                  {"alpha", c.problem.alpha ? json(*c.problem.alpha) : json("limit")},
                  {"n", grid.n()},
                  {"termination", std::string(to_string(r.reason))},
                  {"accepted_steps", r.accepted_steps},
                  {"subproblems", r.log.size()},
                  {"inexact_subproblems", inexact},
                  {"max_gap", max_gap},
                  {"final_radius", r.final_radius},
                  {"F", r.F},
                  {"R", r.R},
                  {"J", r.J},
                  {"contract_ok", ok},
                  {"seed", ctx.seed}};
  {
    auto out = open_output(dir / "summary.json");
    out << summary.dump(2) << '\n';
  }
  say(ctx, "solve: " + std::string(to_string(r.reason)) + ", " + std::to_string(r.accepted_steps) +
               " accepted steps, J = " + fmt(r.J));
  return ok ? exit_ok : exit_check_failed;
}

int cmd_gamma_sweep(const CommandContext& ctx) {
  const GammaSweepConfig& s = ctx.config.gamma_sweep;
  const Grid grid = Grid::build(s.m);
  const CellSet set = rectangle_union(grid, s.set);
  const double omega = LimitRegularizerSpec::for_dimension(2).omega;
  const double limit = omega * grid_perimeter(set);

  std::vector<double> alphas = s.alphas;
  std::sort(alphas.begin(), alphas.end());
  const fs::path dir = prepare_output(ctx);
  auto out = open_output(dir / "gamma_sweep.csv");
  out << "alpha,order,scaled_frac_perimeter,limit_perimeter,deviation,two_sided_deviation\n";
  for (double alpha : alphas) {
    for (int order : s.orders) {
      QuadratureSpec quad = ctx.config.kernel.quadrature;
      quad.order = order;
      double scaled = 0.0;
      if (set.count() > 0) {
        const auto table = obtain_kernel_table(grid, alpha, std::nullopt, quad, ctx.config.kernel.cache);
        scaled = (1.0 - alpha) * frac_perimeter(set, *table);
      }
      const double deviation = limit > 0.0 ? std::abs(scaled - limit) / limit : 0.0;
      const double two_sided = limit > 0.0 ? std::abs(scaled - 2.0 * limit) / (2.0 * limit) : 0.0;
      out << fmt(alpha) << ',' << order << ',' << fmt(scaled) << ',' << fmt(limit) << ',' << fmt(deviation) << ','
          << fmt(two_sided) << '\n';
      say(ctx, "gamma-sweep: alpha " + fmt(alpha) + " order " + std::to_string(order) + " deviation " + fmt(deviation));
    }
  }
  return exit_ok;
}

int cmd_grad_check(const CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  const Grid grid = control_grid(c);
  const PdeObjective objective = make_objective(c, grid);
  const std::vector<double> base = initial_control(c, grid, ctx.seed).values();
  const std::vector<double> g = gradient_F(base, objective.target(), c.problem.nu, objective.mesh());
  std::mt19937_64 rng(ctx.seed + 1);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);

  const fs::path dir = prepare_output(ctx);
  auto out = open_output(dir / "grad_check.csv");
  out << "sample,epsilon,finite_difference,analytic,relative_error\n";
  double worst = 0.0;
  for (int k = 0; k < c.grad_check.samples; ++k) {
    std::vector<double> delta(base.size());
    for (double& d : delta) d = uniform(rng);
    double analytic = 0.0;
    for (std::size_t i = 0; i < delta.size(); ++i) analytic += g[i] * delta[i] * grid.cell_volume();
    for (double eps : c.grad_check.epsilons) {
      std::vector<double> plus(base), minus(base);
      for (std::size_t i = 0; i < base.size(); ++i) {
        plus[i] += eps * delta[i];
        minus[i] -= eps * delta[i];
      }
      const double fd = (objective_F(plus, objective.target(), c.problem.nu, objective.mesh()) -
                         objective_F(minus, objective.target(), c.problem.nu, objective.mesh())) /
                        (2.0 * eps);
      const double rel = std::abs(fd - analytic) / std::max(std::abs(analytic), 1e-300);
      worst = std::max(worst, rel);
      out << k << ',' << fmt(eps) << ',' << fmt(fd) << ',' << fmt(analytic) << ',' << fmt(rel) << '\n';
    }
  }
  say(ctx, "grad-check: max relative error " + fmt(worst));
  return worst <= c.grad_check.threshold ? exit_ok : exit_check_failed;
}

int cmd_subproblem(const CommandContext& ctx, const std::string& instance_path) {
  std::ifstream in(instance_path);
  if (!in) throw Error(ErrorKind::io, "cannot open instance '" + instance_path + "'");
  const std::string base = fs::path(instance_path).parent_path().string();
  const SubproblemInstance instance = read_instance(in, base.empty() ? "." : base);
  SubproblemBudget budget;
  budget.max_nodes = static_cast<std::size_t>(ctx.config.trust_region.max_nodes);
  budget.max_seconds = ctx.config.trust_region.max_seconds;
  const SubproblemSolution s = solve_subproblem_exact(instance, budget);

  const fs::path dir = prepare_output(ctx);
  {
    auto out = open_output(dir / "subproblem_solution.txt");
    for (int label : s.minimizer.assignment()) out << label << '\n';
  }
  json report = {{"objective", s.objective},
                 {"pred", predicted_reduction(instance, s)},
                 {"lower_bound", s.lower_bound},
                 {"gap", s.gap()},
                 {"certificate", s.exact ? "exact" : "gap"},
                 {"nodes", s.nodes},
                 {"flips", instance.flip_budget()},
                 {"minimizer", s.minimizer.assignment()}};
  {
    auto out = open_output(dir / "subproblem.json");
    out << report.dump(2) << '\n';
  }
  say(ctx, "subproblem: objective " + fmt(s.objective) + (s.exact ? " (exact)" : ", gap " + fmt(s.gap())));
  return exit_ok;
}

int cmd_variation_check(const CommandContext& ctx) {
  const VariationCheckConfig& v = ctx.config.variation_check;
  const Grid fine = Grid::build(v.m);
  const auto table = obtain_kernel_table(fine, v.alpha, std::nullopt, ctx.config.kernel.quadrature,
                                         ctx.config.kernel.cache);
  const Point c{0.5, 0.5};
  const Disk disk{c, v.disk_radius};
  const SampledSet set = sample_shape(fine, disk);
  const SampledSet complement = set.complement();

  struct Named {
    std::string name;
    VelocityField field;
  };
  const std::vector<Named> fields{
      {"translation", VelocityField::translation(c, v.bump_radius, {1.0, 0.0})},
      {"radial", VelocityField::radial(c, std::min(v.disk_radius + 0.1, 0.45), 1.0)},
      {"zero", VelocityField::translation(c, v.bump_radius, {0.0, 0.0})},
  };

  const fs::path dir = prepare_output(ctx);
  auto out = open_output(dir / "variation_check.csv");
  out << "kind,field,t,value\n";
  bool ok = true;
  for (const Named& f : fields) {
    const double first = first_variation_L_alpha(set, f.field, *table);
    std::vector<double> remainders;
    for (double t : v.t) {
      const double change = frac_perimeter_change(set, f.field, *table, t);
      const double rem = std::abs(change - t * first) / t;
      remainders.push_back(rem);
      out << "first_variation_remainder," << f.name << ',' << fmt(t) << ',' << fmt(rem) << '\n';
    }
    const std::vector<double> ratios = sym_diff_ratios(Shape{disk}, f.field, *table, v.t);
    for (std::size_t k = 0; k < ratios.size(); ++k)
      out << "sym_diff_ratio," << f.name << ',' << fmt(v.t[k]) << ',' << fmt(ratios[k]) << '\n';

    const std::vector<SampledSet> partition{complement, set};
    const std::vector<int> values{0, 1};
    const std::vector<VelocityField> family{f.field};
    const auto zero = AnalyticScalarField::constant(0.0);
    const double residual = stationarity_residual(partition, values, zero, family, *table)[0];
    out << "stationarity_residual," << f.name << ",," << fmt(residual) << '\n';

    if (f.field.is_zero()) {
      for (double r : remainders) ok = ok && r == 0.0;
      for (double r : ratios) ok = ok && r == 0.0;
    } else {
      for (std::size_t k = 1; k < remainders.size(); ++k) ok = ok && remainders[k] < remainders[k - 1];
      const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
      ok = ok && *lo > 0.0 && *hi < 10.0 * *lo;
    }
  }
  say(ctx, std::string("variation-check: ") + (ok ? "consistent" : "property violated"));
  return ok ? exit_ok : exit_check_failed;
}

int cmd_kernel_table(const CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  if (!c.problem.alpha) throw Error(ErrorKind::usage, "config problem.alpha: kernel tables need a numeric alpha");
  const Grid grid = control_grid(c);
  const auto table = obtain_kernel_table(grid, *c.problem.alpha, c.kernel.truncation, c.kernel.quadrature, c.kernel.cache);
  const fs::path dir = prepare_output(ctx);
  auto out = open_output(dir / "kernel_table.txt");
  write_kernel_table(*table, out);
  say(ctx, "kernel-table: " + std::to_string(table->neighbor_offsets().size()) + " offsets, written to " +
               (dir / "kernel_table.txt").string());
  return exit_ok;
}

}  // namespace fracopt
