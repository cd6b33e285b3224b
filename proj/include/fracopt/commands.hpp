#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "fracopt/config.hpp"
#include "fracopt/error.hpp"
#include "fracopt/kernel.hpp"

namespace fracopt {

enum ExitCode : int { exit_ok = 0, exit_check_failed = 1, exit_usage = 2, exit_internal = 3 };

/// Usage-type error kinds map to 2, everything else to 3.
int exit_code_for(ErrorKind kind);

/// Tabulates, or loads from `cache_dir` when a table with the same key is
/// stored there. The key covers d, n, band, alpha, truncation and quadrature.
std::shared_ptr<const KernelTable> obtain_kernel_table(const Grid& grid, double alpha,
                                                       std::optional<double> truncation_cells,
                                                       const QuadratureSpec& quad, const std::string& cache_dir);
std::string kernel_cache_name(const Grid& grid, double alpha, std::optional<double> truncation_cells,
                              const QuadratureSpec& quad);

struct CommandContext {
  RunConfig config;
  std::string out_dir;  // empty: config.output.directory
  std::uint64_t seed = 0;
  std::ostream* message = nullptr;  // progress and summary lines, may be null

  std::string output_directory() const { return out_dir.empty() ? config.output.directory : out_dir; }
};

/// Writes log.csv, control.pgm, state.csv, target.csv and summary.json.
int cmd_solve(const CommandContext& ctx);
/// Writes gamma_sweep.csv.
int cmd_gamma_sweep(const CommandContext& ctx);
/// Writes grad_check.csv; fails when the largest relative error exceeds the threshold.
int cmd_grad_check(const CommandContext& ctx);
/// Writes subproblem.json and subproblem_solution.txt.
int cmd_subproblem(const CommandContext& ctx, const std::string& instance_path);
/// Writes variation_check.csv; fails when a consistency property is violated.
int cmd_variation_check(const CommandContext& ctx);
/// Writes kernel_table.txt (and fills the cache when configured).
int cmd_kernel_table(const CommandContext& ctx);

}  // namespace fracopt
