#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fracopt/commands.hpp"
#include "fracopt/parallel.hpp"

int main(int argc, char** argv) {
  using namespace fracopt;

  CLI::App app{"Binary optimal control with fractional perimeter regularization"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string instance_path;
  app.add_option("--config", config_path, "JSON run configuration (defaults apply to missing fields)")
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides output.directory)");
  app.add_option("--seed", seed, "seed for random initial controls and directions");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));

  auto* solve = app.add_subcommand("solve", "run the trust-region method on the Poisson tracking problem");
  auto* sweep = app.add_subcommand("gamma-sweep", "compare (1 - alpha) P_alpha with the limit perimeter");
  auto* grad = app.add_subcommand("grad-check", "finite-difference check of the PDE gradient");
  auto* sub = app.add_subcommand("subproblem", "solve one trust-region subproblem from an instance file");
  sub->add_option("instance", instance_path, "instance file")->required();
  auto* variation = app.add_subcommand("variation-check", "first-variation and symmetric-difference diagnostics");
  auto* kernel = app.add_subcommand("kernel-table", "tabulate (and cache) the kernel table of the configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    set_thread_count(threads);
    CommandContext ctx{config_path.empty() ? RunConfig{} : load_config(config_path), out_dir, seed, &std::cout};
    ctx.config.validate();
    if (*solve) return cmd_solve(ctx);
    if (*sweep) return cmd_gamma_sweep(ctx);
    if (*grad) return cmd_grad_check(ctx);
    if (*sub) return cmd_subproblem(ctx, instance_path);
    if (*variation) return cmd_variation_check(ctx);
    if (*kernel) return cmd_kernel_table(ctx);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return exit_internal;
  }
  return exit_usage;
}
