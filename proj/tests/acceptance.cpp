// Acceptance checks. Usage: acceptance [--criterion N | --reference8]
// Prints one PASS/FAIL line per criterion; exits 0 only if every selected check passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fracopt/classic_perimeter.hpp"
#include "fracopt/commands.hpp"
#include "fracopt/kernel.hpp"
#include "fracopt/pde.hpp"
#include "fracopt/subproblem.hpp"
#include "fracopt/trust_region.hpp"
#include "fracopt/variations.hpp"

using namespace fracopt;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string num(double v, int digits = 6) {
  char b[64];
  std::snprintf(b, sizeof b, "%.*g", digits, v);
  return b;
}

CellSet square_cells(const Grid& g, int first, int last) {
  CellSet s(g);
  for (int r = first; r < last; ++r)
    for (int c = first; c < last; ++c) s.set(g.index(r, c), true);
  return s;
}

// 1. One-dimensional interval against 4 / (alpha (1 - alpha)).
Outcome criterion1() {
  Stopwatch clock;
  const Grid g = Grid::build(64, 0, 1);
  const CellSet all = CellSet(g).complement();
  Outcome out{true, ""};
  for (double alpha : {0.3, 0.5, 0.7}) {
    const double exact = 4.0 / (alpha * (1.0 - alpha));
    const double value = frac_perimeter(all, tabulate_kernel(g, alpha, kUntruncated));
    const double rel = std::abs(value - exact) / exact;
    out.pass = out.pass && rel <= 0.01;
    out.detail += "alpha " + num(alpha) + ": " + num(value, 9) + " vs " + num(exact, 9) + " (rel " + num(rel, 2) + "); ";
  }
  const double t = clock.seconds();
  out.pass = out.pass && t < 5.0;
  out.detail += "time " + num(t, 3) + " s";
  return out;
}

struct SweepRow {
  double alpha;
  double scaled;
};

std::vector<SweepRow> square_sweep(int m) {
  const Grid g = Grid::build(m);
  const CellSet square = square_cells(g, m / 4, 3 * m / 4);
  std::vector<SweepRow> rows;
  for (double alpha : {0.5, 0.7, 0.9, 0.95})
    rows.push_back({alpha, (1.0 - alpha) * frac_perimeter(square, tabulate_kernel(g, alpha, kUntruncated))});
  return rows;
}

Outcome sweep_against(double reference, double limit_seconds) {
  Stopwatch clock;
  const auto rows = square_sweep(128);
  Outcome out{true, "m 128; "};
  double previous = INFINITY;
  for (const SweepRow& r : rows) {
    const double dev = std::abs(r.scaled - reference) / reference;
    out.pass = out.pass && dev < previous;
    previous = dev;
    out.detail += "alpha " + num(r.alpha) + ": " + num(r.scaled) + " dev " + num(dev, 4) + "; ";
  }
  const double t = clock.seconds();
  out.pass = out.pass && t < limit_seconds;
  out.detail += "time " + num(t, 3) + " s";
  return out;
}

// 2. Centered square of side 0.5: deviation from omega P = 4 along alpha.
Outcome criterion2() { return sweep_against(4.0, 600.0); }

// Diagnostic: the same sweep against 8, the limit of the two-sided double integral.
Outcome reference8() { return sweep_against(8.0, 600.0); }

// 3. P(rE) / P(E) = r^(2 - alpha) for squares inside the domain.
Outcome criterion3() {
  const Grid g = Grid::build(64);
  Outcome out{true, ""};
  for (double alpha : {0.3, 0.5, 0.7}) {
    const KernelTable table = tabulate_kernel(g, alpha, kUntruncated);
    const double base = frac_perimeter(square_cells(g, 24, 40), table);  // side 0.25
    const double twice = frac_perimeter(square_cells(g, 16, 48), table);
    const double half = frac_perimeter(square_cells(g, 28, 36), table);
    for (auto [r, value] : {std::pair{2.0, twice}, std::pair{0.5, half}}) {
      const double expected = std::pow(r, 2.0 - alpha);
      const double rel = std::abs(value / base - expected) / expected;
      out.pass = out.pass && rel <= 0.02;
      out.detail += "alpha " + num(alpha) + " r " + num(r) + ": rel " + num(rel, 3) + "; ";
    }
  }
  return out;
}

// 4. Submodularity on random pairs.
Outcome criterion4() {
  const Grid g = Grid::build(16);
  const KernelTable table = tabulate_kernel(g, 0.5, kUntruncated);
  std::mt19937 rng(4);
  double worst = INFINITY;
  bool equality = true;
  for (int k = 0; k < 1000; ++k) {
    CellSet e(g), f(g);
    const unsigned density = 1 + rng() % 7;
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
      e.set(i, rng() % 8 < density);
      f.set(i, rng() % 8 < density);
    }
    const double pe = frac_perimeter(e, table);
    const double pf = frac_perimeter(f, table);
    const double rhs = pe + pf;
    const double first = rhs - frac_perimeter(e.intersection(f), table) - frac_perimeter(e.union_with(f), table);
    const double second = rhs - frac_perimeter(e.difference(f), table) - frac_perimeter(f.difference(e), table);
    worst = std::min({worst, first / std::max(rhs, 1e-300), second / std::max(rhs, 1e-300)});
    if (k % 100 == 0)
      equality = equality && std::abs(2 * pe - frac_perimeter(e.intersection(e), table) -
                                      frac_perimeter(e.union_with(e), table)) <= 1e-12 * std::max(pe, 1.0);
  }
  return {worst >= -1e-12 && equality, "1000 pairs, smallest relative slack " + num(worst, 3) +
                                           (equality ? ", equality at E = F" : ", equality at E = F violated")};
}

// 5. Central differences of F against the adjoint gradient.
Outcome criterion5() {
  const Grid g = Grid::build(16);
  const PdeMesh mesh(g, 4);
  const double nu = 1.0 / 25.0;
  const NodalField ud = make_target_ud({0.5, 0.5}, 0.3, nu, mesh);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> w(g.cell_count());
  for (double& v : w) v = static_cast<double>(rng() % 2);
  const std::vector<double> grad = gradient_F(w, ud, nu, mesh);
  double worst = 0.0;
  const double eps = 1e-4;
  for (int k = 0; k < 20; ++k) {
    std::vector<double> d(w.size()), plus(w), minus(w);
    double analytic = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      d[i] = u(rng);
      plus[i] += eps * d[i];
      minus[i] -= eps * d[i];
      analytic += grad[i] * d[i] * g.cell_volume();
    }
    const double fd = (objective_F(plus, ud, nu, mesh) - objective_F(minus, ud, nu, mesh)) / (2 * eps);
    worst = std::max(worst, std::abs(fd - analytic) / std::abs(analytic));
  }
  return {worst <= 1e-5, "20 directions, max relative error " + num(worst, 3)};
}

// 6. Branch and bound against enumeration.
Outcome criterion6() {
  Stopwatch clock;
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  int agree = 0, sound = 0;
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Grid g = Grid::build(k % 2 == 0 ? 3 : 4);
    const bool limit = k % 5 == 4;
    const double alpha = 0.2 + 0.6 * (rng() % 100) / 100.0;
    const Regularizer reg = limit ? Regularizer::limit(g)
                                  : Regularizer::fractional(std::make_shared<KernelTable>(
                                        tabulate_kernel(g, alpha, (k % 3 == 0 ? 1.5 : 3.0) / g.n())));
    std::vector<double> cost(g.cell_count());
    for (double& c : cost) c = 0.05 * unit(rng);
    std::vector<int> labels(g.cell_count());
    for (int& l : labels) l = static_cast<int>(rng() % 2);
    const double eta = std::array<double, 3>{0.0, 0.01, 0.05}[rng() % 3];
    const SubproblemInstance inst{cost, reg, eta, ControlField(g, LabelSet::binary(), labels),
                                  static_cast<double>(rng() % (g.cell_count() + 1)) * g.cell_volume()};
    const double exact = solve_subproblem_exact(inst).objective;
    const double brute = brute_force_subproblem(inst).objective;
    worst = std::max(worst, std::abs(exact - brute));
    agree += std::abs(exact - brute) <= 1e-9;
    sound += maximize_lagrangian(inst).bound <= brute + 1e-9;
  }
  const double t = clock.seconds();
  return {agree == 200 && sound == 200 && t < 120.0, std::to_string(agree) + "/200 agree (max diff " + num(worst, 3) +
                                                          "), dual sound on " + std::to_string(sound) +
                                                          "/200, time " + num(t, 3) + " s"};
}

struct Replica {
  TrustRegionResult result;
  double seconds = 0.0;
  std::shared_ptr<const PdeObjective> objective;
  Regularizer regularizer;
  double eta = 0.0;
  TrustRegionParams params;
};

Replica run_replica(double eta) {
  Stopwatch clock;
  const Grid g = Grid::build(16);
  auto table = std::make_shared<KernelTable>(tabulate_kernel(g, 0.5, 7.0 * g.h()));
  const double nu = 1.0 / 25.0;
  PdeMesh mesh(g, 4);
  NodalField ud = make_target_ud({0.5, 0.5}, 0.3, nu, mesh);
  auto objective = std::make_shared<PdeObjective>(std::move(mesh), nu, std::move(ud));
  Replica r{{ControlField::constant(g, LabelSet::binary(), 0)}, 0.0, objective, Regularizer::fractional(table), eta, {}};
  r.result = run_trust_region(*objective, r.regularizer, eta, r.params, ControlField::constant(g, LabelSet::binary(), 0));
  r.seconds = clock.seconds();
  return r;
}

// 7. Trust-region contract on the reduced replica.
Outcome criterion7() {
  const Replica r = run_replica(5e-5);
  const ControlField w0 = ControlField::constant(Grid::build(16), LabelSet::binary(), 0);
  double previous = r.objective->value(w0) + r.eta * r.regularizer.value(w0);
  bool decreasing = true, sufficient = true, halving = true;
  int expected_inner = 0;
  for (const IterationRecord& rec : r.result.log) {
    halving = halving && rec.inner == expected_inner && rec.radius == r.params.delta0 / std::pow(2.0, rec.inner);
    if (rec.accepted) {
      sufficient = sufficient && rec.ared >= r.params.sigma * rec.pred;
      decreasing = decreasing && rec.J < previous;
      previous = rec.J;
      expected_inner = 0;
    } else {
      ++expected_inner;
    }
  }
  const bool pass = decreasing && sufficient && halving && r.seconds < 1800.0;
  return {pass, std::to_string(r.result.accepted_steps) + " accepted of " + std::to_string(r.result.log.size()) +
                    " subproblems, termination " + std::string(to_string(r.result.reason)) + ", J " +
                    num(r.result.J) + (decreasing ? "" : ", J not decreasing") +
                    (sufficient ? "" : ", sufficient decrease violated") + (halving ? "" : ", radius law violated") +
                    ", time " + num(r.seconds, 3) + " s"};
}

// 8. Independent re-solve at a point where the method stopped with pred <= 0.
Outcome criterion8() {
  const Replica base = run_replica(5e-5);
  std::string detail = "replica ends by " + std::string(to_string(base.result.reason));
  // the replica stops by radius contraction, so the certificate is exercised on a
  // stronger regularization that ends by pred <= 0
  const Replica r = base.result.reason == Termination::pred_nonpositive ? base : run_replica(5e-3);
  if (r.result.reason != Termination::pred_nonpositive)
    return {false, detail + "; no run ended by pred <= 0"};
  const ControlField& w = r.result.control;
  const std::vector<double> grad = r.objective->gradient(w);
  std::vector<double> cost(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) cost[i] = grad[i] * w.grid().cell_volume();
  const SubproblemInstance inst{cost, r.regularizer, r.eta, w, r.result.final_radius};
  const SubproblemSolution again = solve_subproblem_exact(inst);
  const double dual = maximize_lagrangian(inst).bound;
  const bool pass = again.exact && again.objective >= -1e-9;
  return {pass, detail + "; eta " + num(r.eta) + " run ends by pred <= 0 at radius " + num(r.result.final_radius) +
                    "; re-solve objective " + num(again.objective, 3) + ", dual bound " + num(dual, 3)};
}

// 9. First-variation remainder and symmetric-difference ratios.
Outcome criterion9() {
  const double alpha = 0.75;
  const Grid fine = Grid::build(64);
  const KernelTable table = tabulate_kernel(fine, alpha, kUntruncated);
  const Disk disk{{0.5, 0.5}, 0.25};
  const SampledSet set = sample_shape(fine, disk);
  const std::vector<double> ts{1e-2, 1e-3, 1e-4};
  Outcome out{true, "alpha 0.75; "};
  for (const auto& [name, phi] : {std::pair{"translation", VelocityField::translation({0.5, 0.5}, 0.3, {1.0, 0.0})},
                                  std::pair{"radial", VelocityField::radial({0.5, 0.5}, 0.35, 1.0)}}) {
    const double first = first_variation_L_alpha(set, phi, table);
    std::vector<double> rem;
    for (double t : ts) rem.push_back(std::abs(frac_perimeter_change(set, phi, table, t) - t * first) / t);
    const bool monotone = rem[1] < rem[0] && rem[2] < rem[1];
    const auto ratios = sym_diff_ratios(Shape{disk}, phi, table, ts);
    const double band = *std::max_element(ratios.begin(), ratios.end()) / *std::min_element(ratios.begin(), ratios.end());
    out.pass = out.pass && monotone && band < 10.0;
    out.detail += std::string(name) + ": remainders " + num(rem[0], 3) + " " + num(rem[1], 3) + " " + num(rem[2], 3) +
                  ", ratio band " + num(band, 3) + "; ";
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 10. Byte-identical outputs for identical configuration and seed.
Outcome criterion10() {
  const fs::path root = fs::temp_directory_path() / "fracopt_acceptance_determinism";
  fs::remove_all(root);
  CommandContext ctx;
  ctx.seed = 10;
  ctx.config.trust_region.w0 = "random";
  for (const char* run : {"a", "b"}) {
    ctx.out_dir = (root / run).string();
    if (cmd_solve(ctx) != exit_ok) return {false, "solve reported a contract violation"};
    if (cmd_variation_check(ctx) != exit_ok) return {false, "variation-check reported a violation"};
  }
  bool same = true;
  std::string files;
  for (const char* f : {"log.csv", "summary.json", "control.pgm", "state.csv", "variation_check.csv"}) {
    const std::string a = slurp(root / "a" / f), b = slurp(root / "b" / f);
    same = same && !a.empty() && a == b;
    files += std::string(f) + " ";
  }
  fs::remove_all(root);
  return {same, "compared " + files + (same ? "(identical)" : "(differ)")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"criterion 1", criterion1}, {"criterion 2", criterion2}, {"criterion 3", criterion3},
      {"criterion 4", criterion4}, {"criterion 5", criterion5}, {"criterion 6", criterion6},
      {"criterion 7", criterion7}, {"criterion 8", criterion8}, {"criterion 9", criterion9},
      {"criterion 10", criterion10}, {"reference8", reference8}};
  std::string only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::string("criterion ") + argv[++i];
    else if (std::strcmp(argv[i], "--reference8") == 0) only = "reference8";
    else {
      std::fprintf(stderr, "usage: acceptance [--criterion N | --reference8]\n");
      return 2;
    }
  }
  bool all = true, found = false;
  for (const auto& [name, check] : checks) {
    if (!only.empty() && name != only) continue;
    if (only.empty() && name == "reference8") continue;
    found = true;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s: %s: %s\n", name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  if (!found) {
    std::fprintf(stderr, "unknown selection '%s'\n", only.c_str());
    return 2;
  }
  return all ? 0 : 1;
}
