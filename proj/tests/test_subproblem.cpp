#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fracopt/error.hpp"
#include "fracopt/maxflow.hpp"
#include "fracopt/subproblem.hpp"

using namespace fracopt;

namespace {

ControlField random_field(const Grid& g, std::mt19937& rng) {
  std::vector<int> labels(g.cell_count());
  for (int& l : labels) l = static_cast<int>(rng() % 2);
  return ControlField(g, LabelSet::binary(), labels);
}

std::vector<double> random_costs(const Grid& g, std::mt19937& rng, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> c(g.cell_count());
  for (double& v : c) v = normal(rng);
  return c;
}

std::shared_ptr<const KernelTable> table_for(const Grid& g, double alpha) {
  return std::make_shared<KernelTable>(tabulate_kernel(g, alpha, kUntruncated));
}

}  // namespace

TEST_CASE("max flow matches enumeration of cuts") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> cap(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 6;
    MaxFlow flow(n);
    std::vector<std::vector<double>> c(n + 2, std::vector<double>(n + 2, 0.0));
    for (std::size_t u = 0; u < n + 2; ++u)
      for (std::size_t v = 0; v < n + 2; ++v)
        if (u != v && rng() % 3 == 0) {
          c[u][v] = cap(rng);
          flow.add_edge(u, v, c[u][v]);
        }
    const double value = flow.solve(1e-14);
    double best = INFINITY;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      auto in_source = [&](std::size_t v) { return v == n || (v < n && (mask >> v) & 1u); };
      double cut = 0.0;
      for (std::size_t u = 0; u < n + 2; ++u)
        for (std::size_t v = 0; v < n + 2; ++v)
          if (in_source(u) && !in_source(v)) cut += c[u][v];
      best = std::min(best, cut);
    }
    CHECK(value == doctest::Approx(best).epsilon(1e-12));
    for (const auto& side : {flow.min_source_side(), flow.max_source_side()}) {
      CHECK(side[n] == 1);
      CHECK(side[n + 1] == 0);
      double cut = 0.0;
      for (std::size_t u = 0; u < n + 2; ++u)
        for (std::size_t v = 0; v < n + 2; ++v)
          if (side[u] && !side[v]) cut += c[u][v];
      CHECK(cut == doctest::Approx(best).epsilon(1e-12));
    }
  }
}

TEST_CASE("cut model reproduces both regularizers") {
  std::mt19937 rng(3);
  const Grid g = Grid::build(5);
  for (const Regularizer& reg : {Regularizer::fractional(table_for(g, 0.4)), Regularizer::limit(g)}) {
    const CutModel model = reg.cut_model();
    for (int trial = 0; trial < 20; ++trial) {
      const ControlField w = random_field(g, rng);
      double pairs = 0.0;
      for (const auto& e : model.edges)
        if (w.label_index(e.i) != w.label_index(e.j)) pairs += e.weight;
      double boundary = 0.0;
      for (std::size_t i = 0; i < g.cell_count(); ++i) boundary += std::abs(w.value(i)) * model.boundary[i];
      CHECK(model.factor * (pairs + boundary) == doctest::Approx(reg.value(w)).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact solver agrees with brute force") {
  std::mt19937 rng(7);
  const Grid g = Grid::build(4);
  const auto table = table_for(g, 0.5);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const bool limit = trial % 4 == 3;
    const double eta = std::array<double, 4>{0.0, 0.01, 0.05, 0.2}[rng() % 4];
    const double flips = static_cast<double>(rng() % 17);
    SubproblemInstance inst{random_costs(g, rng, 0.05), limit ? Regularizer::limit(g) : Regularizer::fractional(table),
                            eta, random_field(g, rng), flips * g.cell_volume()};
    const SubproblemSolution exact = solve_subproblem_exact(inst);
    const SubproblemSolution brute = brute_force_subproblem(inst);
    CHECK(exact.exact);
    CHECK(std::abs(exact.objective - brute.objective) <= 1e-9);
    CHECK(l1_distance(exact.minimizer, inst.center) <= inst.radius + 1e-12);
    CHECK(subproblem_objective(inst, exact.minimizer) == doctest::Approx(exact.objective).epsilon(1e-12));
    const DualResult dual = maximize_lagrangian(inst);
    CHECK(dual.bound <= brute.objective + 1e-9);
    CHECK(lagrangian_lower_bound(inst, dual.lambda) == doctest::Approx(dual.bound).epsilon(1e-9));
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("degenerate radii and costs return the center") {
  std::mt19937 rng(5);
  const Grid g = Grid::build(4);
  const auto table = table_for(g, 0.3);
  const ControlField center = random_field(g, rng);
  SubproblemInstance zero_radius{random_costs(g, rng, 1.0), Regularizer::fractional(table), 0.1, center, 0.0};
  CHECK(solve_subproblem_exact(zero_radius).minimizer == center);
  CHECK(solve_subproblem_exact(zero_radius).objective == 0.0);

  const ControlField empty = ControlField::constant(g, LabelSet::binary(), 0);
  SubproblemInstance zero_cost{std::vector<double>(g.cell_count(), 0.0), Regularizer::fractional(table), 0.1, empty,
                               1.0};
  const SubproblemSolution s = solve_subproblem_exact(zero_cost);
  CHECK(s.minimizer == empty);
  CHECK(s.objective == 0.0);
}

TEST_CASE("separable instance flips the most negative cells") {
  const Grid g = Grid::build(4);
  std::vector<double> cost(g.cell_count());
  for (std::size_t i = 0; i < cost.size(); ++i) cost[i] = -static_cast<double>(i + 1);
  const ControlField center = ControlField::constant(g, LabelSet::binary(), 0);
  SubproblemInstance inst{cost, Regularizer::limit(g), 0.0, center, 3 * g.cell_volume()};
  const SubproblemSolution s = solve_subproblem_exact(inst);
  CHECK(s.objective == doctest::Approx(-(16 + 15 + 14)));
  for (std::size_t i = 0; i < cost.size(); ++i) CHECK(s.minimizer.label_index(i) == (i >= 13 ? 1 : 0));
}

TEST_CASE("optimal value is monotone in the radius") {
  std::mt19937 rng(19);
  const Grid g = Grid::build(6);
  const auto table = table_for(g, 0.6);
  SubproblemInstance inst{random_costs(g, rng, 0.05), Regularizer::fractional(table), 0.05, random_field(g, rng), 0.0};
  double previous = 0.0;
  for (int k = 0; k <= 12; ++k) {
    inst.radius = k * g.cell_volume();
    const SubproblemSolution s = solve_subproblem_exact(inst);
    CHECK(s.exact);
    CHECK(s.objective <= previous + 1e-12);
    previous = s.objective;
  }
}

TEST_CASE("unconstrained cut is a penalized minimizer") {
  std::mt19937 rng(23);
  const Grid g = Grid::build(4);
  const auto table = table_for(g, 0.5);
  for (int trial = 0; trial < 30; ++trial) {
    SubproblemInstance inst{random_costs(g, rng, 0.05), Regularizer::fractional(table), 0.05, random_field(g, rng),
                            16 * g.cell_volume()};
    const double lambda = 0.5 * (trial % 5);
    const PenalizedSolution p = solve_unconstrained_mincut(inst, lambda);
    double best = INFINITY;
    for (unsigned mask = 0; mask < (1u << 16); ++mask) {
      std::vector<int> labels(16);
      for (std::size_t i = 0; i < 16; ++i) labels[i] = (mask >> i) & 1u;
      const ControlField w(g, LabelSet::binary(), labels);
      best = std::min(best, subproblem_objective(inst, w) + lambda * l1_distance(w, inst.center));
    }
    CHECK(std::abs(p.energy - best) <= 1e-9);
  }
}

TEST_CASE("node budget exhaustion reports a valid gap") {
  std::mt19937 rng(29);
  const Grid g = Grid::build(8);
  const auto table = table_for(g, 0.5);
  SubproblemInstance inst{random_costs(g, rng, 0.05), Regularizer::fractional(table), 0.05, random_field(g, rng),
                          10 * g.cell_volume()};
  const SubproblemSolution full = solve_subproblem_exact(inst);
  const SubproblemSolution cut = solve_subproblem_exact(inst, {1, 60.0});
  CHECK(cut.lower_bound <= full.objective + 1e-12);
  CHECK(cut.objective >= full.objective - 1e-12);
  CHECK(cut.gap() >= 0.0);
  if (full.exact) CHECK(full.gap() == 0.0);
}

TEST_CASE("errors") {
  const Grid g = Grid::build(5);
  const LabelSet three({0, 1, 2});
  SubproblemInstance multi{std::vector<double>(25, 0.0), Regularizer::limit(g), 0.1,
                           ControlField::constant(g, three, 0), 1.0};
  CHECK_THROWS_AS(solve_subproblem_exact(multi), Error);
  try {
    solve_subproblem_exact(multi);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unsupported_labels);
  }
  SubproblemInstance big{std::vector<double>(25, 0.0), Regularizer::limit(g), 0.1,
                         ControlField::constant(g, LabelSet::binary(), 0), 1.0};
  try {
    brute_force_subproblem(big);
    FAIL("expected oracle_scale_exceeded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::oracle_scale_exceeded);
  }
  big.radius = -1.0;
  CHECK_THROWS_AS(solve_subproblem_exact(big), Error);
}

TEST_CASE("instance file round trip") {
  std::mt19937 rng(31);
  const Grid g = Grid::build(4);
  const auto table = table_for(g, 0.35);
  const auto dir = std::filesystem::temp_directory_path() / "fracopt_instance_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "kernel.txt");
    write_kernel_table(*table, out);
  }
  SubproblemInstance inst{random_costs(g, rng, 0.1), Regularizer::fractional(table), 0.07, random_field(g, rng),
                          5 * g.cell_volume()};
  std::stringstream text;
  write_instance(inst, "kernel.txt", text);
  const SubproblemInstance back = read_instance(text, dir.string());
  CHECK(back.linear_cost == inst.linear_cost);
  CHECK(back.center == inst.center);
  CHECK(back.eta == inst.eta);
  CHECK(back.radius == inst.radius);
  CHECK(solve_subproblem_exact(back).objective == doctest::Approx(solve_subproblem_exact(inst).objective));

  SubproblemInstance lim{inst.linear_cost, Regularizer::limit(g), 0.07, inst.center, inst.radius};
  std::stringstream text2;
  write_instance(lim, "", text2);
  CHECK(text2.str().find("limit") != std::string::npos);
  CHECK(read_instance(text2).regularizer.is_limit());

  std::stringstream bad("4 0.35 0.1\n");
  CHECK_THROWS_AS(read_instance(bad), Error);
  std::filesystem::remove_all(dir);
}
