#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fracopt/error.hpp"
#include "fracopt/trust_region.hpp"

using namespace fracopt;

TEST_CASE("acceptance test") {
  CHECK(accept_test(1.0, 1.0, 0.5));
  CHECK_FALSE(accept_test(0.0, 1.0, 0.5));
  CHECK(accept_test(0.25, 0.5, 0.5));
  CHECK_FALSE(accept_test(std::nextafter(0.25, 0.0), 0.5, 0.5));
  CHECK_THROWS_AS(accept_test(1.0, 0.0, 0.5), Error);
  CHECK(actual_reduction(3.0, 3.0) == 0.0);
}

TEST_CASE("parameter validation") {
  TrustRegionParams p;
  CHECK_NOTHROW(p.validate());
  p.sigma = 1.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.delta0 = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("stationary start terminates at once") {
  const Grid g = Grid::build(4);
  const LinearObjective f(g, std::vector<double>(g.cell_count(), 1.0));
  const ControlField w0 = ControlField::constant(g, LabelSet::binary(), 0);
  const TrustRegionResult r = run_trust_region(f, Regularizer::limit(g), 0.1, {}, w0);
  CHECK(r.reason == Termination::pred_nonpositive);
  CHECK(r.accepted_steps == 0);
  CHECK(r.log.size() == 1);
  CHECK(r.control == w0);
}

TEST_CASE("separable linear objective flips everything in one step") {
  const Grid g = Grid::build(4);
  const LinearObjective f(g, std::vector<double>(g.cell_count(), -1.0));
  TrustRegionParams p;
  p.delta0 = 1.0;
  const TrustRegionResult r =
      run_trust_region(f, Regularizer::limit(g), 0.0, p, ControlField::constant(g, LabelSet::binary(), 0));
  REQUIRE(r.log.size() == 2);
  CHECK(r.log[0].accepted);
  CHECK(r.log[0].pred == doctest::Approx(1.0));
  CHECK(r.log[0].ared == doctest::Approx(r.log[0].pred).epsilon(1e-14));
  CHECK(r.control == ControlField::constant(g, LabelSet::binary(), 1));
  CHECK(r.F == doctest::Approx(-1.0));
  CHECK(r.reason == Termination::pred_nonpositive);
}

TEST_CASE("descent, radius law and logging on a small PDE problem") {
  const Grid g = Grid::build(8);
  auto table = std::make_shared<KernelTable>(tabulate_kernel(g, 0.5, 7.0 / 8));
  const PdeMesh mesh(g, 4);
  const double nu = 1.0 / 25;
  const PdeObjective f(mesh, nu, make_target_ud({0.5, 0.5}, 0.3, nu, mesh));
  TrustRegionParams p;
  const double eta = 5e-5;
  const TrustRegionResult r =
      run_trust_region(f, Regularizer::fractional(table), eta, p, ControlField::constant(g, LabelSet::binary(), 0));
  CHECK(r.accepted_steps > 0);
  double previous = f.value(ControlField::constant(g, LabelSet::binary(), 0));
  int expected_inner = 0;
  for (const IterationRecord& rec : r.log) {
    CHECK(rec.inner == expected_inner);
    CHECK(rec.radius == std::ldexp(p.delta0, -rec.inner));
    if (rec.accepted) {
      CHECK(rec.ared >= p.sigma * rec.pred);
      CHECK(rec.J < previous);
      CHECK(rec.J == doctest::Approx(rec.F + eta * rec.R).epsilon(1e-14));
      previous = rec.J;
      expected_inner = 0;
    } else {
      ++expected_inner;
    }
  }
  CHECK(r.J == previous);

  std::ostringstream csv;
  write_log_csv(r.log, csv);
  CHECK(csv.str().rfind("n,k,Delta,pred,ared,F,R_alpha,J_alpha,accepted,gap,seconds\n", 0) == 0);
  std::ostringstream again;
  write_log_csv(run_trust_region(f, Regularizer::fractional(table), eta, p,
                                 ControlField::constant(g, LabelSet::binary(), 0))
                    .log,
                again);
  CHECK(again.str() == csv.str());
}

TEST_CASE("PGM output") {
  const Grid g = Grid::build(3);
  ControlField w = ControlField::constant(g, LabelSet::binary(), 0);
  w.set_label(g.index(0, 2), 1);
  std::ostringstream out;
  write_pgm(w, out);
  CHECK(out.str() == "P2\n3 3\n255\n0 0 255\n0 0 0\n0 0 0\n");
}
