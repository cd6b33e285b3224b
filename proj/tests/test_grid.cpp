#include <cmath>
#include <random>

#include "doctest.h"
#include "fracopt/error.hpp"
#include "fracopt/grid.hpp"

using namespace fracopt;

namespace {

ControlField random_binary(const Grid& g, std::mt19937& rng) {
  std::bernoulli_distribution coin(0.5);
  std::vector<int> a(g.cell_count());
  for (auto& v : a) v = coin(rng) ? 1 : 0;
  return ControlField(g, LabelSet::binary(), a);
}

}  // namespace

TEST_CASE("grid construction") {
  const Grid g48 = Grid::build(48);
  CHECK(g48.h() == doctest::Approx(0.0208333).epsilon(1e-6));
  CHECK(std::abs(g48.h() * 48 - 1.0) < 1e-12);

  const Grid g2 = Grid::build(2);
  CHECK(g2.cell_count() == 4);
  CHECK(g2.center(0).x == 0.25);
  CHECK(g2.center(0).y == 0.25);
  CHECK(g2.center(1).x == 0.75);
  CHECK(g2.center(1).y == 0.25);
  CHECK(g2.center(2).x == 0.25);
  CHECK(g2.center(3).y == 0.75);

  try {
    (void)Grid::build(1);
    FAIL("expected invalid grid");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_grid);
  }
  CHECK_THROWS_AS((void)Grid::build(4, -1), Error);
}

TEST_CASE("cell index round trip") {
  for (int n : {2, 7, 48}) {
    const Grid g = Grid::build(n);
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
      CHECK(g.locate(g.center(i)) == i);
      CHECK(g.index(g.row(i), g.col(i)) == i);
    }
  }
  const Grid g1 = Grid::build(5, 0, 1);
  for (std::size_t i = 0; i < g1.cell_count(); ++i) CHECK(g1.locate(g1.center(i)) == i);
}

TEST_CASE("label set invariants") {
  CHECK_THROWS_AS(LabelSet({1}), Error);
  CHECK_THROWS_AS(LabelSet({0, 0}), Error);
  CHECK(LabelSet({-1, 2}).size() == 2);
}

TEST_CASE("l1 distance") {
  const Grid g = Grid::build(4);
  const ControlField zero = ControlField::constant(g, LabelSet::binary(), 0);
  const ControlField one = ControlField::constant(g, LabelSet::binary(), 1);
  CHECK(l1_distance(zero, zero) == 0.0);
  ControlField single = zero;
  single.set_label(5, 1);
  CHECK(l1_distance(zero, single) == doctest::Approx(1.0 / 16));
  CHECK(l1_distance(zero, one) == doctest::Approx(1.0));

  const ControlField other = ControlField::constant(Grid::build(5), LabelSet::binary(), 0);
  try {
    (void)l1_distance(zero, other);
    FAIL("expected mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::incompatible_fields);
  }
}

TEST_CASE("l1 distance is a metric and matches the symmetric difference for binary labels") {
  const Grid g = Grid::build(6);
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const ControlField a = random_binary(g, rng);
    const ControlField b = random_binary(g, rng);
    const ControlField c = random_binary(g, rng);
    CHECK(l1_distance(a, b) == l1_distance(b, a));
    CHECK(l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c) + 1e-15);
    CHECK((l1_distance(a, b) == 0.0) == (a == b));
    CHECK(l1_distance(a, b) == doctest::Approx(sym_diff_volume(level_set(a, 1), level_set(b, 1))));
  }
}

TEST_CASE("level sets partition the grid") {
  const Grid g = Grid::build(2);
  const ControlField constant = ControlField::constant(g, LabelSet::binary(), 0);
  CHECK(level_set(constant, 0).count() == 4);
  CHECK(level_set(constant, 1).count() == 0);

  const ControlField checker(g, LabelSet::binary(), {0, 1, 1, 0});
  CHECK(level_set(checker, 0).count() == 2);
  CHECK(level_set(checker, 1).count() == 2);
  CHECK_THROWS_AS((void)level_set(checker, 2), Error);

  const Grid g5 = Grid::build(5);
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> pick(0, 2);
  std::vector<int> a(g5.cell_count());
  for (auto& v : a) v = pick(rng);
  const ControlField three(g5, LabelSet({-1, 0, 2}), a);
  for (std::size_t i = 0; i < g5.cell_count(); ++i) {
    int hits = 0;
    for (int l = 0; l < 3; ++l) hits += level_set(three, l).contains(i) ? 1 : 0;
    CHECK(hits == 1);
  }
}

TEST_CASE("symmetric difference volume") {
  const Grid g = Grid::build(4);
  CellSet e(g);
  CellSet f(g);
  CHECK(sym_diff_volume(e, e) == 0.0);
  f.set(3, true);
  CHECK(sym_diff_volume(e, f) == doctest::Approx(1.0 / 16));
  CellSet a(g);
  CellSet b(g);
  for (std::size_t i = 0; i < 3; ++i) a.set(i, true);
  for (std::size_t i = 8; i < 13; ++i) b.set(i, true);
  CHECK(sym_diff_volume(a, b) == doctest::Approx(0.5));
}
