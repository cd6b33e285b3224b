#include "fracopt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <string>

#include "fracopt/error.hpp"

namespace fracopt {

Grid::Grid(int n, int exterior_band, int dim)
    : n_(n),
      dim_(dim),
      exterior_band_(exterior_band),
      h_(1.0 / n),
      cell_volume_(std::pow(1.0 / n, dim)),
      cell_count_(dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {}

Grid Grid::build(int n, int exterior_band, int dim) {
  if (n < 2) throw Error(ErrorKind::invalid_grid, "n must be at least 2, got " + std::to_string(n));
  if (exterior_band < 0) throw Error(ErrorKind::invalid_grid, "exterior band must be non-negative");
  if (dim != 1 && dim != 2) throw Error(ErrorKind::invalid_grid, "dimension must be 1 or 2");
  return Grid(n, exterior_band, dim);
}

Point Grid::center(std::size_t index) const noexcept {
  const double x = (col(index) + 0.5) / n_;
  const double y = dim_ == 1 ? 0.0 : (row(index) + 0.5) / n_;
  return {x, y};
}

std::size_t Grid::locate(Point p) const noexcept {
  auto clamp_cell = [this](double t) {
    return std::clamp(static_cast<int>(std::floor(t * n_)), 0, n_ - 1);
  };
  if (dim_ == 1) return static_cast<std::size_t>(clamp_cell(p.x));
  return index(clamp_cell(p.y), clamp_cell(p.x));
}

LabelSet::LabelSet(std::vector<int> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw Error(ErrorKind::invalid_label, "label set needs at least two values");
  std::set<int> unique(values_.begin(), values_.end());
  if (unique.size() != values_.size()) throw Error(ErrorKind::invalid_label, "label values must be distinct");
}

CellSet::CellSet(const Grid& grid) : grid_(grid), membership_(grid.cell_count(), 0) {}

CellSet::CellSet(const Grid& grid, std::vector<std::uint8_t> membership)
    : grid_(grid), membership_(std::move(membership)) {
  if (membership_.size() != grid_.cell_count())
    throw Error(ErrorKind::incompatible_fields, "membership size does not match the grid");
  for (auto& m : membership_) m = m ? 1 : 0;
}

std::size_t CellSet::count() const noexcept {
  return static_cast<std::size_t>(std::count(membership_.begin(), membership_.end(), std::uint8_t{1}));
}

namespace {

void require_compatible(const Grid& a, const Grid& b) {
  if (!a.compatible(b)) throw Error(ErrorKind::incompatible_fields, "grids differ");
}

template <typename Op>
CellSet combine(const CellSet& a, const CellSet& b, Op op) {
  require_compatible(a.grid(), b.grid());
  std::vector<std::uint8_t> out(a.membership().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a.contains(i), b.contains(i)) ? 1 : 0;
  return CellSet(a.grid(), std::move(out));
}

}  // namespace

CellSet CellSet::complement() const {
  std::vector<std::uint8_t> out(membership_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = membership_[i] ? 0 : 1;
  return CellSet(grid_, std::move(out));
}

CellSet CellSet::intersection(const CellSet& other) const {
  return combine(*this, other, [](bool a, bool b) { return a && b; });
}
CellSet CellSet::union_with(const CellSet& other) const {
  return combine(*this, other, [](bool a, bool b) { return a || b; });
}
CellSet CellSet::difference(const CellSet& other) const {
  return combine(*this, other, [](bool a, bool b) { return a && !b; });
}

ControlField::ControlField(const Grid& grid, LabelSet labels, std::vector<int> assignment)
    : grid_(grid), labels_(std::move(labels)), assignment_(std::move(assignment)) {
  if (assignment_.size() != grid_.cell_count())
    throw Error(ErrorKind::incompatible_fields, "assignment size does not match the grid");
  const int m = static_cast<int>(labels_.size());
  for (int a : assignment_)
    if (a < 0 || a >= m) throw Error(ErrorKind::invalid_label, "label index out of range");
}

ControlField ControlField::constant(const Grid& grid, LabelSet labels, int label_index) {
  return ControlField(grid, std::move(labels), std::vector<int>(grid.cell_count(), label_index));
}

void ControlField::set_label(std::size_t cell, int label_index) {
  if (label_index < 0 || label_index >= static_cast<int>(labels_.size()))
    throw Error(ErrorKind::invalid_label, "label index out of range");
  assignment_.at(cell) = label_index;
}

std::vector<double> ControlField::values() const {
  std::vector<double> out(assignment_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = value(i);
  return out;
}

double l1_distance(const ControlField& a, const ControlField& b) {
  require_compatible(a.grid(), b.grid());
  if (!(a.labels() == b.labels())) throw Error(ErrorKind::incompatible_fields, "label sets differ");
  long long jumps = 0;
  for (std::size_t i = 0; i < a.assignment().size(); ++i) jumps += std::abs(a.value(i) - b.value(i));
  return static_cast<double>(jumps) * a.grid().cell_volume();
}

CellSet level_set(const ControlField& w, int label_index) {
  if (label_index < 0 || label_index >= static_cast<int>(w.labels().size()))
    throw Error(ErrorKind::invalid_label, "label index " + std::to_string(label_index) + " out of range");
  std::vector<std::uint8_t> members(w.assignment().size());
  for (std::size_t i = 0; i < members.size(); ++i) members[i] = w.label_index(i) == label_index ? 1 : 0;
  return CellSet(w.grid(), std::move(members));
}

double sym_diff_volume(const CellSet& e, const CellSet& f) {
  require_compatible(e.grid(), f.grid());
  std::size_t differing = 0;
  for (std::size_t i = 0; i < e.membership().size(); ++i) differing += e.contains(i) != f.contains(i) ? 1 : 0;
  return static_cast<double>(differing) * e.grid().cell_volume();
}

}  // namespace fracopt
