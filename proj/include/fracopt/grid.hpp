#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fracopt {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm2(Point a) { return dot(a, a); }

/// Uniform decomposition of the unit cube (d = 2: unit square, d = 1: unit
/// interval) into n^d cells of side h = 1/n. Cells are indexed row-major:
/// index = row * n + col, with the column running along x.
class Grid {
 public:
  /// Throws ErrorKind::invalid_grid for n < 2, a negative band or d not in {1, 2}.
  static Grid build(int n, int exterior_band = 0, int dim = 2);

  int n() const noexcept { return n_; }
  int dim() const noexcept { return dim_; }
  int exterior_band() const noexcept { return exterior_band_; }
  double h() const noexcept { return h_; }
  double cell_volume() const noexcept { return cell_volume_; }
  std::size_t cell_count() const noexcept { return cell_count_; }

  int row(std::size_t index) const noexcept { return dim_ == 1 ? 0 : static_cast<int>(index / n_); }
  int col(std::size_t index) const noexcept { return dim_ == 1 ? static_cast<int>(index) : static_cast<int>(index % n_); }
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(col);
  }
  bool contains(int row, int col) const noexcept {
    return col >= 0 && col < n_ && (dim_ == 1 ? row == 0 : (row >= 0 && row < n_));
  }

  /// Cell center; y is 0 in one dimension.
  Point center(std::size_t index) const noexcept;
  /// Inverse of center(): the cell containing p (clamped to the domain).
  std::size_t locate(Point p) const noexcept;

  /// Grids are compatible when n and d agree; the exterior band only matters
  /// for kernel tabulation.
  bool compatible(const Grid& other) const noexcept { return n_ == other.n_ && dim_ == other.dim_; }

 private:
  Grid(int n, int exterior_band, int dim);

  int n_;
  int dim_;
  int exterior_band_;
  double h_;
  double cell_volume_;
  std::size_t cell_count_;
};

/// Ordered admissible control values w_1..w_M (M >= 2, distinct, at most one zero).
class LabelSet {
 public:
  explicit LabelSet(std::vector<int> values);
  static LabelSet binary() { return LabelSet({0, 1}); }

  std::size_t size() const noexcept { return values_.size(); }
  int value(std::size_t label_index) const { return values_.at(label_index); }
  const std::vector<int>& values() const noexcept { return values_; }
  bool operator==(const LabelSet& other) const noexcept { return values_ == other.values_; }

 private:
  std::vector<int> values_;
};

/// Per-cell membership indicator; cells outside the domain are never members.
class CellSet {
 public:
  explicit CellSet(const Grid& grid);
  CellSet(const Grid& grid, std::vector<std::uint8_t> membership);

  const Grid& grid() const noexcept { return grid_; }
  bool contains(std::size_t index) const noexcept { return membership_[index] != 0; }
  void set(std::size_t index, bool member) noexcept { membership_[index] = member ? 1 : 0; }
  std::size_t count() const noexcept;
  const std::vector<std::uint8_t>& membership() const noexcept { return membership_; }

  CellSet complement() const;
  CellSet intersection(const CellSet& other) const;
  CellSet union_with(const CellSet& other) const;
  CellSet difference(const CellSet& other) const;

  bool operator==(const CellSet& other) const noexcept {
    return grid_.compatible(other.grid_) && membership_ == other.membership_;
  }

 private:
  Grid grid_;
  std::vector<std::uint8_t> membership_;
};

/// W-valued control: each cell stores a zero-based index into its LabelSet.
class ControlField {
 public:
  ControlField(const Grid& grid, LabelSet labels, std::vector<int> assignment);
  /// Constant field w = w_{label_index}.
  static ControlField constant(const Grid& grid, LabelSet labels, int label_index);

  const Grid& grid() const noexcept { return grid_; }
  const LabelSet& labels() const noexcept { return labels_; }
  const std::vector<int>& assignment() const noexcept { return assignment_; }
  int label_index(std::size_t cell) const noexcept { return assignment_[cell]; }
  int value(std::size_t cell) const noexcept { return labels_.values()[static_cast<std::size_t>(assignment_[cell])]; }
  void set_label(std::size_t cell, int label_index);
  /// Cell values w(x) as doubles, row-major.
  std::vector<double> values() const;

  bool operator==(const ControlField& other) const noexcept {
    return grid_.compatible(other.grid_) && labels_ == other.labels_ && assignment_ == other.assignment_;
  }

 private:
  Grid grid_;
  LabelSet labels_;
  std::vector<int> assignment_;
};

/// Sum over cells of |w_a - w_b| h^d.
double l1_distance(const ControlField& a, const ControlField& b);

/// Level set E_i = w^{-1}({w_i}) for a zero-based label index.
CellSet level_set(const ControlField& w, int label_index);

/// Lebesgue measure of the symmetric difference.
double sym_diff_volume(const CellSet& e, const CellSet& f);

}  // namespace fracopt
