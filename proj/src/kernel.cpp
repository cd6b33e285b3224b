#include "fracopt/kernel.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "fracopt/error.hpp"
#include "fracopt/parallel.hpp"
#include "fracopt/quadrature.hpp"

namespace fracopt {

void QuadratureSpec::validate() const {
  if (order < 1 || order > 64) throw Error(ErrorKind::domain, "quadrature order must be in [1, 64]");
  if (near_field_levels < 1) throw Error(ErrorKind::domain, "near_field_levels must be >= 1");
  if (!(rel_tol > 0.0 && rel_tol <= 0.1)) throw Error(ErrorKind::domain, "rel_tol must be in (0, 0.1]");
  if (!(near_threshold >= 0.0)) throw Error(ErrorKind::domain, "near_threshold must be non-negative");
}

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::domain, "alpha must lie in (0, 1)");
}

// ---------------------------------------------------------------------------
// Tensor rules on two cubes of side `size` with lower corners a and b.

double tensor_pair(std::array<double, 2> a, std::array<double, 2> b, double size, int dim, double alpha,
                   int order) {
  const double exponent = -0.5 * (dim + alpha);
  std::vector<double> nodes;
  std::vector<double> weights;
  if (order == 1) {
    nodes = {0.5};
    weights = {1.0};
  } else {
    const GaussRule& rule = gauss_legendre(order);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      nodes.push_back(0.5 * (rule.nodes[k] + 1.0));
      weights.push_back(0.5 * rule.weights[k]);
    }
  }
  const std::size_t q = nodes.size();
  double sum = 0.0;
  if (dim == 1) {
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = 0; j < q; ++j) {
        const double dx = (a[0] + size * nodes[i]) - (b[0] + size * nodes[j]);
        sum += weights[i] * weights[j] * std::pow(dx * dx, exponent);
      }
    return sum * size * size;
  }
  for (std::size_t i1 = 0; i1 < q; ++i1)
    for (std::size_t i2 = 0; i2 < q; ++i2)
      for (std::size_t j1 = 0; j1 < q; ++j1)
        for (std::size_t j2 = 0; j2 < q; ++j2) {
          const double dx = (a[0] + size * nodes[i1]) - (b[0] + size * nodes[j1]);
          const double dy = (a[1] + size * nodes[i2]) - (b[1] + size * nodes[j2]);
          sum += weights[i1] * weights[i2] * weights[j1] * weights[j2] * std::pow(dx * dx + dy * dy, exponent);
        }
  const double vol = size * size;
  return sum * vol * vol;
}

double subdivided_pair(std::array<double, 2> a, std::array<double, 2> b, double size, int dim, double alpha,
                       const QuadratureSpec& quad, int level, int max_level) {
  double dist2 = 0.0;
  for (int k = 0; k < dim; ++k) dist2 += (a[k] - b[k]) * (a[k] - b[k]);
  if (level >= max_level || std::sqrt(dist2) > quad.near_threshold * size) {
    return tensor_pair(a, b, size, dim, alpha, quad.base_rule == BaseRule::gauss ? quad.order : 1);
  }
  const double half = 0.5 * size;
  const int children = dim == 1 ? 2 : 4;
  auto child = [&](std::array<double, 2> corner, int k) {
    return std::array<double, 2>{corner[0] + half * (k & 1), dim == 1 ? 0.0 : corner[1] + half * (k >> 1)};
  };
  double sum = 0.0;
  for (int p = 0; p < children; ++p)
    for (int q = 0; q < children; ++q)
      sum += subdivided_pair(child(a, p), child(b, q), half, dim, alpha, quad, level + 1, max_level);
  return sum;
}

double subdivision_weight(Offset offset, int dim, double alpha, const QuadratureSpec& quad) {
  const std::array<double, 2> a{0.0, 0.0};
  const std::array<double, 2> b{static_cast<double>(offset.dc), static_cast<double>(offset.dr)};
  double previous = subdivided_pair(a, b, 1.0, dim, alpha, quad, 0, 0);
  for (int levels = 1; levels <= quad.near_field_levels; ++levels) {
    const double current = subdivided_pair(a, b, 1.0, dim, alpha, quad, 0, levels);
    if (std::abs(current - previous) <= quad.rel_tol * std::abs(current)) return current;
    previous = current;
  }
  return previous;
}

// ---------------------------------------------------------------------------
// Polar evaluation. For unit cells at offset o,
//   w(o) = \int_{R^2} |z|^{-2-alpha} A(z - o) dz,  A(u) = prod_k max(0, 1 - |u_k|),
// and along each ray the tent product is piecewise quadratic in r, so the
// radial integral is exact; only the angle is integrated numerically.

// \int_{r0}^{r1} r^{-1-alpha} (c0 + c1 r + c2 r^2) dr, with r1 finite.
double radial_piece(double c0, double c1, double c2, double r0, double r1, double alpha) {
  auto antiderivative = [&](double r, bool include_c0) {
    double value = c1 * std::pow(r, 1.0 - alpha) / (1.0 - alpha) + c2 * std::pow(r, 2.0 - alpha) / (2.0 - alpha);
    if (include_c0) value -= c0 * std::pow(r, -alpha) / alpha;
    return value;
  };
  if (r0 == 0.0) return antiderivative(r1, false);  // c0 vanishes when the ray starts on the support boundary
  return antiderivative(r1, true) - antiderivative(r0, true);
}

double radial_profile(double c, double s, double ox, double oy, double alpha) {
  std::array<double, 7> breaks{};
  std::size_t count = 0;
  breaks[count++] = 0.0;
  for (int k = -1; k <= 1; ++k) {
    if (c != 0.0) {
      const double r = (ox + k) / c;
      if (r > 0.0) breaks[count++] = r;
    }
    if (s != 0.0) {
      const double r = (oy + k) / s;
      if (r > 0.0) breaks[count++] = r;
    }
  }
  std::sort(breaks.begin(), breaks.begin() + static_cast<std::ptrdiff_t>(count));
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < count; ++k) {
    const double r0 = breaks[k];
    const double r1 = breaks[k + 1];
    if (r1 <= r0) continue;
    const double rm = 0.5 * (r0 + r1);
    const double u = rm * c - ox;
    const double v = rm * s - oy;
    if (std::abs(u) >= 1.0 || std::abs(v) >= 1.0) continue;
    const double su = u >= 0.0 ? 1.0 : -1.0;
    const double sv = v >= 0.0 ? 1.0 : -1.0;
    // T(rc - ox) = (1 + su ox) - su c r on this piece
    const double p0 = 1.0 + su * ox;
    const double p1 = -su * c;
    const double q0 = 1.0 + sv * oy;
    const double q1 = -sv * s;
    total += radial_piece(p0 * q0, p0 * q1 + p1 * q0, p1 * q1, r0, r1, alpha);
  }
  return total;
}

double polar_weight_2d(Offset offset, double alpha) {
  const double ox = offset.dc;
  const double oy = offset.dr;
  std::vector<double> angles{-std::numbers::pi, -0.5 * std::numbers::pi, 0.0, 0.5 * std::numbers::pi,
                             std::numbers::pi};
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) {
      const double px = ox + i;
      const double py = oy + j;
      if (px == 0.0 && py == 0.0) continue;
      angles.push_back(std::atan2(py, px));
    }
  std::sort(angles.begin(), angles.end());
  angles.erase(std::unique(angles.begin(), angles.end(), [](double x, double y) { return std::abs(x - y) < 1e-14; }),
               angles.end());
  constexpr int kOrder = 24;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < angles.size(); ++k) {
    const double t0 = angles[k];
    const double t1 = angles[k + 1];
    const double tm = 0.5 * (t0 + t1);
    auto f = [&](double theta) { return radial_profile(std::cos(theta), std::sin(theta), ox, oy, alpha); };
    total += integrate_gauss(f, t0, tm, kOrder) + integrate_gauss(f, tm, t1, kOrder);
  }
  return total;
}

double closed_form_weight_1d(int offset, double alpha) {
  const double o = std::abs(offset);
  const double e = 1.0 - alpha;
  return (2.0 * std::pow(o, e) - std::pow(o - 1.0, e) - std::pow(o + 1.0, e)) / (alpha * e);
}

}  // namespace

double unit_pair_weight(Offset offset, int dim, double alpha, const QuadratureSpec& quad) {
  require_alpha(alpha);
  if (dim == 1) offset.dr = 0;
  if (offset.dr == 0 && offset.dc == 0) throw Error(ErrorKind::self_pair, "a cell has no pair weight with itself");
  const double dist2 = static_cast<double>(offset.dr) * offset.dr + static_cast<double>(offset.dc) * offset.dc;
  if (quad.base_rule == BaseRule::centers) return std::pow(dist2, -0.5 * (dim + alpha));
  if (std::sqrt(dist2) <= quad.near_threshold) {
    if (quad.near_method == NearFieldMethod::subdivision) return subdivision_weight(offset, dim, alpha, quad);
    return dim == 1 ? closed_form_weight_1d(offset.dc, alpha) : polar_weight_2d(offset, alpha);
  }
  const std::array<double, 2> a{0.0, 0.0};
  const std::array<double, 2> b{static_cast<double>(offset.dc), static_cast<double>(offset.dr)};
  return tensor_pair(a, b, 1.0, dim, alpha, quad.base_rule == BaseRule::gauss ? quad.order : 1);
}

double unit_self_complement(int dim, double alpha) {
  require_alpha(alpha);
  if (dim == 1) return 2.0 / (alpha * (1.0 - alpha));
  // 1 - A(r theta) per ray, integrated radially in closed form; eight symmetric octants.
  auto octant = [alpha](double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return (c + s) * std::pow(c, alpha - 1.0) / (1.0 - alpha) - s * std::pow(c, alpha - 1.0) / (2.0 - alpha) +
           std::pow(c, alpha) / alpha;
  };
  return 8.0 * integrate_gauss(octant, 0.0, 0.25 * std::numbers::pi, 64);
}

double cell_pair_weight(const Grid& grid, std::size_t i, std::size_t j, double alpha, const QuadratureSpec& quad) {
  if (i == j) throw Error(ErrorKind::self_pair, "cell_pair_weight requires distinct cells");
  const Offset offset{grid.row(j) - grid.row(i), grid.col(j) - grid.col(i)};
  return std::pow(grid.h(), grid.dim() - alpha) * unit_pair_weight(offset, grid.dim(), alpha, quad);
}

// ---------------------------------------------------------------------------

KernelTable::KernelTable(const Grid& grid, double alpha, double truncation_radius, const QuadratureSpec& quad,
                         int span, std::vector<double> offset_weights, std::vector<double> beta)
    : grid_(grid),
      alpha_(alpha),
      truncation_(truncation_radius),
      quad_(quad),
      span_(span),
      weights_(std::move(offset_weights)),
      beta_(std::move(beta)) {
  const int rows = grid_.dim() == 1 ? 0 : span_;
  for (int dr = -rows; dr <= rows; ++dr)
    for (int dc = -span_; dc <= span_; ++dc)
      if ((dr != 0 || dc != 0) && offset_weight({dr, dc}) > 0.0) neighbors_.push_back({dr, dc});
}

double KernelTable::offset_weight(Offset offset) const noexcept {
  const int a = std::abs(offset.dr);
  const int b = std::abs(offset.dc);
  if (a > span_ || b > span_) return 0.0;
  if (grid_.dim() == 1) return a == 0 ? weights_[static_cast<std::size_t>(b)] : 0.0;
  return weights_[static_cast<std::size_t>(a) * static_cast<std::size_t>(span_ + 1) + static_cast<std::size_t>(b)];
}

double KernelTable::kappa(std::size_t i, std::size_t j) const noexcept {
  if (i == j) return 0.0;
  return offset_weight({grid_.row(j) - grid_.row(i), grid_.col(j) - grid_.col(i)});
}

std::size_t KernelTable::stored_pair_count() const {
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < grid_.cell_count(); ++i) {
    const int r = grid_.row(i);
    const int c = grid_.col(i);
    for (const Offset& o : neighbors_)
      if (grid_.contains(r + o.dr, c + o.dc) && grid_.index(r + o.dr, c + o.dc) > i) ++pairs;
  }
  return pairs;
}

int KernelTable::exterior_band() const noexcept {
  if (grid_.exterior_band() > 0) return grid_.exterior_band();
  if (untruncated()) return grid_.n();
  return static_cast<int>(std::ceil(truncation_ / grid_.h() - 1e-9));
}

KernelTable tabulate_kernel(const Grid& grid, double alpha, double truncation_radius, const QuadratureSpec& quad) {
  require_alpha(alpha);
  quad.validate();
  const double h = grid.h();
  if (!(truncation_radius >= h * (1.0 - 1e-12)))
    throw Error(ErrorKind::degenerate_truncation, "truncation radius must be at least one cell width");
  const int n = grid.n();
  const int dim = grid.dim();
  const bool untruncated = truncation_radius == kUntruncated;
  const double radius_cells = truncation_radius / h;
  const int span = untruncated ? n - 1 : static_cast<int>(std::floor(radius_cells * (1.0 + 1e-12)));
  const double r2max = untruncated ? kUntruncated : radius_cells * radius_cells * (1.0 + 1e-12);

  // Canonical offsets 0 <= a <= b (a = |dr|, b = |dc|); mirrored afterwards so kappa is exactly symmetric.
  std::vector<Offset> canonical;
  for (int a = 0; a <= (dim == 1 ? 0 : span); ++a)
    for (int b = (dim == 1 ? 1 : a); b <= span; ++b) {
      if (a == 0 && b == 0) continue;
      if (static_cast<double>(a) * a + static_cast<double>(b) * b <= r2max) canonical.push_back({a, b});
    }
  std::vector<double> unit(canonical.size());
  parallel_for(canonical.size(), [&](std::size_t k) { unit[k] = unit_pair_weight(canonical[k], dim, alpha, quad); });

  const double scale = std::pow(h, dim - alpha);
  const std::size_t width = static_cast<std::size_t>(span + 1);
  std::vector<double> weights(dim == 1 ? width : width * width, 0.0);
  for (std::size_t k = 0; k < canonical.size(); ++k) {
    const auto a = static_cast<std::size_t>(canonical[k].dr);
    const auto b = static_cast<std::size_t>(canonical[k].dc);
    const double value = scale * unit[k];
    if (dim == 1) {
      weights[b] = value;
    } else {
      weights[a * width + b] = value;
      weights[b * width + a] = value;
    }
  }

  std::vector<double> beta(grid.cell_count(), 0.0);
  KernelTable interior(grid, alpha, truncation_radius, quad, span, weights, beta);
  if (untruncated) {
    // beta_i = (cell against R^d minus itself) - (cell against the other interior cells).
    const double self_complement = scale * unit_self_complement(dim, alpha);
    const int rows = dim == 1 ? 1 : 2 * n - 1;
    const int cols = 2 * n - 1;
    // prefix[(r+1)*(cols+1) + (c+1)] = sum of signed-offset weights over [0..r] x [0..c]
    std::vector<double> prefix(static_cast<std::size_t>(rows + 1) * static_cast<std::size_t>(cols + 1), 0.0);
    auto at = [&](int r, int c) -> double& {
      return prefix[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols + 1) + static_cast<std::size_t>(c)];
    };
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const Offset o{dim == 1 ? 0 : r - (n - 1), c - (n - 1)};
        at(r + 1, c + 1) = interior.offset_weight(o) + at(r, c + 1) + at(r + 1, c) - at(r, c);
      }
    for (std::size_t i = 0; i < grid.cell_count(); ++i) {
      const int r = grid.row(i);
      const int c = grid.col(i);
      // signed offsets dr in [-r, n-1-r], shifted by n-1
      const int r_lo = dim == 1 ? 0 : n - 1 - r;
      const int r_hi = dim == 1 ? 1 : 2 * n - 1 - r;
      const int c_lo = n - 1 - c;
      const int c_hi = 2 * n - 1 - c;
      const double interior_sum = at(r_hi, c_hi) - at(r_lo, c_hi) - at(r_hi, c_lo) + at(r_lo, c_lo);
      beta[i] = std::max(0.0, self_complement - interior_sum);
    }
  } else {
    const int band = interior.exterior_band();
    auto excess = [n](int k) { return std::max({0, -k, k - (n - 1)}); };
    for (std::size_t i = 0; i < grid.cell_count(); ++i) {
      const int r = grid.row(i);
      const int c = grid.col(i);
      double sum = 0.0;
      for (const Offset& o : interior.neighbor_offsets()) {
        const int rr = r + o.dr;
        const int cc = c + o.dc;
        if (grid.contains(rr, cc)) continue;
        if (std::max(dim == 1 ? 0 : excess(rr), excess(cc)) > band) continue;
        sum += interior.offset_weight(o);
      }
      beta[i] = sum;
    }
  }
  return KernelTable(grid, alpha, truncation_radius, quad, span, std::move(weights), std::move(beta));
}

double frac_perimeter(const CellSet& set, const KernelTable& table) {
  const Grid& grid = table.grid();
  if (!set.grid().compatible(grid)) throw Error(ErrorKind::incompatible_fields, "set and kernel table grids differ");
  std::vector<std::size_t> inside;
  std::vector<std::size_t> outside;
  for (std::size_t i = 0; i < grid.cell_count(); ++i) (set.contains(i) ? inside : outside).push_back(i);
  if (inside.empty()) return 0.0;

  std::vector<double> partial(inside.size(), 0.0);
  const bool dense = outside.size() < table.neighbor_offsets().size();
  parallel_for(inside.size(), [&](std::size_t k) {
    const std::size_t i = inside[k];
    const int r = grid.row(i);
    const int c = grid.col(i);
    double sum = 0.0;
    if (dense) {
      for (std::size_t j : outside) sum += table.offset_weight({grid.row(j) - r, grid.col(j) - c});
    } else {
      for (const Offset& o : table.neighbor_offsets()) {
        const int rr = r + o.dr;
        const int cc = c + o.dc;
        if (grid.contains(rr, cc) && !set.contains(grid.index(rr, cc))) sum += table.offset_weight(o);
      }
    }
    partial[k] = sum + table.beta()[i];
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return 2.0 * total;
}

double regularizer_Ralpha(const ControlField& w, const KernelTable& table) {
  if (!w.grid().compatible(table.grid())) throw Error(ErrorKind::incompatible_fields, "field and table grids differ");
  double total = 0.0;
  for (std::size_t l = 0; l < w.labels().size(); ++l) {
    const int weight = std::abs(w.labels().value(l));
    if (weight == 0) continue;
    total += weight * frac_perimeter(level_set(w, static_cast<int>(l)), table);
  }
  return (1.0 - table.alpha()) * total;
}

double frac_perimeter_1d_exact(double length, double alpha) {
  require_alpha(alpha);
  if (!(length > 0.0)) throw Error(ErrorKind::domain, "interval length must be positive");
  return 4.0 * std::pow(length, 1.0 - alpha) / (alpha * (1.0 - alpha));
}

// ---------------------------------------------------------------------------
// Cache file

namespace {

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

int encode_rule(const QuadratureSpec& quad) {
  switch (quad.base_rule) {
    case BaseRule::gauss: return quad.order;
    case BaseRule::midpoint: return 0;
    case BaseRule::centers: return -1;
  }
  return quad.order;
}

double parse_double(const std::string& token, int line) {
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0')
    throw Error(ErrorKind::usage, "kernel table line " + std::to_string(line) + ": bad number '" + token + "'");
  return value;
}

long long parse_int(const std::string& token, int line) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw Error(ErrorKind::usage, "kernel table line " + std::to_string(line) + ": bad integer '" + token + "'");
  return value;
}

}  // namespace

void write_kernel_table(const KernelTable& table, std::ostream& out) {
  const Grid& grid = table.grid();
  const QuadratureSpec& quad = table.quadrature();
  out << grid.dim() << ' ' << grid.n() << ' ' << format_double(table.alpha()) << ' '
      << format_double(table.truncation_radius()) << ' ' << encode_rule(quad) << ' ' << quad.near_field_levels << ' '
      << format_double(quad.rel_tol) << '\n';
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    const int r = grid.row(i);
    const int c = grid.col(i);
    for (const Offset& o : table.neighbor_offsets()) {
      if (!grid.contains(r + o.dr, c + o.dc)) continue;
      const std::size_t j = grid.index(r + o.dr, c + o.dc);
      if (j > i) out << i << ' ' << j << ' ' << format_double(table.offset_weight(o)) << '\n';
    }
  }
  for (std::size_t i = 0; i < grid.cell_count(); ++i) out << i << ' ' << format_double(table.beta()[i]) << '\n';
  if (!out) throw Error(ErrorKind::io, "failed writing kernel table");
}

KernelTable read_kernel_table(std::istream& in) {
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line)) throw Error(ErrorKind::usage, "kernel table: missing header");
  std::istringstream header(line);
  std::vector<std::string> fields;
  for (std::string tok; header >> tok;) fields.push_back(tok);
  if (fields.size() != 7) throw Error(ErrorKind::usage, "kernel table line 1: expected 7 header fields");
  const int dim = static_cast<int>(parse_int(fields[0], 1));
  const int n = static_cast<int>(parse_int(fields[1], 1));
  const double alpha = parse_double(fields[2], 1);
  const double truncation = parse_double(fields[3], 1);
  const int rule = static_cast<int>(parse_int(fields[4], 1));
  QuadratureSpec quad;
  quad.base_rule = rule > 0 ? BaseRule::gauss : (rule == 0 ? BaseRule::midpoint : BaseRule::centers);
  quad.order = rule > 0 ? rule : 1;
  quad.near_field_levels = static_cast<int>(parse_int(fields[5], 1));
  quad.rel_tol = parse_double(fields[6], 1);
  require_alpha(alpha);
  const Grid grid = Grid::build(n, 0, dim);

  std::map<std::pair<int, int>, double> by_offset;
  std::vector<double> beta(grid.cell_count(), 0.0);
  std::vector<char> beta_seen(grid.cell_count(), 0);
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    std::vector<std::string> parts;
    for (std::string tok; tokens >> tok;) parts.push_back(tok);
    if (parts.empty()) continue;
    if (parts.size() == 3) {
      const auto i = parse_int(parts[0], line_no);
      const auto j = parse_int(parts[1], line_no);
      const double kappa = parse_double(parts[2], line_no);
      const auto cells = static_cast<long long>(grid.cell_count());
      if (i < 0 || j < 0 || i >= cells || j >= cells || i == j)
        throw Error(ErrorKind::usage, "kernel table line " + std::to_string(line_no) + ": bad cell pair");
      const auto iu = static_cast<std::size_t>(i);
      const auto ju = static_cast<std::size_t>(j);
      const std::pair<int, int> key{std::abs(grid.row(ju) - grid.row(iu)), std::abs(grid.col(ju) - grid.col(iu))};
      const auto [it, inserted] = by_offset.emplace(key, kappa);
      if (!inserted && it->second != kappa)
        throw Error(ErrorKind::usage,
                    "kernel table line " + std::to_string(line_no) + ": weight differs for the same offset");
    } else if (parts.size() == 2) {
      const auto i = parse_int(parts[0], line_no);
      if (i < 0 || i >= static_cast<long long>(grid.cell_count()))
        throw Error(ErrorKind::usage, "kernel table line " + std::to_string(line_no) + ": bad cell index");
      beta[static_cast<std::size_t>(i)] = parse_double(parts[1], line_no);
      beta_seen[static_cast<std::size_t>(i)] = 1;
    } else {
      throw Error(ErrorKind::usage, "kernel table line " + std::to_string(line_no) + ": expected 2 or 3 fields");
    }
  }
  if (std::find(beta_seen.begin(), beta_seen.end(), 0) != beta_seen.end())
    throw Error(ErrorKind::usage, "kernel table: missing beta entries");

  int span = 0;
  for (const auto& [key, value] : by_offset) span = std::max({span, key.first, key.second});
  if (truncation == kUntruncated) span = n - 1;
  const std::size_t width = static_cast<std::size_t>(span + 1);
  std::vector<double> weights(dim == 1 ? width : width * width, 0.0);
  for (const auto& [key, value] : by_offset) {
    const auto a = static_cast<std::size_t>(key.first);
    const auto b = static_cast<std::size_t>(key.second);
    if (dim == 1) {
      weights[b] = value;
    } else {
      weights[a * width + b] = value;
      weights[b * width + a] = value;
    }
  }
  return KernelTable(grid, alpha, truncation, quad, span, std::move(weights), std::move(beta));
}

}  // namespace fracopt
