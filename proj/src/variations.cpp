#include "fracopt/variations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fracopt/error.hpp"
#include "fracopt/parallel.hpp"
#include "fracopt/quadrature.hpp"

namespace fracopt {

namespace {

double bump(double s) { return s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0; }
double bump_derivative(double s) { return s < 1.0 ? -bump(s) / ((1.0 - s) * (1.0 - s)) : 0.0; }

// Suprema over s in [0, 1) of the profile quantities that bound |D phi| and |div phi|.
struct ProfileBounds {
  double gradient = 0.0;       // |psi'(s)| 2 sqrt(s)        (translation, times |a|/rho)
  double radial_lip = 0.0;     // max(|psi|, |psi + 2 s psi'|)
  double radial_div = 0.0;     // |2 psi + 2 s psi'|
};

const ProfileBounds& profile_bounds() {
  static const ProfileBounds bounds = [] {
    ProfileBounds b;
    constexpr int kSamples = 200000;
    for (int k = 0; k < kSamples; ++k) {
      const double s = static_cast<double>(k) / kSamples;
      const double p = bump(s);
      const double dp = bump_derivative(s);
      b.gradient = std::max(b.gradient, std::abs(dp) * 2.0 * std::sqrt(s));
      b.radial_lip = std::max({b.radial_lip, std::abs(p), std::abs(p + 2.0 * s * dp)});
      b.radial_div = std::max(b.radial_div, std::abs(2.0 * p + 2.0 * s * dp));
    }
    constexpr double kSafety = 1.001;  // sampled maxima of smooth profiles
    b.gradient *= kSafety;
    b.radial_lip *= kSafety;
    b.radial_div *= kSafety;
    return b;
  }();
  return bounds;
}

void require_fine_grid(const SampledSet& set, const KernelTable& table) {
  if (table.grid().dim() != 2) throw Error(ErrorKind::domain, "variations require a two-dimensional grid");
  if (!set.grid().compatible(table.grid())) throw Error(ErrorKind::incompatible_fields, "set and table grids differ");
}

}  // namespace

SampledSet sample_shape(const Grid& fine, const Shape& shape) {
  SampledSet set(fine);
  for (std::size_t i = 0; i < fine.cell_count(); ++i) {
    const Point x = fine.center(i);
    const bool inside = std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Disk>) return norm2(x - s.center) < s.radius * s.radius;
          else return x.x < s.x0;
        },
        shape);
    set.set(i, inside);
  }
  return set;
}

// ---------------------------------------------------------------------------

VelocityField::VelocityField(Kind kind, Point center, double radius, Point amplitude)
    : kind_(kind), center_(center), radius_(radius), amplitude_(amplitude) {
  if (!(radius > 0.0) || center.x - radius <= 0.0 || center.x + radius >= 1.0 || center.y - radius <= 0.0 ||
      center.y + radius >= 1.0)
    throw Error(ErrorKind::domain, "bump support must lie compactly inside the unit square");
  const ProfileBounds& b = profile_bounds();
  if (kind == Kind::translation) {
    const double a = std::sqrt(norm2(amplitude));
    lipschitz_ = a * b.gradient / radius;
    max_divergence_ = lipschitz_;
  } else {
    lipschitz_ = std::abs(amplitude.x) * b.radial_lip;
    max_divergence_ = std::abs(amplitude.x) * b.radial_div;
  }
}

VelocityField VelocityField::translation(Point center, double radius, Point amplitude) {
  return VelocityField(Kind::translation, center, radius, amplitude);
}

VelocityField VelocityField::radial(Point center, double radius, double amplitude) {
  return VelocityField(Kind::radial, center, radius, {amplitude, 0.0});
}

Point VelocityField::value(Point x) const noexcept {
  const Point r = x - center_;
  const double s = norm2(r) / (radius_ * radius_);
  if (s >= 1.0) return {0.0, 0.0};
  const double p = bump(s);
  if (kind_ == Kind::translation) return p * amplitude_;
  return (amplitude_.x * p) * r;
}

Jacobian VelocityField::jacobian(Point x) const noexcept {
  const Point r = x - center_;
  const double s = norm2(r) / (radius_ * radius_);
  if (s >= 1.0) return {};
  const double p = bump(s);
  const double g = 2.0 * bump_derivative(s) / (radius_ * radius_);  // grad psi = g r
  if (kind_ == Kind::translation) {
    const Point a = amplitude_;
    return {a.x * g * r.x, a.x * g * r.y, a.y * g * r.x, a.y * g * r.y};
  }
  const double a = amplitude_.x;
  return {a * (p + g * r.x * r.x), a * g * r.x * r.y, a * g * r.y * r.x, a * (p + g * r.y * r.y)};
}

double variation_integrand(const VelocityField& phi, Point x, Point y, double alpha) {
  const Point d = x - y;
  return phi.divergence(x) + phi.divergence(y) - (2.0 + alpha) * dot(d, phi.value(x) - phi.value(y)) / norm2(d);
}

// ---------------------------------------------------------------------------

SampledScalarField::SampledScalarField(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (grid_.dim() != 2 || values_.size() != grid_.cell_count())
    throw Error(ErrorKind::incompatible_fields, "sampled field does not match its grid");
  const int n = grid_.n();
  const double h = grid_.h();
  grad_x_.resize(values_.size());
  grad_y_.resize(values_.size());
  auto at = [&](int r, int c) { return values_[grid_.index(r, c)]; };
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const int c0 = std::max(c - 1, 0);
      const int c1 = std::min(c + 1, n - 1);
      const int r0 = std::max(r - 1, 0);
      const int r1 = std::min(r + 1, n - 1);
      grad_x_[grid_.index(r, c)] = (at(r, c1) - at(r, c0)) / ((c1 - c0) * h);
      grad_y_[grid_.index(r, c)] = (at(r1, c) - at(r0, c)) / ((r1 - r0) * h);
    }
}

double SampledScalarField::interpolate(const std::vector<double>& data, Point x) const {
  const int n = grid_.n();
  const double u = x.x * n - 0.5;
  const double v = x.y * n - 0.5;
  const int c = std::clamp(static_cast<int>(std::floor(u)), 0, n - 2);
  const int r = std::clamp(static_cast<int>(std::floor(v)), 0, n - 2);
  const double fu = u - c;  // linear extrapolation within the outer half cell
  const double fv = v - r;
  auto at = [&](int rr, int cc) { return data[grid_.index(rr, cc)]; };
  return (1 - fv) * ((1 - fu) * at(r, c) + fu * at(r, c + 1)) + fv * ((1 - fu) * at(r + 1, c) + fu * at(r + 1, c + 1));
}

double SampledScalarField::value(Point x) const { return interpolate(values_, x); }

Point SampledScalarField::gradient(Point x) const { return {interpolate(grad_x_, x), interpolate(grad_y_, x)}; }

// ---------------------------------------------------------------------------

SampledSet deform_set(const SampledSet& set, const VelocityField& phi, double t) {
  if (std::abs(t) * phi.lipschitz() >= 0.5)
    throw Error(ErrorKind::step_too_large, "|t| Lip(phi) must stay below 1/2");
  const Grid& grid = set.grid();
  if (grid.dim() != 2) throw Error(ErrorKind::domain, "deformations require a two-dimensional grid");
  SampledSet out = set;
  if (t == 0.0 || phi.is_zero()) return out;
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    const Point x = grid.center(i);
    if (!phi.in_support(x)) continue;  // f_t is the identity off the support
    Point y = x;
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
      const Point next = x - t * phi.value(y);
      const double step = std::sqrt(norm2(next - y));
      y = next;
      if (step <= 1e-12) {
        converged = true;
        break;
      }
    }
    if (!converged) throw Error(ErrorKind::solver_failure, "inverse map iteration did not converge");
    out.set(i, set.contains(grid.locate(y)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exterior potential of the unit square. The complement is the union of four
// half-planes minus the four corner quadrants counted twice; each piece reduces
// to S(phi) = \int_0^phi sin^alpha.

namespace {

double sine_power_integral(double phi, double alpha) {
  if (phi <= 0.0) return 0.0;
  // theta = phi u^q with q = 1/(1 + alpha) turns the endpoint singularity into a smooth integrand
  const double q = 1.0 / (1.0 + alpha);
  auto f = [&](double u) {
    const double z = phi * std::pow(u, q);
    return std::pow(std::sin(z) / z, alpha);
  };
  return std::pow(phi, 1.0 + alpha) * q * integrate_gauss(f, 0.0, 1.0, 24);
}

struct QuadrantTerms {
  double value, d_a, d_b;
};

// \int_{y_1 > a, y_2 > b} |y|^{-2-alpha} dy and its partial derivatives.
QuadrantTerms quadrant(double a, double b, double alpha) {
  const double sb = sine_power_integral(std::atan2(b, a), alpha);
  const double sa = sine_power_integral(std::atan2(a, b), alpha);
  return {(std::pow(b, -alpha) * sb + std::pow(a, -alpha) * sa) / alpha, -std::pow(a, -1.0 - alpha) * sa,
          -std::pow(b, -1.0 - alpha) * sb};
}

}  // namespace

ExteriorPotential exterior_potential(Point x, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::domain, "alpha must lie in (0, 1)");
  if (!(x.x > 0.0 && x.x < 1.0 && x.y > 0.0 && x.y < 1.0))
    throw Error(ErrorKind::domain, "exterior potential is evaluated inside the square");
  const double b = 2.0 * sine_power_integral(0.5 * std::numbers::pi, alpha);
  auto half = [&](double d) { return b * std::pow(d, -alpha) / alpha; };
  auto half_d = [&](double d) { return -b * std::pow(d, -1.0 - alpha); };
  const double l = x.x, r = 1.0 - x.x, lo = x.y, hi = 1.0 - x.y;
  const QuadrantTerms q00 = quadrant(l, lo, alpha);
  const QuadrantTerms q10 = quadrant(r, lo, alpha);
  const QuadrantTerms q01 = quadrant(l, hi, alpha);
  const QuadrantTerms q11 = quadrant(r, hi, alpha);
  ExteriorPotential out;
  out.value = half(l) + half(r) + half(lo) + half(hi) - q00.value - q10.value - q01.value - q11.value;
  out.gradient.x = half_d(l) - half_d(r) - (q00.d_a - q10.d_a + q01.d_a - q11.d_a);
  out.gradient.y = half_d(lo) - half_d(hi) - (q00.d_b + q10.d_b - q01.d_b - q11.d_b);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Sample {
  Point x;
  Point phi;
  double div = 0.0;
  double det = 0.0;
  bool support = false;
};

std::vector<Sample> sample_field(const Grid& grid, const VelocityField& phi) {
  std::vector<Sample> out(grid.cell_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    Sample& s = out[i];
    s.x = grid.center(i);
    s.support = phi.in_support(s.x) && !phi.is_zero();
    if (s.support) {
      const Jacobian j = phi.jacobian(s.x);
      s.phi = phi.value(s.x);
      s.div = j.trace();
      s.det = j.det();
    }
  }
  return out;
}

// 2 [ sum_{x in E, y in E^c} kappa(x, y) pair(x, y) + sum_{x in E} exterior(x) ], skipping pairs
// where phi and its derivatives vanish at both points.
template <typename Pair, typename Exterior>
double variation_sum(const SampledSet& set, const VelocityField& phi, const KernelTable& table, Pair pair,
                     Exterior exterior) {
  require_fine_grid(set, table);
  const Grid& grid = table.grid();
  if (phi.is_zero()) return 0.0;
  const std::vector<Sample> samples = sample_field(grid, phi);
  std::vector<std::size_t> inside;
  std::vector<std::size_t> outside;
  std::vector<std::size_t> outside_support;
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    if (set.contains(i)) {
      inside.push_back(i);
    } else {
      outside.push_back(i);
      if (samples[i].support) outside_support.push_back(i);
    }
  }
  const double h = grid.h();
  const int n = grid.n();
  const int band = table.exterior_band();
  std::vector<double> partial(inside.size(), 0.0);
  parallel_for(inside.size(), [&](std::size_t k) {
    const std::size_t i = inside[k];
    const Sample& a = samples[i];
    const int r = grid.row(i);
    const int c = grid.col(i);
    double sum = 0.0;
    if (table.untruncated()) {
      for (std::size_t j : a.support ? outside : outside_support)
        sum += table.offset_weight({grid.row(j) - r, grid.col(j) - c}) * pair(a, samples[j]);
      if (a.support) sum += grid.cell_volume() * exterior(a);
    } else {
      for (const Offset& o : table.neighbor_offsets()) {
        const int rr = r + o.dr;
        const int cc = c + o.dc;
        if (grid.contains(rr, cc)) {
          const std::size_t j = grid.index(rr, cc);
          if (set.contains(j) || !(a.support || samples[j].support)) continue;
          sum += table.offset_weight(o) * pair(a, samples[j]);
        } else if (a.support) {
          const int excess = std::max({0, -rr, rr - (n - 1), -cc, cc - (n - 1)});
          if (excess > band) continue;
          Sample y;
          y.x = {(cc + 0.5) * h, (rr + 0.5) * h};
          sum += table.offset_weight(o) * pair(a, y);
        }
      }
    }
    partial[k] = sum;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return 2.0 * total;
}

}  // namespace

double first_variation_L_alpha(const SampledSet& set, const VelocityField& phi, const KernelTable& table) {
  const double alpha = table.alpha();
  auto pair = [alpha](const Sample& a, const Sample& b) {
    const Point d = a.x - b.x;
    return a.div + b.div - (2.0 + alpha) * dot(d, a.phi - b.phi) / norm2(d);
  };
  auto exterior = [alpha](const Sample& a) {
    const ExteriorPotential g = exterior_potential(a.x, alpha);
    return a.div * g.value + dot(g.gradient, a.phi);
  };
  return variation_sum(set, phi, table, pair, exterior);
}

double frac_perimeter_change(const SampledSet& set, const VelocityField& phi, const KernelTable& table, double t) {
  if (std::abs(t) * phi.lipschitz() >= 0.5)
    throw Error(ErrorKind::step_too_large, "|t| Lip(phi) must stay below 1/2");
  if (t == 0.0) return 0.0;
  const double alpha = table.alpha();
  auto log_jacobian = [t](const Sample& s) { return std::log1p(t * s.div + t * t * s.det); };
  // K(f_t x - f_t y) J_t(x) J_t(y) / K(x - y) - 1, evaluated without cancellation
  auto pair = [&](const Sample& a, const Sample& b) {
    const Point d = a.x - b.x;
    const Point shift = t * (a.phi - b.phi);
    const double q = (2.0 * dot(d, shift) + norm2(shift)) / norm2(d);
    return std::expm1(-0.5 * (2.0 + alpha) * std::log1p(q) + log_jacobian(a) + log_jacobian(b));
  };
  auto exterior = [&](const Sample& a) {
    const double moved = exterior_potential(a.x + t * a.phi, alpha).value;
    const double jac = 1.0 + t * a.div + t * t * a.det;
    return jac * moved - exterior_potential(a.x, alpha).value;
  };
  return variation_sum(set, phi, table, pair, exterior);
}

double linearized_objective_variation(const ScalarField& g, const SampledSet& set, const VelocityField& phi) {
  const Grid& grid = set.grid();
  double sum = 0.0;
  if (phi.is_zero()) return 0.0;
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    if (!set.contains(i)) continue;
    const Point x = grid.center(i);
    if (!phi.in_support(x)) continue;
    sum += dot(g.gradient(x), phi.value(x)) + g.value(x) * phi.divergence(x);
  }
  return sum * grid.cell_volume();
}

double linearized_objective_change(const ScalarField& g, const SampledSet& set, const VelocityField& phi, double t) {
  if (std::abs(t) * phi.lipschitz() >= 0.5)
    throw Error(ErrorKind::step_too_large, "|t| Lip(phi) must stay below 1/2");
  const Grid& grid = set.grid();
  double sum = 0.0;
  if (phi.is_zero() || t == 0.0) return 0.0;
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    if (!set.contains(i)) continue;
    const Point x = grid.center(i);
    if (!phi.in_support(x)) continue;
    const Jacobian j = phi.jacobian(x);
    const double jac = 1.0 + t * j.trace() + t * t * j.det();
    sum += g.value(x + t * phi.value(x)) * jac - g.value(x);
  }
  return sum * grid.cell_volume();
}

std::vector<double> stationarity_residual(std::span<const SampledSet> partition, std::span<const int> values,
                                          const ScalarField& g, std::span<const VelocityField> family,
                                          const KernelTable& table) {
  if (partition.size() != values.size())
    throw Error(ErrorKind::incompatible_fields, "one label value per partition member is required");
  std::vector<double> residual;
  residual.reserve(family.size());
  for (const VelocityField& phi : family) {
    double r = 0.0;
    for (std::size_t i = 0; i < partition.size(); ++i) {
      if (values[i] == 0) continue;
      r += values[i] * (linearized_objective_variation(g, partition[i], phi) +
                        first_variation_L_alpha(partition[i], phi, table));
    }
    residual.push_back(r);
  }
  return residual;
}

// ---------------------------------------------------------------------------

double deformed_sym_diff_volume(const Shape& shape, const VelocityField& phi, double t) {
  if (std::abs(t) * phi.lipschitz() >= 0.5)
    throw Error(ErrorKind::step_too_large, "|t| Lip(phi) must stay below 1/2");
  if (t == 0.0 || phi.is_zero()) return 0.0;
  constexpr int kSamples = 20000;
  double sum = 0.0;
  if (const auto* disk = std::get_if<Disk>(&shape)) {
    // area between the circle and its image, in polar coordinates about the center
    const double step = 2.0 * std::numbers::pi / kSamples;
    for (int k = 0; k < kSamples; ++k) {
      const double theta = k * step;
      const Point tangent{-disk->radius * std::sin(theta), disk->radius * std::cos(theta)};
      const Point p = disk->center + Point{disk->radius * std::cos(theta), disk->radius * std::sin(theta)};
      const Point q = p + t * phi.value(p) - disk->center;
      const Point dq = tangent + t * phi.jacobian(p).apply(tangent);
      const double rho2 = norm2(q);
      const double dangle = (q.x * dq.y - q.y * dq.x) / rho2;
      sum += 0.5 * std::abs(rho2 - disk->radius * disk->radius) * dangle;
    }
    return sum * step;
  }
  const double x0 = std::get<HalfPlane>(shape).x0;
  const double step = 1.0 / kSamples;
  for (int k = 0; k < kSamples; ++k) {
    const Point p{x0, (k + 0.5) * step};
    const double dq2 = 1.0 + t * phi.jacobian(p).yy;
    sum += std::abs(t * phi.value(p).x) * dq2;
  }
  return sum * step;
}

namespace {

void require_decreasing(std::span<const double> t_values) {
  if (t_values.empty()) throw Error(ErrorKind::domain, "at least one t value is required");
  for (std::size_t k = 0; k < t_values.size(); ++k) {
    if (!(t_values[k] > 0.0)) throw Error(ErrorKind::domain, "t values must be positive");
    if (k > 0 && !(t_values[k] < t_values[k - 1])) throw Error(ErrorKind::domain, "t values must strictly decrease");
  }
}

double ratio(double volume, double t, double alpha, double perimeter) {
  if (volume == 0.0) return 0.0;
  if (!(perimeter > 0.0)) throw Error(ErrorKind::domain, "the set has zero fractional perimeter");
  return volume / (std::pow(t, alpha) * perimeter);
}

}  // namespace

std::vector<double> sym_diff_ratios(const SampledSet& set, const VelocityField& phi, const KernelTable& table,
                                    std::span<const double> t_values) {
  require_decreasing(t_values);
  require_fine_grid(set, table);
  const double perimeter = frac_perimeter(set, table);
  std::vector<double> out;
  for (double t : t_values) {
    const double volume = sym_diff_volume(deform_set(set, phi, t), set);
    out.push_back(ratio(volume, t, table.alpha(), perimeter));
  }
  return out;
}

std::vector<double> sym_diff_ratios(const Shape& shape, const VelocityField& phi, const KernelTable& table,
                                    std::span<const double> t_values) {
  require_decreasing(t_values);
  const double perimeter = frac_perimeter(sample_shape(table.grid(), shape), table);
  std::vector<double> out;
  for (double t : t_values) out.push_back(ratio(deformed_sym_diff_volume(shape, phi, t), t, table.alpha(), perimeter));
  return out;
}

double sym_diff_bound_ratio(const SampledSet& set, const VelocityField& phi, const KernelTable& table,
                            std::span<const double> t_values) {
  const std::vector<double> r = sym_diff_ratios(set, phi, table, t_values);
  return *std::max_element(r.begin(), r.end());
}

}  // namespace fracopt
