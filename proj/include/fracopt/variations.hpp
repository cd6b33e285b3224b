#pragma once

#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "fracopt/grid.hpp"
#include "fracopt/kernel.hpp"

namespace fracopt {

/// A set sampled on a fine m x m midpoint lattice of the unit square.
using SampledSet = CellSet;

struct Disk {
  Point center;
  double radius = 0.0;
};

/// {x : x_1 < x0}
struct HalfPlane {
  double x0 = 0.5;
};

using Shape = std::variant<Disk, HalfPlane>;

SampledSet sample_shape(const Grid& fine, const Shape& shape);

struct Jacobian {
  double xx = 0.0, xy = 0.0, yx = 0.0, yy = 0.0;  // d phi_row / d x_col
  double trace() const { return xx + yy; }
  double det() const { return xx * yy - xy * yx; }
  Point apply(Point v) const { return {xx * v.x + xy * v.y, yx * v.x + yy * v.y}; }
};

/// Smooth bump fields with support B_rho(c) compactly inside the unit square.
/// With psi(s) = exp(1 - 1/(1 - s)) and s = |x - c|^2 / rho^2:
///   translation: phi(x) = a psi(s)
///   radial:      phi(x) = a (x - c) psi(s)
class VelocityField {
 public:
  enum class Kind { translation, radial };

  static VelocityField translation(Point center, double radius, Point amplitude);
  static VelocityField radial(Point center, double radius, double amplitude);

  Kind kind() const noexcept { return kind_; }
  Point center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }
  bool is_zero() const noexcept { return amplitude_.x == 0.0 && amplitude_.y == 0.0; }

  bool in_support(Point x) const noexcept { return norm2(x - center_) < radius_ * radius_; }
  Point value(Point x) const noexcept;
  Jacobian jacobian(Point x) const noexcept;
  double divergence(Point x) const noexcept { return jacobian(x).trace(); }

  /// Upper estimates of sup |D phi| (operator norm) and sup |div phi|.
  double lipschitz() const noexcept { return lipschitz_; }
  double max_divergence() const noexcept { return max_divergence_; }

 private:
  VelocityField(Kind kind, Point center, double radius, Point amplitude);

  Kind kind_;
  Point center_;
  double radius_;
  Point amplitude_;  // radial fields use amplitude_.x
  double lipschitz_ = 0.0;
  double max_divergence_ = 0.0;
};

/// C(x, y) = div phi(x) + div phi(y) - (d + alpha) (x - y).(phi(x) - phi(y)) / |x - y|^2
double variation_integrand(const VelocityField& phi, Point x, Point y, double alpha);

/// Scalar field with a gradient, evaluated anywhere in the unit square.
class ScalarField {
 public:
  virtual ~ScalarField() = default;
  virtual double value(Point x) const = 0;
  virtual Point gradient(Point x) const = 0;
};

class AnalyticScalarField final : public ScalarField {
 public:
  AnalyticScalarField(std::function<double(Point)> value, std::function<Point(Point)> gradient)
      : value_(std::move(value)), gradient_(std::move(gradient)) {}
  static AnalyticScalarField constant(double c) {
    return {[c](Point) { return c; }, [](Point) { return Point{0.0, 0.0}; }};
  }
  double value(Point x) const override { return value_(x); }
  Point gradient(Point x) const override { return gradient_(x); }

 private:
  std::function<double(Point)> value_;
  std::function<Point(Point)> gradient_;
};

/// Values at the cell centers of a grid; bilinear interpolation of the values
/// and of their centered-difference gradients (one-sided at the border).
class SampledScalarField final : public ScalarField {
 public:
  SampledScalarField(const Grid& grid, std::vector<double> values);
  double value(Point x) const override;
  Point gradient(Point x) const override;
  const Grid& grid() const noexcept { return grid_; }

 private:
  double interpolate(const std::vector<double>& data, Point x) const;

  Grid grid_;
  std::vector<double> values_;
  std::vector<double> grad_x_;
  std::vector<double> grad_y_;
};

/// Image of E under f_t = I + t phi, sampled: a cell is a member iff
/// f_t^{-1}(center) lies in a member cell. Throws ErrorKind::step_too_large
/// unless |t| Lip(phi) < 1/2.
SampledSet deform_set(const SampledSet& set, const VelocityField& phi, double t);

/// G(x) = \int_{R^2 \ unit square} |x - y|^{-2-alpha} dy and its gradient, in closed form
/// up to one smooth one-dimensional quadrature.
struct ExteriorPotential {
  double value = 0.0;
  Point gradient;
};
ExteriorPotential exterior_potential(Point x, double alpha);

/// First variation L_alpha(E, phi) = 2 \int_E \int_{E^c} C(x, y) |x - y|^{-2-alpha},
/// with the kernel integrated over cell pairs through the table. Untruncated
/// tables treat the exterior of the square exactly, truncated ones through the
/// exterior band.
double first_variation_L_alpha(const SampledSet& set, const VelocityField& phi, const KernelTable& table);

/// P_alpha(f_t E) - P_alpha(E) in the same discretization as
/// first_variation_L_alpha, written as a pull-back to E so that sub-cell
/// deformations are resolved; its derivative at t = 0 is exactly L_alpha.
double frac_perimeter_change(const SampledSet& set, const VelocityField& phi, const KernelTable& table, double t);

/// \int_E div(g phi) by the midpoint rule.
double linearized_objective_variation(const ScalarField& g, const SampledSet& set, const VelocityField& phi);

/// (g, chi_{f_t E} - chi_E) pulled back to E: \int_E g(f_t x) det Df_t(x) - g(x).
double linearized_objective_change(const ScalarField& g, const SampledSet& set, const VelocityField& phi, double t);

/// One entry per field of the family:
///   sum_i w_i ( \int_{E_i} div(g phi) + L_alpha(E_i, phi) ).
std::vector<double> stationarity_residual(std::span<const SampledSet> partition, std::span<const int> values,
                                          const ScalarField& g, std::span<const VelocityField> family,
                                          const KernelTable& table);

/// lambda(f_t E triangle E) for a disk or half-plane, by a boundary-curve integral.
double deformed_sym_diff_volume(const Shape& shape, const VelocityField& phi, double t);

/// Ratios lambda(f_t E triangle E) / (t^alpha P_alpha(E)) for strictly decreasing
/// positive t. The set-based overload counts sample cells; the shape-based one
/// uses the exact symmetric-difference volume and the sampled perimeter.
std::vector<double> sym_diff_ratios(const SampledSet& set, const VelocityField& phi, const KernelTable& table,
                                    std::span<const double> t_values);
std::vector<double> sym_diff_ratios(const Shape& shape, const VelocityField& phi, const KernelTable& table,
                                    std::span<const double> t_values);
double sym_diff_bound_ratio(const SampledSet& set, const VelocityField& phi, const KernelTable& table,
                            std::span<const double> t_values);

}  // namespace fracopt
