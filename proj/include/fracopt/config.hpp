#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fracopt/kernel.hpp"

namespace fracopt {

struct ProblemConfig {
  double nu = 1.0 / 25.0;
  double eta = 5e-5;
  std::optional<double> alpha = 0.5;  // empty: limit mode
  std::array<double, 2> target_center{0.5, 0.5};
  double target_radius = 0.3;
  std::vector<int> labels{0, 1};
  bool operator==(const ProblemConfig&) const = default;
};

struct DiscretizationConfig {
  int n = 16;
  int refinement = 4;
  int exterior_band = 0;
  bool operator==(const DiscretizationConfig&) const = default;
};

struct KernelConfig {
  std::optional<double> truncation = 7.0;  // in cell widths; empty: untruncated
  QuadratureSpec quadrature;
  std::string cache;  // directory; empty disables caching
  bool operator==(const KernelConfig&) const = default;
};

struct TrustRegionConfig {
  double delta0 = 0.25;
  double sigma = 1e-3;
  double min_radius = 0.0;
  int max_outer = 1000;
  double pred_tol = 0.0;
  double max_nodes = 1e6;
  double max_seconds = 60.0;
  std::string w0 = "zero";  // zero | one | random
  bool operator==(const TrustRegionConfig&) const = default;
};

struct OutputConfig {
  std::string directory = "out";
  bool timing = false;
  bool operator==(const OutputConfig&) const = default;
};

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rectangle {
  double x0 = 0.25, y0 = 0.25, x1 = 0.75, y1 = 0.75;
  bool operator==(const Rectangle&) const = default;
};

struct GammaSweepConfig {
  std::vector<Rectangle> set{Rectangle{}};  // union of rectangles; empty list: empty set
  std::vector<double> alphas{0.5, 0.7, 0.9, 0.95};
  std::vector<int> orders{3};
  int m = 128;
  bool operator==(const GammaSweepConfig&) const = default;
};

struct GradCheckConfig {
  int samples = 20;
  std::vector<double> epsilons{1e-3, 1e-4, 1e-5};
  double threshold = 1e-4;
  bool operator==(const GradCheckConfig&) const = default;
};

struct VariationCheckConfig {
  double alpha = 0.75;
  int m = 64;
  double disk_radius = 0.25;
  double bump_radius = 0.3;
  std::vector<double> t{1e-2, 1e-3, 1e-4};
  bool operator==(const VariationCheckConfig&) const = default;
};

struct RunConfig {
  ProblemConfig problem;
  DiscretizationConfig discretization;
  KernelConfig kernel;
  TrustRegionConfig trust_region;
  OutputConfig output;
  GammaSweepConfig gamma_sweep;
  GradCheckConfig grad_check;
  VariationCheckConfig variation_check;
  bool operator==(const RunConfig&) const = default;

  /// Throws ErrorKind::usage naming the offending field.
  void validate() const;
};

/// Parses JSON; missing fields take their defaults, unknown fields are rejected.
/// Throws ErrorKind::usage with the field path on any schema violation.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

}  // namespace fracopt
