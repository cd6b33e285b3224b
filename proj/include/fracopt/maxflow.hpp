#pragma once

#include <cstddef>
#include <vector>

namespace fracopt {

/// Dinic max-flow on real capacities with a fixed source and sink.
/// Deterministic: arcs are processed in insertion order.
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t nodes);

  std::size_t source() const noexcept { return source_; }
  std::size_t sink() const noexcept { return sink_; }
  /// Adds u -> v with capacity cap and v -> u with capacity reverse_cap.
  void add_edge(std::size_t u, std::size_t v, double cap, double reverse_cap = 0.0);

  /// Runs to completion; residual capacities at or below tolerance count as saturated.
  double solve(double tolerance);

  /// Vertices reachable from the source in the residual graph (smallest minimum cut).
  std::vector<char> min_source_side() const;
  /// Vertices that cannot reach the sink in the residual graph (largest minimum cut).
  std::vector<char> max_source_side() const;

 private:
  struct Arc {
    std::size_t to;
    std::size_t rev;
    double cap;
  };
  bool build_levels();
  double push(std::size_t v, double limit);

  std::size_t source_;
  std::size_t sink_;
  double tolerance_ = 0.0;
  std::vector<std::vector<Arc>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
};

}  // namespace fracopt
