#include "fracopt/maxflow.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace fracopt {

MaxFlow::MaxFlow(std::size_t nodes) : source_(nodes), sink_(nodes + 1), adj_(nodes + 2) {}

void MaxFlow::add_edge(std::size_t u, std::size_t v, double cap, double reverse_cap) {
  adj_[u].push_back({v, adj_[v].size(), cap});
  adj_[v].push_back({u, adj_[u].size() - 1, reverse_cap});
}

bool MaxFlow::build_levels() {
  level_.assign(adj_.size(), -1);
  std::queue<std::size_t> queue;
  level_[source_] = 0;
  queue.push(source_);
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop();
    for (const Arc& a : adj_[v])
      if (a.cap > tolerance_ && level_[a.to] < 0) {
        level_[a.to] = level_[v] + 1;
        queue.push(a.to);
      }
  }
  return level_[sink_] >= 0;
}

// Iterative DFS along the level graph; returns the amount pushed.
double MaxFlow::push(std::size_t start, double limit) {
  struct Frame {
    std::size_t v;
    double limit;
  };
  std::vector<Frame> stack{{start, limit}};
  std::vector<std::size_t> path;  // arc indices taken from each frame
  while (!stack.empty()) {
    const std::size_t v = stack.back().v;
    if (v == sink_) {
      double flow = stack.back().limit;
      for (std::size_t k = 0; k < path.size(); ++k) {
        Arc& a = adj_[stack[k].v][path[k]];
        a.cap -= flow;
        adj_[a.to][a.rev].cap += flow;
      }
      return flow;
    }
    bool advanced = false;
    for (std::size_t& i = next_[v]; i < adj_[v].size(); ++i) {
      const Arc& a = adj_[v][i];
      if (a.cap > tolerance_ && level_[a.to] == level_[v] + 1) {
        path.push_back(i);
        stack.push_back({a.to, std::min(stack.back().limit, a.cap)});
        advanced = true;
        break;
      }
    }
    if (!advanced) {
      level_[v] = -1;  // dead end for this phase
      stack.pop_back();
      if (!path.empty()) {
        ++next_[stack.back().v];
        path.pop_back();
      }
    }
  }
  return 0.0;
}

double MaxFlow::solve(double tolerance) {
  tolerance_ = tolerance;
  double total = 0.0;
  while (build_levels()) {
    next_.assign(adj_.size(), 0);
    for (;;) {
      const double f = push(source_, std::numeric_limits<double>::infinity());
      if (f <= 0.0) break;
      total += f;
    }
  }
  return total;
}

std::vector<char> MaxFlow::min_source_side() const {
  std::vector<char> seen(adj_.size(), 0);
  std::vector<std::size_t> stack{source_};
  seen[source_] = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (const Arc& a : adj_[v])
      if (a.cap > tolerance_ && !seen[a.to]) {
        seen[a.to] = 1;
        stack.push_back(a.to);
      }
  }
  return seen;
}

std::vector<char> MaxFlow::max_source_side() const {
  // u reaches the sink iff some arc u -> w has residual capacity and w reaches the sink;
  // walk backwards: w's incoming residual arcs are the reverses stored at w.
  std::vector<char> reaches(adj_.size(), 0);
  std::vector<std::size_t> stack{sink_};
  reaches[sink_] = 1;
  while (!stack.empty()) {
    const std::size_t w = stack.back();
    stack.pop_back();
    for (const Arc& back : adj_[w]) {
      const Arc& forward = adj_[back.to][back.rev];  // back.to -> w
      if (forward.cap > tolerance_ && !reaches[back.to]) {
        reaches[back.to] = 1;
        stack.push_back(back.to);
      }
    }
  }
  std::vector<char> side(adj_.size());
  for (std::size_t v = 0; v < adj_.size(); ++v) side[v] = reaches[v] ? 0 : 1;
  return side;
}

}  // namespace fracopt
