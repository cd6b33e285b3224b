#include "fracopt/subproblem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "fracopt/error.hpp"
#include "fracopt/maxflow.hpp"

namespace fracopt {

Regularizer Regularizer::fractional(std::shared_ptr<const KernelTable> table) {
  if (!table) throw Error(ErrorKind::domain, "fractional regularizer needs a kernel table");
  const Grid grid = table->grid();
  return Regularizer(grid, std::move(table), {});
}

Regularizer Regularizer::limit(const Grid& grid, LimitRegularizerSpec spec) { return Regularizer(grid, nullptr, spec); }

double Regularizer::value(const ControlField& w) const {
  if (table_) return regularizer_Ralpha(w, *table_);
  if (!w.grid().compatible(grid_)) throw Error(ErrorKind::incompatible_fields, "field and regularizer grids differ");
  return regularizer_R(w, spec_);
}

CutModel Regularizer::cut_model() const {
  CutModel model;
  const Grid& g = grid_;
  if (table_) {
    model.factor = 2.0 * (1.0 - table_->alpha());
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
      const int r = g.row(i);
      const int c = g.col(i);
      for (const Offset& o : table_->neighbor_offsets()) {
        if (!g.contains(r + o.dr, c + o.dc)) continue;
        const std::size_t j = g.index(r + o.dr, c + o.dc);
        if (j > i) model.edges.push_back({i, j, table_->offset_weight(o)});
      }
    }
    model.boundary.assign(table_->beta().begin(), table_->beta().end());
    return model;
  }
  model.factor = spec_.omega;
  const double unit = g.dim() == 1 ? 1.0 : g.h();
  model.boundary.assign(g.cell_count(), 0.0);
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const int r = g.row(i);
    const int c = g.col(i);
    int exposed = 0;
    constexpr int dr[4] = {0, 0, -1, 1};
    constexpr int dc[4] = {-1, 1, 0, 0};
    for (int k = 0; k < (g.dim() == 1 ? 2 : 4); ++k) {
      const int rr = r + dr[k];
      const int cc = c + dc[k];
      if (!g.contains(rr, cc)) {
        ++exposed;
      } else if (g.index(rr, cc) > i) {
        model.edges.push_back({i, g.index(rr, cc), unit});
      }
    }
    model.boundary[i] = spec_.count_domain_boundary ? exposed * unit : 0.0;
  }
  return model;
}

void SubproblemInstance::validate() const {
  const Grid& g = center.grid();
  if (center.labels().size() != 2) throw Error(ErrorKind::unsupported_labels, "the subproblem solver needs two labels");
  if (!g.compatible(regularizer.grid())) throw Error(ErrorKind::incompatible_fields, "center and regularizer grids differ");
  if (linear_cost.size() != g.cell_count())
    throw Error(ErrorKind::incompatible_fields, "one linear cost per cell is required");
  for (double c : linear_cost)
    if (!std::isfinite(c)) throw Error(ErrorKind::domain, "linear costs must be finite");
  if (!(radius >= 0.0)) throw Error(ErrorKind::domain, "trust-region radius must be non-negative");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw Error(ErrorKind::domain, "eta must be finite and non-negative");
}

std::size_t SubproblemInstance::flip_budget() const {
  const Grid& g = center.grid();
  const double volume = g.cell_volume() * std::abs(center.labels().value(1) - center.labels().value(0));
  const double cells = radius / volume * (1.0 + 1e-12);
  if (cells >= static_cast<double>(g.cell_count())) return g.cell_count();
  return static_cast<std::size_t>(std::floor(cells));
}

double subproblem_objective(const SubproblemInstance& instance, const ControlField& w) {
  const ControlField& center = instance.center;
  double linear = 0.0;
  for (std::size_t i = 0; i < w.grid().cell_count(); ++i)
    linear += instance.linear_cost[i] * (w.value(i) - center.value(i));
  if (instance.eta == 0.0) return linear;
  return linear + instance.eta * (instance.regularizer.value(w) - instance.regularizer.value(center));
}

double predicted_reduction(const SubproblemInstance&, const SubproblemSolution& solution) {
  return -solution.objective;
}

// ---------------------------------------------------------------------------

namespace {

using Labels = std::vector<int>;  // zero-based label index per cell
using Fixing = std::vector<signed char>;  // -1 free, otherwise the fixed label

// E(b) = sum_i u_i(b_i) + sum_{ij} p_ij [b_i != b_j] + constant, with E(center) = 0.
struct BinaryEnergy {
  std::vector<double> unary0, unary1;
  std::vector<CutModel::Edge> edges;
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency;
  Labels center;
  double constant = 0.0;
  double scale = 0.0;

  std::size_t size() const { return center.size(); }

  double unary(std::size_t i, int b) const { return b == 0 ? unary0[i] : unary1[i]; }

  double eval(const Labels& b) const {
    double e = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) e += unary(i, b[i]);
    for (const auto& edge : edges)
      if (b[edge.i] != b[edge.j]) e += edge.weight;
    return e + constant;
  }

  std::size_t flips(const Labels& b) const {
    std::size_t f = 0;
    for (std::size_t i = 0; i < b.size(); ++i) f += b[i] != center[i];
    return f;
  }

  double toggle_delta(const Labels& b, std::size_t i) const {
    const int now = b[i];
    const int next = 1 - now;
    double d = unary(i, next) - unary(i, now);
    for (const auto& [j, w] : adjacency[i]) d += w * ((next != b[j]) - (now != b[j]));
    return d;
  }
};

BinaryEnergy build_energy(const SubproblemInstance& instance) {
  const ControlField& center = instance.center;
  const std::size_t n = center.grid().cell_count();
  const CutModel model = instance.regularizer.cut_model();
  const double w0 = center.labels().value(0);
  const double w1 = center.labels().value(1);
  const double reg = instance.eta * model.factor;
  BinaryEnergy e;
  e.unary0.resize(n);
  e.unary1.resize(n);
  e.center = center.assignment();
  for (std::size_t i = 0; i < n; ++i) {
    const double c = instance.linear_cost[i];
    const double wbar = center.value(i);
    e.unary0[i] = c * (w0 - wbar) + reg * std::abs(w0) * model.boundary[i];
    e.unary1[i] = c * (w1 - wbar) + reg * std::abs(w1) * model.boundary[i];
    e.scale += std::abs(e.unary0[i]) + std::abs(e.unary1[i]);
  }
  const double pair_factor = reg * (std::abs(w0) + std::abs(w1));
  e.adjacency.resize(n);
  for (const auto& edge : model.edges) {
    const double p = pair_factor * edge.weight;
    if (p <= 0.0) continue;
    e.edges.push_back({edge.i, edge.j, p});
    e.adjacency[edge.i].push_back({edge.j, p});
    e.adjacency[edge.j].push_back({edge.i, p});
    e.scale += p;
  }
  e.constant = 0.0;
  e.constant = -e.eval(e.center);
  return e;
}

double tolerance(const BinaryEnergy& e) { return 1e-12 * (1.0 + e.scale); }

struct CutResult {
  Labels labels;
  double energy = 0.0;
  std::size_t flips = 0;
};

// Minimizes E(b) + mu * flips(b) subject to the fixing.
CutResult min_cut(const BinaryEnergy& e, double mu, const Fixing& fixed) {
  const std::size_t n = e.size();
  MaxFlow flow(n);
  double total = 0.0;
  std::vector<double> a0(n), a1(n);
  for (std::size_t i = 0; i < n; ++i) {
    a0[i] = e.unary0[i] + (e.center[i] != 0 ? mu : 0.0);
    a1[i] = e.unary1[i] + (e.center[i] != 1 ? mu : 0.0);
    total += std::abs(a0[i]) + std::abs(a1[i]);
  }
  for (const auto& edge : e.edges) total += 2.0 * edge.weight;
  const double big = 2.0 * total + 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (fixed[i] == 0) a1[i] = big;
    if (fixed[i] == 1) a0[i] = big;
    const double m = std::min(a0[i], a1[i]);
    // source side is label 0: cutting s -> i pays for label 1, i -> t for label 0
    if (a1[i] - m > 0.0) flow.add_edge(flow.source(), i, a1[i] - m);
    if (a0[i] - m > 0.0) flow.add_edge(i, flow.sink(), a0[i] - m);
  }
  for (const auto& edge : e.edges) flow.add_edge(edge.i, edge.j, edge.weight, edge.weight);
  flow.solve(1e-14 * (1.0 + total));

  CutResult best;
  bool have = false;
  for (const auto& side : {flow.min_source_side(), flow.max_source_side()}) {
    CutResult r;
    r.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.labels[i] = side[i] ? 0 : 1;
    r.energy = e.eval(r.labels);
    r.flips = e.flips(r.labels);
    const double pen = r.energy + mu * static_cast<double>(r.flips);
    const double best_pen = best.energy + mu * static_cast<double>(best.flips);
    if (!have || pen < best_pen - tolerance(e) || (pen <= best_pen + tolerance(e) && r.flips < best.flips)) {
      best = std::move(r);
      have = true;
    }
  }
  return best;
}

struct DualOutcome {
  bool feasible = true;
  double bound = 0.0;
  double mu = 0.0;
  CutResult lo;  // minimizer on the infeasible side of the breakpoint (flips > K)
  CutResult hi;  // best feasible minimizer encountered
};

DualOutcome maximize_dual(const BinaryEnergy& e, const Fixing& fixed, std::size_t budget) {
  DualOutcome out;
  const double tol = tolerance(e);
  const auto k = static_cast<double>(budget);
  auto dual = [&](const CutResult& r, double mu) { return r.energy + mu * (static_cast<double>(r.flips) - k); };

  // center on the free cells: feasible iff the fixing itself respects the budget
  CutResult anchor;
  anchor.labels = e.center;
  for (std::size_t i = 0; i < e.size(); ++i)
    if (fixed[i] >= 0) anchor.labels[i] = fixed[i];
  anchor.flips = e.flips(anchor.labels);
  if (anchor.flips > budget) {
    out.feasible = false;
    out.bound = std::numeric_limits<double>::infinity();
    return out;
  }
  anchor.energy = e.eval(anchor.labels);

  CutResult lo = min_cut(e, 0.0, fixed);
  out.bound = lo.energy;
  if (lo.flips <= budget) {
    out.lo = lo;
    out.hi = lo;
    return out;
  }
  CutResult hi = anchor;
  for (int iter = 0; iter < 200; ++iter) {
    const double mu = std::max(0.0, (hi.energy - lo.energy) / static_cast<double>(lo.flips - hi.flips));
    CutResult r = min_cut(e, mu, fixed);
    const double value = dual(r, mu);
    if (value > out.bound) {
      out.bound = value;
      out.mu = mu;
    }
    if (value >= dual(lo, mu) - tol) break;  // no cut below both lines: mu maximizes the dual
    if (r.flips > budget) {
      lo = std::move(r);
    } else {
      const bool tight = r.flips == budget;
      hi = std::move(r);
      if (tight) break;
    }
  }
  out.lo = std::move(lo);
  out.hi = std::move(hi);
  return out;
}

void greedy_improve(const BinaryEnergy& e, CutResult& r, std::size_t budget, const Fixing& fixed) {
  const double tol = tolerance(e);
  for (int pass = 0; pass < 50; ++pass) {
    bool changed = false;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (fixed[i] >= 0) continue;
      const bool adds_flip = r.labels[i] == e.center[i];
      if (adds_flip && r.flips >= budget) continue;
      const double d = e.toggle_delta(r.labels, i);
      if (d < -tol) {
        r.labels[i] = 1 - r.labels[i];
        r.energy += d;
        r.flips = adds_flip ? r.flips + 1 : r.flips - 1;
        changed = true;
      }
    }
    if (!changed) break;
  }
  r.energy = e.eval(r.labels);
}

ControlField to_field(const SubproblemInstance& instance, const Labels& labels) {
  return ControlField(instance.center.grid(), instance.center.labels(), labels);
}

}  // namespace

SubproblemSolution solve_subproblem_exact(const SubproblemInstance& instance, const SubproblemBudget& budget) {
  instance.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t k = instance.flip_budget();
  if (k == 0) return {instance.center, 0.0, 0.0, true, 0};

  const BinaryEnergy e = build_energy(instance);
  const double tol = tolerance(e);
  const std::size_t n = e.size();

  struct Node {
    Fixing fixed;
    DualOutcome dual;
  };
  Fixing root_fix(n, -1);
  Node root{root_fix, maximize_dual(e, root_fix, k)};

  CutResult incumbent = root.dual.hi;
  greedy_improve(e, incumbent, k, root_fix);

  std::vector<Node> stack;
  stack.push_back(std::move(root));
  std::size_t nodes = 0;
  bool exhausted = false;
  double open_bound = std::numeric_limits<double>::infinity();

  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    if (!node.dual.feasible || node.dual.bound >= incumbent.energy - tol) continue;
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (nodes >= budget.max_nodes || elapsed > budget.max_seconds) {
      exhausted = true;
      open_bound = std::min(open_bound, node.dual.bound);
      for (const Node& rest : stack)
        if (rest.dual.feasible) open_bound = std::min(open_bound, rest.dual.bound);
      break;
    }
    ++nodes;

    if (node.dual.hi.energy < incumbent.energy - tol) {
      incumbent = node.dual.hi;
      greedy_improve(e, incumbent, k, root_fix);
    }
    if (node.dual.bound >= incumbent.energy - tol) continue;

    // branch where the bracketing minimizers disagree, largest linear cost first
    std::size_t pick = n;
    for (int pass = 0; pass < 2 && pick == n; ++pass) {
      double best = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (node.fixed[i] >= 0) continue;
        if (pass == 0 && node.dual.lo.labels[i] == node.dual.hi.labels[i]) continue;
        const double weight = std::abs(instance.linear_cost[i]);
        if (weight > best) {
          best = weight;
          pick = i;
        }
      }
    }
    if (pick == n) continue;  // fully fixed: the bound is attained

    std::vector<Node> children;
    for (int label : {node.dual.hi.labels[pick], 1 - node.dual.hi.labels[pick]}) {
      Fixing f = node.fixed;
      f[pick] = static_cast<signed char>(label);
      DualOutcome d = maximize_dual(e, f, k);
      children.push_back({std::move(f), std::move(d)});
    }
    // depth first, better bound explored first
    if (children[0].dual.bound < children[1].dual.bound) std::swap(children[0], children[1]);
    for (Node& child : children) stack.push_back(std::move(child));
  }

  SubproblemSolution solution{to_field(instance, incumbent.labels), 0.0, 0.0, !exhausted, nodes};
  solution.objective = std::min(0.0, subproblem_objective(instance, solution.minimizer));
  if (solution.objective == 0.0) solution.minimizer = instance.center;
  solution.lower_bound = exhausted ? std::min(open_bound, solution.objective) : solution.objective;
  return solution;
}

PenalizedSolution solve_unconstrained_mincut(const SubproblemInstance& instance, double lambda) {
  instance.validate();
  if (!(lambda >= 0.0)) throw Error(ErrorKind::domain, "lambda must be non-negative");
  const BinaryEnergy e = build_energy(instance);
  const double volume = instance.center.grid().cell_volume() *
                        std::abs(instance.center.labels().value(1) - instance.center.labels().value(0));
  const CutResult r = min_cut(e, lambda * volume, Fixing(e.size(), -1));
  ControlField w = to_field(instance, r.labels);
  const double energy = subproblem_objective(instance, w) + lambda * l1_distance(w, instance.center);
  return {std::move(w), energy};
}

double lagrangian_lower_bound(const SubproblemInstance& instance, double lambda) {
  instance.validate();
  if (!(lambda >= 0.0)) throw Error(ErrorKind::domain, "lambda must be non-negative");
  const BinaryEnergy e = build_energy(instance);
  const double volume = instance.center.grid().cell_volume() *
                        std::abs(instance.center.labels().value(1) - instance.center.labels().value(0));
  const CutResult r = min_cut(e, lambda * volume, Fixing(e.size(), -1));
  const double radius = std::min(instance.radius, volume * static_cast<double>(e.size()));
  return r.energy + lambda * (volume * static_cast<double>(r.flips) - radius);
}

DualResult maximize_lagrangian(const SubproblemInstance& instance) {
  instance.validate();
  const std::size_t k = instance.flip_budget();
  const BinaryEnergy e = build_energy(instance);
  const DualOutcome d = maximize_dual(e, Fixing(e.size(), -1), k);
  const double volume = instance.center.grid().cell_volume() *
                        std::abs(instance.center.labels().value(1) - instance.center.labels().value(0));
  return {d.bound, d.mu / volume};
}

SubproblemSolution brute_force_subproblem(const SubproblemInstance& instance) {
  instance.validate();
  const std::size_t n = instance.center.grid().cell_count();
  if (n > 16) throw Error(ErrorKind::oracle_scale_exceeded, "brute force is limited to 16 cells");
  const std::size_t k = instance.flip_budget();
  ControlField best = instance.center;
  double best_value = 0.0;
  std::size_t best_flips = 0;
  const Labels& center = instance.center.assignment();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const auto flips = static_cast<std::size_t>(__builtin_popcount(mask));
    if (flips > k) continue;
    Labels labels = center;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) labels[i] = 1 - labels[i];
    ControlField w = to_field(instance, labels);
    const double value = subproblem_objective(instance, w);
    if (value < best_value - 1e-13 || (value <= best_value + 1e-13 && flips < best_flips)) {
      best = std::move(w);
      best_value = value;
      best_flips = flips;
    }
  }
  return {best, best_value, best_value, true, 0};
}

// ---------------------------------------------------------------------------

namespace {

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

[[noreturn]] void parse_error(int line, const std::string& what) {
  throw Error(ErrorKind::usage, "instance line " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& token, int line) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (token.empty() || *end != '\0') parse_error(line, "bad number '" + token + "'");
  return v;
}

}  // namespace

void write_instance(const SubproblemInstance& instance, const std::string& table_path, std::ostream& out) {
  instance.validate();
  if (!(instance.center.labels() == LabelSet::binary()))
    throw Error(ErrorKind::unsupported_labels, "the instance format stores labels {0, 1}");
  const Regularizer& reg = instance.regularizer;
  out << instance.center.grid().n() << ' ' << (reg.is_limit() ? std::string("limit") : format_double(reg.table()->alpha()))
      << ' ' << format_double(instance.eta) << ' ' << format_double(instance.radius) << '\n';
  for (double c : instance.linear_cost) out << format_double(c) << '\n';
  for (int label : instance.center.assignment()) out << label << '\n';
  out << (reg.is_limit() ? std::string("-") : table_path) << '\n';
  if (!out) throw Error(ErrorKind::io, "failed writing instance");
}

SubproblemInstance read_instance(std::istream& in, const std::string& base_dir) {
  std::string text;
  int line_no = 0;
  auto next_line = [&](const char* what) {
    if (!std::getline(in, text)) parse_error(line_no + 1, std::string("missing ") + what);
    ++line_no;
    const auto first = text.find_first_not_of(" \t\r");
    const auto last = text.find_last_not_of(" \t\r");
    text = first == std::string::npos ? std::string() : text.substr(first, last - first + 1);
    return text;
  };
  std::istringstream header(next_line("header"));
  std::vector<std::string> fields;
  for (std::string tok; header >> tok;) fields.push_back(tok);
  if (fields.size() != 4) parse_error(1, "expected `n alpha eta Delta`");
  const double n_value = parse_number(fields[0], 1);
  if (n_value != std::floor(n_value) || n_value < 2 || n_value > 1e6) parse_error(1, "bad grid size");
  const int n = static_cast<int>(n_value);
  const bool limit = fields[1] == "limit";
  const double alpha = limit ? 0.0 : parse_number(fields[1], 1);
  const double eta = parse_number(fields[2], 1);
  const double radius = parse_number(fields[3], 1);
  const Grid grid = Grid::build(n);

  std::vector<double> costs(grid.cell_count());
  for (double& c : costs) c = parse_number(next_line("cost"), line_no);
  std::vector<int> labels(grid.cell_count());
  for (int& l : labels) {
    const std::string& t = next_line("center label");
    if (t != "0" && t != "1") parse_error(line_no, "center labels must be 0 or 1");
    l = t == "1" ? 1 : 0;
  }
  const std::string path = next_line("kernel table path");
  Regularizer reg = Regularizer::limit(grid);
  if (!limit) {
    if (path.empty() || path == "-") parse_error(line_no, "a kernel table path is required");
    const std::string full = (path.front() == '/' || base_dir.empty()) ? path : base_dir + "/" + path;
    std::ifstream table_in(full);
    if (!table_in) throw Error(ErrorKind::io, "cannot open kernel table '" + full + "'");
    auto table = std::make_shared<KernelTable>(read_kernel_table(table_in));
    if (table->grid().n() != n || table->grid().dim() != 2 || table->alpha() != alpha)
      parse_error(line_no, "kernel table does not match the header");
    reg = Regularizer::fractional(std::move(table));
  }
  SubproblemInstance instance{std::move(costs), std::move(reg), eta, ControlField(grid, LabelSet::binary(), labels),
                              radius};
  instance.validate();
  return instance;
}

}  // namespace fracopt
