#include "fracopt/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fracopt/error.hpp"
#include "json.hpp"

namespace fracopt {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::usage, "config " + path + ": " + what);
}

// Reads the fields of one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_, "expected an object");
  }
  void done() const {
    for (const auto& [key, value] : node_.items())
      if (!seen_.count(key)) fail(at(key), "unknown field");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(at(key), "expected a number");
      out = v->get<double>();
    }
  }
  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(at(key), "expected an integer");
      out = v->get<int>();
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  template <class T>
  void list(const std::string& key, std::vector<T>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(at(key), "expected an array");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const json& item = (*v)[i];
        const std::string where = at(key) + "[" + std::to_string(i) + "]";
        if constexpr (std::is_same_v<T, int>) {
          if (!item.is_number_integer()) fail(where, "expected an integer");
        } else {
          if (!item.is_number()) fail(where, "expected a number");
        }
        out.push_back(item.get<T>());
      }
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

const char* rule_name(BaseRule r) {
  switch (r) {
    case BaseRule::gauss: return "gauss";
    case BaseRule::midpoint: return "midpoint";
    case BaseRule::centers: return "centers";
  }
  return "gauss";
}

void read_quadrature(const json& node, const std::string& path, QuadratureSpec& q) {
  Section s(node, path);
  std::string rule = rule_name(q.base_rule);
  s.string("rule", rule);
  if (rule == "gauss") q.base_rule = BaseRule::gauss;
  else if (rule == "midpoint") q.base_rule = BaseRule::midpoint;
  else if (rule == "centers") q.base_rule = BaseRule::centers;
  else fail(s.at("rule"), "expected gauss, midpoint or centers");
  s.integer("order", q.order);
  s.integer("near_levels", q.near_field_levels);
  s.number("rel_tol", q.rel_tol);
  s.number("near_threshold", q.near_threshold);
  std::string method = q.near_method == NearFieldMethod::polar ? "polar" : "subdivision";
  s.string("near_method", method);
  if (method == "polar") q.near_method = NearFieldMethod::polar;
  else if (method == "subdivision") q.near_method = NearFieldMethod::subdivision;
  else fail(s.at("near_method"), "expected polar or subdivision");
  s.done();
}

json quadrature_json(const QuadratureSpec& q) {
  return {{"rule", rule_name(q.base_rule)},
          {"order", q.order},
          {"near_levels", q.near_field_levels},
          {"rel_tol", q.rel_tol},
          {"near_threshold", q.near_threshold},
          {"near_method", q.near_method == NearFieldMethod::polar ? "polar" : "subdivision"}};
}

std::array<double, 2> read_pair(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) fail(path, "expected [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

void read_rectangles(Section& s, const std::string& key, std::vector<Rectangle>& out) {
  const json* v = s.find(key);
  if (!v) return;
  if (!v->is_array()) fail(s.at(key), "expected an array of rectangles");
  out.clear();
  for (std::size_t i = 0; i < v->size(); ++i) {
    Rectangle r;
    Section rs((*v)[i], s.at(key) + "[" + std::to_string(i) + "]");
    rs.number("x0", r.x0);
    rs.number("y0", r.y0);
    rs.number("x1", r.x1);
    rs.number("y1", r.y1);
    rs.done();
    out.push_back(r);
  }
}

void check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) fail(path, what);
}

}  // namespace

void RunConfig::validate() const {
  check(problem.nu > 0.0 && std::isfinite(problem.nu), "problem.nu", "must be positive");
  check(problem.eta >= 0.0 && std::isfinite(problem.eta), "problem.eta", "must be non-negative");
  if (problem.alpha)
    check(*problem.alpha > 0.0 && *problem.alpha < 1.0, "problem.alpha", "must lie in (0, 1) or be \"limit\"");
  check(problem.target_radius >= 0.0, "problem.target.radius", "must be non-negative");
  check(problem.labels.size() >= 2, "problem.labels", "needs at least two values");
  check(discretization.n >= 2, "discretization.n", "must be at least 2");
  check(discretization.refinement >= 2, "discretization.refinement", "must be at least 2");
  check(discretization.exterior_band >= 0, "discretization.exterior_band", "must be non-negative");
  if (kernel.truncation)
    check(*kernel.truncation >= 1.0, "kernel.truncation", "must be at least one cell width, or null");
  try {
    kernel.quadrature.validate();
  } catch (const Error& e) {
    fail("kernel.quadrature", e.what());
  }
  check(trust_region.delta0 > 0.0 && std::isfinite(trust_region.delta0), "trust_region.delta0", "must be positive");
  check(trust_region.sigma > 0.0 && trust_region.sigma < 1.0, "trust_region.sigma", "must lie in (0, 1)");
  check(trust_region.min_radius >= 0.0, "trust_region.min_radius", "must be non-negative");
  check(trust_region.max_outer >= 1, "trust_region.max_outer", "must be at least 1");
  check(trust_region.pred_tol >= 0.0, "trust_region.pred_tol", "must be non-negative");
  check(trust_region.max_nodes >= 1.0, "trust_region.max_nodes", "must be at least 1");
  check(trust_region.max_seconds > 0.0, "trust_region.max_seconds", "must be positive");
  check(trust_region.w0 == "zero" || trust_region.w0 == "one" || trust_region.w0 == "random", "trust_region.w0",
        "expected zero, one or random");
  check(!output.directory.empty(), "output.directory", "must not be empty");
  for (double a : gamma_sweep.alphas) check(a > 0.0 && a < 1.0, "gamma_sweep.alphas", "entries must lie in (0, 1)");
  for (int o : gamma_sweep.orders) check(o >= 1 && o <= 64, "gamma_sweep.orders", "entries must lie in [1, 64]");
  check(gamma_sweep.m >= 2, "gamma_sweep.m", "must be at least 2");
  check(grad_check.samples >= 1, "grad_check.samples", "must be at least 1");
  check(!grad_check.epsilons.empty(), "grad_check.epsilons", "must not be empty");
  for (double e : grad_check.epsilons) check(e > 0.0, "grad_check.epsilons", "entries must be positive");
  check(variation_check.alpha > 0.0 && variation_check.alpha < 1.0, "variation_check.alpha", "must lie in (0, 1)");
  check(variation_check.m >= 8, "variation_check.m", "must be at least 8");
  check(variation_check.t.size() >= 2, "variation_check.t", "needs at least two values");
  for (std::size_t i = 0; i < variation_check.t.size(); ++i) {
    check(variation_check.t[i] > 0.0, "variation_check.t", "entries must be positive");
    if (i > 0) check(variation_check.t[i] < variation_check.t[i - 1], "variation_check.t", "must be decreasing");
  }
}

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::usage, std::string("config: ") + e.what());
  }
  RunConfig c;
  {
    Section top(root, "");
    if (const json* p = top.find("problem")) {
      Section s(*p, "problem");
      s.number("nu", c.problem.nu);
      s.number("eta", c.problem.eta);
      if (const json* a = s.find("alpha")) {
        if (a->is_string() && a->get<std::string>() == "limit") c.problem.alpha.reset();
        else if (a->is_number()) c.problem.alpha = a->get<double>();
        else fail("problem.alpha", "expected a number or \"limit\"");
      }
      if (const json* t = s.find("target")) {
        Section ts(*t, "problem.target");
        if (const json* center = ts.find("center")) c.problem.target_center = read_pair(*center, "problem.target.center");
        ts.number("radius", c.problem.target_radius);
        ts.done();
      }
      s.list("labels", c.problem.labels);
      s.done();
    }
    if (const json* p = top.find("discretization")) {
      Section s(*p, "discretization");
      s.integer("n", c.discretization.n);
      s.integer("refinement", c.discretization.refinement);
      s.integer("exterior_band", c.discretization.exterior_band);
      s.done();
    }
    if (const json* p = top.find("kernel")) {
      Section s(*p, "kernel");
      if (const json* t = s.find("truncation")) {
        if (t->is_null()) c.kernel.truncation.reset();
        else if (t->is_number()) c.kernel.truncation = t->get<double>();
        else fail("kernel.truncation", "expected a number of cell widths or null");
      }
      if (const json* q = s.find("quadrature")) read_quadrature(*q, "kernel.quadrature", c.kernel.quadrature);
      s.string("cache", c.kernel.cache);
      s.done();
    }
    if (const json* p = top.find("trust_region")) {
      Section s(*p, "trust_region");
      s.number("delta0", c.trust_region.delta0);
      s.number("sigma", c.trust_region.sigma);
      s.number("min_radius", c.trust_region.min_radius);
      s.integer("max_outer", c.trust_region.max_outer);
      s.number("pred_tol", c.trust_region.pred_tol);
      s.number("max_nodes", c.trust_region.max_nodes);
      s.number("max_seconds", c.trust_region.max_seconds);
      s.string("w0", c.trust_region.w0);
      s.done();
    }
    if (const json* p = top.find("output")) {
      Section s(*p, "output");
      s.string("directory", c.output.directory);
      s.boolean("timing", c.output.timing);
      s.done();
    }
    if (const json* p = top.find("gamma_sweep")) {
      Section s(*p, "gamma_sweep");
      read_rectangles(s, "set", c.gamma_sweep.set);
      s.list("alphas", c.gamma_sweep.alphas);
      s.list("orders", c.gamma_sweep.orders);
      s.integer("m", c.gamma_sweep.m);
      s.done();
    }
    if (const json* p = top.find("grad_check")) {
      Section s(*p, "grad_check");
      s.integer("samples", c.grad_check.samples);
      s.list("epsilons", c.grad_check.epsilons);
      s.number("threshold", c.grad_check.threshold);
      s.done();
    }
    if (const json* p = top.find("variation_check")) {
      Section s(*p, "variation_check");
      s.number("alpha", c.variation_check.alpha);
      s.integer("m", c.variation_check.m);
      s.number("disk_radius", c.variation_check.disk_radius);
      s.number("bump_radius", c.variation_check.bump_radius);
      s.list("t", c.variation_check.t);
      s.done();
    }
    top.done();
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string serialize_config(const RunConfig& c) {
  json rects = json::array();
  for (const Rectangle& r : c.gamma_sweep.set) rects.push_back({{"x0", r.x0}, {"y0", r.y0}, {"x1", r.x1}, {"y1", r.y1}});
  json root = {
      {"problem",
       {{"nu", c.problem.nu},
        {"eta", c.problem.eta},
        {"alpha", c.problem.alpha ? json(*c.problem.alpha) : json("limit")},
        {"target", {{"center", c.problem.target_center}, {"radius", c.problem.target_radius}}},
        {"labels", c.problem.labels}}},
      {"discretization",
       {{"n", c.discretization.n},
        {"refinement", c.discretization.refinement},
        {"exterior_band", c.discretization.exterior_band}}},
      {"kernel",
       {{"truncation", c.kernel.truncation ? json(*c.kernel.truncation) : json(nullptr)},
        {"quadrature", quadrature_json(c.kernel.quadrature)},
        {"cache", c.kernel.cache}}},
      {"trust_region",
       {{"delta0", c.trust_region.delta0},
        {"sigma", c.trust_region.sigma},
        {"min_radius", c.trust_region.min_radius},
        {"max_outer", c.trust_region.max_outer},
        {"pred_tol", c.trust_region.pred_tol},
        {"max_nodes", c.trust_region.max_nodes},
        {"max_seconds", c.trust_region.max_seconds},
        {"w0", c.trust_region.w0}}},
      {"output", {{"directory", c.output.directory}, {"timing", c.output.timing}}},
      {"gamma_sweep",
       {{"set", rects}, {"alphas", c.gamma_sweep.alphas}, {"orders", c.gamma_sweep.orders}, {"m", c.gamma_sweep.m}}},
      {"grad_check",
       {{"samples", c.grad_check.samples},
        {"epsilons", c.grad_check.epsilons},
        {"threshold", c.grad_check.threshold}}},
      {"variation_check",
       {{"alpha", c.variation_check.alpha},
        {"m", c.variation_check.m},
        {"disk_radius", c.variation_check.disk_radius},
        {"bump_radius", c.variation_check.bump_radius},
        {"t", c.variation_check.t}}},
  };
  return root.dump(2) + "\n";
}

}  // namespace fracopt
