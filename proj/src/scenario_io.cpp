#include "sirs/scenario_io.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "sirs/errors.hpp"

namespace sirs {

namespace {

class Reader {
 public:
  explicit Reader(std::string_view source) : source_(source) {}

  [[noreturn]] void fail(const YAML::Node& node, std::string_view key,
                         std::string_view reason) const {
    const int line = node.Mark().line >= 0 ? node.Mark().line + 1 : 0;
    throw ValidationError(fmt::format("{}:{}: key '{}': {}", source_, line, key, reason));
  }

  void expect_map(const YAML::Node& node, std::string_view key,
                  std::initializer_list<std::string_view> allowed) const {
    if (!node.IsMap()) fail(node, key, "expected a table");
    const std::set<std::string_view> ok(allowed);
    for (const auto& kv : node) {
      const auto name = kv.first.as<std::string>();
      if (!ok.contains(name)) fail(kv.first, key == "<root>" ? name : fmt::format("{}.{}", key, name), "unknown key");
    }
  }

  template <typename T>
  T scalar(const YAML::Node& node, std::string_view key) const {
    if (!node.IsScalar()) fail(node, key, "expected a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, key, fmt::format("cannot convert '{}'", node.Scalar()));
    }
  }

  template <typename T>
  T required(const YAML::Node& parent, const std::string& name, std::string_view key) const {
    const YAML::Node node = parent[name];
    if (!node) fail(parent, key, "missing required key");
    return scalar<T>(node, key);
  }

  template <typename T>
  std::vector<T> list(const YAML::Node& node, std::string_view key) const {
    if (!node.IsSequence()) fail(node, key, "expected a list");
    std::vector<T> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
      out.push_back(scalar<T>(node[i], fmt::format("{}[{}]", key, i)));
    }
    return out;
  }

  std::optional<double> auto_or_number(const YAML::Node& node, std::string_view key) const {
    if (!node) return std::nullopt;
    if (node.IsScalar() && node.Scalar() == "auto") return std::nullopt;
    return scalar<double>(node, key);
  }

  CoefficientSpec coefficient(const YAML::Node& root, const std::string& name) const {
    const YAML::Node node = root[name];
    if (!node) fail(root, name, "missing coefficient table");
    if (node.IsScalar()) return Constant{scalar<double>(node, name)};
    if (!node.IsMap()) fail(node, name, "expected a table");
    const auto kind = required<std::string>(node, "kind", name + ".kind");
    if (kind == "constant") {
      expect_map(node, name, {"kind", "value"});
      return Constant{required<double>(node, "value", name + ".value")};
    }
    if (kind == "cosine") {
      expect_map(node, name, {"kind", "mean", "terms"});
      CosineSeries s;
      s.mean = required<double>(node, "mean", name + ".mean");
      if (const YAML::Node terms = node["terms"]) {
        if (!terms.IsSequence()) fail(terms, name + ".terms", "expected a list");
        for (std::size_t i = 0; i < terms.size(); ++i) {
          const auto key = fmt::format("{}.terms[{}]", name, i);
          expect_map(terms[i], key, {"amplitude", "frequency", "phase"});
          CosineTerm t;
          t.amplitude = required<double>(terms[i], "amplitude", key + ".amplitude");
          if (!terms[i]["frequency"]) fail(terms[i], key + ".frequency", "missing required key");
          t.frequency = list<int>(terms[i]["frequency"], key + ".frequency");
          if (terms[i]["phase"]) t.phase = scalar<double>(terms[i]["phase"], key + ".phase");
          s.terms.push_back(std::move(t));
        }
      }
      return s;
    }
    if (kind == "piecewise") {
      expect_map(node, name, {"kind", "breakpoints", "values", "axis"});
      PiecewiseConstant p;
      if (!node["breakpoints"]) fail(node, name + ".breakpoints", "missing required key");
      if (!node["values"]) fail(node, name + ".values", "missing required key");
      p.breakpoints = list<double>(node["breakpoints"], name + ".breakpoints");
      p.values = list<double>(node["values"], name + ".values");
      if (node["axis"]) p.axis = scalar<int>(node["axis"], name + ".axis");
      return p;
    }
    fail(node["kind"], name + ".kind",
         fmt::format("unknown kind '{}' (constant, cosine, piecewise)", kind));
  }

 private:
  std::string source_;
};

std::string num(double v) { return fmt::format("{}", v); }

std::string coefficient_text(const CoefficientSpec& spec) {
  if (const auto* c = std::get_if<Constant>(&spec)) {
    return fmt::format("{{kind: constant, value: {}}}", num(c->value));
  }
  if (const auto* s = std::get_if<CosineSeries>(&spec)) {
    std::vector<std::string> terms;
    for (const auto& t : s->terms) {
      terms.push_back(fmt::format("{{amplitude: {}, frequency: [{}], phase: {}}}",
                                  num(t.amplitude), fmt::join(t.frequency, ", "), num(t.phase)));
    }
    return fmt::format("{{kind: cosine, mean: {}, terms: [{}]}}", num(s->mean),
                       fmt::join(terms, ", "));
  }
  const auto& p = std::get<PiecewiseConstant>(spec);
  std::vector<std::string> b, v;
  for (double x : p.breakpoints) b.push_back(num(x));
  for (double x : p.values) v.push_back(num(x));
  return fmt::format("{{kind: piecewise, breakpoints: [{}], values: [{}], axis: {}}}",
                     fmt::join(b, ", "), fmt::join(v, ", "), p.axis);
}

}  // namespace

Scenario scenario_from_yaml(const YAML::Node& root, std::string_view source) {
  const Reader r(source);
  r.expect_map(root, "<root>",
               {"name", "dimension", "d", "alpha", "mu", "lambda", "S0", "I0", "cell", "domain",
                "time", "front", "tolerances"});
  Scenario s;
  if (root["name"]) s.name = r.scalar<std::string>(root["name"], "name");
  if (root["dimension"]) s.dimension = r.scalar<int>(root["dimension"], "dimension");
  if (s.dimension != 1 && s.dimension != 2) r.fail(root["dimension"], "dimension", "must be 1 or 2");
  s.d = r.required<double>(root, "d", "d");
  s.alpha = r.coefficient(root, "alpha");
  s.mu = r.coefficient(root, "mu");
  s.lambda = r.coefficient(root, "lambda");
  s.S0 = r.coefficient(root, "S0");

  const YAML::Node i0 = root["I0"];
  if (!i0) r.fail(root, "I0", "missing initial bump table");
  r.expect_map(i0, "I0", {"center", "radius", "height"});
  s.I0.center = Vec::Zero(s.dimension);
  if (i0["center"]) {
    const auto c = r.list<double>(i0["center"], "I0.center");
    if (static_cast<int>(c.size()) != s.dimension) {
      r.fail(i0["center"], "I0.center", "needs one coordinate per dimension");
    }
    for (int a = 0; a < s.dimension; ++a) s.I0.center(a) = c[a];
  }
  s.I0.radius = r.required<double>(i0, "radius", "I0.radius");
  s.I0.height = r.required<double>(i0, "height", "I0.height");

  if (const YAML::Node cell = root["cell"]) {
    r.expect_map(cell, "cell", {"resolution"});
    s.cell_resolution = r.required<int>(cell, "resolution", "cell.resolution");
  }
  if (const YAML::Node dom = root["domain"]) {
    r.expect_map(dom, "domain", {"half_width", "step", "boundary"});
    if (dom["half_width"]) s.half_width = r.scalar<double>(dom["half_width"], "domain.half_width");
    if (dom["step"]) s.step = r.scalar<double>(dom["step"], "domain.step");
    if (dom["boundary"]) {
      const auto b = r.scalar<std::string>(dom["boundary"], "domain.boundary");
      if (b == "periodic") {
        s.boundary = Boundary::periodic;
      } else if (b == "neumann") {
        s.boundary = Boundary::neumann;
      } else {
        r.fail(dom["boundary"], "domain.boundary", "expected 'periodic' or 'neumann'");
      }
    }
  }
  if (const YAML::Node t = root["time"]) {
    r.expect_map(t, "time", {"dt", "final", "snapshot_interval", "trace_interval"});
    s.time.dt = r.auto_or_number(t["dt"], "time.dt");
    if (t["final"]) s.time.final_time = r.scalar<double>(t["final"], "time.final");
    if (t["snapshot_interval"]) {
      s.time.snapshot_interval = r.scalar<double>(t["snapshot_interval"], "time.snapshot_interval");
    }
    if (t["trace_interval"]) {
      s.time.trace_interval = r.scalar<double>(t["trace_interval"], "time.trace_interval");
    }
  }
  if (const YAML::Node f = root["front"]) {
    r.expect_map(f, "front", {"threshold"});
    s.front_threshold = r.auto_or_number(f["threshold"], "front.threshold");
  }
  if (const YAML::Node t = root["tolerances"]) {
    r.expect_map(t, "tolerances",
                 {"eigen", "eigen_residual", "eigen_max_iterations", "speed", "stationary",
                  "stationary_max_time", "fixed_point", "fixed_point_max_iterations",
                  "barrier_slack", "extinction"});
    auto get = [&](const char* key, auto& field) {
      if (t[key]) {
        field = r.scalar<std::remove_reference_t<decltype(field)>>(
            t[key], fmt::format("tolerances.{}", key));
      }
    };
    get("eigen", s.tol.eigen);
    get("eigen_residual", s.tol.eigen_residual);
    get("eigen_max_iterations", s.tol.eigen_max_iterations);
    get("speed", s.tol.speed);
    get("stationary", s.tol.stationary);
    get("stationary_max_time", s.tol.stationary_max_time);
    get("fixed_point", s.tol.fixed_point);
    get("fixed_point_max_iterations", s.tol.fixed_point_max_iterations);
    get("barrier_slack", s.tol.barrier_slack);
    get("extinction", s.tol.extinction);
  }
  validate(s);
  return s;
}

Scenario parse_scenario(std::string_view text, std::string_view source) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ValidationError(
        fmt::format("{}:{}: key '<syntax>': {}", source, e.mark.line + 1, e.msg));
  }
  return scenario_from_yaml(root, source);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open scenario file '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path.string());
}

std::string serialize_scenario(const Scenario& s) {
  std::string out;
  auto line = [&](std::string_view key, const std::string& value) {
    out += fmt::format("{}: {}\n", key, value);
  };
  line("name", fmt::format("\"{}\"", s.name));
  line("dimension", fmt::format("{}", s.dimension));
  line("d", num(s.d));
  line("alpha", coefficient_text(s.alpha));
  line("mu", coefficient_text(s.mu));
  line("lambda", coefficient_text(s.lambda));
  line("S0", coefficient_text(s.S0));
  std::vector<std::string> centre;
  for (Index a = 0; a < s.I0.center.size(); ++a) centre.push_back(num(s.I0.center(a)));
  line("I0", fmt::format("{{center: [{}], radius: {}, height: {}}}", fmt::join(centre, ", "),
                         num(s.I0.radius), num(s.I0.height)));
  line("cell", fmt::format("{{resolution: {}}}", s.cell_resolution));
  line("domain", fmt::format("{{half_width: {}, step: {}, boundary: {}}}", num(s.half_width),
                             num(s.step),
                             s.boundary == Boundary::periodic ? "periodic" : "neumann"));
  line("time", fmt::format("{{dt: {}, final: {}, snapshot_interval: {}, trace_interval: {}}}",
                           s.time.dt ? num(*s.time.dt) : "auto", num(s.time.final_time),
                           num(s.time.snapshot_interval), num(s.time.trace_interval)));
  line("front",
       fmt::format("{{threshold: {}}}", s.front_threshold ? num(*s.front_threshold) : "auto"));
  const auto& t = s.tol;
  line("tolerances",
       fmt::format("{{eigen: {}, eigen_residual: {}, eigen_max_iterations: {}, speed: {}, "
                   "stationary: {}, stationary_max_time: {}, fixed_point: {}, "
                   "fixed_point_max_iterations: {}, barrier_slack: {}, extinction: {}}}",
                   num(t.eigen), num(t.eigen_residual), t.eigen_max_iterations, num(t.speed),
                   num(t.stationary), num(t.stationary_max_time), num(t.fixed_point),
                   t.fixed_point_max_iterations, num(t.barrier_slack), num(t.extinction)));
  return out;
}

Scenario with_parameter(const Scenario& scenario, std::string_view path, double value) {
  YAML::Node root = YAML::Load(serialize_scenario(scenario));
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in{std::string(path)};
  while (std::getline(in, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ValidationError("empty parameter path");

  // YAML::Node assignment rebinds, so walk with a stack of nodes.
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const YAML::Node& cur = chain.back();
    YAML::Node next;
    if (cur.IsSequence()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(parts[i]);
      } catch (const std::exception&) {
        throw ValidationError(fmt::format("parameter path '{}': '{}' is not an index", path, parts[i]));
      }
      if (idx >= cur.size()) {
        throw ValidationError(fmt::format("parameter path '{}': index {} out of range", path, idx));
      }
      next = cur[idx];
    } else if (cur.IsMap() && cur[parts[i]]) {
      next = cur[parts[i]];
    } else {
      throw ValidationError(fmt::format("parameter path '{}': no entry '{}'", path, parts[i]));
    }
    chain.push_back(next);
  }
  if (!chain.back().IsScalar()) {
    throw ValidationError(fmt::format("parameter path '{}' does not name a number", path));
  }
  chain.back() = num(value);
  return scenario_from_yaml(root, fmt::format("<{}={}>", path, value));
}

std::string scenario_hash(const Scenario& scenario) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_scenario(scenario)) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", hash);
}

}  // namespace sirs
