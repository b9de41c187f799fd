#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <cctype>
#include <type_traits>

namespace fraflow::cli {

using nlohmann::json;

namespace {

// Reads the keys of one JSON object and complains about the ones nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  double number(const std::string& key, double def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    return v.get<double>();
  }

  template <class Int>
  Int integer(const std::string& key, Int def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError(where(key) + ": expected an integer");
    if (v.is_number_integer() && v.get<long long>() < 0 && std::is_unsigned_v<Int>)
      throw ConfigError(where(key) + ": must be nonnegative");
    return v.get<Int>();
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& def, std::initializer_list<const char*> allowed = {}) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    std::string s = v.get<std::string>();
    if (allowed.size() > 0) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || s == a;
      if (!ok) throw ConfigError(where(key) + ": unsupported value '" + s + "'");
    }
    return s;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(where(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (const json& x : v) {
      if (!x.is_number()) throw ConfigError(where(key) + ": expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  template <class Int>
  std::vector<Int> integers(const std::string& key, std::vector<Int> def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(where(key) + ": expected an array of integers");
    std::vector<Int> out;
    for (const json& x : v) {
      if (!x.is_number_unsigned() || x.get<std::uint64_t>() == 0)
        throw ConfigError(where(key) + ": expected an array of positive integers");
      out.push_back(x.get<Int>());
    }
    return out;
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : empty, where(key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError(where(key) + ": unknown key");
  }

 private:
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

FunctionalSpec read_functional(Section s, const std::string& def_kind) {
  FunctionalSpec f;
  f.kind = s.string("kind", def_kind, {"quadratic", "power", "l1", "box", "none"});
  f.center = s.numbers("center", {});
  f.q = s.number("q", 2.0);
  f.scale = s.number("scale", 1.0);
  f.lower = s.number("lower", -1.0);
  f.upper = s.number("upper", 1.0);
  s.finish();
  if (f.kind == "power" && !(f.q > 1.0)) throw ConfigError("functional: power exponent q must exceed 1");
  if (f.kind == "box" && !(f.lower <= f.upper)) throw ConfigError("functional: box needs lower <= upper");
  return f;
}

Profile read_profile(Section s, Profile def) {
  Profile p = def;
  p.kind = profile_from_string(s.string("profile", to_string(def.kind), {"zero", "sine", "plateau"}));
  p.amplitude = s.number("amplitude", def.amplitude);
  p.ramp = s.boolean("ramp", def.ramp);
  s.finish();
  return p;
}

void positive(double x, const std::string& what) {
  if (!(x > 0.0)) throw ConfigError(what + " must be positive");
}

}  // namespace

RunConfig parse_config(const json& doc) {
  RunConfig c;
  c.source = doc;
  Section root(doc, "");
  c.mode = root.string("mode", "", {"solve", "sweep", "certify", "kernels"});
  c.out = root.string("out", c.out);
  c.seed = root.integer<std::uint64_t>("seed", 0);

  {
    Section k = root.child("kernel");
    c.kernel.type = k.string("type", "riemann_liouville", {"riemann_liouville", "constant", "sampled"});
    c.kernel.alpha = k.number("alpha", 0.5);
    c.kernel.value = k.number("value", 1.0);
    c.kernel.file = k.string("file", "");
    k.finish();
    if (c.kernel.type == "riemann_liouville" && !(c.kernel.alpha > 0.0 && c.kernel.alpha < 1.0))
      throw ConfigError("kernel.alpha must lie in (0, 1)");
    if (c.kernel.type == "constant") positive(c.kernel.value, "kernel.value");
    if (c.kernel.type == "sampled" && c.kernel.file.empty()) throw ConfigError("kernel.file is required for sampled kernels");
  }
  {
    Section t = root.child("time");
    c.horizon = t.number("horizon", 1.0);
    c.steps = t.integer<std::size_t>("steps", 512);
    t.finish();
    positive(c.horizon, "time.horizon");
    if (c.steps < 1) throw ConfigError("time.steps must be at least 1");
  }
  {
    Section p = root.child("problem");
    c.problem_type = p.string("type", "abstract", {"abstract", "plaplace"});
    AbstractSpec& a = c.abstract_problem;
    a.u0 = p.numbers("u0", a.u0);
    a.forcing = p.numbers("forcing_vector", {});
    if (p.has("phi1")) a.phi1 = read_functional(p.child("phi1"), "quadratic");
    if (p.has("phi2")) a.phi2 = read_functional(p.child("phi2"), "none");
    PdeExperiment& e = c.pde;
    e.p = p.number("p", e.p);
    e.q = p.number("q", e.q);
    const int dim = p.integer<int>("dim", 1);
    const int points = p.integer<int>("points", 32);
    e.space_dimension = p.integer<int>("space_dimension", 0);
    if (p.has("initial")) e.initial = read_profile(p.child("initial"), e.initial);
    if (p.has("forcing")) e.forcing = read_profile(p.child("forcing"), e.forcing);
    p.finish();
    if (a.u0.empty()) throw ConfigError("problem.u0 must not be empty");
    if (!a.forcing.empty() && a.forcing.size() != a.u0.size())
      throw ConfigError("problem.forcing_vector must match the size of u0");
    if (c.problem_type == "plaplace") {
      if (!(e.p > 1.0) || !(e.q > 1.0)) throw ConfigError("problem.p and problem.q must exceed 1");
      if (dim != 1 && dim != 2) throw ConfigError("problem.dim must be 1 or 2");
      if (points < 1) throw ConfigError("problem.points must be at least 1");
      if (c.kernel.type != "riemann_liouville") throw ConfigError("plaplace problems use a riemann_liouville kernel");
      e.grid = Grid(dim, points);
    }
    e.alpha = c.kernel.alpha;
    e.horizon = c.horizon;
    e.steps = c.steps;
  }
  {
    Section s = root.child("solver");
    SolverConfig& sc = c.solver;
    sc.yosida_lambda = s.number("yosida_lambda", sc.yosida_lambda);
    sc.viscosity = s.number("viscosity", sc.viscosity);
    const std::string coupling = s.string("coupling", "semi_implicit", {"semi_implicit", "coupled"});
    sc.coupling = coupling == "coupled" ? Coupling::coupled : Coupling::semi_implicit;
    sc.inner.tolerance = s.number("inner_tolerance", sc.inner.tolerance);
    sc.inner.max_iterations = s.integer<int>("inner_max_iterations", sc.inner.max_iterations);
    sc.max_coupling_iterations = s.integer<int>("max_coupling_iterations", sc.max_coupling_iterations);
    sc.coupling_tolerance = s.number("coupling_tolerance", sc.coupling_tolerance);
    sc.blowup_norm = s.number("blowup_norm", sc.blowup_norm);
    sc.blowup_energy = s.number("blowup_energy", sc.blowup_energy);
    s.finish();
    positive(sc.yosida_lambda, "solver.yosida_lambda");
    positive(sc.inner.tolerance, "solver.inner_tolerance");
    positive(sc.blowup_norm, "solver.blowup_norm");
    positive(sc.blowup_energy, "solver.blowup_energy");
    if (!(sc.viscosity >= 0.0)) throw ConfigError("solver.viscosity must be nonnegative");
    if (sc.inner.max_iterations < 1) throw ConfigError("solver.inner_max_iterations must be at least 1");
  }
  {
    Section s = root.child("sweep");
    SweepSpec& w = c.sweep;
    w.p = s.numbers("p", {});
    w.q = s.numbers("q", {});
    w.alpha = s.numbers("alpha", {});
    w.amplitude = s.numbers("amplitude", {});
    w.points = s.integers<int>("points", {});
    w.steps = s.integers<std::size_t>("steps", {});
    if (s.has("bisect")) {
      Section b = s.child("bisect");
      w.bisect.enabled = true;
      w.bisect.a_lo = b.number("a_lo", w.bisect.a_lo);
      w.bisect.a_hi = b.number("a_hi", w.bisect.a_hi);
      w.bisect.ratio = b.number("ratio", w.bisect.ratio);
      w.bisect.budget = b.integer<int>("budget", w.bisect.budget);
      w.bisect.alpha = b.numbers("alpha", {});
      b.finish();
      if (!(w.bisect.ratio > 1.0)) throw ConfigError("sweep.bisect.ratio must exceed 1");
    }
    s.finish();
    for (double a : w.alpha)
      if (!(a > 0.0 && a < 1.0)) throw ConfigError("sweep.alpha entries must lie in (0, 1)");
    for (double a : w.bisect.alpha)
      if (!(a > 0.0 && a < 1.0)) throw ConfigError("sweep.bisect.alpha entries must lie in (0, 1)");
  }
  {
    Section s = root.child("certify");
    c.certify.dump = s.string("dump", "");
    c.certify.gronwall = s.boolean("gronwall", false);
    c.certify.per_lemma = s.integer<int>("per_lemma", 100);
    s.finish();
  }
  {
    Section s = root.child("kernels");
    c.kernels.alpha = s.numbers("alpha", c.kernels.alpha);
    c.kernels.steps = s.integers<std::size_t>("steps", c.kernels.steps);
    c.kernels.tolerance = s.number("tolerance", c.kernels.tolerance);
    c.kernels.regularized = s.integers<int>("regularized", c.kernels.regularized);
    s.finish();
    for (double a : c.kernels.alpha)
      if (!(a > 0.0 && a < 1.0)) throw ConfigError("kernels.alpha entries must lie in (0, 1)");
  }
  root.finish();
  return c;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

std::string preset_directory() {
  if (const char* env = std::getenv("FRAFLOW_PRESET_DIR"); env && *env) return env;
  return FRAFLOW_DEFAULT_PRESET_DIR;
}

std::string preset_path(const std::string& name) {
  for (char ch : name)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_'))
      throw ConfigError("invalid preset name '" + name + "'");
  return preset_directory() + "/" + name + ".json";
}

namespace {

Kernel read_sampled(const std::string& file, int column) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open kernel file '" + file + "'");
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> t, v;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("kernel file '" + file + "': bad number '" + cell + "'");
      }
    }
    if (row.size() != 3) throw ConfigError("kernel file '" + file + "': expected columns t,k,ell");
    t.push_back(row[0]);
    v.push_back(row[static_cast<std::size_t>(column)]);
  }
  try {
    return sampled_kernel(t, v);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("kernel file '" + file + "': " + e.what());
  }
}

std::shared_ptr<const Functional> make_functional(const FunctionalSpec& f, Eigen::Index dim) {
  if (f.kind == "none") return nullptr;
  if (f.kind == "quadratic") {
    Vector center;
    if (!f.center.empty()) {
      if (static_cast<Eigen::Index>(f.center.size()) != dim) throw ConfigError("functional center must match u0");
      center = Eigen::Map<const Vector>(f.center.data(), dim);
    }
    return std::make_shared<QuadraticEnergy>(Metric{}, center);
  }
  if (f.kind == "power") return std::make_shared<PowerPotential>(Metric{}, f.q);
  if (f.kind == "l1") return std::make_shared<L1Norm>(Metric{}, f.scale);
  return std::make_shared<BoxIndicator>(Metric{}, f.lower, f.upper);
}

}  // namespace

SoninePair build_pair(const KernelSpec& k) {
  if (k.type == "riemann_liouville") return rl_pair(k.alpha);
  if (k.type == "constant") return constant_pair(k.value);
  return SoninePair{read_sampled(k.file, 1), read_sampled(k.file, 2), std::nullopt};
}

FlowProblem build_abstract_problem(const RunConfig& cfg) {
  const AbstractSpec& a = cfg.abstract_problem;
  const auto dim = static_cast<Eigen::Index>(a.u0.size());
  FlowProblem p;
  p.phi1 = make_functional(a.phi1, dim);
  if (!p.phi1) throw ConfigError("problem.phi1 cannot be 'none'");
  p.phi2 = make_functional(a.phi2, dim);
  p.pair = build_pair(cfg.kernel);
  p.grid = TimeGrid(cfg.horizon, cfg.steps);
  p.u0 = Eigen::Map<const Vector>(a.u0.data(), dim);
  if (!a.forcing.empty()) {
    const Vector f = Eigen::Map<const Vector>(a.forcing.data(), dim);
    p.forcing = f.replicate(1, static_cast<Eigen::Index>(cfg.steps + 1));
  }
  return p;
}

}  // namespace fraflow::cli
