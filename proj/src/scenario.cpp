#include "reach/scenario.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace reach {

namespace {

using nlohmann::json;

class Node
{
public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

  Node at(const char* key) const
  {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
    if (!j_.contains(key)) throw ConfigError(child(key), "missing required key");
    return Node(j_.at(key), child(key));
  }

  void only(std::initializer_list<const char*> allowed) const
  {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!ok.count(it.key())) throw ConfigError(child(it.key().c_str()), "unknown key");
    }
  }

  double number() const
  {
    if (!j_.is_number()) throw ConfigError(path_, "expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path_, "must be finite");
    return v;
  }

  double positive() const
  {
    const double v = number();
    if (!(v > 0.0)) throw ConfigError(path_, "must be > 0");
    return v;
  }

  double nonnegative() const
  {
    const double v = number();
    if (!(v >= 0.0)) throw ConfigError(path_, "must be >= 0");
    return v;
  }

  std::uint64_t unsigned_integer() const
  {
    if (!j_.is_number_integer() || (!j_.is_number_unsigned() && j_.get<std::int64_t>() < 0)) {
      throw ConfigError(path_, "expected a nonnegative integer");
    }
    return j_.get<std::uint64_t>();
  }

  std::string string() const
  {
    if (!j_.is_string()) throw ConfigError(path_, "expected a string");
    return j_.get<std::string>();
  }

  bool boolean() const
  {
    if (!j_.is_boolean()) throw ConfigError(path_, "expected true or false");
    return j_.get<bool>();
  }

  template <std::size_t N>
  std::array<double, N> numbers() const
  {
    if (!j_.is_array() || j_.size() != N) {
      throw ConfigError(path_, "expected an array of " + std::to_string(N) + " numbers");
    }
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = Node(j_[i], path_ + "[" + std::to_string(i) + "]").number();
    return out;
  }

private:
  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
};

struct TimeUnit
{
  double seconds = 1.0;  // 0 for nondimensional
  const char* suffix = "s";
};

TimeUnit time_unit(const Node& n)
{
  const std::string u = n.string();
  if (u == "s" || u == "seconds") return {1.0, "s"};
  if (u == "h" || u == "hours") return {3600.0, "h"};
  if (u == "d" || u == "days") return {86400.0, "d"};
  if (u == "nondim") return {0.0, "nd"};
  throw ConfigError(n.path(), "unknown time unit '" + u + "' (s, hours, days, nondim)");
}

double to_model_time(const Model& model, double value, TimeUnit unit, const std::string& path)
{
  if (unit.seconds == 0.0) {
    if (!is_cr3bp(model)) throw ConfigError(path, "nondim time requires the cr3bp model");
    return value;
  }
  const double s = value * unit.seconds;
  if (const auto* c = std::get_if<Cr3bpModel>(&model)) return to_nondim_time(*c, s);
  return s;
}

std::string shortest(double v)
{
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double timed_value(const Model& model, const Node& n)
{
  n.only({"value", "units"});
  return to_model_time(model, n.at("value").positive(), time_unit(n.at("units")), n.path());
}

Model parse_model(const Node& n)
{
  const std::string type = n.at("type").string();
  if (type == "two_body") {
    n.only({"type", "mu"});
    TwoBodyModel m;
    if (n.has("mu")) m.mu = n.at("mu").positive();
    return m;
  }
  if (type == "cr3bp") {
    n.only({"type", "mu", "l_star", "t_star", "m_star"});
    Cr3bpModel m;
    if (n.has("mu")) {
      m.mu = n.at("mu").positive();
      if (!(m.mu < 0.5)) throw ConfigError(n.path() + ".mu", "must be < 0.5");
    }
    if (n.has("l_star")) m.l_star = n.at("l_star").positive();
    if (n.has("t_star")) m.t_star = n.at("t_star").positive();
    if (n.has("m_star")) m.m_star = n.at("m_star").positive();
    return m;
  }
  throw ConfigError(n.path() + ".type", "unknown model '" + type + "' (two_body, cr3bp)");
}

Vec6 to_vec(const std::array<double, 6>& a)
{
  Vec6 v;
  for (int i = 0; i < 6; ++i) v[i] = a[i];
  return v;
}

StateVec parse_x0(const Model& model, const Node& n)
{
  n.only({"values", "units"});
  Vec6 v = to_vec(n.at("values").numbers<6>());
  const std::string units = n.has("units") ? n.at("units").string() : (is_cr3bp(model) ? "nondim" : "km");
  if (units == "nondim") {
    if (!is_cr3bp(model)) throw ConfigError(n.path() + ".units", "nondim states require the cr3bp model");
  } else if (units == "km") {
    if (const auto* c = std::get_if<Cr3bpModel>(&model)) {
      v.head<3>() /= c->l_star;
      v.tail<3>() /= c->l_star / c->t_star;
    }
  } else {
    throw ConfigError(n.path() + ".units", "unknown state unit '" + units + "' (km, nondim)");
  }
  return StateVec(v, frame_of(model));
}

std::vector<HorizonSpec> parse_horizon(const Model& model, const Node& n)
{
  n.only({"total", "units", "stages", "dt"});
  const TimeUnit unit = time_unit(n.at("units"));
  const bool has_stages = n.has("stages");
  const bool has_dt = n.has("dt");
  if (has_stages == has_dt) throw ConfigError(n.path(), "specify exactly one of 'stages' or 'dt'");

  std::vector<double> totals;
  const Node total = n.at("total");
  if (total.raw().is_array()) {
    if (total.raw().empty()) throw ConfigError(total.path(), "must not be empty");
    for (std::size_t i = 0; i < total.raw().size(); ++i) {
      totals.push_back(Node(total.raw()[i], total.path() + "[" + std::to_string(i) + "]").positive());
    }
  } else {
    totals.push_back(total.positive());
  }

  std::vector<HorizonSpec> out;
  for (double t : totals) {
    HorizonSpec h;
    h.total = to_model_time(model, t, unit, n.path() + ".total");
    h.label = shortest(t) + unit.suffix;
    if (has_stages) {
      const auto s = n.at("stages").unsigned_integer();
      if (s < 1) throw ConfigError(n.path() + ".stages", "must be >= 1");
      h.stages = s;
      h.dt = h.total / static_cast<double>(s);
    } else {
      const double dt = n.at("dt").positive();
      const double ratio = t / dt;
      const double rounded = std::round(ratio);
      if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio) {
        throw ConfigError(n.path() + ".dt", "must divide the total horizon into a whole number of stages");
      }
      h.stages = static_cast<std::size_t>(rounded);
      h.dt = to_model_time(model, dt, unit, n.path() + ".dt");
    }
    out.push_back(h);
  }
  return out;
}

BoundarySpec parse_boundary(const Node& n)
{
  n.only({"ellipsoid", "impulse"});
  BoundarySpec b;
  if (n.has("ellipsoid")) {
    const Node e = n.at("ellipsoid");
    e.only({"E_r", "E_v", "r_ref", "v_ref"});
    try {
      b.ellipsoid = EllipsoidSpec::make(EllipsoidSpec::from_upper(e.at("E_r").numbers<6>()),
                                        EllipsoidSpec::from_upper(e.at("E_v").numbers<6>()),
                                        e.at("r_ref").nonnegative(), e.at("v_ref").nonnegative());
    } catch (const InvalidArgument& ex) {
      throw ConfigError(e.path(), ex.what());
    }
  }
  if (n.has("impulse")) {
    const Node i = n.at("impulse");
    i.only({"dv_max"});
    b.impulse = ImpulseSpec::make(i.at("dv_max").nonnegative());
  }
  return b;
}

IntegratorConfig parse_integrator(const Node& n)
{
  n.only({"method", "rel_tol", "abs_tol", "substeps", "max_steps"});
  IntegratorConfig c;
  if (n.has("method")) {
    const std::string m = n.at("method").string();
    if (m == "dp54") {
      c.method = IntegratorMethod::Dp54Adaptive;
    } else if (m == "rk4") {
      c.method = IntegratorMethod::Rk4Fixed;
    } else {
      throw ConfigError(n.path() + ".method", "unknown method '" + m + "' (dp54, rk4)");
    }
  }
  if (n.has("rel_tol")) c.rel_tol = n.at("rel_tol").positive();
  if (n.has("abs_tol")) c.abs_tol = n.at("abs_tol").positive();
  if (n.has("substeps")) {
    const auto s = n.at("substeps").unsigned_integer();
    if (s < 1) throw ConfigError(n.path() + ".substeps", "must be >= 1");
    c.substeps = static_cast<int>(s);
  }
  if (n.has("max_steps")) {
    c.max_steps = n.at("max_steps").unsigned_integer();
    if (c.max_steps < 1) throw ConfigError(n.path() + ".max_steps", "must be >= 1");
  }
  return c;
}

OrbitConfig parse_orbit(const Model& model, const Node& n)
{
  if (!is_cr3bp(model)) throw ConfigError(n.path(), "orbit block requires the cr3bp model");
  n.only({"x0", "period", "n_fixed_points", "epsilon", "horizon", "intervals"});
  OrbitConfig o;
  o.x0 = parse_x0(model, n.at("x0")).x;
  o.period = timed_value(model, n.at("period"));
  if (n.has("n_fixed_points")) {
    o.n_fixed_points = n.at("n_fixed_points").unsigned_integer();
    if (o.n_fixed_points < 1) throw ConfigError(n.path() + ".n_fixed_points", "must be >= 1");
  }
  if (n.has("epsilon")) o.epsilon = n.at("epsilon").nonnegative();
  o.horizon = n.has("horizon") ? timed_value(model, n.at("horizon")) : o.period;
  if (n.has("intervals")) {
    o.intervals = n.at("intervals").unsigned_integer();
    if (o.intervals < 1) throw ConfigError(n.path() + ".intervals", "must be >= 1");
  }
  return o;
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const char* model_name(const Model& model) { return is_cr3bp(model) ? "cr3bp" : "two_body"; }

ScenarioConfig parse_scenario(const std::string& text, const ConfigOverrides& overrides)
{
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("malformed JSON: ") + e.what());
  }
  if (overrides.seed) doc["sampling"]["seed"] = *overrides.seed;
  if (overrides.samples) doc["sampling"]["samples"] = *overrides.samples;
  if (overrides.epsilon && doc.contains("orbit")) doc["orbit"]["epsilon"] = *overrides.epsilon;

  const Node root(doc, "");
  root.only({"name", "model", "x0", "spacecraft", "horizon", "sampling", "boundary", "integrator",
             "output", "threads", "failure_threshold", "orbit"});

  ScenarioConfig cfg;
  cfg.name = root.has("name") ? root.at("name").string() : "scenario";
  cfg.model = parse_model(root.at("model"));
  cfg.x0 = parse_x0(cfg.model, root.at("x0"));

  const Node sc = root.at("spacecraft");
  sc.only({"t_max", "isp", "m0", "g0"});
  try {
    cfg.spacecraft = SpacecraftParams::make(sc.at("t_max").positive(), sc.at("isp").positive(),
                                            sc.at("m0").positive(),
                                            sc.has("g0") ? sc.at("g0").positive() : kG0);
  } catch (const InvalidArgument& e) {
    throw ConfigError(sc.path(), e.what());
  }

  cfg.horizons = parse_horizon(cfg.model, root.at("horizon"));

  if (root.has("sampling")) {
    const Node s = root.at("sampling");
    s.only({"samples", "seed"});
    if (s.has("samples")) {
      cfg.samples = s.at("samples").unsigned_integer();
      if (cfg.samples < 1) throw ConfigError("sampling.samples", "must be >= 1");
    }
    if (s.has("seed")) cfg.seed = s.at("seed").unsigned_integer();
  }
  if (root.has("boundary")) cfg.boundary = parse_boundary(root.at("boundary"));
  if (root.has("integrator")) cfg.integrator = parse_integrator(root.at("integrator"));
  if (root.has("output")) {
    const Node o = root.at("output");
    o.only({"directory", "history"});
    if (o.has("directory")) cfg.output_dir = o.at("directory").string();
    if (o.has("history")) cfg.history = o.at("history").boolean();
  }
  if (root.has("threads")) cfg.threads = static_cast<unsigned>(root.at("threads").unsigned_integer());
  if (root.has("failure_threshold")) {
    cfg.failure_threshold = root.at("failure_threshold").nonnegative();
    if (cfg.failure_threshold > 1.0) throw ConfigError("failure_threshold", "must be <= 1");
  }
  if (root.has("orbit")) cfg.orbit = parse_orbit(cfg.model, root.at("orbit"));

  if (overrides.threads) cfg.threads = *overrides.threads;
  if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;

  // Thread count and output location do not affect results, so they stay out of the hash.
  json canonical = doc;
  canonical.erase("threads");
  canonical.erase("output");
  cfg.hash = fnv1a(canonical.dump());
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path, const ConfigOverrides& overrides)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), overrides);
}

}  // namespace reach
