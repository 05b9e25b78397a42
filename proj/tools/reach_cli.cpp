// Command-line front end: reach, manifolds, contain, reference.
//
// Exit codes: 0 success, 1 configuration/schema/input error, 2 sample
// failure threshold exceeded.

#include "reach/analysis.hpp"
#include "reach/csv_io.hpp"
#include "reach/kernels.hpp"
#include "reach/scenario.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace reach;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitBatch = 2;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }
json vec_json(const Vec6& v)
{
  json a = json::array();
  for (int i = 0; i < 6; ++i) a.push_back(v[i]);
  return a;
}

std::string hex64(std::uint64_t h)
{
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_json(const fs::path& path, const json& j)
{
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

const char* time_units(const Model& m) { return is_cr3bp(m) ? "nondim" : "s"; }
const char* state_units(const Model& m) { return is_cr3bp(m) ? "nondim" : "km, km/s"; }
const char* mass_units(const Model& m) { return is_cr3bp(m) ? "m0" : "kg"; }

json hull_json(const TerminalCloud& cloud)
{
  const int dim = affine_dimension(cloud.points);
  if (cloud.points.size() < 4 || dim < 3) {
    return json{{"degenerate", true}, {"affine_dimension", dim}, {"points", cloud.points.size()}};
  }
  try {
    const HullSummary h = convex_hull(cloud);
    return json{{"degenerate", false},
                {"points", cloud.points.size()},
                {"vertices", h.vertices.size()},
                {"facets", h.facets.size()},
                {"volume", h.volume},
                {"centroid", vec_json(h.centroid)},
                {"bounding_radius", h.bounding_radius}};
  } catch (const DegenerateCloud& e) {
    return json{{"degenerate", true}, {"affine_dimension", dim}, {"error", e.what()}};
  }
}

fs::path horizon_dir(const ScenarioConfig& cfg, const HorizonSpec& h)
{
  return cfg.horizons.size() > 1 ? cfg.output_dir / h.label : cfg.output_dir;
}

json horizon_json(const ScenarioConfig& cfg, const HorizonSpec& h)
{
  return json{{"label", h.label}, {"total", h.total}, {"stages", h.stages}, {"dt", h.dt},
              {"units", time_units(cfg.model)}};
}

json base_report(const ScenarioConfig& cfg, const char* command)
{
  return json{{"name", cfg.name},
              {"command", command},
              {"model", model_name(cfg.model)},
              {"frame", to_string(frame_of(cfg.model))},
              {"config_hash", hex64(cfg.hash)},
              {"units", {{"time", time_units(cfg.model)}, {"state", state_units(cfg.model)},
                         {"mass", mass_units(cfg.model)}}}};
}

int cmd_reach(const ScenarioConfig& cfg)
{
  const Dynamics dyn = cfg.dynamics();
  const unsigned threads = resolve_threads(cfg.threads);
  for (const auto& h : cfg.horizons) {
    const auto start = Clock::now();
    const fs::path dir = horizon_dir(cfg, h);
    fs::create_directories(dir);

    ReachOptions opt;
    opt.samples = cfg.samples;
    opt.seed = cfg.seed;
    opt.boundary = cfg.boundary;
    opt.integrator = cfg.integrator;
    opt.threads = threads;
    opt.keep_history = cfg.history;
    opt.failure_threshold = cfg.failure_threshold;
    const ReachableSet set = compute_reachable_set(dyn, cfg.x0, h.stages, h.dt, opt);

    const auto t_out = Clock::now();
    write_trajectories(dir / "trajectories.csv", set);
    write_terminals(dir / "terminals.csv", set);
    const double output_s = since(t_out);

    const auto t_analysis = Clock::now();
    json hulls = json::object();
    if (set.stats.succeeded > 0) {
      hulls["position"] = hull_json(terminal_cloud(set, CloudSpace::Position));
      hulls["velocity"] = hull_json(terminal_cloud(set, CloudSpace::Velocity));
    }
    const double analysis_s = since(t_analysis);

    json report = base_report(cfg, "reach");
    report["seed"] = cfg.seed;
    report["threads"] = threads;
    report["isa"] = kernels::to_string(kernels::active_isa());
    report["horizon"] = horizon_json(cfg, h);
    const auto& st = set.stats;
    report["samples"] = {{"attempted", st.attempted}, {"succeeded", st.succeeded},
                         {"discarded", st.discarded}, {"clamped", st.clamped},
                         {"binding", st.binding},     {"non_binding", st.non_binding}};
    json discarded = json::array();
    for (const auto& s : set.samples) {
      if (!s.ok()) discarded.push_back({{"sample_id", s.id}, {"reason", s.failure}});
    }
    report["discarded"] = discarded;
    report["reference_terminal"] = vec_json(set.reference->x_terminal.x);
    const double t_end = set.reference->t0 + set.reference->horizon();
    report["terminal_mass"] = set.reference->mass.mass_at(t_end, set.reference->t0);
    report["hulls"] = hulls;
    report["timing"] = {{"total", since(start)},
                        {"reach", set.wall_time},
                        {"reference", st.reference_seconds},
                        {"sampling", st.sampling_seconds},
                        {"reconstruction", st.reconstruction_seconds},
                        {"output", output_s},
                        {"analysis", analysis_s}};
    write_json(dir / "report.json", report);
    std::printf("%s %s: %zu/%zu samples in %.3f s -> %s\n", cfg.name.c_str(), h.label.c_str(),
                st.succeeded, st.attempted, set.wall_time, dir.string().c_str());
  }
  return kExitOk;
}

int cmd_reference(const ScenarioConfig& cfg)
{
  const Dynamics dyn = cfg.dynamics();
  for (const auto& h : cfg.horizons) {
    const fs::path dir = horizon_dir(cfg, h);
    fs::create_directories(dir);
    const auto ref = build_reference(dyn, cfg.x0, h.stages, h.dt, cfg.integrator);
    write_reference(dir / "reference.csv", ref);
    std::printf("%s %s: reference with %zu stages -> %s\n", cfg.name.c_str(), h.label.c_str(), ref.size(),
                (dir / "reference.csv").string().c_str());
  }
  return kExitOk;
}

json complex_json(std::complex<double> z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

int cmd_manifolds(const ScenarioConfig& cfg)
{
  if (!cfg.orbit) throw ConfigError("orbit", "missing required key");
  const auto& model = std::get<Cr3bpModel>(cfg.model);
  const OrbitConfig& oc = *cfg.orbit;
  PeriodicOrbitSpec orbit;
  orbit.x0 = StateVec(oc.x0, Frame::SynodicRotating);
  orbit.period = oc.period;
  orbit.n_fixed_points = oc.n_fixed_points;

  const auto start = Clock::now();
  const double closure = orbit_closure_check(model, orbit, cfg.integrator);
  const ManifoldSet set =
    propagate_manifolds(model, orbit, oc.epsilon, oc.horizon, oc.intervals, cfg.integrator,
                        resolve_threads(cfg.threads));
  const double wall = since(start);

  fs::create_directories(cfg.output_dir);
  write_manifolds(cfg.output_dir / "manifolds.csv", set, oc.horizon / static_cast<double>(oc.intervals));

  const auto& d0 = set.decompositions.front();
  json eig = json::array();
  for (const auto& z : d0.eigenvalues) eig.push_back(complex_json(z));
  double worst_det = 0.0;
  double worst_pair = 0.0;
  for (const auto& d : set.decompositions) {
    worst_det = std::max(worst_det, std::abs(d.m.determinant() - 1.0));
    worst_pair = std::max(worst_pair, reciprocal_pairing_error(d.eigenvalues));
  }
  json report = base_report(cfg, "manifolds");
  report["period"] = oc.period;
  report["closure_error"] = closure;
  report["eigenvalues"] = eig;
  report["det"] = d0.m.determinant();
  report["det_error"] = std::abs(d0.m.determinant() - 1.0);
  report["reciprocal_pairing_error"] = reciprocal_pairing_error(d0.eigenvalues);
  report["lambda_unstable"] = d0.lambda_unstable;
  report["lambda_stable"] = d0.lambda_stable;
  report["xi_unstable"] = vec_json(d0.xi_unstable);
  report["xi_stable"] = vec_json(d0.xi_stable);
  report["fixed_points"] = set.fixed_points.size();
  report["max_det_error"] = worst_det;
  report["max_reciprocal_pairing_error"] = worst_pair;
  report["epsilon"] = oc.epsilon;
  report["manifold_horizon"] = oc.horizon;
  report["wall_time"] = wall;
  write_json(cfg.output_dir / "spectrum.json", report);
  std::printf("%s: lambda_u = %.6g, lambda_s = %.6g, |det-1| = %.3g, closure = %.3g -> %s\n",
              cfg.name.c_str(), d0.lambda_unstable, d0.lambda_stable, std::abs(d0.m.determinant() - 1.0),
              closure, cfg.output_dir.string().c_str());
  return kExitOk;
}

json verdict_json(const ContainmentReport& r)
{
  return json{{"inside", r.inside},
              {"signed_distance", r.signed_distance},
              {"relative_distance", r.relative_distance},
              {"nearest_facet", r.nearest_facet}};
}

int cmd_contain(const fs::path& set_path, const fs::path& target_path, std::optional<fs::path> out_dir)
{
  const fs::path set_dir = fs::is_directory(set_path) ? set_path : set_path.parent_path();
  const fs::path terminals = fs::is_directory(set_path) ? set_path / "terminals.csv" : set_path;
  const TerminalClouds clouds = read_terminals(terminals);
  if (clouds.position.points.empty()) throw InvalidArgument(terminals.string() + ": no terminal points");

  std::string model = "unknown";
  if (fs::exists(set_dir / "report.json")) {
    std::ifstream in(set_dir / "report.json");
    try {
      const json rep = json::parse(in);
      model = rep.value("model", "unknown");
    } catch (const json::exception& e) {
      throw InvalidArgument((set_dir / "report.json").string() + ": " + e.what());
    }
  }
  const bool over_approx = model == "cr3bp";

  const HullSummary hp = convex_hull(clouds.position);
  std::optional<HullSummary> hv;
  const auto targets = read_targets(target_path);
  bool need_v = false;
  for (const auto& t : targets) need_v = need_v || t.v.has_value();
  if (need_v) hv = convex_hull(clouds.velocity);

  json queries = json::array();
  for (const auto& t : targets) {
    json q{{"label", t.label}, {"position", vec_json(t.r)}};
    q["position_verdict"] = verdict_json(contains(hp, t.r));
    if (t.v) {
      q["velocity"] = vec_json(*t.v);
      q["velocity_verdict"] = verdict_json(contains(*hv, *t.v));
    }
    queries.push_back(q);
  }

  json report{{"set", terminals.string()},
              {"target", target_path.string()},
              {"model", model},
              {"convex_over_approximation", over_approx},
              {"hull", {{"space", "position"}, {"volume", hp.volume}, {"centroid", vec_json(hp.centroid)},
                        {"bounding_radius", hp.bounding_radius}, {"vertices", hp.vertices.size()}}},
              {"queries", queries}};
  if (over_approx) report["note"] = "convex over-approximation";
  if (hv) {
    report["velocity_hull"] = {{"volume", hv->volume}, {"centroid", vec_json(hv->centroid)},
                               {"bounding_radius", hv->bounding_radius}};
  }
  const fs::path dir = out_dir.value_or(set_dir);
  fs::create_directories(dir);
  write_json(dir / "containment.json", report);
  for (const auto& q : queries) {
    std::printf("%s: %s%s\n", q["label"].get<std::string>().c_str(),
                q["position_verdict"]["inside"].get<bool>() ? "inside" : "outside",
                over_approx ? " (convex over-approximation)" : "");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Low-thrust reachable-set engine"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::size_t> samples;
  std::optional<std::string> output_dir;
  std::optional<double> epsilon;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override sampling seed");
    sub->add_option("--threads", threads, "Worker threads (0: hardware count)");
    sub->add_option("--samples", samples, "Override sample count")->check(CLI::PositiveNumber);
    sub->add_option("--output-dir", output_dir, "Override output directory");
  };

  auto* reach_cmd = app.add_subcommand("reach", "Sample the reachable set");
  add_common(reach_cmd);
  auto* manifold_cmd = app.add_subcommand("manifolds", "Monodromy spectrum and invariant manifolds");
  add_common(manifold_cmd);
  manifold_cmd->add_option("--epsilon", epsilon, "Override manifold seed offset")->check(CLI::NonNegativeNumber);
  auto* ref_cmd = app.add_subcommand("reference", "Export the ballistic reference");
  add_common(ref_cmd);

  std::string set_path;
  std::string target_path;
  auto* contain_cmd = app.add_subcommand("contain", "Test targets against a reachable-set hull");
  contain_cmd->add_option("set", set_path, "Output directory of a reach run, or its terminals.csv")
    ->required()
    ->check(CLI::ExistingPath);
  contain_cmd->add_option("target", target_path, "Target CSV (x,y,z[,vx,vy,vz]) or trajectory file")
    ->required()
    ->check(CLI::ExistingFile);
  contain_cmd->add_option("--output-dir", output_dir, "Where to write containment.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (contain_cmd->parsed()) {
      std::optional<fs::path> out;
      if (output_dir) out = fs::path(*output_dir);
      return cmd_contain(set_path, target_path, out);
    }
    ConfigOverrides ov;
    ov.seed = seed;
    ov.threads = threads;
    ov.samples = samples;
    if (output_dir) ov.output_dir = fs::path(*output_dir);
    ov.epsilon = epsilon;
    const ScenarioConfig cfg = load_scenario(config, ov);
    if (reach_cmd->parsed()) return cmd_reach(cfg);
    if (manifold_cmd->parsed()) return cmd_manifolds(cfg);
    return cmd_reference(cfg);
  } catch (const BatchFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBatch;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
}
