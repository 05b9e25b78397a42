// Acceptance checks. Prints one PASS/FAIL line per criterion with the
// measured quantities; exits nonzero if any criterion fails.

#include "reach/analysis.hpp"
#include "reach/csv_io.hpp"
#include "reach/scenario.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <sys/wait.h>

using namespace reach;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kData = REACH_DATA_DIR;

fs::path scenario(const std::string& name) { return kData / "scenarios" / (name + ".json"); }
fs::path target(const std::string& name) { return kData / "targets" / (name + ".csv"); }

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

fs::path scratch(const std::string& name)
{
  const fs::path p = fs::temp_directory_path() / ("reach_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args)
{
  const std::string cmd = std::string(REACH_CLI_PATH) + " " + args + " > /dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...)
{
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

ReachableSet run_set(const ScenarioConfig& cfg, std::size_t horizon = 0, bool history = false)
{
  ReachOptions o;
  o.samples = cfg.samples;
  o.seed = cfg.seed;
  o.boundary = cfg.boundary;
  o.integrator = cfg.integrator;
  o.threads = cfg.threads;
  o.keep_history = history;
  o.failure_threshold = cfg.failure_threshold;
  const auto& h = cfg.horizons.at(horizon);
  return compute_reachable_set(cfg.dynamics(), cfg.x0, h.stages, h.dt, o);
}

struct Outcome
{
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& check)
{
  const auto t0 = Clock::now();
  Outcome out;
  try {
    out = check();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  if (!out.pass) ++g_failures;
  std::printf("[%s] criterion %d: %s | %s | %.1f s\n", out.pass ? "PASS" : "FAIL", id, title,
              out.detail.c_str(), since(t0));
  std::fflush(stdout);
}

// ---------------------------------------------------------------------------

Outcome earth_mars_200d()
{
  const fs::path dir = scratch("c1");
  const auto t0 = Clock::now();
  if (run_cli("reach " + scenario("earth_mars_200d").string() + " --output-dir " + dir.string()) != 0) {
    return {false, "reach run failed"};
  }
  const double wall = since(t0);
  if (run_cli("contain " + dir.string() + " " + target("mars_200d").string()) != 0) {
    return {false, "contain failed"};
  }
  const auto rep = nlohmann::json::parse(slurp(dir / "report.json"));
  const auto con = nlohmann::json::parse(slurp(dir / "containment.json"));
  const bool inside = con["queries"][0]["position_verdict"]["inside"];
  const double rel = con["queries"][0]["position_verdict"]["relative_distance"];
  const int ok = rep["samples"]["succeeded"];
  return {!inside && wall <= 60.0 && ok == 5000,
          fmt("J=%d survived, Mars 200 d %s (|d|/R=%.3f), wall %.2f s (limit 60 s)", ok,
              inside ? "INSIDE" : "outside", rel, wall)};
}

Outcome mars_sweep()
{
  bool monotone = true, slow = false;
  double prev = 0.0;
  int first_inside = -1;
  std::string rows;
  for (int days : {100, 150, 200, 250, 300}) {
    const auto cfg = load_scenario(scenario("earth_mars_" + std::to_string(days) + "d"));
    const auto t0 = Clock::now();
    const auto set = run_set(cfg);
    const auto hull = convex_hull(terminal_cloud(set, CloudSpace::Position));
    const double wall = since(t0);
    const auto mars = read_targets(target("mars_" + std::to_string(days) + "d")).front();
    const auto c = contains(hull, mars.r);
    monotone = monotone && hull.volume >= prev;
    prev = hull.volume;
    slow = slow || wall > 120.0;
    if (c.inside && first_inside < 0) first_inside = days;
    rows += fmt("%dd: V=%.3e %s (d/R=%+.4f, %.1fs); ", days, hull.volume, c.inside ? "in" : "out",
                c.signed_distance / hull.bounding_radius, wall);
  }
  rows += fmt("monotone=%s, first inside=%dd (need > 250d)", monotone ? "yes" : "no", first_inside);
  return {monotone && !slow && first_inside > 250, rows};
}

Outcome minimum_time_consistency()
{
  const auto cfg = load_scenario(scenario("earth_mars_307d"));
  const auto set = run_set(cfg);
  const auto hp = convex_hull(terminal_cloud(set, CloudSpace::Position));
  const auto hv = convex_hull(terminal_cloud(set, CloudSpace::Velocity));
  // A rendezvous trajectory terminates on the target's state.
  const auto mars = read_targets(target("mars_307d")).front();
  const auto cp = contains(hp, mars.r);
  const auto cv = contains(hv, *mars.v);
  const bool pos_ok = cp.inside;
  const bool vel_ok = cv.relative_distance <= 0.02;
  return {pos_ok && vel_ok,
          fmt("terminal position %s (d/R=%+.4f); terminal velocity %s at |d|/R=%.4f (need <= 0.02)",
              pos_ok ? "inside" : "OUTSIDE", cp.signed_distance / hp.bounding_radius,
              cv.inside ? "inside" : "outside", cv.relative_distance)};
}

Outcome linearisation()
{
  const auto cfg = load_scenario(scenario("earth_mars_200d"));
  auto max_rel = [&](double scale) {
    const Dynamics dyn = cfg.dynamics().with_thrust_scaled(scale);
    const auto& h = cfg.horizons[0];
    const auto ref = build_reference(dyn, cfg.x0, h.stages, h.dt, cfg.integrator);
    double worst = 0.0;
    for (std::size_t j = 0; j < 100; ++j) {
      const auto u = controls_for(sample_terminal_costate(cfg.seed, j), ref);
      const auto s = reconstruct_trajectory(ref, u, ref.stages[0].x_ref, ref.mass.m0, cfg.integrator, false);
      const Vec3 nl = s.terminal.r() - ref.x_terminal.r();
      const Vec3 lin = linear_terminal_deviation(ref, u).head<3>();
      worst = std::max(worst, (nl - lin).norm() / nl.norm());
    }
    return worst;
  };
  const double full = max_rel(1.0);
  const double tenth = max_rel(0.1);
  return {full <= 0.05 && tenth <= 0.001,
          fmt("max relative position error %.4f at full thrust (need <= 0.05), %.5f at x0.1 (need <= 0.001), "
              "ratio %.1f",
              full, tenth, full / tenth)};
}

Outcome boundary_expansion()
{
  const auto base = run_set(load_scenario(scenario("earth_mars_200d")));
  const auto imp = run_set(load_scenario(scenario("earth_mars_impulse")));
  const auto unc = run_set(load_scenario(scenario("earth_mars_uncertainty")));
  const auto hb = convex_hull(terminal_cloud(base, CloudSpace::Position));
  const auto hi = convex_hull(terminal_cloud(imp, CloudSpace::Position));
  const auto hu = convex_hull(terminal_cloud(unc, CloudSpace::Position));
  const double shift = (hu.centroid - hb.centroid).norm();
  const bool larger = hi.volume > hb.volume;
  const bool shifted = shift > 1e-9 * hb.bounding_radius;
  return {larger && shifted && unc.surviving() == unc.samples.size(),
          fmt("impulse volume %.4e vs %.4e (x%.3f); uncertainty centroid shift %.4e km (%.2e R)", hi.volume,
              hb.volume, hi.volume / hb.volume, shift, shift / hb.bounding_radius)};
}

Outcome cr3bp_integrity()
{
  const Cr3bpModel m;
  const Dynamics ballistic = Dynamics::ballistic(Model(m));
  const IntegratorConfig cfg;

  double jacobi = 0.0;
  for (const char* name : {"l2_halo", "nrho"}) {
    const auto sc = load_scenario(scenario(name));
    const double c0 = jacobi_constant(m, sc.x0);
    for (const auto& s : sample_ballistic(ballistic, sc.x0, sc.orbit->period, 100, cfg)) {
      jacobi = std::max(jacobi, std::abs(jacobi_constant(m, s) - c0) / std::abs(c0));
    }
  }

  // L1 from the collinear force balance by bisection.
  auto balance = [mu = m.mu](double x) {
    const double d1 = x + mu, d2 = x - 1.0 + mu;
    return x - (1.0 - mu) * d1 / std::pow(std::abs(d1), 3) - mu * d2 / std::pow(std::abs(d2), 3);
  };
  double lo = 0.5, hi = 1.0 - m.mu - 1e-6;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (balance(lo) * balance(mid) <= 0.0 ? hi : lo) = mid;
  }
  const double x_l1 = 0.5 * (lo + hi);
  const StateVec at_l1(Vec3(x_l1, 0, 0), Vec3::Zero(), Frame::SynodicRotating);
  const double l1_rate = ballistic.rates(at_l1, Vec3::Zero(), 1.0).norm();
  const auto l1 = load_scenario(scenario("l1_point"));
  const double quoted_rate = ballistic.rates(l1.x0, Vec3::Zero(), 1.0).norm();

  ConfigOverrides ov;
  ov.samples = 500;
  const auto halo = load_scenario(scenario("l2_halo_150h"), ov);
  const auto& h = halo.horizons[0];
  const auto ref = build_reference(halo.dynamics(), halo.x0, h.stages, h.dt, halo.integrator);
  double bilinear = 0.0;
  std::mt19937_64 g(halo.seed);
  std::normal_distribution<double> n;
  for (std::size_t j = 0; j < 50; ++j) {
    const auto lam = backward_costates(sample_terminal_costate(halo.seed, j), ref);
    Vec6 dx;
    for (int k = 0; k < 6; ++k) dx[k] = n(g);
    const double s0 = lam[0].vector().dot(dx);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      dx = ref.stages[i].fx * dx;
      const double si = lam[i + 1].vector().dot(dx);
      bilinear = std::max(bilinear, std::abs(si - s0) / std::max(1.0, lam[i + 1].norm() * dx.norm()));
    }
  }

  const auto l1_set = [&] {
    ConfigOverrides o;
    o.samples = 500;
    return run_set(load_scenario(scenario("l1_point"), o), 3, true);
  }();
  double unit = 0.0, mass_spread = 0.0;
  const double m_ref = l1_set.samples.front().terminal_mass;
  for (const auto& s : l1_set.samples) {
    for (const auto& a : s.controls) unit = std::max(unit, std::abs(a.norm() - 1.0));
    mass_spread = std::max(mass_spread, std::abs(s.terminal_mass - m_ref) / m_ref);
  }
  const bool ok = jacobi < 1e-9 && l1_rate < 1e-6 && bilinear < 1e-10 && unit < 1e-12 && mass_spread < 1e-12;
  return {ok, fmt("Jacobi drift %.2e (<1e-9), L1 x=%.10f rate %.2e (<1e-6; %.2e at quoted x=%.9f), "
                  "bilinear %.2e (<1e-10), max ||a|-1| %.2e, terminal-mass spread %.2e",
                  jacobi, x_l1, l1_rate, quoted_rate, l1.x0.x[0], bilinear, unit, mass_spread)};
}

Outcome monodromy_suite()
{
  const Cr3bpModel m;
  std::string detail;
  bool ok = true;
  for (const char* name : {"l2_halo", "nrho"}) {
    const auto sc = load_scenario(scenario(name));
    PeriodicOrbitSpec o;
    o.x0 = StateVec(sc.orbit->x0, Frame::SynodicRotating);
    o.period = sc.orbit->period;
    const auto d = classify_spectrum(monodromy(m, o, o.x0, sc.integrator));
    const double det = std::abs(d.m.determinant() - 1.0);
    const double pair = reciprocal_pairing_error(d.eigenvalues);
    const double recip = std::abs(d.lambda_unstable * d.lambda_stable - 1.0);
    // A flip-type pair (both negative) is reported with its sign; the
    // hyperbolic test uses the modulus.
    const bool hyperbolic = std::abs(d.lambda_unstable) > 1.0 && recip < 1e-4;
    ok = ok && det < 1e-6 && pair < 1e-4 && hyperbolic;
    detail += fmt("%s: |det-1|=%.1e pairing=%.1e lambda=(%.6g, %.6g) lambda*1/lambda-1=%.1e; ", name, det, pair,
                  d.lambda_unstable, d.lambda_stable, recip);
  }
  return {ok, detail};
}

Outcome manifold_clustering()
{
  const auto t0 = Clock::now();
  const auto sc = load_scenario(scenario("l2_halo"));
  const Cr3bpModel m = std::get<Cr3bpModel>(sc.model);
  const auto set = run_set(sc);
  const auto cloud = terminal_cloud(set, CloudSpace::Position);
  PeriodicOrbitSpec orbit;
  orbit.x0 = StateVec(sc.orbit->x0, Frame::SynodicRotating);
  orbit.period = sc.orbit->period;
  orbit.n_fixed_points = sc.orbit->n_fixed_points;
  const auto mf = propagate_manifolds(m, orbit, sc.orbit->epsilon, sc.orbit->horizon, sc.orbit->intervals,
                                      sc.integrator, sc.threads);
  const auto pts = manifold_points(mf.branches);
  const double threshold = 0.02;
  const double stat = manifold_proximity(cloud.points, pts, threshold);

  std::mt19937_64 g(20240611);
  std::normal_distribution<double> n;
  const Vec3 pivot = orbit.x0.r();
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Mat3 r = Eigen::Quaterniond(n(g), n(g), n(g), n(g)).normalized().toRotationMatrix();
    std::vector<Vec3> rotated;
    rotated.reserve(pts.size());
    for (const auto& p : pts) rotated.push_back(pivot + r * (p - pivot));
    worst = std::max(worst, manifold_proximity(cloud.points, rotated, threshold));
  }
  const double wall = since(t0);
  return {set.surviving() >= 5000 && stat > worst && wall <= 900.0,
          fmt("J=%zu, horizon %.1f h, %zu manifold points: fraction %.4f vs best of 10 rotations %.4f "
              "(threshold %.2f)",
              set.surviving(), to_seconds(m, sc.horizons[0].total) / 3600.0, pts.size(), stat, worst, threshold)};
}

Outcome boundary_exactness()
{
  std::mt19937_64 g(9);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(-1.0, 1.0), rad(1e-3, 1e7);
  double quad = 0.0;
  for (int k = 0; k < 10000; ++k) {
    Mat3 a, b;
    for (int i = 0; i < 9; ++i) {
      a(i) = u(g);
      b(i) = u(g);
    }
    const auto spec = EllipsoidSpec::make(a * a.transpose() + 0.05 * Mat3::Identity(),
                                          b * b.transpose() + 0.05 * Mat3::Identity(), rad(g), rad(g));
    const Vec3 lr(n(g), n(g), n(g)), lv(n(g), n(g), n(g));
    const Vec3 dr = ellipsoid_position_shift(lr, spec);
    const Vec3 dv = ellipsoid_velocity_shift(lv, spec);
    quad = std::max(quad, std::abs(dr.dot(spec.e_r * dr) / (spec.r_ref * spec.r_ref) - 1.0));
    quad = std::max(quad, std::abs(dv.dot(spec.e_v * dv) / (spec.v_ref * spec.v_ref) - 1.0));
  }

  const auto cfg = load_scenario(scenario("earth_mars_impulse"));
  const Propulsion p = cfg.dynamics().propulsion();
  const double cap = cfg.boundary.impulse->dv_max;
  std::lognormal_distribution<double> mag(0.0, 5.0);
  double norm_err = 0.0, anti = 0.0;
  bool bounded = true;
  for (int k = 0; k < 10000; ++k) {
    const Vec3 lv = Vec3(n(g), n(g), n(g)).normalized() * mag(g);
    const auto s = impulse_shift(lv, ImpulseSpec::make(cap * (k % 7) / 6.0), p.m0, p.exhaust_velocity);
    bounded = bounded && s.dv >= 0.0 && s.dv <= cap * (k % 7) / 6.0;
    norm_err = std::max(norm_err, std::abs(s.delta_v2.norm() - s.dv));
    if (s.dv > 0.0) anti = std::max(anti, 1.0 + s.delta_v2.normalized().dot(lv.normalized()));
  }
  return {quad < 1e-12 && bounded && norm_err < 1e-14 && anti < 1e-14,
          fmt("max relative quadratic residual %.2e (<1e-12); dv in [0, dv_max]: %s; max ||dv2|-dv| %.1e; "
              "max 1+cos %.1e",
              quad, bounded ? "yes" : "NO", norm_err, anti)};
}

Outcome determinism()
{
  std::string detail;
  bool ok = true;
  for (const char* name : {"l2_halo_150h", "earth_mars_uncertainty"}) {
    std::string first;
    for (int t : {1, 4, 8}) {
      const fs::path dir = scratch(std::string("c10_") + name + "_" + std::to_string(t));
      if (run_cli("reach " + scenario(name).string() + " --threads " + std::to_string(t) + " --output-dir " +
                  dir.string()) != 0) {
        return {false, std::string(name) + ": reach run failed"};
      }
      const std::string bytes = slurp(dir / "trajectories.csv") + slurp(dir / "terminals.csv");
      if (first.empty()) first = bytes;
      ok = ok && !bytes.empty() && bytes == first;
    }
    detail += fmt("%s %zu bytes identical at 1/4/8 workers: %s; ", name, first.size(), ok ? "yes" : "NO");
  }
  return {ok, detail};
}

}  // namespace

int main()
{
  std::printf("reach acceptance (data: %s)\n", kData.c_str());
  report(1, "Earth-Mars 200-day set", earth_mars_200d);
  report(2, "reachability sweep 100-300 d", mars_sweep);
  report(3, "minimum-time consistency at 307 d", minimum_time_consistency);
  report(4, "linearisation fidelity", linearisation);
  report(5, "impulse expansion and uncertainty shift", boundary_expansion);
  report(6, "CR3BP integrity", cr3bp_integrity);
  report(7, "monodromy spectra", monodromy_suite);
  report(8, "manifold clustering vs rotation controls", manifold_clustering);
  report(9, "boundary-condition exactness", boundary_exactness);
  report(10, "determinism across worker counts", determinism);
  std::printf("%d of 10 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
