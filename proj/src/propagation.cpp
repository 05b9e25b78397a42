#include "reach/propagation.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <string>

namespace reach {

namespace odeint = boost::numeric::odeint;

void IntegratorConfig::validate() const
{
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw InvalidArgument("integrator tolerances must be > 0");
  if (substeps < 1) throw InvalidArgument("integrator substeps must be >= 1");
  if (max_steps < 1) throw InvalidArgument("integrator max_steps must be >= 1");
}

namespace {

using State6 = std::array<double, 6>;
using State60 = std::array<double, 60>;

constexpr int kPhi = 6;
constexpr int kOmega = 42;

// Mass is measured from the stage start: m(t) = m_start - mdot (t - t_start).
struct StageMass
{
  double m_start;
  double mdot;
  double t_start;

  double at(double t) const
  {
    const double m = m_start - mdot * (t - t_start);
    if (!(m > 0.0)) throw MassDepleted("mass depleted inside stage");
    return m;
  }
};

template <class M>
struct StateRhs
{
  const M& model;
  double thrust;
  std::array<double, 3> alpha;
  bool powered;
  StageMass mass;

  void operator()(const State6& x, State6& dx, double t) const
  {
    double a[3];
    acceleration(model, x.data(), a);
    dx[0] = x[3];
    dx[1] = x[4];
    dx[2] = x[5];
    if (powered) {
      const double k = thrust / mass.at(t);
      a[0] += k * alpha[0];
      a[1] += k * alpha[1];
      a[2] += k * alpha[2];
    }
    dx[3] = a[0];
    dx[4] = a[1];
    dx[5] = a[2];
  }
};

// dPhi = A Phi, dOmega = A Omega + C with A = [0 I; G K], C = [0; (T/m) I].
template <class M>
struct VariationalRhs
{
  const M& model;
  double thrust;
  StageMass mass;

  void operator()(const State60& s, State60& ds, double t) const
  {
    double a[3];
    double g[9];
    acceleration(model, s.data(), a);
    gravity_gradient(model, s.data(), g);
    ds[0] = s[3];
    ds[1] = s[4];
    ds[2] = s[5];
    ds[3] = a[0];
    ds[4] = a[1];
    ds[5] = a[2];

    const bool coriolis = has_coriolis(model);
    auto block = [&](int base, int cols) {
      const double* p = s.data() + base;
      double* d = ds.data() + base;
      for (int c = 0; c < cols; ++c) {
        const double r0 = p[0 * cols + c], r1 = p[1 * cols + c], r2 = p[2 * cols + c];
        const double v0 = p[3 * cols + c], v1 = p[4 * cols + c], v2 = p[5 * cols + c];
        d[0 * cols + c] = v0;
        d[1 * cols + c] = v1;
        d[2 * cols + c] = v2;
        double w0 = g[0] * r0 + g[1] * r1 + g[2] * r2;
        double w1 = g[3] * r0 + g[4] * r1 + g[5] * r2;
        const double w2 = g[6] * r0 + g[7] * r1 + g[8] * r2;
        if (coriolis) {
          w0 += 2.0 * v1;
          w1 -= 2.0 * v0;
        }
        d[3 * cols + c] = w0;
        d[4 * cols + c] = w1;
        d[5 * cols + c] = w2;
      }
    };
    block(kPhi, 6);
    block(kOmega, 3);
    if (thrust != 0.0) {
      const double k = thrust / mass.at(t);
      ds[kOmega + 3 * 3 + 0] += k;
      ds[kOmega + 4 * 3 + 1] += k;
      ds[kOmega + 5 * 3 + 2] += k;
    }
  }
};

template <class S, class Sys>
void run_adaptive(Sys sys, S& x, double t0, double t1, const IntegratorConfig& cfg,
                  double* step_hint)
{
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<S>>(cfg.abs_tol, cfg.rel_tol);
  const double span = t1 - t0;
  const double dir = span >= 0.0 ? 1.0 : -1.0;
  double h = (step_hint && *step_hint > 0.0) ? *step_hint : std::abs(span) / 16.0;
  h = dir * std::min(h, std::abs(span));
  double t = t0;
  std::size_t steps = 0;
  std::size_t attempts = 0;
  const double min_step = 1e-13 * std::max(1.0, std::max(std::abs(t0), std::abs(t1)));

  while (dir * (t1 - t) > 0.0) {
    const double free_h = h;
    const bool last = dir * (t + h - t1) >= 0.0;
    if (last) h = t1 - t;
    const auto res = stepper.try_step(sys, x, t, h);
    if (++attempts > 50 * cfg.max_steps) throw StepFailure("too many rejected steps");
    if (res == odeint::success) {
      ++steps;
      if (last) {
        t = t1;
        if (step_hint) *step_hint = std::abs(free_h);
        break;
      }
      if (step_hint) *step_hint = std::abs(h);
      if (steps > cfg.max_steps) throw StepFailure("step budget exhausted");
    } else if (std::abs(h) < min_step) {
      throw StepFailure("step size underflow at t = " + std::to_string(t));
    }
  }
}

template <class S, class Sys>
void run_rk4(Sys sys, S& x, double t0, double t1, int substeps)
{
  odeint::runge_kutta4<S> stepper;
  const double h = (t1 - t0) / substeps;
  for (int k = 0; k < substeps; ++k) {
    stepper.do_step(sys, x, t0 + k * h, h);
  }
}

template <class S, class Sys>
void run(Sys sys, S& x, double t0, double dt, const IntegratorConfig& cfg, double* step_hint)
{
  if (dt == 0.0) return;
  if (cfg.method == IntegratorMethod::Rk4Fixed) {
    run_rk4(sys, x, t0, t0 + dt, cfg.substeps);
  } else {
    run_adaptive(sys, x, t0, t0 + dt, cfg, step_hint);
  }
}

void check_inputs(const Dynamics& dyn, const StateVec& x0)
{
  if (x0.frame != dyn.frame()) throw FrameMismatch("initial state frame does not match model");
}

}  // namespace

StateVec integrate_stage(const Dynamics& dyn, const StateVec& x0, const Vec3& alpha,
                         const MassProfile& mass, double t0, double dt,
                         const IntegratorConfig& cfg, double* step_hint)
{
  check_inputs(dyn, x0);
  const double an = alpha.norm();
  if (an != 0.0 && std::abs(an - 1.0) > 1e-12) throw NonUnitControl("|alpha| = " + std::to_string(an));
  const bool powered = an != 0.0 && dyn.propulsion().thrust != 0.0;
  if (powered && dt < 0.0) throw InvalidArgument("powered stages cannot run backward in time");

  StageMass sm{mass.m0, mass.mdot, t0};
  if (powered) {
    sm.at(t0);
    sm.at(t0 + dt);
  }

  State6 x;
  for (int i = 0; i < 6; ++i) x[i] = x0.x[i];
  std::visit(
    [&](const auto& m) {
      StateRhs<std::decay_t<decltype(m)>> rhs{m, dyn.propulsion().thrust,
                                              {alpha[0], alpha[1], alpha[2]}, powered, sm};
      run(std::ref(rhs), x, t0, dt, cfg, step_hint);
    },
    dyn.model());

  Vec6 out;
  for (int i = 0; i < 6; ++i) out[i] = x[i];
  if (!out.allFinite()) throw StepFailure("non-finite state after stage");
  return StateVec(out, x0.frame);
}

StageVariations integrate_stage_with_variations(const Dynamics& dyn, const StateVec& x0,
                                                const MassProfile& mass, double t0, double dt,
                                                const IntegratorConfig& cfg)
{
  check_inputs(dyn, x0);
  const double thrust = dyn.propulsion().thrust;
  StageMass sm{mass.m0, mass.mdot, t0};
  if (thrust != 0.0) {
    if (dt < 0.0) throw InvalidArgument("Omega propagation requires dt >= 0");
    sm.at(t0);
    sm.at(t0 + dt);
  }

  State60 s{};
  for (int i = 0; i < 6; ++i) {
    s[i] = x0.x[i];
    s[kPhi + 7 * i] = 1.0;
  }
  std::visit(
    [&](const auto& m) {
      VariationalRhs<std::decay_t<decltype(m)>> rhs{m, thrust, sm};
      run(std::ref(rhs), s, t0, dt, cfg, nullptr);
    },
    dyn.model());

  StageVariations out;
  Vec6 xe;
  for (int i = 0; i < 6; ++i) xe[i] = s[i];
  if (!xe.allFinite()) throw StepFailure("non-finite state after stage");
  out.x_end = StateVec(xe, x0.frame);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) out.fx(r, c) = s[kPhi + 6 * r + c];
    for (int c = 0; c < 3; ++c) out.fu(r, c) = s[kOmega + 3 * r + c];
  }
  return out;
}

std::vector<double> ReferenceTrajectory::packed_fx() const
{
  std::vector<double> out(stages.size() * 36);
  for (std::size_t i = 0; i < stages.size(); ++i)
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) out[i * 36 + 6 * r + c] = stages[i].fx(r, c);
  return out;
}

std::vector<double> ReferenceTrajectory::packed_fu() const
{
  std::vector<double> out(stages.size() * 18);
  for (std::size_t i = 0; i < stages.size(); ++i)
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 3; ++c) out[i * 18 + 3 * r + c] = stages[i].fu(r, c);
  return out;
}

ReferenceTrajectory build_reference(const Dynamics& dyn, const StateVec& x0, std::size_t n,
                                    double dt, const IntegratorConfig& cfg, double t0)
{
  cfg.validate();
  if (n < 1) throw InvalidArgument("reference needs at least one stage");
  if (!(dt > 0.0)) throw InvalidArgument("stage duration must be > 0");
  check_inputs(dyn, x0);

  const MassProfile profile = dyn.propulsion().profile();
  if (dyn.propulsion().thrust != 0.0) {
    profile.mass_at(t0 + static_cast<double>(n) * dt, t0);
  }

  ReferenceTrajectory ref{dyn, {}, x0, profile, t0};
  ref.stages.reserve(n);
  StateVec x = x0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = t0 + static_cast<double>(i) * dt;
    const double mi = profile.mass_at(ti, t0);
    auto var = integrate_stage_with_variations(dyn, x, MassProfile{mi, profile.mdot}, ti, dt, cfg);
    ref.stages.push_back(StageRecord{i, ti, dt, x, mi, var.fx, var.fu});
    x = var.x_end;
  }
  ref.x_terminal = x;
  return ref;
}

StageVariations propagate_ballistic_stm(const Dynamics& dyn, const StateVec& x0, double duration,
                                        const IntegratorConfig& cfg)
{
  const Dynamics ballistic = Dynamics::ballistic(dyn.model());
  return integrate_stage_with_variations(ballistic, x0, MassProfile{1.0, 0.0}, 0.0, duration, cfg);
}

std::vector<StateVec> sample_ballistic(const Dynamics& dyn, const StateVec& x0, double duration,
                                       std::size_t intervals, const IntegratorConfig& cfg)
{
  if (intervals < 1) throw InvalidArgument("need at least one interval");
  std::vector<StateVec> out;
  out.reserve(intervals + 1);
  out.push_back(x0);
  const double h = duration / static_cast<double>(intervals);
  double hint = 0.0;
  StateVec x = x0;
  for (std::size_t k = 0; k < intervals; ++k) {
    x = integrate_stage(dyn, x, Vec3::Zero(), MassProfile{1.0, 0.0}, static_cast<double>(k) * h, h,
                        cfg, &hint);
    out.push_back(x);
  }
  return out;
}

}  // namespace reach
