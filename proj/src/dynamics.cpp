#include "reach/dynamics.hpp"

#include <cmath>
#include <string>

namespace reach {

const char* to_string(Frame frame)
{
  switch (frame) {
    case Frame::HelioInertial: return "HelioInertial";
    case Frame::SynodicRotating: return "SynodicRotating";
  }
  return "?";
}

StateVec::StateVec(const Vec6& values, Frame f) : x(values), frame(f)
{
  if (!x.allFinite()) {
    throw InvalidArgument("state has non-finite components");
  }
}

StateVec::StateVec(const Vec3& r, const Vec3& v, Frame f)
{
  Vec6 values;
  values << r, v;
  *this = StateVec(values, f);
}

SpacecraftParams SpacecraftParams::make(double t_max, double isp, double m0, double g0)
{
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) {
    throw InvalidArgument("t_max must be >= 0");
  }
  if (!(isp > 0.0) || !(m0 > 0.0) || !(g0 > 0.0)) {
    throw InvalidArgument("isp, m0 and g0 must be > 0");
  }
  SpacecraftParams p;
  p.t_max = t_max;
  p.isp = isp;
  p.m0 = m0;
  p.g0 = g0;
  p.c = isp * g0;
  return p;
}

void validate(const Model& model)
{
  if (const auto* tb = std::get_if<TwoBodyModel>(&model)) {
    if (!(tb->mu > 0.0)) throw InvalidArgument("two-body mu must be > 0");
    if (!(tb->singular_floor > 0.0)) throw InvalidArgument("singular floor must be > 0");
    return;
  }
  const auto& m = std::get<Cr3bpModel>(model);
  if (!(m.mu > 0.0 && m.mu < 0.5)) throw InvalidArgument("CR3BP mu must lie in (0, 0.5)");
  if (!(m.l_star > 0.0 && m.t_star > 0.0 && m.m_star > 0.0)) {
    throw InvalidArgument("CR3BP characteristic quantities must be > 0");
  }
  if (!(m.singular_floor > 0.0)) throw InvalidArgument("singular floor must be > 0");
}

Frame frame_of(const Model& model)
{
  return std::holds_alternative<TwoBodyModel>(model) ? Frame::HelioInertial
                                                     : Frame::SynodicRotating;
}

bool is_cr3bp(const Model& model) { return std::holds_alternative<Cr3bpModel>(model); }

double MassProfile::mass_at(double t, double t0) const
{
  if (t < t0) throw InvalidArgument("mass_at requires t >= t0");
  const double m = m0 - mdot * (t - t0);
  if (!(m > 0.0)) {
    throw MassDepleted("mass reaches " + std::to_string(m) + " at t - t0 = " +
                       std::to_string(t - t0));
  }
  return m;
}

MassProfile Propulsion::profile_from(double initial_mass) const
{
  if (!(initial_mass > 0.0)) throw NonpositiveMass("initial mass must be > 0");
  return MassProfile{initial_mass, thrust / exhaust_velocity};
}

Propulsion to_model_units(const Model& model, const SpacecraftParams& params)
{
  Propulsion p;
  if (std::holds_alternative<TwoBodyModel>(model)) {
    p.thrust = params.t_max / 1000.0;  // N -> kg km/s^2
    p.exhaust_velocity = params.c / 1000.0;
    p.m0 = params.m0;
    return p;
  }
  const auto& m = std::get<Cr3bpModel>(model);
  const double l_star_m = m.l_star * 1000.0;
  p.thrust = params.t_max / (params.m0 * l_star_m / (m.t_star * m.t_star));
  p.exhaust_velocity = params.c / (l_star_m / m.t_star);
  p.m0 = 1.0;
  return p;
}

Dynamics::Dynamics(Model model, const SpacecraftParams& params)
  : model_(std::move(model)), params_(params), propulsion_(to_model_units(model_, params))
{
  validate(model_);
}

Dynamics Dynamics::ballistic(Model model)
{
  return Dynamics(std::move(model), SpacecraftParams::make(0.0, 1.0, 1.0));
}

Dynamics Dynamics::with_thrust_scaled(double factor) const
{
  return Dynamics(model_, SpacecraftParams::make(params_.t_max * factor, params_.isp,
                                                 params_.m0, params_.g0));
}

namespace {

void check_frame(const Model& model, const StateVec& x)
{
  if (x.frame != frame_of(model)) {
    throw FrameMismatch(std::string("state in ") + to_string(x.frame) + " evaluated under " +
                        to_string(frame_of(model)) + " model");
  }
}

}  // namespace

Vec6 Dynamics::rates(const StateVec& x, const Vec3& alpha, double mass) const
{
  check_frame(model_, x);
  const double n = alpha.norm();
  if (n != 0.0 && std::abs(n - 1.0) > 1e-12) {
    throw NonUnitControl("|alpha| = " + std::to_string(n));
  }
  if (!(mass > 0.0)) throw NonpositiveMass("mass must be > 0");

  Vec6 out;
  out.head<3>() = x.v();
  double a[3];
  std::visit([&](const auto& m) { acceleration(m, x.x.data(), a); }, model_);
  const double k = propulsion_.thrust / mass;
  for (int i = 0; i < 3; ++i) out[3 + i] = a[i] + k * alpha[i];
  return out;
}

Mat6 Dynamics::state_jacobian(const StateVec& x) const
{
  check_frame(model_, x);
  Mat6 j = Mat6::Zero();
  j.block<3, 3>(0, 3).setIdentity();
  double g[9];
  std::visit([&](const auto& m) { gravity_gradient(m, x.x.data(), g); }, model_);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) j(3 + r, c) = g[3 * r + c];
  if (is_cr3bp(model_)) {
    j(3, 4) = 2.0;
    j(4, 3) = -2.0;
  }
  return j;
}

Mat63 Dynamics::control_influence(double mass) const
{
  if (!(mass > 0.0)) throw NonpositiveMass("mass must be > 0");
  Mat63 c = Mat63::Zero();
  c.block<3, 3>(3, 0) = Mat3::Identity() * (propulsion_.thrust / mass);
  return c;
}

// ---------------------------------------------------------------------------

void acceleration(const TwoBodyModel& m, const double* x, double* a)
{
  const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
  const double r = std::sqrt(r2);
  if (!(r >= m.singular_floor)) throw SingularState("|r| below floor");
  const double k = -m.mu / (r2 * r);
  a[0] = k * x[0];
  a[1] = k * x[1];
  a[2] = k * x[2];
}

void acceleration(const Cr3bpModel& m, const double* x, double* a)
{
  const double mu = m.mu;
  const double dx1 = x[0] + mu;
  const double dx2 = x[0] - 1.0 + mu;
  const double yz2 = x[1] * x[1] + x[2] * x[2];
  const double r1 = std::sqrt(dx1 * dx1 + yz2);
  const double r2 = std::sqrt(dx2 * dx2 + yz2);
  if (!(r1 >= m.singular_floor) || !(r2 >= m.singular_floor)) {
    throw SingularState("distance to a primary below floor");
  }
  const double k1 = (1.0 - mu) / (r1 * r1 * r1);
  const double k2 = mu / (r2 * r2 * r2);
  a[0] = x[0] + 2.0 * x[4] - k1 * dx1 - k2 * dx2;
  a[1] = x[1] - 2.0 * x[3] - k1 * x[1] - k2 * x[1];
  a[2] = -k1 * x[2] - k2 * x[2];
}

void gravity_gradient(const TwoBodyModel& m, const double* x, double* g)
{
  const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
  const double r = std::sqrt(r2);
  if (!(r >= m.singular_floor)) throw SingularState("|r| below floor");
  const double k = m.mu / (r2 * r);
  const double k3 = 3.0 * k / r2;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g[3 * i + j] = k3 * x[i] * x[j] - (i == j ? k : 0.0);
}

void gravity_gradient(const Cr3bpModel& m, const double* x, double* g)
{
  const double mu = m.mu;
  const double d1[3] = {x[0] + mu, x[1], x[2]};
  const double d2[3] = {x[0] - 1.0 + mu, x[1], x[2]};
  const double r1s = d1[0] * d1[0] + d1[1] * d1[1] + d1[2] * d1[2];
  const double r2s = d2[0] * d2[0] + d2[1] * d2[1] + d2[2] * d2[2];
  const double r1 = std::sqrt(r1s);
  const double r2 = std::sqrt(r2s);
  if (!(r1 >= m.singular_floor) || !(r2 >= m.singular_floor)) {
    throw SingularState("distance to a primary below floor");
  }
  const double a1 = (1.0 - mu) / (r1s * r1);
  const double a2 = mu / (r2s * r2);
  const double b1 = 3.0 * a1 / r1s;
  const double b2 = 3.0 * a2 / r2s;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double v = b1 * d1[i] * d1[j] + b2 * d2[i] * d2[j];
      if (i == j) v -= a1 + a2;
      g[3 * i + j] = v;
    }
  }
  g[0] += 1.0;  // centrifugal
  g[4] += 1.0;
}

// ---------------------------------------------------------------------------

double jacobi_constant(const Cr3bpModel& model, const StateVec& s)
{
  if (s.frame != Frame::SynodicRotating) throw FrameMismatch("Jacobi constant needs a synodic state");
  const auto& x = s.x;
  const double mu = model.mu;
  const double r1 = std::sqrt((x[0] + mu) * (x[0] + mu) + x[1] * x[1] + x[2] * x[2]);
  const double r2 = std::sqrt((x[0] - 1.0 + mu) * (x[0] - 1.0 + mu) + x[1] * x[1] + x[2] * x[2]);
  if (!(r1 >= model.singular_floor) || !(r2 >= model.singular_floor)) {
    throw SingularState("distance to a primary below floor");
  }
  return x[0] * x[0] + x[1] * x[1] + 2.0 * (1.0 - mu) / r1 + 2.0 * mu / r2 -
         (x[3] * x[3] + x[4] * x[4] + x[5] * x[5]);
}

std::pair<StateVec, Propulsion> nondimensionalize(const Cr3bpModel& model, const StateVec& x,
                                                  const SpacecraftParams& params)
{
  const double vel = model.l_star / model.t_star;
  Vec6 out;
  out << x.r() / model.l_star, x.v() / vel;
  return {StateVec(out, Frame::SynodicRotating), to_model_units(Model{model}, params)};
}

StateVec dimensionalize(const Cr3bpModel& model, const StateVec& x)
{
  const double vel = model.l_star / model.t_star;
  Vec6 out;
  out << x.r() * model.l_star, x.v() * vel;
  return StateVec(out, Frame::SynodicRotating);
}

double to_seconds(const Cr3bpModel& model, double t_nondim) { return t_nondim * model.t_star; }
double to_nondim_time(const Cr3bpModel& model, double seconds) { return seconds / model.t_star; }

}  // namespace reach
