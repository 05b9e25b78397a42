#pragma once

// Two-body and Earth-Moon CR3BP equations of motion for a constant-thrust
// spacecraft, with their Jacobians and control-influence matrices.

#include "reach/types.hpp"

#include <utility>
#include <variant>

namespace reach {

inline constexpr double kMuSun = 1.32712440018e11;  // km^3/s^2
inline constexpr double kG0 = 9.80665;              // m/s^2

// Earth-Moon defaults.
inline constexpr double kEarthMoonMu = 0.0121505856;
inline constexpr double kEarthMoonLStar = 3.844e5;     // km
inline constexpr double kEarthMoonTStar = 375200.0;    // s
inline constexpr double kEarthMoonMStar = 6.0458e24;   // kg

/// Thruster and vehicle description in SI units.
struct SpacecraftParams
{
  double t_max = 0.0;  // N
  double isp = 0.0;    // s
  double m0 = 0.0;     // kg
  double g0 = kG0;     // m/s^2
  double c = 0.0;      // m/s, isp * g0

  /// Validating constructor. `t_max == 0` is accepted and denotes a
  /// ballistic vehicle.
  static SpacecraftParams make(double t_max, double isp, double m0, double g0 = kG0);
};

struct TwoBodyModel
{
  double mu = kMuSun;           // km^3/s^2
  double singular_floor = 1.0;  // km
};

struct Cr3bpModel
{
  double mu = kEarthMoonMu;
  double l_star = kEarthMoonLStar;  // km
  double t_star = kEarthMoonTStar;  // s
  double m_star = kEarthMoonMStar;  // kg
  double singular_floor = 1e-9;
};

using Model = std::variant<TwoBodyModel, Cr3bpModel>;

void validate(const Model& model);
Frame frame_of(const Model& model);
bool is_cr3bp(const Model& model);

/// Linear minimum-time mass depletion, m(t) = m0 - mdot (t - t0), expressed in
/// the model's mass and time units.
struct MassProfile
{
  double m0 = 1.0;
  double mdot = 0.0;

  /// Throws MassDepleted when the mass would be nonpositive and
  /// InvalidArgument when t < t0.
  double mass_at(double t, double t0) const;
};

/// Thrust, exhaust velocity and initial mass in model units. Two-body:
/// kg km/s^2, km/s, kg. CR3BP: thrust / (m0 l* / t*^2), c / (l*/t*), 1.
struct Propulsion
{
  double thrust = 0.0;
  double exhaust_velocity = 1.0;
  double m0 = 1.0;

  MassProfile profile() const { return profile_from(m0); }
  MassProfile profile_from(double initial_mass) const;
};

Propulsion to_model_units(const Model& model, const SpacecraftParams& params);

/// A dynamical model paired with a vehicle. Immutable and cheap to copy.
class Dynamics
{
public:
  Dynamics(Model model, const SpacecraftParams& params);

  /// Zero-thrust dynamics (manifold and periodic-orbit work).
  static Dynamics ballistic(Model model);

  const Model& model() const { return model_; }
  const SpacecraftParams& params() const { return params_; }
  const Propulsion& propulsion() const { return propulsion_; }
  Frame frame() const { return frame_of(model_); }

  /// Same dynamics with the thrust multiplied by `factor` (Isp unchanged).
  Dynamics with_thrust_scaled(double factor) const;

  /// Equations of motion with unit steering `alpha` (or zero) at mass `mass`.
  Vec6 rates(const StateVec& x, const Vec3& alpha, double mass) const;
  Mat6 state_jacobian(const StateVec& x) const;
  Mat63 control_influence(double mass) const;

private:
  Model model_;
  SpacecraftParams params_;
  Propulsion propulsion_;
};

// Unchecked kernels used inside the integrators. `a` receives the
// gravitational (+ rotating-frame) acceleration; `g` receives d(a)/d(r)
// row-major. Both throw SingularState near a primary.
void acceleration(const TwoBodyModel& m, const double* x, double* a);
void acceleration(const Cr3bpModel& m, const double* x, double* a);
void gravity_gradient(const TwoBodyModel& m, const double* x, double* g);
void gravity_gradient(const Cr3bpModel& m, const double* x, double* g);

/// Rotating-frame velocity coupling d(a)/d(v); zero for inertial models.
inline constexpr bool has_coriolis(const TwoBodyModel&) { return false; }
inline constexpr bool has_coriolis(const Cr3bpModel&) { return true; }

// ---------------------------------------------------------------------------
// CR3BP utilities
// ---------------------------------------------------------------------------

/// C = x^2 + y^2 + 2(1-mu)/r1 + 2mu/r2 - |v|^2
double jacobi_constant(const Cr3bpModel& model, const StateVec& x);

/// Dimensional synodic state (km, km/s) and SI vehicle to nondimensional.
std::pair<StateVec, Propulsion> nondimensionalize(const Cr3bpModel& model,
                                                  const StateVec& x,
                                                  const SpacecraftParams& params);

StateVec dimensionalize(const Cr3bpModel& model, const StateVec& x);

/// Converts a nondimensional time to seconds and back.
double to_seconds(const Cr3bpModel& model, double t_nondim);
double to_nondim_time(const Cr3bpModel& model, double seconds);

}  // namespace reach
