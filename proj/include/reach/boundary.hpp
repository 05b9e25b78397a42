#pragma once

// Initial-condition shifts applied before reconstruction: ellipsoidal
// position/velocity uncertainty and a bounded initial impulse. All
// quantities are in model units (km, km/s, kg for two-body; nondimensional
// for CR3BP).

#include "reach/dynamics.hpp"

#include <array>
#include <optional>
#include <utility>

namespace reach {

/// Below this norm a costate block carries no direction information.
inline constexpr double kCostateFloor = 1e-30;

struct EllipsoidSpec
{
  Mat3 e_r = Mat3::Identity();
  Mat3 e_v = Mat3::Identity();
  double r_ref = 0.0;
  double v_ref = 0.0;

  /// Validates symmetry/positive-definiteness and nonnegative radii.
  static EllipsoidSpec make(const Mat3& e_r, const Mat3& e_v, double r_ref, double v_ref);

  /// Builds a symmetric matrix from the upper triangle [a11 a12 a13 a22 a23 a33].
  static Mat3 from_upper(const std::array<double, 6>& upper);
};

struct ImpulseSpec
{
  double dv_max = 0.0;

  static ImpulseSpec make(double dv_max);
};

struct BoundarySpec
{
  std::optional<EllipsoidSpec> ellipsoid;
  std::optional<ImpulseSpec> impulse;

  bool active() const { return ellipsoid.has_value() || impulse.has_value(); }
};

enum class ImpulseBranch
{
  None,        // no impulse spec, or lambda_v below the floor
  Binding,     // |dv2| = dv_max
  NonBinding,  // interior solution
};

struct BoundaryResult
{
  Vec3 delta_r = Vec3::Zero();
  Vec3 delta_v1 = Vec3::Zero();
  Vec3 delta_v2 = Vec3::Zero();
  double dv = 0.0;
  double m_star = 0.0;
  ImpulseBranch branch = ImpulseBranch::None;
  bool clamped = false;
  bool degenerate_r = false;
  bool degenerate_v = false;
};

/// dr = -r_ref E_r^-1 lambda_r / sqrt(lambda_r^T E_r^-1 lambda_r). Returns zero
/// and sets `*degenerate` when |lambda_r| is below the floor.
Vec3 ellipsoid_position_shift(const Vec3& lambda_r, const EllipsoidSpec& spec,
                              bool* degenerate = nullptr);

/// Velocity counterpart of ellipsoid_position_shift with (E_v, v_ref).
Vec3 ellipsoid_velocity_shift(const Vec3& lambda_v, const EllipsoidSpec& spec,
                              bool* degenerate = nullptr);

/// Sign of this quantity selects the binding impulse branch (> 0).
double impulse_switch(double lambda_v_norm, double dv_max, double m0, double c);

/// Interior (non-binding) impulse magnitude before clamping,
/// -c ln((|lambda_v| c + sqrt(|lambda_v|^2 c^2)) / (2 m0)).
double interior_impulse_magnitude(double lambda_v_norm, double m0, double c);

struct ImpulseShift
{
  Vec3 delta_v2 = Vec3::Zero();
  double dv = 0.0;
  ImpulseBranch branch = ImpulseBranch::None;
  bool clamped = false;
};

ImpulseShift impulse_shift(const Vec3& lambda_v, const ImpulseSpec& spec, double m0, double c);

/// Tsiolkovsky depletion m0 exp(-dv / c).
double mass_after_impulse(double m0, double dv, double c);

/// Maps the reference initial state through the pseudo-zero stage using the
/// stage-0 costate. Inactive specs contribute zero shifts.
std::pair<StateVec, BoundaryResult> apply_initial_conditions(const StateVec& x_ref0,
                                                             const CostateVec& lambda0,
                                                             const BoundarySpec& spec,
                                                             const Propulsion& propulsion);

}  // namespace reach
