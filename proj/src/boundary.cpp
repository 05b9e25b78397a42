#include "reach/boundary.hpp"

#include <algorithm>
#include <cmath>

namespace reach {

namespace {

void check_spd(const Mat3& m, const char* name)
{
  if (!m.allFinite()) throw InvalidArgument(std::string(name) + " has non-finite entries");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw InvalidArgument(std::string(name) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(m, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0.0)) {
    throw InvalidArgument(std::string(name) + " must be positive definite");
  }
}

Vec3 ellipsoid_shift(const Vec3& lambda, const Mat3& e, double radius, bool* degenerate)
{
  if (degenerate) *degenerate = false;
  if (!(lambda.norm() > kCostateFloor)) {
    if (degenerate) *degenerate = true;
    return Vec3::Zero();
  }
  const Vec3 w = e.llt().solve(lambda);
  const double q = lambda.dot(w);
  if (!(q > 0.0) || !std::isfinite(q)) {
    if (degenerate) *degenerate = true;
    return Vec3::Zero();
  }
  return -radius * w / std::sqrt(q);
}

}  // namespace

EllipsoidSpec EllipsoidSpec::make(const Mat3& e_r, const Mat3& e_v, double r_ref, double v_ref)
{
  check_spd(e_r, "E_r");
  check_spd(e_v, "E_v");
  if (!(r_ref >= 0.0) || !(v_ref >= 0.0)) throw InvalidArgument("r_ref and v_ref must be >= 0");
  return EllipsoidSpec{e_r, e_v, r_ref, v_ref};
}

Mat3 EllipsoidSpec::from_upper(const std::array<double, 6>& u)
{
  Mat3 m;
  m << u[0], u[1], u[2],
       u[1], u[3], u[4],
       u[2], u[4], u[5];
  return m;
}

ImpulseSpec ImpulseSpec::make(double dv_max)
{
  if (!(dv_max >= 0.0) || !std::isfinite(dv_max)) throw InvalidArgument("dv_max must be >= 0");
  return ImpulseSpec{dv_max};
}

Vec3 ellipsoid_position_shift(const Vec3& lambda_r, const EllipsoidSpec& spec, bool* degenerate)
{
  return ellipsoid_shift(lambda_r, spec.e_r, spec.r_ref, degenerate);
}

Vec3 ellipsoid_velocity_shift(const Vec3& lambda_v, const EllipsoidSpec& spec, bool* degenerate)
{
  return ellipsoid_shift(lambda_v, spec.e_v, spec.v_ref, degenerate);
}

double impulse_switch(double lambda_v_norm, double dv_max, double m0, double c)
{
  const double decay = std::exp(-dv_max / c);
  const double m_after = m0 * decay;
  return lambda_v_norm * m0 * c * decay - m_after * m_after;
}

double interior_impulse_magnitude(double lambda_v_norm, double m0, double c)
{
  // (|l| c + sqrt(|l|^2 c^2)) / 2 == |l| c
  return -c * std::log(lambda_v_norm * c / m0);
}

ImpulseShift impulse_shift(const Vec3& lambda_v, const ImpulseSpec& spec, double m0, double c)
{
  ImpulseShift out;
  const double n = lambda_v.norm();
  if (!(n > kCostateFloor)) return out;
  const Vec3 dir = lambda_v / n;

  if (impulse_switch(n, spec.dv_max, m0, c) > 0.0) {
    out.branch = ImpulseBranch::Binding;
    out.dv = spec.dv_max;
  } else {
    out.branch = ImpulseBranch::NonBinding;
    const double raw = interior_impulse_magnitude(n, m0, c);
    out.dv = std::clamp(raw, 0.0, spec.dv_max);
    out.clamped = out.dv != raw;
  }
  out.delta_v2 = -out.dv * dir;
  return out;
}

double mass_after_impulse(double m0, double dv, double c) { return m0 * std::exp(-dv / c); }

std::pair<StateVec, BoundaryResult> apply_initial_conditions(const StateVec& x_ref0,
                                                             const CostateVec& lambda0,
                                                             const BoundarySpec& spec,
                                                             const Propulsion& propulsion)
{
  BoundaryResult res;
  res.m_star = propulsion.m0;
  if (spec.ellipsoid) {
    res.delta_r = ellipsoid_position_shift(lambda0.lambda_r, *spec.ellipsoid, &res.degenerate_r);
    res.delta_v1 = ellipsoid_velocity_shift(lambda0.lambda_v, *spec.ellipsoid, &res.degenerate_v);
  }
  if (spec.impulse) {
    const auto imp = impulse_shift(lambda0.lambda_v, *spec.impulse, propulsion.m0,
                                   propulsion.exhaust_velocity);
    res.delta_v2 = imp.delta_v2;
    res.dv = imp.dv;
    res.branch = imp.branch;
    res.clamped = imp.clamped;
    res.m_star = mass_after_impulse(propulsion.m0, res.dv, propulsion.exhaust_velocity);
  }
  Vec6 x = x_ref0.x;
  x.head<3>() += res.delta_r;
  x.tail<3>() += res.delta_v1 + res.delta_v2;
  return {StateVec(x, x_ref0.frame), res};
}

}  // namespace reach
