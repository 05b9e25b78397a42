#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace reach {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

#define REACH_DEFINE_ERROR(Name)                                               \
  class Name : public Error                                                    \
  {                                                                            \
  public:                                                                      \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {}       \
  };

REACH_DEFINE_ERROR(InvalidArgument)
REACH_DEFINE_ERROR(SingularState)
REACH_DEFINE_ERROR(NonUnitControl)
REACH_DEFINE_ERROR(NonpositiveMass)
REACH_DEFINE_ERROR(MassDepleted)
REACH_DEFINE_ERROR(FrameMismatch)
REACH_DEFINE_ERROR(StepFailure)
REACH_DEFINE_ERROR(DegeneratePrimer)
REACH_DEFINE_ERROR(DegenerateCloud)
REACH_DEFINE_ERROR(EmptySet)
REACH_DEFINE_ERROR(ClassificationFailed)
REACH_DEFINE_ERROR(BatchFailure)

#undef REACH_DEFINE_ERROR

// ---------------------------------------------------------------------------
// State vector
// ---------------------------------------------------------------------------

enum class Frame
{
  HelioInertial,
  SynodicRotating,
};

const char* to_string(Frame frame);

/// Position/velocity state tagged with the frame it lives in. Units are the
/// owning model's units (km and km/s for two-body, nondimensional for CR3BP).
struct StateVec
{
  Vec6 x = Vec6::Zero();
  Frame frame = Frame::HelioInertial;

  StateVec() = default;
  StateVec(const Vec6& values, Frame f);
  StateVec(const Vec3& r, const Vec3& v, Frame f);

  Vec3 r() const { return x.head<3>(); }
  Vec3 v() const { return x.tail<3>(); }
  bool finite() const { return x.allFinite(); }
};

/// Costate conjugate to StateVec.
struct CostateVec
{
  Vec3 lambda_r = Vec3::Zero();
  Vec3 lambda_v = Vec3::Zero();

  CostateVec() = default;
  CostateVec(const Vec3& r, const Vec3& v) : lambda_r(r), lambda_v(v) {}
  explicit CostateVec(const Vec6& l) : lambda_r(l.head<3>()), lambda_v(l.tail<3>()) {}

  Vec6 vector() const
  {
    Vec6 out;
    out << lambda_r, lambda_v;
    return out;
  }
  double norm() const { return vector().norm(); }
};

}  // namespace reach
