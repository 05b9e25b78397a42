#pragma once

// Stage-wise integration of the state, the state-transition matrix and the
// control-sensitivity matrix, and construction of the ballistic reference.

#include "reach/dynamics.hpp"

#include <cstddef>
#include <vector>

namespace reach {

enum class IntegratorMethod
{
  Rk4Fixed,
  Dp54Adaptive,
};

struct IntegratorConfig
{
  IntegratorMethod method = IntegratorMethod::Dp54Adaptive;
  double rel_tol = 1e-12;
  double abs_tol = 1e-12;
  int substeps = 10;                  // RK4 steps per stage
  std::size_t max_steps = 2'000'000;  // per stage, adaptive mode

  void validate() const;
};

/// Endpoint of the nonlinear flow over one stage with a zero-order-hold
/// steering `alpha` (unit or zero). `dt` may be negative for ballistic
/// backward propagation. `step_hint`, if given, carries the adaptive step
/// size between consecutive stages.
StateVec integrate_stage(const Dynamics& dyn, const StateVec& x0, const Vec3& alpha,
                         const MassProfile& mass, double t0, double dt,
                         const IntegratorConfig& cfg, double* step_hint = nullptr);

struct StageVariations
{
  StateVec x_end;
  Mat6 fx;   // Phi(t0 + dt, t0)
  Mat63 fu;  // Omega(t0 + dt, t0)
};

/// Ballistic stage flow augmented with Phi and Omega (60 states).
StageVariations integrate_stage_with_variations(const Dynamics& dyn, const StateVec& x0,
                                                const MassProfile& mass, double t0, double dt,
                                                const IntegratorConfig& cfg);

struct StageRecord
{
  std::size_t index = 0;
  double t = 0.0;
  double dt = 0.0;
  StateVec x_ref;
  double m_ref = 0.0;
  Mat6 fx = Mat6::Identity();
  Mat63 fu = Mat63::Zero();
};

struct ReferenceTrajectory
{
  Dynamics dynamics;
  std::vector<StageRecord> stages;
  StateVec x_terminal;
  MassProfile mass;
  double t0 = 0.0;

  std::size_t size() const { return stages.size(); }
  double horizon() const { return stages.empty() ? 0.0 : stages.back().t + stages.back().dt - t0; }

  /// Stage-major packed copies used by the batched kernels:
  /// fx: N x 36 row-major, fu: N x 18 row-major.
  std::vector<double> packed_fx() const;
  std::vector<double> packed_fu() const;
};

/// Ballistic reference over `n` stages of length `dt`, with Phi/Omega per stage.
/// Omega uses the depleting minimum-time mass even though the reference
/// itself is unpowered.
ReferenceTrajectory build_reference(const Dynamics& dyn, const StateVec& x0, std::size_t n,
                                    double dt, const IntegratorConfig& cfg, double t0 = 0.0);

/// Ballistic state-transition matrix over `duration` (may be negative).
StageVariations propagate_ballistic_stm(const Dynamics& dyn, const StateVec& x0, double duration,
                                        const IntegratorConfig& cfg);

/// Ballistic states at `intervals + 1` evenly spaced times over `duration`
/// (negative duration propagates backward).
std::vector<StateVec> sample_ballistic(const Dynamics& dyn, const StateVec& x0, double duration,
                                       std::size_t intervals, const IntegratorConfig& cfg);

}  // namespace reach
