#pragma once

// Reachable-set determination: terminal costate sampling, backward costate
// recursion through the stored state-transition matrices, primer-vector
// steering, and one nonlinear forward reconstruction per sample.

#include "reach/boundary.hpp"
#include "reach/propagation.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace reach {

/// Below this |Fu^T lambda| the primer direction is undefined.
inline constexpr double kPrimerFloor = 1e-30;

using ControlSchedule = std::vector<Vec3>;

enum class SampleStatus
{
  Ok,
  Discarded,
};

struct SampledTrajectory
{
  std::size_t id = 0;
  CostateVec lambda_terminal;
  ControlSchedule controls;       // empty unless histories are kept
  std::vector<StateVec> states;   // N + 1 stage-boundary states when kept
  std::vector<double> masses;     // mass at each stored state
  StateVec initial;
  StateVec terminal;
  double terminal_mass = 0.0;
  std::optional<BoundaryResult> boundary;
  SampleStatus status = SampleStatus::Ok;
  std::string failure;

  bool ok() const { return status == SampleStatus::Ok; }
};

struct ReachStats
{
  std::size_t attempted = 0;
  std::size_t succeeded = 0;
  std::size_t discarded = 0;
  std::size_t clamped = 0;
  std::size_t binding = 0;
  std::size_t non_binding = 0;
  double reference_seconds = 0.0;  // wall
  double sampling_seconds = 0.0;   // summed over workers
  double reconstruction_seconds = 0.0;
};

struct ReachableSet
{
  std::shared_ptr<const ReferenceTrajectory> reference;
  std::vector<SampledTrajectory> samples;
  std::uint64_t seed = 0;
  double wall_time = 0.0;
  ReachStats stats;

  std::size_t surviving() const { return stats.succeeded; }
};

struct ReachOptions
{
  std::size_t samples = 1;
  std::uint64_t seed = 0;
  BoundarySpec boundary;
  IntegratorConfig integrator;
  unsigned threads = 0;  // 0: hardware concurrency
  bool keep_history = false;
  double failure_threshold = 0.01;
  /// Use these terminal costates instead of random draws (size must match).
  std::optional<std::vector<CostateVec>> terminal_costates;
};

/// Terminal costate of sample `j`: a normalized 6-D standard Gaussian drawn
/// from a generator seeded by (seed, j).
CostateVec sample_terminal_costate(std::uint64_t seed, std::size_t j);
std::vector<CostateVec> sample_terminal_costates(std::size_t count, std::uint64_t seed);

/// lambda^i = Fx^i^T lambda^{i+1}, returned for i = 0..N (lambda^N first input).
std::vector<CostateVec> backward_costates(const CostateVec& lambda_terminal,
                                          const ReferenceTrajectory& reference);

/// alpha = -Fu^T lambda / |Fu^T lambda|. Throws DegeneratePrimer below the floor.
Vec3 stage_control(const Mat63& fu, const CostateVec& lambda_next);

/// Per-stage steering for one terminal costate (backward recursion + primer law).
ControlSchedule controls_for(const CostateVec& lambda_terminal, const ReferenceTrajectory& reference);

/// Full-thrust nonlinear propagation under the zero-order-hold schedule.
SampledTrajectory reconstruct_trajectory(const ReferenceTrajectory& reference,
                                         const ControlSchedule& controls, const StateVec& x_init,
                                         double m_init, const IntegratorConfig& cfg,
                                         bool keep_history = true);

/// First-order terminal deviation from the reference,
/// sum_i Phi(t_N, t_{i+1}) Fu^i alpha^i.
Vec6 linear_terminal_deviation(const ReferenceTrajectory& reference, const ControlSchedule& controls);

ReachableSet compute_reachable_set(std::shared_ptr<const ReferenceTrajectory> reference,
                                   const ReachOptions& options);

ReachableSet compute_reachable_set(const Dynamics& dyn, const StateVec& x0, std::size_t stages,
                                   double dt, const ReachOptions& options);

unsigned resolve_threads(unsigned requested);

}  // namespace reach
