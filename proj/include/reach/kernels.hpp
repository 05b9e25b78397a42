#pragma once

// Data-parallel inner loops with a scalar reference implementation and an
// AVX2 variant chosen at runtime. Both variants evaluate the same operation
// sequence without FMA contraction, so their outputs are bitwise identical;
// the equivalence tests hold them to that.

#include <cstddef>
#include <optional>
#include <span>

namespace reach::kernels {

enum class Isa
{
  Scalar,
  Avx2,
};

const char* to_string(Isa isa);

bool isa_available(Isa isa);

/// The variant used by the dispatching entry points. Defaults to the best
/// available; `REACH_FORCE_SCALAR=1` in the environment pins Scalar.
Isa active_isa();

/// Overrides the dispatch choice (nullopt restores automatic selection).
/// Requesting an unavailable ISA falls back to Scalar.
void force_isa(std::optional<Isa> isa);

/// Batched backward costate sweep and primer-vector steering.
///
/// Layouts (B = batch):
///   fx        N x 36, stage-major, row-major 6x6 per stage
///   fu        N x 18, stage-major, row-major 6x3 per stage
///   lambda    6 x B on input (terminal costates, component-major); holds
///             the stage-0 costates on return
///   controls  N x 3 x B, steering of stage i in controls[(3 i + k) B + b]
///   primer    N x B, |Fu^T lambda^{i+1}| per stage and sample
struct BackwardSweepArgs
{
  std::span<const double> fx;
  std::span<const double> fu;
  std::size_t stages = 0;
  std::size_t batch = 0;
  std::span<double> lambda;
  std::span<double> controls;
  std::span<double> primer;
};

void backward_sweep(const BackwardSweepArgs& args);

/// For each query q (SoA, pre-centered like the planes), the maximum over
/// planes of n . q - d and the first plane index attaining it.
struct PlaneScanArgs
{
  std::span<const double> nx, ny, nz, d;
  std::span<const double> qx, qy, qz;
  std::span<double> max_distance;
  std::span<std::size_t> argmax;
};

void max_plane_distance(const PlaneScanArgs& args);

/// Minimum squared Euclidean distance from (x, y, z) to the SoA point set;
/// +inf for an empty set.
double min_sq_distance(std::span<const double> px, std::span<const double> py,
                       std::span<const double> pz, double x, double y, double z);

namespace scalar {
void backward_sweep(const BackwardSweepArgs& args);
void max_plane_distance(const PlaneScanArgs& args);
double min_sq_distance(std::span<const double> px, std::span<const double> py,
                       std::span<const double> pz, double x, double y, double z);
}  // namespace scalar

#if defined(REACH_HAVE_AVX2)
namespace avx2 {
void backward_sweep(const BackwardSweepArgs& args);
void max_plane_distance(const PlaneScanArgs& args);
double min_sq_distance(std::span<const double> px, std::span<const double> py,
                       std::span<const double> pz, double x, double y, double z);
}  // namespace avx2
#endif

}  // namespace reach::kernels
