#pragma once

// Periodic-orbit monodromy, spectrum classification and stable/unstable
// invariant manifolds in the CR3BP.

#include "reach/propagation.hpp"

#include <array>
#include <complex>
#include <vector>

namespace reach {

/// Default seed offset along the eigenvectors (nondimensional).
inline constexpr double kManifoldEpsilon = 1e-6;
/// Hyperbolicity margin: a real eigenvalue must exceed 1 + this in modulus.
inline constexpr double kHyperbolicMargin = 1e-4;

struct PeriodicOrbitSpec
{
  StateVec x0;
  double period = 0.0;  // nondimensional
  std::size_t n_fixed_points = 50;

  void validate() const;
};

struct MonodromyDecomposition
{
  Mat6 m = Mat6::Identity();
  std::array<std::complex<double>, 6> eigenvalues{};
  double lambda_unstable = 0.0;
  double lambda_stable = 0.0;
  Vec6 xi_unstable = Vec6::Zero();
  Vec6 xi_stable = Vec6::Zero();
};

/// Phi over one period from `fixed_point`, ballistic.
Mat6 monodromy(const Cr3bpModel& model, const PeriodicOrbitSpec& orbit, const StateVec& fixed_point,
               const IntegratorConfig& cfg);

/// Splits the spectrum into the real unstable/stable pair and the rest.
/// Eigenvectors are unit-norm with their largest-magnitude component positive.
/// Throws ClassificationFailed when no real eigenvalue exceeds 1 + margin.
MonodromyDecomposition classify_spectrum(const Mat6& m);

/// Largest relative mismatch between each eigenvalue and the reciprocal of
/// its best partner in the spectrum.
double reciprocal_pairing_error(const std::array<std::complex<double>, 6>& eigenvalues);

enum class ManifoldKind
{
  Stable,
  Unstable,
};

const char* to_string(ManifoldKind kind);

/// x + s eps xi, with xi the stable or unstable eigenvector.
StateVec manifold_seed(const MonodromyDecomposition& decomp, const StateVec& fixed_point,
                       ManifoldKind kind, double epsilon, int s);

struct ManifoldBranch
{
  ManifoldKind kind = ManifoldKind::Unstable;
  int s = 1;
  double epsilon = kManifoldEpsilon;
  /// One ballistic history per fixed point; time runs forward for unstable
  /// branches and backward for stable ones.
  std::vector<std::vector<StateVec>> trajectories;
};

/// `n_fixed_points` states evenly spaced in time along the orbit, starting at x0.
std::vector<StateVec> orbit_fixed_points(const Cr3bpModel& model, const PeriodicOrbitSpec& orbit,
                                         const IntegratorConfig& cfg);

struct ManifoldSet
{
  std::vector<StateVec> fixed_points;
  std::vector<MonodromyDecomposition> decompositions;
  std::vector<ManifoldBranch> branches;  // stable -, stable +, unstable -, unstable +
};

/// Monodromy decomposition at every fixed point, then the four branches
/// propagated over `horizon` with `intervals` output intervals each.
ManifoldSet propagate_manifolds(const Cr3bpModel& model, const PeriodicOrbitSpec& orbit,
                                double epsilon, double horizon, std::size_t intervals,
                                const IntegratorConfig& cfg, unsigned threads = 0);

/// |flow(x0, T) - x0| in nondimensional units.
double orbit_closure_check(const Cr3bpModel& model, const PeriodicOrbitSpec& orbit,
                           const IntegratorConfig& cfg);

/// Newton correction of an xz-symmetric orbit (y0 = vx0 = vz0 = 0) with x0
/// held fixed. Adjusts z0, vy0 and the half period until y, vx and vz vanish
/// at the half period. Planar orbits (z0 = vz0 = 0) adjust vy0 and the half
/// period only. Throws StepFailure if it does not converge.
PeriodicOrbitSpec correct_symmetric_orbit(const Cr3bpModel& model, const PeriodicOrbitSpec& guess,
                                          const IntegratorConfig& cfg, double tol = 1e-12,
                                          int max_iterations = 30);

}  // namespace reach
