#include "reach/manifolds.hpp"

#include "parallel.hpp"
#include "reach/reachability.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace reach {

namespace {

Dynamics ballistic_dynamics(const Cr3bpModel& model) { return Dynamics::ballistic(Model(model)); }

Vec6 oriented_unit(const Eigen::Matrix<std::complex<double>, 6, 1>& v)
{
  // Rotate the complex vector so its largest component is real, then take the real part.
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  const std::complex<double> phase = std::abs(v[k]) > 0.0 ? v[k] / std::abs(v[k]) : 1.0;
  Vec6 out = (v / phase).real();
  out.normalize();
  Eigen::Index j = 0;
  out.cwiseAbs().maxCoeff(&j);
  if (out[j] < 0.0) out = -out;
  return out;
}

}  // namespace

void PeriodicOrbitSpec::validate() const
{
  if (!(period > 0.0) || !std::isfinite(period)) throw InvalidArgument("orbit period must be > 0");
  if (n_fixed_points < 1) throw InvalidArgument("n_fixed_points must be >= 1");
  if (x0.frame != Frame::SynodicRotating) throw FrameMismatch("periodic orbit must be synodic");
  if (!x0.finite()) throw InvalidArgument("orbit state must be finite");
}

const char* to_string(ManifoldKind kind)
{
  return kind == ManifoldKind::Stable ? "stable" : "unstable";
}

Mat6 monodromy(const Cr3bpModel& model, const PeriodicOrbitSpec& orbit, const StateVec& fixed_point,
               const IntegratorConfig& cfg)
{
  orbit.validate();
  return propagate_ballistic_stm(ballistic_dynamics(model), fixed_point, orbit.period, cfg).fx;
}

MonodromyDecomposition classify_spectrum(const Mat6& m)
{
  if (!m.allFinite()) throw ClassificationFailed("monodromy matrix has non-finite entries");
  Eigen::EigenSolver<Mat6> es(m, true);
  if (es.info() != Eigen::Success) throw ClassificationFailed("eigenvalue iteration did not converge");

  MonodromyDecomposition out;
  out.m = m;
  const auto values = es.eigenvalues();
  for (int i = 0; i < 6; ++i) out.eigenvalues[i] = values[i];

  auto is_real = [](std::complex<double> z) {
    return std::abs(z.imag()) <= 1e-9 * std::max(1.0, std::abs(z));
  };
  int iu = -1;
  int is = -1;
  for (int i = 0; i < 6; ++i) {
    if (!is_real(values[i])) continue;
    const double a = std::abs(values[i].real());
    if (a > 1.0 + kHyperbolicMargin && (iu < 0 || a > std::abs(values[iu].real()))) iu = i;
    if (a < 1.0 - kHyperbolicMargin && (is < 0 || a < std::abs(values[is].real()))) is = i;
  }
  if (iu < 0) throw ClassificationFailed("no real eigenvalue with modulus above 1 + 1e-4");
  if (is < 0) throw ClassificationFailed("no real stable eigenvalue paired with the unstable one");

  const auto vectors = es.eigenvectors();
  out.lambda_unstable = values[iu].real();
  out.lambda_stable = values[is].real();
  out.xi_unstable = oriented_unit(vectors.col(iu));
  out.xi_stable = oriented_unit(vectors.col(is));
  return out;
}

double reciprocal_pairing_error(const std::array<std::complex<double>, 6>& eigenvalues)
{
  double worst = 0.0;
  for (const auto& a : eigenvalues) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : eigenvalues) best = std::min(best, std::abs(a * b - 1.0));
    worst = std::max(worst, best);
  }
  return worst;
}

StateVec manifold_seed(const MonodromyDecomposition& decomp, const StateVec& fixed_point,
                       ManifoldKind kind, double epsilon, int s)
{
  if (s != 1 && s != -1) throw InvalidArgument("manifold direction s must be +1 or -1");
  if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be >= 0");
  if (epsilon == 0.0) return fixed_point;
  const Vec6& xi = kind == ManifoldKind::Stable ? decomp.xi_stable : decomp.xi_unstable;
  return StateVec(Vec6(fixed_point.x + (s * epsilon) * xi), fixed_point.frame);
}

std::vector<StateVec> orbit_fixed_points(const Cr3bpModel& model, const PeriodicOrbitSpec& orbit,
                                         const IntegratorConfig& cfg)
{
  orbit.validate();
  auto states = sample_ballistic(ballistic_dynamics(model), orbit.x0, orbit.period,
                                 orbit.n_fixed_points, cfg);
  states.resize(orbit.n_fixed_points);
  return states;
}

ManifoldSet propagate_manifolds(const Cr3bpModel& model, const PeriodicOrbitSpec& orbit,
                                double epsilon, double horizon, std::size_t intervals,
                                const IntegratorConfig& cfg, unsigned threads)
{
  if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be >= 0");
  if (!(horizon >= 0.0)) throw InvalidArgument("manifold horizon must be >= 0");
  if (intervals < 1) throw InvalidArgument("intervals must be >= 1");
  const unsigned workers = resolve_threads(threads);
  const Dynamics dyn = ballistic_dynamics(model);

  ManifoldSet set;
  set.fixed_points = orbit_fixed_points(model, orbit, cfg);
  const std::size_t n = set.fixed_points.size();
  set.decompositions.resize(n);
  detail::parallel_for(n, workers, [&](std::size_t i) {
    set.decompositions[i] = classify_spectrum(monodromy(model, orbit, set.fixed_points[i], cfg));
  });

  const ManifoldKind kinds[2] = {ManifoldKind::Stable, ManifoldKind::Unstable};
  const int signs[2] = {-1, 1};
  for (ManifoldKind kind : kinds) {
    for (int s : signs) {
      ManifoldBranch b;
      b.kind = kind;
      b.s = s;
      b.epsilon = epsilon;
      b.trajectories.resize(n);
      set.branches.push_back(std::move(b));
    }
  }
  detail::parallel_for(4 * n, workers, [&](std::size_t k) {
    ManifoldBranch& b = set.branches[k / n];
    const std::size_t i = k % n;
    const StateVec seed = manifold_seed(set.decompositions[i], set.fixed_points[i], b.kind, epsilon, b.s);
    if (horizon == 0.0) {
      b.trajectories[i] = {seed};
      return;
    }
    const double duration = b.kind == ManifoldKind::Stable ? -horizon : horizon;
    b.trajectories[i] = sample_ballistic(dyn, seed, duration, intervals, cfg);
  });
  return set;
}

double orbit_closure_check(const Cr3bpModel& model, const PeriodicOrbitSpec& orbit,
                           const IntegratorConfig& cfg)
{
  orbit.validate();
  const auto states = sample_ballistic(ballistic_dynamics(model), orbit.x0, orbit.period, 1, cfg);
  return (states.back().x - orbit.x0.x).norm();
}

PeriodicOrbitSpec correct_symmetric_orbit(const Cr3bpModel& model, const PeriodicOrbitSpec& guess,
                                          const IntegratorConfig& cfg, double tol, int max_iterations)
{
  guess.validate();
  const Dynamics dyn = ballistic_dynamics(model);
  Vec6 x0 = guess.x0.x;
  x0[1] = 0.0;
  x0[3] = 0.0;
  x0[5] = 0.0;
  const bool planar = x0[2] == 0.0;
  double half = 0.5 * guess.period;

  for (int it = 0; it < max_iterations; ++it) {
    const StateVec start(x0, Frame::SynodicRotating);
    const auto var = propagate_ballistic_stm(dyn, start, half, cfg);
    const Vec6& xf = var.x_end.x;
    const Vec6 f = dyn.rates(var.x_end, Vec3::Zero(), 1.0);
    const Mat6& phi = var.fx;

    if (planar) {
      const Eigen::Vector2d g(xf[1], xf[3]);
      if (g.norm() < tol) break;
      Eigen::Matrix2d jac;
      jac << phi(1, 4), f[1],
             phi(3, 4), f[3];
      const Eigen::Vector2d step = jac.partialPivLu().solve(g);
      x0[4] -= step[0];
      half -= step[1];
    } else {
      const Vec3 g(xf[1], xf[3], xf[5]);
      if (g.norm() < tol) break;
      Mat3 jac;
      jac << phi(1, 2), phi(1, 4), f[1],
             phi(3, 2), phi(3, 4), f[3],
             phi(5, 2), phi(5, 4), f[5];
      const Vec3 step = jac.partialPivLu().solve(g);
      x0[2] -= step[0];
      x0[4] -= step[1];
      half -= step[2];
    }
    if (!x0.allFinite() || !(half > 0.0)) throw StepFailure("differential correction diverged");
    if (it + 1 == max_iterations) throw StepFailure("differential correction did not converge");
  }

  PeriodicOrbitSpec out = guess;
  out.x0 = StateVec(x0, Frame::SynodicRotating);
  out.period = 2.0 * half;
  return out;
}

}  // namespace reach
