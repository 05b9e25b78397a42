#include "reach/kernels.hpp"

#include <cmath>
#include <limits>

namespace reach::kernels::scalar {

namespace {

// One sample of the sweep. `stride` is the batch size of the surrounding
// arrays; the AVX2 variant runs this exact arithmetic four lanes at a time.
void sweep_one(const BackwardSweepArgs& a, std::size_t b)
{
  const std::size_t B = a.batch;
  double lam[6];
  for (int r = 0; r < 6; ++r) lam[r] = a.lambda[r * B + b];

  for (std::size_t s = a.stages; s-- > 0;) {
    const double* fu = a.fu.data() + s * 18;
    const double* fx = a.fx.data() + s * 36;

    double g[3];
    for (int k = 0; k < 3; ++k) {
      double acc = fu[0 * 3 + k] * lam[0];
      for (int r = 1; r < 6; ++r) acc = acc + fu[r * 3 + k] * lam[r];
      g[k] = acc;
    }
    const double n = std::sqrt((g[0] * g[0] + g[1] * g[1]) + g[2] * g[2]);
    a.primer[s * B + b] = n;
    for (int k = 0; k < 3; ++k) a.controls[(3 * s + k) * B + b] = -(g[k] / n);

    double next[6];
    for (int c = 0; c < 6; ++c) {
      double acc = fx[0 * 6 + c] * lam[0];
      for (int r = 1; r < 6; ++r) acc = acc + fx[r * 6 + c] * lam[r];
      next[c] = acc;
    }
    for (int c = 0; c < 6; ++c) lam[c] = next[c];
  }
  for (int r = 0; r < 6; ++r) a.lambda[r * B + b] = lam[r];
}

}  // namespace

void backward_sweep(const BackwardSweepArgs& args)
{
  for (std::size_t b = 0; b < args.batch; ++b) sweep_one(args, b);
}

void max_plane_distance(const PlaneScanArgs& a)
{
  const std::size_t nf = a.nx.size();
  for (std::size_t q = 0; q < a.qx.size(); ++q) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t f = 0; f < nf; ++f) {
      const double v = ((a.nx[f] * a.qx[q] + a.ny[f] * a.qy[q]) + a.nz[f] * a.qz[q]) - a.d[f];
      if (v > best) {
        best = v;
        arg = f;
      }
    }
    a.max_distance[q] = best;
    a.argmax[q] = arg;
  }
}

double min_sq_distance(std::span<const double> px, std::span<const double> py,
                       std::span<const double> pz, double x, double y, double z)
{
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double dx = px[i] - x;
    const double dy = py[i] - y;
    const double dz = pz[i] - z;
    const double d2 = (dx * dx + dy * dy) + dz * dz;
    if (d2 < best) best = d2;
  }
  return best;
}

}  // namespace reach::kernels::scalar
