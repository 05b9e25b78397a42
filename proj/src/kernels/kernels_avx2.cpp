#include "reach/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <limits>
#include <vector>

namespace reach::kernels::avx2 {

void backward_sweep(const BackwardSweepArgs& a)
{
  const std::size_t B = a.batch;
  const std::size_t full = B - B % 4;
  const __m256d sign = _mm256_set1_pd(-0.0);

  for (std::size_t b = 0; b < full; b += 4) {
    __m256d lam[6];
    for (int r = 0; r < 6; ++r) lam[r] = _mm256_loadu_pd(a.lambda.data() + r * B + b);

    for (std::size_t s = a.stages; s-- > 0;) {
      const double* fu = a.fu.data() + s * 18;
      const double* fx = a.fx.data() + s * 36;

      __m256d g[3];
      for (int k = 0; k < 3; ++k) {
        __m256d acc = _mm256_mul_pd(_mm256_set1_pd(fu[k]), lam[0]);
        for (int r = 1; r < 6; ++r) {
          acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(fu[r * 3 + k]), lam[r]));
        }
        g[k] = acc;
      }
      __m256d n2 = _mm256_add_pd(_mm256_mul_pd(g[0], g[0]), _mm256_mul_pd(g[1], g[1]));
      n2 = _mm256_add_pd(n2, _mm256_mul_pd(g[2], g[2]));
      const __m256d n = _mm256_sqrt_pd(n2);
      _mm256_storeu_pd(a.primer.data() + s * B + b, n);
      for (int k = 0; k < 3; ++k) {
        const __m256d q = _mm256_xor_pd(_mm256_div_pd(g[k], n), sign);
        _mm256_storeu_pd(a.controls.data() + (3 * s + k) * B + b, q);
      }

      __m256d next[6];
      for (int c = 0; c < 6; ++c) {
        __m256d acc = _mm256_mul_pd(_mm256_set1_pd(fx[c]), lam[0]);
        for (int r = 1; r < 6; ++r) {
          acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(fx[r * 6 + c]), lam[r]));
        }
        next[c] = acc;
      }
      for (int c = 0; c < 6; ++c) lam[c] = next[c];
    }
    for (int r = 0; r < 6; ++r) _mm256_storeu_pd(a.lambda.data() + r * B + b, lam[r]);
  }

  if (full < B) {
    // Tail lanes: repack into a contiguous mini-batch for the scalar reference.
    const std::size_t tail = B - full;
    double lam[6 * 4];
    for (int r = 0; r < 6; ++r)
      for (std::size_t t = 0; t < tail; ++t) lam[r * tail + t] = a.lambda[r * B + full + t];
    std::vector<double> ctrl(a.stages * 3 * tail);
    std::vector<double> primer(a.stages * tail);
    BackwardSweepArgs mini{a.fx, a.fu, a.stages, tail, std::span<double>(lam, 6 * tail), ctrl, primer};
    scalar::backward_sweep(mini);
    for (int r = 0; r < 6; ++r)
      for (std::size_t t = 0; t < tail; ++t) a.lambda[r * B + full + t] = lam[r * tail + t];
    for (std::size_t s = 0; s < a.stages; ++s) {
      for (std::size_t t = 0; t < tail; ++t) {
        a.primer[s * B + full + t] = primer[s * tail + t];
        for (int k = 0; k < 3; ++k) {
          a.controls[(3 * s + k) * B + full + t] = ctrl[(3 * s + k) * tail + t];
        }
      }
    }
  }
}

void max_plane_distance(const PlaneScanArgs& a)
{
  const std::size_t nf = a.nx.size();
  const std::size_t full = nf - nf % 4;
  const double ninf = -std::numeric_limits<double>::infinity();

  for (std::size_t q = 0; q < a.qx.size(); ++q) {
    const double qx = a.qx[q], qy = a.qy[q], qz = a.qz[q];
    double best = ninf;
    std::size_t arg = 0;

    if (full > 0) {
      const __m256d vqx = _mm256_set1_pd(qx);
      const __m256d vqy = _mm256_set1_pd(qy);
      const __m256d vqz = _mm256_set1_pd(qz);
      __m256d vbest = _mm256_set1_pd(ninf);
      __m256d vidx = _mm256_setzero_pd();
      __m256d cur = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
      const __m256d four = _mm256_set1_pd(4.0);
      for (std::size_t f = 0; f < full; f += 4) {
        __m256d v = _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(&a.nx[f]), vqx),
                                  _mm256_mul_pd(_mm256_loadu_pd(&a.ny[f]), vqy));
        v = _mm256_add_pd(v, _mm256_mul_pd(_mm256_loadu_pd(&a.nz[f]), vqz));
        v = _mm256_sub_pd(v, _mm256_loadu_pd(&a.d[f]));
        const __m256d gt = _mm256_cmp_pd(v, vbest, _CMP_GT_OQ);
        vbest = _mm256_blendv_pd(vbest, v, gt);
        vidx = _mm256_blendv_pd(vidx, cur, gt);
        cur = _mm256_add_pd(cur, four);
      }
      alignas(32) double lb[4];
      alignas(32) double li[4];
      _mm256_store_pd(lb, vbest);
      _mm256_store_pd(li, vidx);
      for (int l = 0; l < 4; ++l) {
        const auto idx = static_cast<std::size_t>(li[l]);
        if (lb[l] > best || (lb[l] == best && idx < arg)) {
          best = lb[l];
          arg = idx;
        }
      }
    }
    for (std::size_t f = full; f < nf; ++f) {
      const double v = ((a.nx[f] * qx + a.ny[f] * qy) + a.nz[f] * qz) - a.d[f];
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
  const std::size_t n = px.size();
  const std::size_t full = n - n % 4;
  double best = std::numeric_limits<double>::infinity();
  if (full > 0) {
    const __m256d vx = _mm256_set1_pd(x);
    const __m256d vy = _mm256_set1_pd(y);
    const __m256d vz = _mm256_set1_pd(z);
    __m256d vbest = _mm256_set1_pd(best);
    for (std::size_t i = 0; i < full; i += 4) {
      const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(&px[i]), vx);
      const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(&py[i]), vy);
      const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(&pz[i]), vz);
      __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
      d2 = _mm256_add_pd(d2, _mm256_mul_pd(dz, dz));
      vbest = _mm256_min_pd(vbest, d2);
    }
    alignas(32) double lb[4];
    _mm256_store_pd(lb, vbest);
    for (double v : lb)
      if (v < best) best = v;
  }
  for (std::size_t i = full; i < n; ++i) {
    const double dx = px[i] - x;
    const double dy = py[i] - y;
    const double dz = pz[i] - z;
    const double d2 = (dx * dx + dy * dy) + dz * dz;
    if (d2 < best) best = d2;
  }
  return best;
}

}  // namespace reach::kernels::avx2
