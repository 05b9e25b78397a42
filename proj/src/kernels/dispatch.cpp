#include "reach/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace reach::kernels {

namespace {

Isa detect()
{
  const char* env = std::getenv("REACH_FORCE_SCALAR");
  if (env && std::strcmp(env, "0") != 0 && *env != '\0') return Isa::Scalar;
  return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<int> g_forced{-1};

}  // namespace

const char* to_string(Isa isa)
{
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

bool isa_available(Isa isa)
{
  if (isa == Isa::Scalar) return true;
#if defined(REACH_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool avx2 = __builtin_cpu_supports("avx2");
  return avx2;
#else
  return false;
#endif
}

Isa active_isa()
{
  const int forced = g_forced.load(std::memory_order_relaxed);
  if (forced >= 0) return static_cast<Isa>(forced);
  static const Isa detected = detect();
  return detected;
}

void force_isa(std::optional<Isa> isa)
{
  if (!isa) {
    g_forced.store(-1);
    return;
  }
  g_forced.store(static_cast<int>(isa_available(*isa) ? *isa : Isa::Scalar));
}

void backward_sweep(const BackwardSweepArgs& args)
{
#if defined(REACH_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::backward_sweep(args);
#endif
  scalar::backward_sweep(args);
}

void max_plane_distance(const PlaneScanArgs& args)
{
#if defined(REACH_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::max_plane_distance(args);
#endif
  scalar::max_plane_distance(args);
}

double min_sq_distance(std::span<const double> px, std::span<const double> py,
                       std::span<const double> pz, double x, double y, double z)
{
#if defined(REACH_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::min_sq_distance(px, py, pz, x, y, z);
#endif
  return scalar::min_sq_distance(px, py, pz, x, y, z);
}

}  // namespace reach::kernels
