#include "test_support.hpp"

#include "reach/kernels.hpp"
#include "reach/reachability.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <limits>

using namespace reach;
namespace k = reach::kernels;

namespace {

struct SweepData
{
  std::size_t n, b;
  std::vector<double> fx, fu, lambda, controls, primer;

  SweepData(std::size_t stages, std::size_t batch, std::uint64_t seed)
    : n(stages), b(batch), fx(36 * n), fu(18 * n), lambda(6 * b), controls(3 * n * b), primer(n * b)
  {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> d;
    for (std::size_t i = 0; i < n; ++i)
      for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) fx[36 * i + 6 * r + c] = (r == c ? 1.0 : 0.0) + 0.1 * d(g);
    for (auto& v : fu) v = d(g);
    for (auto& v : lambda) v = d(g);
  }

  k::BackwardSweepArgs args()
  {
    return {fx, fu, n, b, lambda, controls, primer};
  }
};

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b)
{
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST(Kernels, ScalarSweepMatchesEigenRecursion)
{
  SweepData d(25, 5, 1);
  const auto lambda_in = d.lambda;
  k::scalar::backward_sweep(d.args());
  for (std::size_t s = 0; s < d.b; ++s) {
    Vec6 l;
    for (int r = 0; r < 6; ++r) l[r] = lambda_in[r * d.b + s];
    for (std::size_t i = d.n; i-- > 0;) {
      const Mat6 fx = Eigen::Map<const Eigen::Matrix<double, 6, 6, Eigen::RowMajor>>(&d.fx[36 * i]);
      const Mat63 fu = Eigen::Map<const Eigen::Matrix<double, 6, 3, Eigen::RowMajor>>(&d.fu[18 * i]);
      const Vec3 a = stage_control(fu, CostateVec(l));
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(d.controls[(3 * i + c) * d.b + s], a[c], 1e-13);
      EXPECT_NEAR(d.primer[i * d.b + s], (fu.transpose() * l).norm(), 1e-12 * (fu.transpose() * l).norm());
      l = fx.transpose() * l;
    }
    for (int r = 0; r < 6; ++r) EXPECT_NEAR(d.lambda[r * d.b + s], l[r], 1e-12 * l.norm());
  }
}

#if defined(REACH_HAVE_AVX2)

class Avx2Equivalence : public ::testing::Test
{
protected:
  void SetUp() override
  {
    if (!k::isa_available(k::Isa::Avx2)) GTEST_SKIP() << "AVX2 not available on this CPU";
  }
};

TEST_F(Avx2Equivalence, BackwardSweepIsBitwiseEqual)
{
  for (std::size_t batch : {1u, 3u, 4u, 7u, 64u, 67u}) {
    SweepData a(40, batch, batch), b(40, batch, batch);
    k::scalar::backward_sweep(a.args());
    k::avx2::backward_sweep(b.args());
    EXPECT_TRUE(bit_equal(a.lambda, b.lambda)) << batch;
    EXPECT_TRUE(bit_equal(a.controls, b.controls)) << batch;
    EXPECT_TRUE(bit_equal(a.primer, b.primer)) << batch;
  }
}

TEST_F(Avx2Equivalence, PlaneScanIsBitwiseEqual)
{
  std::mt19937_64 g(2);
  std::normal_distribution<double> d;
  for (std::size_t planes : {1u, 4u, 13u, 200u}) {
    for (std::size_t queries : {1u, 5u, 256u, 259u}) {
      auto fill = [&](std::size_t n) {
        std::vector<double> v(n);
        for (auto& x : v) x = d(g);
        return v;
      };
      const auto nx = fill(planes), ny = fill(planes), nz = fill(planes), dd = fill(planes);
      const auto qx = fill(queries), qy = fill(queries), qz = fill(queries);
      std::vector<double> m1(queries), m2(queries);
      std::vector<std::size_t> i1(queries), i2(queries);
      k::scalar::max_plane_distance({nx, ny, nz, dd, qx, qy, qz, m1, i1});
      k::avx2::max_plane_distance({nx, ny, nz, dd, qx, qy, qz, m2, i2});
      EXPECT_TRUE(bit_equal(m1, m2));
      EXPECT_EQ(i1, i2);
    }
  }
}

TEST_F(Avx2Equivalence, MinDistanceIsBitwiseEqual)
{
  std::mt19937_64 g(3);
  std::normal_distribution<double> d;
  for (std::size_t n : {0u, 1u, 3u, 8u, 1001u}) {
    std::vector<double> x(n), y(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = d(g);
      y[i] = d(g);
      z[i] = d(g);
    }
    for (int q = 0; q < 20; ++q) {
      const double a = d(g), b = d(g), c = d(g);
      const double s = k::scalar::min_sq_distance(x, y, z, a, b, c);
      const double v = k::avx2::min_sq_distance(x, y, z, a, b, c);
      EXPECT_EQ(std::memcmp(&s, &v, sizeof s), 0);
      if (n == 0) EXPECT_EQ(s, std::numeric_limits<double>::infinity());
    }
  }
}

#endif

TEST(Kernels, ForcingScalarDispatch)
{
  k::force_isa(k::Isa::Scalar);
  EXPECT_EQ(k::active_isa(), k::Isa::Scalar);
  k::force_isa(std::nullopt);
  EXPECT_TRUE(k::isa_available(k::active_isa()));
}
