#include "test_support.hpp"

#include "reach/propagation.hpp"

#include <gtest/gtest.h>

using namespace reach;

namespace {

constexpr double kDay = 86400.0;

StateVec flow(const Dynamics& dyn, const StateVec& x, const Vec3& a, const MassProfile& mp, double dt)
{
  return integrate_stage(dyn, x, a, mp, 0.0, dt, IntegratorConfig{});
}

}  // namespace

TEST(Propagation, TwoBodyMatchesKepler)
{
  const TwoBodyModel tb;
  const Dynamics dyn = Dynamics::ballistic(Model(tb));
  const StateVec x0 = test::earth_departure();
  for (double days : {1.0, 50.0, 200.0}) {
    const auto s = sample_ballistic(dyn, x0, days * kDay, 1, IntegratorConfig{});
    const Vec6 k = test::kepler_propagate(x0.x, tb.mu, days * kDay);
    EXPECT_LT((s.back().r() - k.head<3>()).norm(), 1e-8 * k.head<3>().norm()) << days;
    EXPECT_LT((s.back().v() - k.tail<3>()).norm(), 1e-8 * k.tail<3>().norm()) << days;
  }
}

TEST(Propagation, Rk4AgreesWithAdaptive)
{
  const Dynamics dyn = Dynamics::ballistic(Model(TwoBodyModel{}));
  IntegratorConfig rk;
  rk.method = IntegratorMethod::Rk4Fixed;
  rk.substeps = 20;
  const MassProfile mp;
  const StateVec a = integrate_stage(dyn, test::earth_departure(), Vec3::Zero(), mp, 0.0, kDay, rk);
  const StateVec b = flow(dyn, test::earth_departure(), Vec3::Zero(), mp, kDay);
  EXPECT_LT((a.r() - b.r()).norm(), 1e-9 * b.r().norm());
}

TEST(Propagation, PhiMatchesCentralDifferences)
{
  const Dynamics dyn(Model(TwoBodyModel{}), test::earth_mars_vehicle());
  const StateVec x0 = test::earth_departure();
  const MassProfile mp = dyn.propulsion().profile();
  const auto var = integrate_stage_with_variations(dyn, x0, mp, 0.0, kDay, IntegratorConfig{});
  const Vec6 scale = (Vec6() << 1e8, 1e8, 1e8, 30, 30, 30).finished();
  for (int j = 0; j < 6; ++j) {
    const double h = 1e-7 * scale[j];
    Vec6 p = x0.x, m = x0.x;
    p[j] += h;
    m[j] -= h;
    const Vec6 col = (flow(dyn, StateVec(p, x0.frame), Vec3::Zero(), mp, kDay).x -
                      flow(dyn, StateVec(m, x0.frame), Vec3::Zero(), mp, kDay).x) / (2.0 * h);
    EXPECT_LT((col - var.fx.col(j)).norm(), 1e-5 * var.fx.col(j).norm()) << "column " << j;
  }
}

TEST(Propagation, OmegaMatchesThrustPerturbation)
{
  const Dynamics dyn(Model(Cr3bpModel{}), SpacecraftParams::make(0.2, 3000.0, 1000.0));
  const StateVec x0 = test::l2_halo_state();
  const MassProfile mp = dyn.propulsion().profile();
  const double dt = 0.05;
  const auto var = integrate_stage_with_variations(dyn, x0, mp, 0.0, dt, IntegratorConfig{});
  const double eps = 1e-4;
  const Dynamics weak = dyn.with_thrust_scaled(eps);
  for (int j = 0; j < 3; ++j) {
    const Vec3 e = Vec3::Unit(j);
    const Vec6 col = (flow(weak, x0, e, mp, dt).x - flow(weak, x0, -e, mp, dt).x) / (2.0 * eps);
    EXPECT_LT((col - var.fu.col(j)).norm(), 1e-4 * var.fu.col(j).norm()) << "column " << j;
  }
}

TEST(Propagation, StmSemigroup)
{
  const Dynamics dyn = Dynamics::ballistic(Model(Cr3bpModel{}));
  const IntegratorConfig cfg;
  const StateVec x0 = test::nrho_state();
  const auto a = propagate_ballistic_stm(dyn, x0, 0.4, cfg);
  const auto b = propagate_ballistic_stm(dyn, a.x_end, 0.7, cfg);
  const auto ab = propagate_ballistic_stm(dyn, x0, 1.1, cfg);
  EXPECT_LT((b.fx * a.fx - ab.fx).norm(), 1e-8 * ab.fx.norm());
  EXPECT_LT((b.x_end.x - ab.x_end.x).norm(), 1e-11);
}

TEST(Propagation, BackwardUndoesForward)
{
  const Dynamics dyn = Dynamics::ballistic(Model(Cr3bpModel{}));
  const StateVec x0 = test::l2_halo_state();
  const auto f = sample_ballistic(dyn, x0, 1.5, 3, IntegratorConfig{});
  const auto b = sample_ballistic(dyn, f.back(), -1.5, 3, IntegratorConfig{});
  EXPECT_LT((b.back().x - x0.x).norm(), 1e-10);
}

TEST(Propagation, ReferenceStagesAreConsistent)
{
  const Dynamics dyn(Model(TwoBodyModel{}), test::earth_mars_vehicle());
  const auto ref = build_reference(dyn, test::earth_departure(), 10, kDay, IntegratorConfig{});
  ASSERT_EQ(ref.size(), 10u);
  EXPECT_DOUBLE_EQ(ref.horizon(), 10 * kDay);
  for (std::size_t i = 0; i + 1 < ref.size(); ++i) {
    const StateVec next = flow(dyn, ref.stages[i].x_ref, Vec3::Zero(), ref.mass, kDay);
    EXPECT_LT((next.x - ref.stages[i + 1].x_ref.x).norm(), 1e-6);
    EXPECT_NEAR(ref.stages[i].m_ref, ref.mass.mass_at(ref.stages[i].t, 0.0), 1e-12);
  }
  EXPECT_EQ(ref.packed_fx().size(), 10u * 36u);
  EXPECT_EQ(ref.packed_fu().size(), 10u * 18u);
}

TEST(Propagation, RejectsBadInput)
{
  const Dynamics dyn(Model(TwoBodyModel{}), test::earth_mars_vehicle());
  const MassProfile mp = dyn.propulsion().profile();
  EXPECT_THROW(integrate_stage(dyn, test::earth_departure(), Vec3(1, 0, 0), mp, 0.0, -kDay, IntegratorConfig{}),
               InvalidArgument);
  EXPECT_THROW(integrate_stage(dyn, test::l2_halo_state(), Vec3::Zero(), mp, 0.0, kDay, IntegratorConfig{}),
               FrameMismatch);
  IntegratorConfig tiny;
  tiny.max_steps = 2;
  EXPECT_THROW(integrate_stage(dyn, test::earth_departure(), Vec3::Zero(), mp, 0.0, 100 * kDay, tiny),
               StepFailure);
  EXPECT_THROW(build_reference(dyn, test::earth_departure(), 0, kDay, IntegratorConfig{}), InvalidArgument);
  const MassProfile short_burn{1.0, 1.0};
  EXPECT_THROW(short_burn.mass_at(2.0, 0.0), MassDepleted);
}
