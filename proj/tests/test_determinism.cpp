#include "test_support.hpp"

#include "reach/csv_io.hpp"
#include "reach/kernels.hpp"
#include "reach/scenario.hpp"

#include <gtest/gtest.h>

using namespace reach;

namespace {

std::string run_to_csv(const ScenarioConfig& cfg, unsigned threads, const std::string& tag)
{
  ReachOptions o;
  o.samples = cfg.samples;
  o.seed = cfg.seed;
  o.boundary = cfg.boundary;
  o.integrator = cfg.integrator;
  o.threads = threads;
  o.keep_history = true;
  const auto& h = cfg.horizons.front();
  const auto set = compute_reachable_set(cfg.dynamics(), cfg.x0, h.stages, h.dt, o);
  const auto dir = test::scratch_dir("determinism_" + tag);
  write_trajectories(dir / "trajectories.csv", set);
  write_terminals(dir / "terminals.csv", set);
  return test::slurp(dir / "trajectories.csv") + test::slurp(dir / "terminals.csv");
}

}  // namespace

TEST(Determinism, ThreadCountDoesNotChangeOutput)
{
  ConfigOverrides ov;
  ov.samples = 300;
  for (const char* name : {"l2_halo_150h", "earth_mars_impulse"}) {
    const auto cfg = load_scenario(test::scenario(name), ov);
    const std::string one = run_to_csv(cfg, 1, "1");
    EXPECT_GT(one.size(), 10000u);
    EXPECT_EQ(one, run_to_csv(cfg, 4, "4")) << name;
    EXPECT_EQ(one, run_to_csv(cfg, 8, "8")) << name;
  }
}

TEST(Determinism, KernelVariantDoesNotChangeOutput)
{
  ConfigOverrides ov;
  ov.samples = 130;
  const auto cfg = load_scenario(test::scenario("l2_halo_150h"), ov);
  kernels::force_isa(kernels::Isa::Scalar);
  const std::string scalar = run_to_csv(cfg, 3, "scalar");
  kernels::force_isa(std::nullopt);
  EXPECT_EQ(scalar, run_to_csv(cfg, 3, "auto"));
}
