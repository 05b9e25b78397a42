#include "reach/reachability.hpp"

#include "reach/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <random>
#include <thread>

namespace reach {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Samples per work item. Fixed so the grouping never depends on worker count.
constexpr std::size_t kChunk = 64;

}  // namespace

CostateVec sample_terminal_costate(std::uint64_t seed, std::size_t j)
{
  const auto jj = static_cast<std::uint64_t>(j);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(jj), static_cast<std::uint32_t>(jj >> 32)};
  std::mt19937_64 gen(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec6 l;
  do {
    for (int i = 0; i < 6; ++i) l[i] = normal(gen);
  } while (!(l.norm() > 0.0));
  return CostateVec(Vec6(l / l.norm()));
}

std::vector<CostateVec> sample_terminal_costates(std::size_t count, std::uint64_t seed)
{
  std::vector<CostateVec> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) out.push_back(sample_terminal_costate(seed, j));
  return out;
}

std::vector<CostateVec> backward_costates(const CostateVec& lambda_terminal,
                                          const ReferenceTrajectory& reference)
{
  const std::size_t n = reference.size();
  std::vector<CostateVec> out(n + 1);
  out[n] = lambda_terminal;
  Vec6 l = lambda_terminal.vector();
  for (std::size_t i = n; i-- > 0;) {
    l = reference.stages[i].fx.transpose() * l;
    out[i] = CostateVec(l);
  }
  return out;
}

Vec3 stage_control(const Mat63& fu, const CostateVec& lambda_next)
{
  const Vec3 g = fu.transpose() * lambda_next.vector();
  const double n = g.norm();
  if (!(n > kPrimerFloor) || !std::isfinite(n)) {
    throw DegeneratePrimer("|Fu^T lambda| = " + std::to_string(n));
  }
  return -g / n;
}

ControlSchedule controls_for(const CostateVec& lambda_terminal, const ReferenceTrajectory& reference)
{
  const auto lambdas = backward_costates(lambda_terminal, reference);
  ControlSchedule out(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i) {
    out[i] = stage_control(reference.stages[i].fu, lambdas[i + 1]);
  }
  return out;
}

SampledTrajectory reconstruct_trajectory(const ReferenceTrajectory& reference,
                                         const ControlSchedule& controls, const StateVec& x_init,
                                         double m_init, const IntegratorConfig& cfg,
                                         bool keep_history)
{
  const std::size_t n = reference.size();
  if (controls.size() != n) throw InvalidArgument("control schedule length must equal stage count");
  const Dynamics& dyn = reference.dynamics;
  const MassProfile profile = dyn.propulsion().profile_from(m_init);

  SampledTrajectory out;
  out.initial = x_init;
  if (keep_history) {
    out.controls = controls;
    out.states.reserve(n + 1);
    out.masses.reserve(n + 1);
    out.states.push_back(x_init);
    out.masses.push_back(m_init);
  }
  StateVec x = x_init;
  double hint = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& st = reference.stages[i];
    const double mi = profile.mass_at(st.t, reference.t0);
    x = integrate_stage(dyn, x, controls[i], MassProfile{mi, profile.mdot}, st.t, st.dt, cfg, &hint);
    if (keep_history) {
      out.states.push_back(x);
      out.masses.push_back(profile.mass_at(st.t + st.dt, reference.t0));
    }
  }
  out.terminal = x;
  out.terminal_mass = profile.mass_at(reference.t0 + reference.horizon(), reference.t0);
  return out;
}

Vec6 linear_terminal_deviation(const ReferenceTrajectory& reference, const ControlSchedule& controls)
{
  if (controls.size() != reference.size()) throw InvalidArgument("control schedule length mismatch");
  Vec6 dev = Vec6::Zero();
  Mat6 tail = Mat6::Identity();  // Phi(t_N, t_{i+1})
  for (std::size_t i = reference.size(); i-- > 0;) {
    dev += tail * (reference.stages[i].fu * controls[i]);
    tail = tail * reference.stages[i].fx;
  }
  return dev;
}

unsigned resolve_threads(unsigned requested)
{
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

ReachableSet compute_reachable_set(std::shared_ptr<const ReferenceTrajectory> reference,
                                   const ReachOptions& options)
{
  if (!reference || reference->size() == 0) throw InvalidArgument("reference trajectory is empty");
  if (options.samples < 1) throw InvalidArgument("sample count must be >= 1");
  if (options.terminal_costates && options.terminal_costates->size() != options.samples) {
    throw InvalidArgument("terminal costate list length must equal sample count");
  }
  options.integrator.validate();

  const auto start = Clock::now();
  const ReferenceTrajectory& ref = *reference;
  const std::size_t n = ref.size();
  const std::size_t total = options.samples;
  const std::vector<double> fx = ref.packed_fx();
  const std::vector<double> fu = ref.packed_fu();
  const Propulsion& prop = ref.dynamics.propulsion();
  const StateVec x_ref0 = ref.stages.front().x_ref;

  ReachableSet set;
  set.reference = reference;
  set.seed = options.seed;
  set.samples.resize(total);

  const std::size_t chunks = (total + kChunk - 1) / kChunk;
  std::atomic<std::size_t> next{0};
  std::mutex timing_mutex;
  double sampling_s = 0.0;
  double recon_s = 0.0;

  auto worker = [&]() {
    std::vector<double> lam(6 * kChunk);
    std::vector<double> ctrl(n * 3 * kChunk);
    std::vector<double> primer(n * kChunk);
    double my_sampling = 0.0;
    double my_recon = 0.0;

    for (std::size_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
      const std::size_t first = c * kChunk;
      const std::size_t count = std::min(kChunk, total - first);

      const auto t_sample = Clock::now();
      std::vector<CostateVec> terminal(count);
      for (std::size_t b = 0; b < count; ++b) {
        terminal[b] = options.terminal_costates ? (*options.terminal_costates)[first + b]
                                                : sample_terminal_costate(options.seed, first + b);
        const Vec6 v = terminal[b].vector();
        for (int r = 0; r < 6; ++r) lam[r * count + b] = v[r];
      }
      kernels::backward_sweep({fx, fu, n, count, std::span<double>(lam.data(), 6 * count),
                               std::span<double>(ctrl.data(), n * 3 * count),
                               std::span<double>(primer.data(), n * count)});
      my_sampling += seconds_since(t_sample);

      const auto t_recon = Clock::now();
      for (std::size_t b = 0; b < count; ++b) {
        SampledTrajectory& out = set.samples[first + b];
        const std::size_t id = first + b;
        bool degenerate = false;
        for (std::size_t i = 0; i < n; ++i) {
          const double p = primer[i * count + b];
          if (!(p > kPrimerFloor) || !std::isfinite(p)) {
            degenerate = true;
            break;
          }
        }
        if (degenerate) {
          out.id = id;
          out.lambda_terminal = terminal[b];
          out.status = SampleStatus::Discarded;
          out.failure = "DegeneratePrimer";
          continue;
        }
        ControlSchedule controls(n);
        for (std::size_t i = 0; i < n; ++i) {
          for (int k = 0; k < 3; ++k) controls[i][k] = ctrl[(3 * i + k) * count + b];
        }
        Vec6 l0;
        for (int r = 0; r < 6; ++r) l0[r] = lam[r * count + b];

        try {
          StateVec x_init = x_ref0;
          double m_init = prop.m0;
          std::optional<BoundaryResult> boundary;
          if (options.boundary.active()) {
            auto [x_star, res] = apply_initial_conditions(x_ref0, CostateVec(l0), options.boundary, prop);
            x_init = x_star;
            m_init = res.m_star;
            boundary = res;
          }
          out = reconstruct_trajectory(ref, controls, x_init, m_init, options.integrator,
                                       options.keep_history);
          out.boundary = boundary;
        } catch (const Error& e) {
          out = SampledTrajectory{};
          out.status = SampleStatus::Discarded;
          out.failure = e.what();
        }
        out.id = id;
        out.lambda_terminal = terminal[b];
      }
      my_recon += seconds_since(t_recon);
    }
    std::lock_guard lock(timing_mutex);
    sampling_s += my_sampling;
    recon_s += my_recon;
  };

  const unsigned threads = std::min<unsigned>(resolve_threads(options.threads),
                                              static_cast<unsigned>(std::max<std::size_t>(chunks, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  ReachStats& st = set.stats;
  st.attempted = total;
  for (const auto& s : set.samples) {
    if (!s.ok()) {
      ++st.discarded;
      continue;
    }
    ++st.succeeded;
    if (s.boundary) {
      if (s.boundary->clamped) ++st.clamped;
      if (s.boundary->branch == ImpulseBranch::Binding) ++st.binding;
      if (s.boundary->branch == ImpulseBranch::NonBinding) ++st.non_binding;
    }
  }
  st.sampling_seconds = sampling_s;
  st.reconstruction_seconds = recon_s;
  set.wall_time = seconds_since(start);

  if (static_cast<double>(st.discarded) > options.failure_threshold * static_cast<double>(total)) {
    throw BatchFailure(std::to_string(st.discarded) + " of " + std::to_string(total) +
                       " samples failed (threshold " + std::to_string(options.failure_threshold) + ")");
  }
  return set;
}

ReachableSet compute_reachable_set(const Dynamics& dyn, const StateVec& x0, std::size_t stages,
                                   double dt, const ReachOptions& options)
{
  const auto start = Clock::now();
  auto ref = std::make_shared<const ReferenceTrajectory>(
    build_reference(dyn, x0, stages, dt, options.integrator));
  const double ref_s = seconds_since(start);
  ReachableSet set = compute_reachable_set(std::move(ref), options);
  set.stats.reference_seconds = ref_s;
  set.wall_time += ref_s;
  return set;
}

}  // namespace reach
