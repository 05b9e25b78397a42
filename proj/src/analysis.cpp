#include "reach/analysis.hpp"

#include "parallel.hpp"
#include "reach/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

namespace reach {

const char* to_string(CloudSpace space)
{
  return space == CloudSpace::Position ? "position" : "velocity";
}

TerminalCloud terminal_cloud(const ReachableSet& set, CloudSpace space, std::string source)
{
  TerminalCloud cloud;
  cloud.space = space;
  cloud.source = std::move(source);
  cloud.horizon = set.reference ? set.reference->horizon() : 0.0;
  for (const auto& s : set.samples) {
    if (!s.ok()) continue;
    cloud.points.push_back(space == CloudSpace::Position ? s.terminal.r() : s.terminal.v());
    cloud.sample_ids.push_back(s.id);
  }
  if (cloud.points.empty()) throw EmptySet("reachable set has no surviving samples");
  return cloud;
}

namespace {

constexpr std::size_t kQueryChunk = 256;

void scan_chunk(const HullSummary& hull, std::span<const Vec3> queries, std::size_t first,
                std::size_t count, std::vector<ContainmentReport>& out)
{
  std::vector<double> qx(count), qy(count), qz(count), dist(count);
  std::vector<std::size_t> arg(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Vec3 q = queries[first + i] - hull.centroid;
    qx[i] = q[0];
    qy[i] = q[1];
    qz[i] = q[2];
  }
  kernels::max_plane_distance({hull.nx, hull.ny, hull.nz, hull.d, qx, qy, qz, dist, arg});
  for (std::size_t i = 0; i < count; ++i) {
    ContainmentReport& r = out[first + i];
    r.query = queries[first + i];
    r.signed_distance = dist[i];
    r.nearest_facet = arg[i];
    r.inside = dist[i] <= 0.0;
    r.relative_distance = hull.bounding_radius > 0.0 ? std::abs(dist[i]) / hull.bounding_radius : 0.0;
  }
}

}  // namespace

ContainmentReport contains(const HullSummary& hull, const Vec3& query)
{
  if (hull.d.empty()) throw InvalidArgument("hull has no facets");
  std::vector<ContainmentReport> out(1);
  scan_chunk(hull, std::span<const Vec3>(&query, 1), 0, 1, out);
  return out.front();
}

std::vector<ContainmentReport> contains_batch(const HullSummary& hull, std::span<const Vec3> queries,
                                              unsigned threads)
{
  if (hull.d.empty()) throw InvalidArgument("hull has no facets");
  std::vector<ContainmentReport> out(queries.size());
  const std::size_t chunks = (queries.size() + kQueryChunk - 1) / kQueryChunk;
  detail::parallel_for(chunks, resolve_threads(threads), [&](std::size_t c) {
    const std::size_t first = c * kQueryChunk;
    scan_chunk(hull, queries, first, std::min(kQueryChunk, queries.size() - first), out);
  });
  return out;
}

ExtentMetrics set_extent_metrics(std::span<const Vec3> points)
{
  const HullSummary hull = convex_hull(points);
  ExtentMetrics m;
  m.volume = hull.volume;

  // The diameter of a point set is attained between hull vertices.
  for (std::size_t i = 0; i < hull.vertices.size(); ++i) {
    const Vec3& a = points[hull.vertices[i]];
    for (std::size_t j = i + 1; j < hull.vertices.size(); ++j) {
      m.max_extent = std::max(m.max_extent, (a - points[hull.vertices[j]]).norm());
    }
  }

  Vec3 mean = Vec3::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : points) {
    const Vec3 q = p - mean;
    cov += q * q.transpose();
  }
  cov /= static_cast<double>(points.size());
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov, Eigen::EigenvaluesOnly);
  for (int i = 0; i < 3; ++i) {
    m.principal[i] = 2.0 * std::sqrt(3.0 * std::max(0.0, es.eigenvalues()[2 - i]));
  }
  return m;
}

ExtentMetrics set_extent_metrics(const TerminalCloud& cloud)
{
  return set_extent_metrics(std::span<const Vec3>(cloud.points));
}

std::vector<Vec3> manifold_points(const std::vector<ManifoldBranch>& branches)
{
  std::vector<Vec3> out;
  for (const auto& b : branches) {
    for (const auto& traj : b.trajectories) {
      for (const auto& s : traj) out.push_back(s.r());
    }
  }
  return out;
}

namespace {

struct CellKey
{
  std::int64_t i, j, k;
  bool operator==(const CellKey&) const = default;
};

struct CellHash
{
  std::size_t operator()(const CellKey& c) const
  {
    std::uint64_t h = static_cast<std::uint64_t>(c.i) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(c.j) * 0xC2B2AE3D27D4EB4FULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(c.k) * 0x165667B19E3779F9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

struct Cell
{
  std::vector<double> x, y, z;
};

}  // namespace

double manifold_proximity(std::span<const Vec3> terminals, std::span<const Vec3> manifold,
                          double threshold)
{
  if (manifold.empty() || terminals.empty()) return 0.0;
  if (std::isinf(threshold) && threshold > 0.0) return 1.0;
  if (!(threshold >= 0.0)) throw InvalidArgument("proximity threshold must be >= 0");

  // Any cell at least as wide as the threshold gives exact answers; the floor
  // keeps integer cell indices in range for tiny thresholds.
  double extent = 0.0;
  for (const auto& p : manifold) extent = std::max(extent, p.cwiseAbs().maxCoeff());
  for (const auto& p : terminals) extent = std::max(extent, p.cwiseAbs().maxCoeff());
  const double cell = std::max({threshold, extent * 1e-12, std::numeric_limits<double>::min()});
  auto key_of = [cell](const Vec3& p) {
    return CellKey{static_cast<std::int64_t>(std::floor(p[0] / cell)),
                   static_cast<std::int64_t>(std::floor(p[1] / cell)),
                   static_cast<std::int64_t>(std::floor(p[2] / cell))};
  };
  std::unordered_map<CellKey, Cell, CellHash> grid;
  for (const auto& p : manifold) {
    Cell& c = grid[key_of(p)];
    c.x.push_back(p[0]);
    c.y.push_back(p[1]);
    c.z.push_back(p[2]);
  }

  const double t2 = threshold * threshold;
  std::size_t hits = 0;
  for (const auto& q : terminals) {
    const CellKey k = key_of(q);
    bool near = false;
    for (std::int64_t di = -1; di <= 1 && !near; ++di) {
      for (std::int64_t dj = -1; dj <= 1 && !near; ++dj) {
        for (std::int64_t dk = -1; dk <= 1 && !near; ++dk) {
          auto it = grid.find(CellKey{k.i + di, k.j + dj, k.k + dk});
          if (it == grid.end()) continue;
          const Cell& c = it->second;
          near = kernels::min_sq_distance(c.x, c.y, c.z, q[0], q[1], q[2]) <= t2;
        }
      }
    }
    if (near) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(terminals.size());
}

double manifold_proximity(std::span<const Vec3> terminals, const std::vector<ManifoldBranch>& branches,
                          double threshold)
{
  const auto pts = manifold_points(branches);
  return manifold_proximity(terminals, std::span<const Vec3>(pts), threshold);
}

}  // namespace reach
