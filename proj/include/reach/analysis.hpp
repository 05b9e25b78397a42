#pragma once

// Post-processing of reachable sets: terminal clouds, 3-D convex hulls,
// containment queries, extent metrics and manifold proximity.

#include "reach/manifolds.hpp"
#include "reach/reachability.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace reach {

enum class CloudSpace
{
  Position,
  Velocity,
};

const char* to_string(CloudSpace space);

struct TerminalCloud
{
  CloudSpace space = CloudSpace::Position;
  std::vector<Vec3> points;
  std::vector<std::size_t> sample_ids;
  double horizon = 0.0;
  std::string source;
};

/// Terminal r or v of every surviving sample, in sample order.
/// Throws EmptySet when nothing survived.
TerminalCloud terminal_cloud(const ReachableSet& set, CloudSpace space, std::string source = {});

/// Rank of the affine hull of the points (0 to 3) at relative tolerance `rel_tol`.
int affine_dimension(std::span<const Vec3> points, double rel_tol = 1e-10);

struct HullSummary
{
  std::vector<Vec3> points;                  // copy of the generating points
  std::vector<std::size_t> vertices;         // indices into points, ascending
  std::vector<std::array<std::size_t, 3>> facets;  // counter-clockwise seen from outside
  double volume = 0.0;
  Vec3 centroid = Vec3::Zero();              // volume centroid
  double bounding_radius = 0.0;              // max vertex distance from centroid

  // Facet planes relative to the centroid: n . (q - centroid) - d.
  std::vector<double> nx, ny, nz, d;
};

/// Quickhull. Throws DegenerateCloud when the points span fewer than three
/// dimensions (the message carries the affine dimension).
HullSummary convex_hull(std::span<const Vec3> points);
HullSummary convex_hull(const TerminalCloud& cloud);

struct ContainmentReport
{
  Vec3 query = Vec3::Zero();
  bool inside = false;
  double signed_distance = 0.0;  // max facet plane distance, negative inside
  std::size_t nearest_facet = 0;
  double relative_distance = 0.0;  // |signed_distance| / bounding_radius
};

ContainmentReport contains(const HullSummary& hull, const Vec3& query);
std::vector<ContainmentReport> contains_batch(const HullSummary& hull, std::span<const Vec3> queries,
                                              unsigned threads = 0);

struct ExtentMetrics
{
  double max_extent = 0.0;           // max pairwise distance
  std::array<double, 3> principal{};  // 2 sqrt(3 var) along covariance axes, descending
  double volume = 0.0;               // convex-hull volume
};

ExtentMetrics set_extent_metrics(std::span<const Vec3> points);
ExtentMetrics set_extent_metrics(const TerminalCloud& cloud);

/// Position components of every state on every branch.
std::vector<Vec3> manifold_points(const std::vector<ManifoldBranch>& branches);

/// Fraction of `terminals` lying within `threshold` of some manifold point.
/// Empty manifold set gives 0; an infinite threshold gives 1.
double manifold_proximity(std::span<const Vec3> terminals, std::span<const Vec3> manifold,
                          double threshold);
double manifold_proximity(std::span<const Vec3> terminals, const std::vector<ManifoldBranch>& branches,
                          double threshold);

}  // namespace reach
