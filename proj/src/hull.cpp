#include "reach/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

namespace reach {

namespace {

struct Face
{
  std::array<int, 3> v{};
  Vec3 n = Vec3::Zero();
  double d = 0.0;
  std::vector<int> outside;
  bool alive = true;
  bool visible = false;

  double distance(const Vec3& p) const { return n.dot(p) - d; }
};

std::uint64_t edge_key(int a, int b)
{
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

class QuickHull
{
public:
  QuickHull(const std::vector<Vec3>& pts, double eps) : p_(pts), eps_(eps) {}

  void build()
  {
    initial_simplex();
    // Outside points only ever move to newly appended faces, so the scan
    // position never has to go back.
    std::size_t cursor = 0;
    for (;;) {
      while (cursor < faces_.size() && (!faces_[cursor].alive || faces_[cursor].outside.empty())) ++cursor;
      if (cursor == faces_.size()) break;
      add_point(static_cast<int>(cursor));
    }
  }

  const std::vector<Face>& faces() const { return faces_; }

private:
  void make_face(int a, int b, int c)
  {
    Face f;
    f.v = {a, b, c};
    Vec3 n = (p_[b] - p_[a]).cross(p_[c] - p_[a]);
    const double len = n.norm();
    f.n = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
    f.d = f.n.dot(p_[a]);
    const int id = static_cast<int>(faces_.size());
    faces_.push_back(std::move(f));
    for (int k = 0; k < 3; ++k) edges_[edge_key(faces_[id].v[k], faces_[id].v[(k + 1) % 3])] = id;
  }

  void assign(const std::vector<int>& candidates, const std::vector<int>& new_faces)
  {
    for (int i : candidates) {
      int best = -1;
      double best_d = eps_;
      for (int f : new_faces) {
        const double dist = faces_[f].distance(p_[i]);
        if (dist > best_d) {
          best_d = dist;
          best = f;
        }
      }
      if (best >= 0) faces_[best].outside.push_back(i);
    }
  }

  void initial_simplex()
  {
    const int n = static_cast<int>(p_.size());
    // Extremes along each axis, then the most distant pair among them.
    std::array<int, 6> ext{};
    for (int axis = 0; axis < 3; ++axis) {
      int lo = 0;
      int hi = 0;
      for (int i = 1; i < n; ++i) {
        if (p_[i][axis] < p_[lo][axis]) lo = i;
        if (p_[i][axis] > p_[hi][axis]) hi = i;
      }
      ext[2 * axis] = lo;
      ext[2 * axis + 1] = hi;
    }
    int a = ext[0];
    int b = ext[1];
    double best = -1.0;
    for (int i = 0; i < 6; ++i) {
      for (int j = i + 1; j < 6; ++j) {
        const double d2 = (p_[ext[i]] - p_[ext[j]]).squaredNorm();
        if (d2 > best) {
          best = d2;
          a = ext[i];
          b = ext[j];
        }
      }
    }
    if (!(std::sqrt(best) > eps_)) throw DegenerateCloud("points coincide (affine dimension 0)");

    const Vec3 ab = (p_[b] - p_[a]).normalized();
    int c = -1;
    best = eps_;
    for (int i = 0; i < n; ++i) {
      const double dist = (p_[i] - p_[a]).cross(ab).norm();
      if (dist > best) {
        best = dist;
        c = i;
      }
    }
    if (c < 0) throw DegenerateCloud("points are collinear (affine dimension 1)");

    const Vec3 nrm = (p_[b] - p_[a]).cross(p_[c] - p_[a]).normalized();
    int e = -1;
    best = eps_;
    for (int i = 0; i < n; ++i) {
      const double dist = std::abs(nrm.dot(p_[i] - p_[a]));
      if (dist > best) {
        best = dist;
        e = i;
      }
    }
    if (e < 0) throw DegenerateCloud("points are coplanar (affine dimension 2)");

    // Orient so that e lies below the base face.
    if (nrm.dot(p_[e] - p_[a]) > 0.0) std::swap(b, c);
    make_face(a, b, c);
    make_face(a, e, b);
    make_face(b, e, c);
    make_face(c, e, a);

    std::vector<int> all;
    all.reserve(n);
    for (int i = 0; i < n; ++i) {
      if (i != a && i != b && i != c && i != e) all.push_back(i);
    }
    assign(all, {0, 1, 2, 3});
  }

  void add_point(int start)
  {
    // Farthest outside point of the start face is the eye.
    const Face& sf = faces_[start];
    int eye = sf.outside.front();
    double far = sf.distance(p_[eye]);
    for (int i : sf.outside) {
      const double dist = sf.distance(p_[i]);
      if (dist > far) {
        far = dist;
        eye = i;
      }
    }
    const Vec3& pe = p_[eye];

    std::vector<int> visible{start};
    faces_[start].visible = true;
    for (std::size_t k = 0; k < visible.size(); ++k) {
      const Face& f = faces_[visible[k]];
      for (int j = 0; j < 3; ++j) {
        const int nb = edges_.at(edge_key(f.v[(j + 1) % 3], f.v[j]));
        if (!faces_[nb].visible && faces_[nb].distance(pe) > eps_) {
          faces_[nb].visible = true;
          visible.push_back(nb);
        }
      }
    }

    std::vector<std::pair<int, int>> horizon;
    for (int fi : visible) {
      const Face& f = faces_[fi];
      for (int j = 0; j < 3; ++j) {
        const int a = f.v[j];
        const int b = f.v[(j + 1) % 3];
        if (!faces_[edges_.at(edge_key(b, a))].visible) horizon.emplace_back(a, b);
      }
    }

    std::vector<int> orphans;
    for (int fi : visible) {
      Face& f = faces_[fi];
      f.alive = false;
      for (int i : f.outside) {
        if (i != eye) orphans.push_back(i);
      }
      f.outside.clear();
      f.outside.shrink_to_fit();
      for (int j = 0; j < 3; ++j) {
        auto it = edges_.find(edge_key(f.v[j], f.v[(j + 1) % 3]));
        if (it != edges_.end() && it->second == fi) edges_.erase(it);
      }
    }

    std::vector<int> created;
    created.reserve(horizon.size());
    for (auto [a, b] : horizon) {
      created.push_back(static_cast<int>(faces_.size()));
      make_face(a, b, eye);
    }
    std::sort(orphans.begin(), orphans.end());
    assign(orphans, created);
  }

  const std::vector<Vec3>& p_;
  double eps_;
  std::vector<Face> faces_;
  std::unordered_map<std::uint64_t, int> edges_;
};

}  // namespace

int affine_dimension(std::span<const Vec3> points, double rel_tol)
{
  if (points.empty()) return 0;
  Vec3 mean = Vec3::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Mat3 scatter = Mat3::Zero();
  double scale = 0.0;
  for (const auto& p : points) {
    const Vec3 q = p - mean;
    scatter += q * q.transpose();
    scale = std::max(scale, q.norm());
  }
  if (!(scale > 0.0)) return 0;
  scatter /= static_cast<double>(points.size());
  Eigen::SelfAdjointEigenSolver<Mat3> es(scatter, Eigen::EigenvaluesOnly);
  int rank = 0;
  for (int i = 0; i < 3; ++i) {
    if (std::sqrt(std::max(0.0, es.eigenvalues()[i])) > rel_tol * scale) ++rank;
  }
  return rank;
}

HullSummary convex_hull(std::span<const Vec3> points)
{
  if (points.size() < 4) throw DegenerateCloud("need at least 4 points, got " + std::to_string(points.size()));
  if (points.size() > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
    throw InvalidArgument("too many points for hull construction");
  }
  for (const auto& p : points) {
    if (!p.allFinite()) throw InvalidArgument("hull input has non-finite points");
  }

  // Work in coordinates centred on the mean to keep planes well conditioned
  // for clouds far from the origin.
  Vec3 mean = Vec3::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  std::vector<Vec3> q(points.size());
  Vec3 amax = Vec3::Zero();
  for (std::size_t i = 0; i < points.size(); ++i) {
    q[i] = points[i] - mean;
    amax = amax.cwiseMax(q[i].cwiseAbs());
  }
  const double eps = 3.0 * std::numeric_limits<double>::epsilon() * amax.sum();
  if (!(amax.sum() > 0.0)) throw DegenerateCloud("points coincide (affine dimension 0)");

  QuickHull qh(q, eps);
  qh.build();

  HullSummary h;
  h.points.assign(points.begin(), points.end());
  std::vector<char> is_vertex(points.size(), 0);
  double six_vol = 0.0;
  Vec3 moment = Vec3::Zero();
  for (const auto& f : qh.faces()) {
    if (!f.alive) continue;
    h.facets.push_back({static_cast<std::size_t>(f.v[0]), static_cast<std::size_t>(f.v[1]),
                        static_cast<std::size_t>(f.v[2])});
    for (int k : f.v) is_vertex[k] = 1;
    const Vec3& a = q[f.v[0]];
    const Vec3& b = q[f.v[1]];
    const Vec3& c = q[f.v[2]];
    const double v6 = a.dot(b.cross(c));
    six_vol += v6;
    moment += v6 * (a + b + c);
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (is_vertex[i]) h.vertices.push_back(i);
  }
  h.volume = six_vol / 6.0;
  if (!(h.volume > 0.0)) throw DegenerateCloud("hull has nonpositive volume");
  const Vec3 c_local = moment / (4.0 * six_vol);
  h.centroid = mean + c_local;

  for (std::size_t vi : h.vertices) {
    h.bounding_radius = std::max(h.bounding_radius, (q[vi] - c_local).norm());
  }
  const std::size_t nf = h.facets.size();
  h.nx.resize(nf);
  h.ny.resize(nf);
  h.nz.resize(nf);
  h.d.resize(nf);
  std::size_t k = 0;
  for (const auto& f : qh.faces()) {
    if (!f.alive) continue;
    h.nx[k] = f.n[0];
    h.ny[k] = f.n[1];
    h.nz[k] = f.n[2];
    h.d[k] = f.d - f.n.dot(c_local);
    ++k;
  }
  return h;
}

HullSummary convex_hull(const TerminalCloud& cloud) { return convex_hull(std::span<const Vec3>(cloud.points)); }

}  // namespace reach
