#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "tethernet/vec3.hpp"

namespace tethernet {

struct HullMetrics {
  double volume = 0.0;
  double area = 0.0;
  bool degenerate = false;  // input was collinear/coplanar (or < 4 points)
};

namespace hull_detail {

struct Face {
  std::array<int, 3> v;
  std::array<int, 3> neighbor;  // neighbor[i] shares edge (v[i], v[i+1])
  Vec3 normal;                  // unit, outward
  double offset = 0.0;          // plane: normal . x = offset
  std::vector<int> outside;
  int furthest = -1;
  double furthest_dist = 0.0;
  bool alive = true;
};

inline double signed_dist(const Face& f, const Vec3& p) {
  return f.normal.dot(p) - f.offset;
}

// Planar convex hull area via Andrew's monotone chain in an in-plane basis.
inline double planar_hull_area(const std::vector<Vec3>& pts, const Vec3& origin,
                               const Vec3& u, const Vec3& w) {
  std::vector<std::array<double, 2>> q(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    const Vec3 d = pts[i] - origin;
    q[i] = {d.dot(u), d.dot(w)};
  }
  std::sort(q.begin(), q.end());
  q.erase(std::unique(q.begin(), q.end()), q.end());
  const size_t n = q.size();
  if (n < 3) return 0.0;
  auto cross2 = [](const std::array<double, 2>& o, const std::array<double, 2>& a,
                   const std::array<double, 2>& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<std::array<double, 2>> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], q[i]) <= 0) --k;
    hull[k++] = q[i];
  }
  for (size_t i = n - 1, lo = k + 1; i-- > 0;) {
    while (k >= lo && cross2(hull[k - 2], hull[k - 1], q[i]) <= 0) --k;
    hull[k++] = q[i];
  }
  hull.resize(k > 1 ? k - 1 : 0);
  double area2 = 0.0;
  for (size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    area2 += a[0] * b[1] - b[0] * a[1];
  }
  return 0.5 * std::abs(area2);
}

}  // namespace hull_detail

// Exact 3-D convex hull volume and facet-area sum (quickhull). Degenerate
// input (collinear or coplanar) reports volume 0 with the one-sided area of
// the planar hull polygon and sets the degenerate flag.
inline HullMetrics convex_hull_metrics(const std::vector<Vec3>& pts) {
  using hull_detail::Face;
  HullMetrics out;
  const int n = static_cast<int>(pts.size());
  if (n < 3) {
    out.degenerate = true;
    return out;
  }

  double extent = 0.0;
  for (const auto& p : pts)
    extent = std::max({extent, std::abs(p.x), std::abs(p.y), std::abs(p.z)});
  const double eps = 1e-9 * std::max(extent, 1.0);

  // Initial simplex: the two axis-extreme points farthest apart, the point
  // farthest from their line, the point farthest from their plane.
  int i0 = 0, i1 = 0;
  {
    int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (int i = 1; i < n; ++i) {
      const double c[3] = {pts[i].x, pts[i].y, pts[i].z};
      const double cl[3] = {pts[lo[0]].x, pts[lo[1]].y, pts[lo[2]].z};
      const double ch[3] = {pts[hi[0]].x, pts[hi[1]].y, pts[hi[2]].z};
      for (int a = 0; a < 3; ++a) {
        if (c[a] < cl[a]) lo[a] = i;
        if (c[a] > ch[a]) hi[a] = i;
      }
    }
    double best = -1.0;
    for (int a = 0; a < 3; ++a) {
      const double d = (pts[hi[a]] - pts[lo[a]]).norm2();
      if (d > best) { best = d; i0 = lo[a]; i1 = hi[a]; }
    }
    if (std::sqrt(best) < eps) {  // all points coincide
      out.degenerate = true;
      return out;
    }
  }
  const Vec3 axis = (pts[i1] - pts[i0]).normalized();
  int i2 = -1;
  double best_line = eps;
  for (int i = 0; i < n; ++i) {
    const Vec3 d = pts[i] - pts[i0];
    const double dist = (d - axis * d.dot(axis)).norm();
    if (dist > best_line) { best_line = dist; i2 = i; }
  }
  if (i2 < 0) {  // collinear
    out.degenerate = true;
    return out;
  }
  Vec3 nrm = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
  int i3 = -1;
  double best_plane = eps;
  for (int i = 0; i < n; ++i) {
    const double dist = std::abs(nrm.dot(pts[i] - pts[i0]));
    if (dist > best_plane) { best_plane = dist; i3 = i; }
  }
  if (i3 < 0) {  // coplanar: one-sided planar hull area
    out.degenerate = true;
    const Vec3 u = (pts[i1] - pts[i0]).normalized();
    const Vec3 w = nrm.cross(u).normalized();
    out.area = hull_detail::planar_hull_area(pts, pts[i0], u, w);
    return out;
  }
  if (nrm.dot(pts[i3] - pts[i0]) > 0.0) {
    std::swap(i1, i2);  // keep i3 below the (i0,i1,i2) plane
  }

  std::vector<Face> faces;
  faces.reserve(std::max(64, 4 * n));
  const Vec3 interior = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) / 4.0;
  auto make_face = [&](int a, int b, int c) {
    Face f;
    f.v = {a, b, c};
    f.neighbor = {-1, -1, -1};
    Vec3 nn = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
    const double len = nn.norm();
    f.normal = len > 0 ? nn / len : Vec3{};
    f.offset = f.normal.dot(pts[a]);
    if (hull_detail::signed_dist(f, interior) > 0) {  // flip to outward
      std::swap(f.v[1], f.v[2]);
      f.normal = -f.normal;
      f.offset = -f.offset;
      std::swap(f.neighbor[0], f.neighbor[2]);
    }
    faces.push_back(std::move(f));
    return static_cast<int>(faces.size()) - 1;
  };
  make_face(i0, i1, i2);
  make_face(i0, i2, i3);
  make_face(i0, i3, i1);
  make_face(i1, i3, i2);

  auto wire_neighbors = [&](const std::vector<int>& ids) {
    std::unordered_map<uint64_t, std::pair<int, int>> edges;
    edges.reserve(ids.size() * 3);
    auto key = [](int a, int b) {
      return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) |
             static_cast<uint32_t>(b);
    };
    for (int id : ids) {
      for (int e = 0; e < 3; ++e) {
        const int a = faces[id].v[e], b = faces[id].v[(e + 1) % 3];
        edges[key(a, b)] = {id, e};
      }
    }
    for (int id : ids) {
      for (int e = 0; e < 3; ++e) {
        if (faces[id].neighbor[e] >= 0) continue;
        const int a = faces[id].v[e], b = faces[id].v[(e + 1) % 3];
        auto it = edges.find(key(b, a));
        if (it != edges.end()) {
          faces[id].neighbor[e] = it->second.first;
          faces[it->second.first].neighbor[it->second.second] = id;
        }
      }
    }
  };
  wire_neighbors({0, 1, 2, 3});

  auto assign_outside = [&](const std::vector<int>& candidates, const std::vector<int>& face_ids) {
    for (int p : candidates) {
      double best = eps;
      int best_f = -1;
      for (int id : face_ids) {
        if (!faces[id].alive) continue;
        const double d = hull_detail::signed_dist(faces[id], pts[p]);
        if (d > best) { best = d; best_f = id; }
      }
      if (best_f >= 0) {
        Face& f = faces[best_f];
        f.outside.push_back(p);
        if (best > f.furthest_dist) { f.furthest_dist = best; f.furthest = p; }
      }
    }
  };
  {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    assign_outside(all, {0, 1, 2, 3});
  }

  std::vector<int> pending;
  for (int id = 0; id < 4; ++id)
    if (!faces[id].outside.empty()) pending.push_back(id);

  std::vector<int> visible, horizon_face, horizon_edge;
  while (!pending.empty()) {
    const int start = pending.back();
    pending.pop_back();
    if (!faces[start].alive || faces[start].outside.empty()) continue;
    const int apex = faces[start].furthest;

    // Flood-fill the faces visible from the apex; horizon edges are the
    // visible-to-hidden crossings, recorded in orientation order.
    visible.clear();
    horizon_face.clear();
    horizon_edge.clear();
    std::vector<int> stack{start};
    std::vector<char> mark(faces.size(), 0);
    mark[start] = 1;
    while (!stack.empty()) {
      const int id = stack.back();
      stack.pop_back();
      visible.push_back(id);
      for (int e = 0; e < 3; ++e) {
        const int nb = faces[id].neighbor[e];
        if (nb < 0 || mark[nb]) continue;
        if (hull_detail::signed_dist(faces[nb], pts[apex]) > eps) {
          mark[nb] = 1;
          stack.push_back(nb);
        } else {
          horizon_face.push_back(id);
          horizon_edge.push_back(e);
        }
      }
    }

    std::vector<int> orphans;
    for (int id : visible) {
      Face& f = faces[id];
      f.alive = false;
      for (int p : f.outside)
        if (p != apex) orphans.push_back(p);
      f.outside.clear();
    }

    std::vector<int> fresh;
    fresh.reserve(horizon_face.size());
    for (size_t h = 0; h < horizon_face.size(); ++h) {
      // Copy these before make_face: push_back may reallocate `faces`.
      const int e = horizon_edge[h];
      const int a = faces[horizon_face[h]].v[e];
      const int b = faces[horizon_face[h]].v[(e + 1) % 3];
      const int nb = faces[horizon_face[h]].neighbor[e];
      const int id = make_face(a, b, apex);
      for (int k = 0; k < 3; ++k)
        if (faces[nb].neighbor[k] == horizon_face[h]) faces[nb].neighbor[k] = id;
      faces[id].neighbor[0] = nb;
      if (std::find(faces[id].v.begin(), faces[id].v.end(), a) - faces[id].v.begin() != 0) {
        // make_face flipped the winding; slot 0 no longer spans (a,b)
        faces[id].neighbor = {-1, -1, -1};
        for (int k = 0; k < 3; ++k) {
          const int va = faces[id].v[k], vb = faces[id].v[(k + 1) % 3];
          if ((va == b && vb == a) || (va == a && vb == b)) faces[id].neighbor[k] = nb;
        }
      }
      fresh.push_back(id);
    }
    wire_neighbors(fresh);
    assign_outside(orphans, fresh);
    for (int id : fresh)
      if (!faces[id].outside.empty()) pending.push_back(id);
  }

  for (const Face& f : faces) {
    if (!f.alive) continue;
    const Vec3 a = pts[f.v[0]] - interior;
    const Vec3 b = pts[f.v[1]] - interior;
    const Vec3 c = pts[f.v[2]] - interior;
    out.volume += a.dot(b.cross(c)) / 6.0;
    out.area += 0.5 * (pts[f.v[1]] - pts[f.v[0]]).cross(pts[f.v[2]] - pts[f.v[0]]).norm();
  }
  out.volume = std::abs(out.volume);
  return out;
}

// Least-squares plane normal of a point set: eigenvector of the covariance
// matrix's smallest eigenvalue (Jacobi rotations; the matrix is symmetric
// 3x3 so a handful of sweeps reaches machine precision).
inline Vec3 best_fit_normal(const std::vector<Vec3>& pts) {
  const size_t n = pts.size();
  Vec3 c{};
  for (const auto& p : pts) c += p;
  c = c / static_cast<double>(n);
  double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  for (const auto& p : pts) {
    const double d[3] = {p.x - c.x, p.y - c.y, p.z - c.z};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m[i][j] += d[i] * d[j];
  }
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int sweep = 0; sweep < 32; ++sweep) {
    double off = std::abs(m[0][1]) + std::abs(m[0][2]) + std::abs(m[1][2]);
    if (off < 1e-14 * (std::abs(m[0][0]) + std::abs(m[1][1]) + std::abs(m[2][2]) + 1e-300))
      break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(m[p][q]) < 1e-300) continue;
        const double theta = 0.5 * std::atan2(2.0 * m[p][q], m[q][q] - m[p][p]);
        const double s = std::sin(theta), co = std::cos(theta);
        for (int k = 0; k < 3; ++k) {
          const double mkp = m[k][p], mkq = m[k][q];
          m[k][p] = co * mkp - s * mkq;
          m[k][q] = s * mkp + co * mkq;
        }
        for (int k = 0; k < 3; ++k) {
          const double mpk = m[p][k], mqk = m[q][k];
          m[p][k] = co * mpk - s * mqk;
          m[q][k] = s * mpk + co * mqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = co * vkp - s * vkq;
          v[k][q] = s * vkp + co * vkq;
        }
      }
    }
  }
  int smallest = 0;
  if (m[1][1] < m[smallest][smallest]) smallest = 1;
  if (m[2][2] < m[smallest][smallest]) smallest = 2;
  return Vec3{v[0][smallest], v[1][smallest], v[2][smallest]}.normalized();
}

// Area of the ordered perimeter loop projected onto its least-squares plane.
inline double mouth_area(const std::vector<Vec3>& loop) {
  if (loop.size() < 3) throw std::invalid_argument("mouth_area: need at least 3 points");
  const Vec3 n = best_fit_normal(loop);
  Vec3 c{};
  for (const auto& p : loop) c += p;
  c = c / static_cast<double>(loop.size());
  Vec3 cross_sum{};
  std::vector<Vec3> proj(loop.size());
  for (size_t i = 0; i < loop.size(); ++i) {
    const Vec3 d = loop[i] - c;
    proj[i] = d - n * d.dot(n);
  }
  for (size_t i = 0; i < loop.size(); ++i)
    cross_sum += proj[i].cross(proj[(i + 1) % loop.size()]);
  return 0.5 * std::abs(cross_sum.dot(n));
}

}  // namespace tethernet
