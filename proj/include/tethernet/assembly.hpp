#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "tethernet/config.hpp"
#include "tethernet/vec3.hpp"

namespace tethernet {

struct Link {
  int a, b;
  double rest_length;
  double stiffness;
  double damping;
};

enum class WinchMode { FreeSpool, Locked };

// Body index layout: [0, node_count) net nodes (row-major, node(i,j) =
// i*mesh_n + j with j along +x and i along +y), then knot, MUs, chaser,
// debris. All bodies are point masses except the debris, which carries
// orientation and angular velocity.
struct NetAssembly {
  Variant variant = Variant::FourMu;
  int mesh_n = 0;
  double side_length = 0.0;
  int node_count = 0;
  double node_mass = 0.0;
  std::vector<Link> links;  // fabric links, knot link, MU threads
  std::vector<int> mu_attachments;
  std::vector<int> perimeter_loop;
  std::array<std::vector<int>, 3> surrogate_loops;
  std::vector<int> closing_loop;
  std::vector<double> masses;  // per body
  double debris_radius = 0.0, debris_length = 0.0;
  Vec3 debris_inertia;  // principal moments, body frame, long axis = body x
  double flat_mouth_area = 0.0;  // A_max

  int mu_count() const { return variant == Variant::FourMu ? 4 : 8; }
  int knot_index() const { return node_count; }
  int mu_index(int k) const { return node_count + 1 + k; }
  int chaser_index() const { return node_count + 1 + mu_count(); }
  int debris_index() const { return chaser_index() + 1; }
  int body_count() const { return node_count + mu_count() + 3; }
  int node_index(int i, int j) const { return i * mesh_n + j; }
};

struct SystemState {
  double time = 0.0;
  std::vector<Vec3> pos, vel;
  WinchMode winch_mode = WinchMode::FreeSpool;
  double deployed_tether_length = 0.0;
  Quat debris_orientation;
  Vec3 debris_angular_velocity;  // body frame
  // Capture-phase bookkeeping. closing_rest_length < 0 means the winch cord
  // is not yet engaged; docking_joints holds engaged MU pairs (eight-MU).
  // closing_latched holds loop-pair indices that have pinched shut; the
  // drawstring is one-way, so entries never leave.
  double closing_rest_length = -1.0;
  std::vector<std::pair<int, int>> docking_joints;
  std::vector<int> closing_latched;
  bool trigger_fired = false;
  double trigger_time = -1.0;
};

namespace assembly_detail {

// Ordered CCW cycle of node (i,j) pairs at Chebyshev radius d from center c.
inline std::vector<std::pair<int, int>> ring_ij(int c, int d) {
  std::vector<std::pair<int, int>> out;
  out.reserve(8 * d);
  for (int j = c - d; j <= c + d; ++j) out.push_back({c - d, j});
  for (int i = c - d + 1; i <= c + d; ++i) out.push_back({i, c + d});
  for (int j = c + d - 1; j >= c - d; --j) out.push_back({c + d, j});
  for (int i = c + d - 1; i >= c - d + 1; --i) out.push_back({i, c - d});
  return out;
}

// Evenly subsample `count` entries from an ordered loop, order preserved.
inline std::vector<int> subsample(const std::vector<int>& loop, int count) {
  std::vector<int> out;
  out.reserve(count);
  const int n = static_cast<int>(loop.size());
  for (int k = 0; k < count; ++k)
    out.push_back(loop[static_cast<size_t>(k) * n / count]);
  return out;
}

}  // namespace assembly_detail

// Builds the stowed system: net folded to stow_scale of its side at the
// chaser's -z face, MUs just outside the folded corners, debris at the
// default (0,0,-50); the episode harness moves it per scenario.
inline std::pair<NetAssembly, SystemState> build_assembly(const Config& cfg) {
  const int n = cfg.net.mesh_n;
  if (n < 3) throw ConfigError("build_assembly: mesh_n must be >= 3");
  if (n % 2 == 0)
    throw ConfigError("build_assembly: mesh_n must be odd (central knot and side-midpoint attachments)");
  if (cfg.net.side_length <= 0 || cfg.net.mass <= 0 || cfg.net.link_stiffness <= 0 ||
      cfg.bodies.mu_mass <= 0 || cfg.bodies.chaser_mass <= 0 || cfg.bodies.debris_mass <= 0)
    throw ConfigError("build_assembly: physical constants must be positive");

  NetAssembly a;
  a.variant = cfg.variant;
  a.mesh_n = n;
  a.side_length = cfg.net.side_length;
  a.node_count = n * n;
  a.node_mass = cfg.net.mass / a.node_count;
  a.debris_radius = cfg.bodies.debris_radius;
  a.debris_length = cfg.bodies.debris_length;
  a.flat_mouth_area = cfg.net.side_length * cfg.net.side_length;

  const double spacing = cfg.net.side_length / (n - 1);
  const int c = (n - 1) / 2;

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j + 1 < n)
        a.links.push_back({a.node_index(i, j), a.node_index(i, j + 1), spacing,
                           cfg.net.link_stiffness, cfg.net.link_damping});
      if (i + 1 < n)
        a.links.push_back({a.node_index(i, j), a.node_index(i + 1, j), spacing,
                           cfg.net.link_stiffness, cfg.net.link_damping});
    }
  }
  // central knot hangs off the center node on a short leash
  a.links.push_back({a.node_index(c, c), a.knot_index(), 0.1,
                     cfg.net.link_stiffness, cfg.net.link_damping});

  const int m = a.mu_count();
  a.mu_attachments = {a.node_index(0, 0), a.node_index(0, n - 1),
                      a.node_index(n - 1, 0), a.node_index(n - 1, n - 1)};
  if (cfg.variant == Variant::EightMu) {
    a.mu_attachments.push_back(a.node_index(0, c));      // MU5, -y side
    a.mu_attachments.push_back(a.node_index(c, n - 1));  // MU6, +x side
    a.mu_attachments.push_back(a.node_index(c, 0));      // MU7, -x side
    a.mu_attachments.push_back(a.node_index(n - 1, c));  // MU8, +y side
  }
  for (int k = 0; k < m; ++k)
    a.links.push_back({a.mu_attachments[k], a.mu_index(k), cfg.net.thread_rest_length,
                       cfg.net.thread_stiffness, cfg.net.thread_damping});

  // perimeter, CCW from the (-x,-y) corner
  for (int j = 0; j < n; ++j) a.perimeter_loop.push_back(a.node_index(0, j));
  for (int i = 1; i < n; ++i) a.perimeter_loop.push_back(a.node_index(i, n - 1));
  for (int j = n - 2; j >= 0; --j) a.perimeter_loop.push_back(a.node_index(n - 1, j));
  for (int i = n - 2; i >= 1; --i) a.perimeter_loop.push_back(a.node_index(i, 0));

  // Three concentric square loops for the surrogate snapshot, subsampled to
  // the configured total (proportionally per loop). Meshes below 7x7 cannot
  // host three disjoint rings; they get empty loops and feature extraction
  // rejects them if ever asked.
  if (c >= 3) {
    const int half = c;
    const int d3 = half;
    const int d2 = std::min(d3 - 1, std::max(2, static_cast<int>(std::lround(half * 0.75))));
    const int d1 = std::min(d2 - 1, std::max(1, static_cast<int>(std::lround(half * 0.4))));
    std::array<std::vector<int>, 3> raw;
    for (int q = 0; q < 3; ++q) {
      const int d = (q == 0 ? d1 : q == 1 ? d2 : d3);
      for (auto [i, j] : assembly_detail::ring_ij(c, d))
        raw[q].push_back(a.node_index(i, j));
    }
    const int s1 = static_cast<int>(raw[0].size());
    const int s2 = static_cast<int>(raw[1].size());
    const int s3 = static_cast<int>(raw[2].size());
    const int total = s1 + s2 + s3;
    const int want = cfg.surrogate.feature_loop_nodes;
    if (want > total)
      throw ConfigError("surrogate.feature_loop_nodes exceeds available loop nodes (" +
                        std::to_string(total) + ")");
    int c1 = static_cast<int>(std::lround(static_cast<double>(want) * s1 / total));
    int c2 = static_cast<int>(std::lround(static_cast<double>(want) * s2 / total));
    int c3 = want - c1 - c2;
    if (c3 > s3) { c2 += c3 - s3; c3 = s3; }
    if (c2 > s2) { c1 += c2 - s2; c2 = s2; }
    if (c1 < 1 || c2 < 1 || c3 < 1 || c1 > s1)
      throw ConfigError("surrogate.feature_loop_nodes too small to cover three loops");
    a.surrogate_loops[0] = assembly_detail::subsample(raw[0], c1);
    a.surrogate_loops[1] = assembly_detail::subsample(raw[1], c2);
    a.surrogate_loops[2] = assembly_detail::subsample(raw[2], c3);
  }

  a.closing_loop = assembly_detail::subsample(
      a.perimeter_loop, std::min(cfg.capture.closing_loop_count,
                                 static_cast<int>(a.perimeter_loop.size())));

  a.masses.assign(a.body_count(), a.node_mass);
  for (int k = 0; k < m; ++k) a.masses[a.mu_index(k)] = cfg.bodies.mu_mass;
  a.masses[a.chaser_index()] = cfg.bodies.chaser_mass;
  a.masses[a.debris_index()] = cfg.bodies.debris_mass;

  const double r = cfg.bodies.debris_radius, L = cfg.bodies.debris_length,
               dm = cfg.bodies.debris_mass;
  a.debris_inertia = {0.5 * dm * r * r,
                      dm * (3.0 * r * r + L * L) / 12.0,
                      dm * (3.0 * r * r + L * L) / 12.0};

  SystemState s;
  s.pos.assign(a.body_count(), Vec3{});
  s.vel.assign(a.body_count(), Vec3{});

  const double stow_spacing = cfg.net.stow_scale * cfg.net.side_length / (n - 1);
  const double z0 = -(cfg.bodies.chaser_side / 2.0 + 0.1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      s.pos[a.node_index(i, j)] = {(j - c) * stow_spacing, (i - c) * stow_spacing, z0};
  s.pos[a.knot_index()] = {0.0, 0.0, z0 + 0.05};
  for (int k = 0; k < m; ++k) {
    const Vec3 corner = s.pos[a.mu_attachments[k]];
    const Vec3 out{corner.x, corner.y, 0.0};
    const Vec3 dir = out.norm() > 0 ? out.normalized() : Vec3{1, 0, 0};
    s.pos[a.mu_index(k)] = corner + dir * 0.1;
  }
  s.pos[a.chaser_index()] = {0.0, 0.0, 0.0};
  s.pos[a.debris_index()] = {0.0, 0.0, -50.0};
  s.debris_angular_velocity = {cfg.bodies.debris_spin, 0.0, 0.0};
  s.deployed_tether_length = (s.pos[a.knot_index()] - s.pos[a.chaser_index()]).norm();
  return {std::move(a), std::move(s)};
}

// Mass-weighted net center of mass: fabric nodes + knot, plus MUs unless the
// config excludes them.
inline Vec3 net_com(const NetAssembly& a, const SystemState& s, bool include_mus) {
  Vec3 sum{};
  double mass = 0.0;
  for (int i = 0; i <= a.node_count; ++i) {  // nodes + knot
    sum += s.pos[i] * a.masses[i];
    mass += a.masses[i];
  }
  if (include_mus) {
    for (int k = 0; k < a.mu_count(); ++k) {
      const int idx = a.mu_index(k);
      sum += s.pos[idx] * a.masses[idx];
      mass += a.masses[idx];
    }
  }
  return sum / mass;
}

}  // namespace tethernet
