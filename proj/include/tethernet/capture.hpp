#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tethernet/assembly.hpp"
#include "tethernet/config.hpp"
#include "tethernet/hull.hpp"

namespace tethernet {

struct CaptureMetrics {
  std::vector<std::pair<double, double>> cqi_series;  // (time, CQI)
  double settled_cqi = 0.0;
  int locked_pairs = 0;
  double mouth_area_at_trigger = 0.0;
  double max_mouth_area = 0.0;  // A_max, flat-net constant
  std::vector<double> fuel_per_mu;
  bool success = false;
  bool triggered = false;
  double trigger_time = -1.0;
  std::string failure_reason;  // empty on success
};

// All hull points that count as "the net": fabric nodes, knot, MUs.
inline std::vector<Vec3> net_hull_points(const NetAssembly& a, const SystemState& s) {
  std::vector<Vec3> pts;
  pts.reserve(a.node_count + 1 + a.mu_count());
  for (int i = 0; i <= a.node_count; ++i) pts.push_back(s.pos[i]);
  for (int k = 0; k < a.mu_count(); ++k) pts.push_back(s.pos[a.mu_index(k)]);
  return pts;
}

// Weighted wrap score: 0.1 volume term + 0.1 surface term + 0.8 COM-offset
// term. Degenerate hulls contribute V=0 and the planar area (reported, not
// fatal).
inline double cqi(const std::vector<Vec3>& net_points, const Vec3& net_com,
                  const Vec3& debris_com, const TargetGeometry& tg) {
  const HullMetrics h = convex_hull_metrics(net_points);
  const double q = (net_com - debris_com).norm();
  return 0.1 * std::abs(h.volume - tg.volume) / tg.volume +
         0.1 * std::abs(h.area - tg.surface) / tg.surface +
         0.8 * std::abs(q) / tg.characteristic_length;
}

inline bool closing_trigger(const Vec3& net_com, const Vec3& debris_com, double trigger_distance) {
  return (net_com - debris_com).norm() <= trigger_distance;
}

inline bool capture_success(double settled_cqi, int locked_pairs, double cqi_threshold, int n_t) {
  return settled_cqi <= cqi_threshold && locked_pairs >= n_t;
}

inline std::string failure_reason_of(bool triggered, double settled_cqi, int locked_pairs,
                                     double cqi_threshold, int n_t) {
  if (!triggered) return "NoTrigger";
  if (settled_cqi > cqi_threshold && locked_pairs < n_t) return "CQI+LockedPairs";
  if (settled_cqi > cqi_threshold) return "CQI";
  if (locked_pairs < n_t) return "LockedPairs";
  return "";
}

}  // namespace tethernet
