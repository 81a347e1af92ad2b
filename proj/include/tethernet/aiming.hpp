#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "tethernet/config.hpp"
#include "tethernet/rng.hpp"
#include "tethernet/vec3.hpp"

namespace tethernet {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Scenario {
  double x = 0.0, y = 0.0, z = -50.0;  // debris COM at launch
  uint64_t seed = 0;
};

// Per-MU aiming offsets (dx, dy) in meters.
using AimingAction = std::vector<std::array<double, 2>>;

inline void validate_scenario(const Scenario& s, const ScenarioBounds& b) {
  if (s.x < b.x_min || s.x > b.x_max || s.y < b.y_min || s.y > b.y_max ||
      s.z < b.z_min || s.z > b.z_max)
    throw ScenarioError("scenario debris position out of bounds");
}

// Nominal end-of-deployment points: a +-12 m square at the debris' z for the
// corner MUs, side midpoints at 11.7/11.71 m for the eight-MU variant. The
// raw_table flag keeps the legacy tabulated points, which duplicate MU3's x
// for MU4 and MU5's y for MU8 and collapse the square; the default is the
// symmetric completion.
inline std::vector<Vec3> nominal_aiming(const Vec3& debris, Variant variant,
                                        const ScenarioBounds& bounds,
                                        bool raw_table = false) {
  validate_scenario(Scenario{debris.x, debris.y, debris.z, 0}, bounds);
  std::vector<Vec3> pts;
  pts.push_back({debris.x - 12.0, debris.y - 12.0, debris.z});  // MU1
  pts.push_back({debris.x + 12.0, debris.y - 12.0, debris.z});  // MU2
  pts.push_back({debris.x - 12.0, debris.y + 12.0, debris.z});  // MU3
  if (raw_table)
    pts.push_back({debris.x - 12.0, debris.y + 12.0, debris.z});  // MU4 as printed
  else
    pts.push_back({debris.x + 12.0, debris.y + 12.0, debris.z});
  if (variant == Variant::EightMu) {
    pts.push_back({debris.x, debris.y - 11.71, debris.z});          // MU5
    pts.push_back({debris.x + 11.70, debris.y, debris.z});          // MU6
    pts.push_back({debris.x - 11.71, debris.y, debris.z});          // MU7
    if (raw_table)
      pts.push_back({debris.x, debris.y - 11.71, debris.z});        // MU8 as printed
    else
      pts.push_back({debris.x, debris.y + 11.71, debris.z});
  }
  return pts;
}

inline double quantize_to_grid(double v, double grid) {
  return std::round(v / grid) * grid;
}

// Offsets applied in the debris plane; z never changes. Out-of-bounds
// components either clip (training) or reject (evaluation).
inline std::vector<Vec3> apply_action(const std::vector<Vec3>& nominal,
                                      const AimingAction& action,
                                      double bound = 5.0, bool clip = true) {
  if (action.size() != nominal.size())
    throw std::invalid_argument("apply_action: action count != MU count");
  std::vector<Vec3> out = nominal;
  for (size_t k = 0; k < action.size(); ++k) {
    double dx = action[k][0], dy = action[k][1];
    if (std::abs(dx) > bound || std::abs(dy) > bound) {
      if (!clip) throw ScenarioError("apply_action: offset outside action bounds");
      dx = std::clamp(dx, -bound, bound);
      dy = std::clamp(dy, -bound, bound);
    }
    out[k].x += dx;
    out[k].y += dy;
  }
  return out;
}

// Uniform over the 0.1 m lattice inside the scenario box.
inline Scenario sample_scenario(Rng& rng, const ScenarioBounds& b) {
  auto draw = [&rng, &b](double lo, double hi) {
    const long n = std::lround((hi - lo) / b.grid);
    long k = static_cast<long>(rng.uniform() * (n + 1));
    if (k > n) k = n;
    return lo + k * b.grid;
  };
  Scenario s;
  s.x = draw(b.x_min, b.x_max);
  s.y = draw(b.y_min, b.y_max);
  s.z = draw(b.z_min, b.z_max);
  return s;
}

struct RewardInputs {
  double mouth_area = 0.0;  // A_c
  double a_max = 1.0;
  double settled_cqi = 0.0;
  int locked_pairs = 0;
  double fuel_total = 0.0;  // m_f
};

// Shaped one-step reward: mouth-area bonus, log penalties past the CQI and
// locked-pair thresholds, and the fuel bonus only on the success branch.
inline double reward(const RewardInputs& in, double w, double m_fmax,
                     double cqi_threshold, int n_t) {
  double r = in.mouth_area / in.a_max;
  if (in.settled_cqi > cqi_threshold) {
    const double d = in.settled_cqi - cqi_threshold;
    r -= std::log(d * d + 1.0);
  }
  if (in.locked_pairs < n_t) {
    const double d = static_cast<double>(in.locked_pairs - n_t);
    r -= std::log(d * d + 1.0);
  }
  if (in.settled_cqi <= cqi_threshold && in.locked_pairs >= n_t)
    r += w * (1.0 - in.fuel_total / m_fmax);
  return r;
}

}  // namespace tethernet
