#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "tethernet/assembly.hpp"
#include "tethernet/config.hpp"
#include "tethernet/forces.hpp"

namespace tethernet {

struct IntegrationDiverged : std::runtime_error {
  int body;
  double time;
  IntegrationDiverged(int body_, double time_)
      : std::runtime_error("integration diverged at body " + std::to_string(body_) +
                           ", t=" + std::to_string(time_)),
        body(body_), time(time_) {}
};

struct SimEvents {
  long degenerate_links = 0;
  long contact_points = 0;
  double max_link_tension = 0.0;
  double max_cord_tension = 0.0;
  double min_applied_tension = 0.0;  // stays >= 0 by the tension-only law
};

// Owns one episode's dynamic state. Strictly sequential; parallelism happens
// across Simulator instances. The episode layer drives phase changes
// (lock_winch / engage_closing_cord / enable_docking at the trigger).
class Simulator {
 public:
  Simulator(const Config& cfg, NetAssembly assembly, SystemState state)
      : cfg_(cfg), a_(std::move(assembly)), s_(std::move(state)) {
    force_.assign(a_.body_count(), Vec3{});
    if (a_.variant == Variant::EightMu) {
      const auto& ring = docking_ring_order();
      for (size_t k = 0; k < ring.size(); ++k)
        docking_pairs_.push_back({ring[k], ring[(k + 1) % ring.size()]});
    }
  }

  const NetAssembly& assembly() const { return a_; }
  const SystemState& state() const { return s_; }
  SystemState& state() { return s_; }
  const SimEvents& events() const { return events_; }

  // Eight-MU docking ring, counterclockwise by nominal aiming angle
  // (MU numbering is 0-based: printed MU k is index k-1).
  static const std::array<int, 8>& docking_ring_order() {
    static const std::array<int, 8> order = {5, 3, 7, 2, 6, 0, 4, 1};
    return order;
  }

  void lock_winch() {
    if (s_.winch_mode == WinchMode::Locked) return;
    s_.winch_mode = WinchMode::Locked;
    // The brake leaves configured slack so the stop is not an instant yank.
    locked_tether_length_ = s_.deployed_tether_length + cfg_.capture.tether_lock_slack;
  }

  void engage_closing_cord() {
    if (s_.closing_rest_length >= 0.0) return;
    s_.closing_rest_length = closing_loop_length();
  }

  void enable_docking() { docking_enabled_ = true; }

  double closing_loop_length() const {
    double len = 0.0;
    const auto& loop = a_.closing_loop;
    for (size_t k = 0; k < loop.size(); ++k)
      len += (s_.pos[loop[(k + 1) % loop.size()]] - s_.pos[loop[k]]).norm();
    return len;
  }

  Vec3 net_com() const { return tethernet::net_com(a_, s_, cfg_.capture.com_includes_mus); }

  // Latched pairs plus pairs currently inside the lock distance. Latching is
  // one-way (a drawstring pinch cannot reopen), so the count is monotone over
  // a capture run.
  int locked_pairs() const {
    if (a_.variant == Variant::EightMu)
      return static_cast<int>(s_.docking_joints.size());
    const auto& loop = a_.closing_loop;
    int count = 0;
    for (size_t k = 0; k < loop.size(); ++k) {
      const bool latched = std::find(s_.closing_latched.begin(), s_.closing_latched.end(),
                                     static_cast<int>(k)) != s_.closing_latched.end();
      const double d =
          (s_.pos[loop[(k + 1) % loop.size()]] - s_.pos[loop[k]]).norm();
      if (latched || d <= cfg_.capture.lock_distance) ++count;
    }
    return count;
  }

  void step(const std::vector<Vec3>& controls, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("Simulator::step: dt must be > 0");
    if (static_cast<int>(controls.size()) != a_.mu_count())
      throw std::invalid_argument("Simulator::step: controls length != MU count");

    std::fill(force_.begin(), force_.end(), Vec3{});
    Vec3 debris_torque{};

    for (const Link& link : a_.links) {
      const CableForce f = cable_force(link, s_.pos[link.a], s_.pos[link.b],
                                       s_.vel[link.a], s_.vel[link.b],
                                       a_.masses[link.a], a_.masses[link.b], dt);
      if (f.degenerate) { ++events_.degenerate_links; continue; }
      force_[link.a] += f.on_a;
      force_[link.b] -= f.on_a;
      events_.max_link_tension = std::max(events_.max_link_tension, f.tension);
      events_.min_applied_tension = std::min(events_.min_applied_tension, f.tension);
    }

    if (s_.closing_rest_length >= 0.0) apply_closing_cord(dt);

    if (!s_.docking_joints.empty()) {
      for (const auto& [ka, kb] : s_.docking_joints) {
        const int ia = a_.mu_index(ka), ib = a_.mu_index(kb);
        const Vec3 dx = s_.pos[ib] - s_.pos[ia];
        const Vec3 dv = s_.vel[ib] - s_.vel[ia];
        const double c = clamped_damping(cfg_.capture.docking_damping,
                                         a_.masses[ia], a_.masses[ib], dt);
        const Vec3 f = dx * cfg_.capture.docking_stiffness + dv * c;
        force_[ia] += f;
        force_[ib] -= f;
      }
    }

    {
      const int knot = a_.knot_index(), chaser = a_.chaser_index();
      const TetherForce tf = tether_force(
          s_.pos[knot], s_.vel[knot], s_.pos[chaser], s_.vel[chaser], s_.winch_mode,
          locked_tether_length_, cfg_.tether, a_.masses[knot], a_.masses[chaser], dt);
      force_[knot] += tf.on_knot;
      force_[chaser] -= tf.on_knot;
    }

    {
      const int debris = a_.debris_index();
      const Vec3 dp = s_.pos[debris], dv = s_.vel[debris];
      for (int i = 0; i < a_.body_count(); ++i) {
        if (i == debris || i == a_.chaser_index()) continue;
        const ContactResult cr = contact_point_cylinder(
            s_.pos[i], s_.vel[i], a_.masses[i], dp, dv, s_.debris_orientation,
            s_.debris_angular_velocity, a_.debris_radius, a_.debris_length,
            cfg_.contact, dt);
        if (!cr.touching) continue;
        ++events_.contact_points;
        force_[i] += cr.on_point;
        force_[debris] += cr.debris_force;
        debris_torque += cr.debris_torque;
      }
    }

    for (int k = 0; k < a_.mu_count(); ++k) force_[a_.mu_index(k)] += controls[k];

    const int debris = a_.debris_index();
    for (int i = 0; i < a_.body_count(); ++i) {
      if (i == debris) continue;
      s_.vel[i] += force_[i] * (dt / a_.masses[i]);
      s_.pos[i] += s_.vel[i] * dt;
    }
    {
      s_.vel[debris] += force_[debris] * (dt / a_.masses[debris]);
      s_.pos[debris] += s_.vel[debris] * dt;
      // Euler's equations in the body frame with principal inertia
      const Vec3 tau_body = s_.debris_orientation.rotate_inverse(debris_torque);
      const Vec3& I = a_.debris_inertia;
      const Vec3& w = s_.debris_angular_velocity;
      const Vec3 Iw{I.x * w.x, I.y * w.y, I.z * w.z};
      const Vec3 wdot{(tau_body.x - (w.y * Iw.z - w.z * Iw.y)) / I.x,
                      (tau_body.y - (w.z * Iw.x - w.x * Iw.z)) / I.y,
                      (tau_body.z - (w.x * Iw.y - w.y * Iw.x)) / I.z};
      s_.debris_angular_velocity += wdot * dt;
      s_.debris_orientation =
          Quat::integrate(s_.debris_orientation, s_.debris_angular_velocity, dt);
    }

    s_.time += dt;

    if (s_.winch_mode == WinchMode::FreeSpool) {
      const double sep = (s_.pos[a_.knot_index()] - s_.pos[a_.chaser_index()]).norm();
      s_.deployed_tether_length = std::max(s_.deployed_tether_length, sep);
    }

    if (docking_enabled_) check_docking();
    if (s_.closing_rest_length >= 0.0) check_closing_latches();

    for (int i = 0; i < a_.body_count(); ++i) {
      if (!s_.pos[i].finite() || !s_.vel[i].finite())
        throw IntegrationDiverged(i, s_.time);
    }
  }

  // Test hooks: totals over every body.
  Vec3 total_linear_momentum() const {
    Vec3 p{};
    for (int i = 0; i < a_.body_count(); ++i) p += s_.vel[i] * a_.masses[i];
    return p;
  }

  double mechanical_energy() const {
    double e = 0.0;
    for (int i = 0; i < a_.body_count(); ++i)
      e += 0.5 * a_.masses[i] * s_.vel[i].norm2();
    for (const Link& link : a_.links) {
      const double len = (s_.pos[link.b] - s_.pos[link.a]).norm();
      const double ext = std::max(0.0, len - link.rest_length);
      e += 0.5 * link.stiffness * ext * ext;
    }
    return e;
  }

 private:
  // The winch cord threads the closing loop like a drawstring: one tension
  // value along the whole cord, applied segment-wise, rest length reeled in
  // at reel_rate down to the configured floor. Tension is capped (a slipping
  // clutch) so snags cannot produce unbounded elastic spikes.
  void apply_closing_cord(double dt) {
    const auto& loop = a_.closing_loop;
    const size_t n = loop.size();
    double total_len = 0.0, total_rate = 0.0;
    seg_dir_.resize(n);
    for (size_t k = 0; k < n; ++k) {
      const int ia = loop[k], ib = loop[(k + 1) % n];
      const Vec3 d = s_.pos[ib] - s_.pos[ia];
      const double len = d.norm();
      if (len < 1e-9) { seg_dir_[k] = Vec3{}; ++events_.degenerate_links; continue; }
      seg_dir_[k] = d / len;
      total_len += len;
      total_rate += (s_.vel[ib] - s_.vel[ia]).dot(seg_dir_[k]);
    }
    const double c = std::min(cfg_.capture.closing_damping, a_.node_mass / (4.0 * dt));
    double tension = cfg_.capture.closing_stiffness * (total_len - s_.closing_rest_length) +
                     c * total_rate;
    tension = std::clamp(tension, 0.0, cfg_.capture.closing_tension_cap);
    events_.max_cord_tension = std::max(events_.max_cord_tension, tension);
    if (tension > 0.0) {
      for (size_t k = 0; k < n; ++k) {
        const int ia = loop[k], ib = loop[(k + 1) % n];
        force_[ia] += seg_dir_[k] * tension;
        force_[ib] -= seg_dir_[k] * tension;
      }
    }
    s_.closing_rest_length = std::max(cfg_.capture.closing_min_length,
                                      s_.closing_rest_length - cfg_.capture.reel_rate * dt);

    // Latched pairs are pinched shut: a stiff zero-rest spring holds them so
    // later yanks (tether rebound, debris tumble) cannot reopen the mouth.
    for (int k : s_.closing_latched) {
      const int ia = loop[k], ib = loop[(static_cast<size_t>(k) + 1) % n];
      const double cp = clamped_damping(cfg_.capture.closing_damping, a_.masses[ia],
                                        a_.masses[ib], dt);
      const Vec3 f = (s_.pos[ib] - s_.pos[ia]) * cfg_.capture.closing_stiffness +
                     (s_.vel[ib] - s_.vel[ia]) * cp;
      force_[ia] += f;
      force_[ib] -= f;
    }
  }

  void check_closing_latches() {
    const auto& loop = a_.closing_loop;
    for (size_t k = 0; k < loop.size(); ++k) {
      if (std::find(s_.closing_latched.begin(), s_.closing_latched.end(),
                    static_cast<int>(k)) != s_.closing_latched.end())
        continue;
      const double d = (s_.pos[loop[(k + 1) % loop.size()]] - s_.pos[loop[k]]).norm();
      if (d <= cfg_.capture.lock_distance) s_.closing_latched.push_back(static_cast<int>(k));
    }
  }

  void check_docking() {
    for (const auto& [ka, kb] : docking_pairs_) {
      bool engaged = false;
      for (const auto& j : s_.docking_joints)
        if (j.first == ka && j.second == kb) { engaged = true; break; }
      if (engaged) continue;
      const double d = (s_.pos[a_.mu_index(kb)] - s_.pos[a_.mu_index(ka)]).norm();
      if (d <= cfg_.capture.docking_distance) s_.docking_joints.push_back({ka, kb});
    }
  }

  Config cfg_;
  NetAssembly a_;
  SystemState s_;
  SimEvents events_;
  std::vector<Vec3> force_;
  std::vector<Vec3> seg_dir_;
  std::vector<std::pair<int, int>> docking_pairs_;
  double locked_tether_length_ = 0.0;
  bool docking_enabled_ = false;
};

}  // namespace tethernet
