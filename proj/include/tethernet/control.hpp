#pragma once

#include <algorithm>
#include <cmath>

#include "tethernet/config.hpp"
#include "tethernet/rng.hpp"
#include "tethernet/vec3.hpp"

namespace tethernet {

struct Measurement {
  Vec3 pos, vel;
  bool finite() const { return pos.finite() && vel.finite(); }
};

// Straight-line reference from r0 to r_final over t_final, held afterwards.
// Endpoints are returned exactly (no interpolation arithmetic at t=0 or
// t>=t_final).
inline Vec3 desired_position(double t, const Vec3& r0, const Vec3& r_final, double t_final) {
  if (t_final <= 0.0) throw ConfigError("desired_position: t_final must be > 0");
  if (t <= 0.0) return r0;
  if (t >= t_final) return r_final;
  return r0 + (r_final - r0) * (t / t_final);
}

// Gaussian sensor noise with per-axis sigma = (3-sigma bound)/3, position and
// velocity independent. Six draws in fixed axis order per call.
inline Measurement sense(const Measurement& truth, const ControllerConfig& cc, Rng& rng) {
  const double sp = cc.pos_noise_3sigma / 3.0;
  const double sv = cc.vel_noise_3sigma / 3.0;
  Measurement m;
  m.pos = {truth.pos.x + rng.normal(0.0, sp), truth.pos.y + rng.normal(0.0, sp),
           truth.pos.z + rng.normal(0.0, sp)};
  m.vel = {truth.vel.x + rng.normal(0.0, sv), truth.vel.y + rng.normal(0.0, sv),
           truth.vel.z + rng.normal(0.0, sv)};
  return m;
}

inline double fuel_increment(const Vec3& saturated_thrust, double dt, double isp, double g0) {
  return saturated_thrust.norm() * dt / (g0 * isp);
}

struct MuControllerState {
  Vec3 integral;       // accumulated position error, m*s
  Vec3 last_command;   // N, zero-order-hold value
  Measurement last_measurement;
  double fuel_used = 0.0;
  bool active = true;
  long sensor_faults = 0;
};

// One PID evaluation at a command tick. The integral uses the error value
// before accumulation (left-endpoint rectangle rule), each axis saturates
// independently, and fuel integrates the saturated magnitude over the tick.
// A non-finite measurement emits zero thrust and counts a sensor fault.
inline Vec3 pid_thrust(MuControllerState& st, const Measurement& measured,
                       const Vec3& desired, double dt_command, const ControllerConfig& cc) {
  if (!measured.finite()) {
    ++st.sensor_faults;
    st.last_command = Vec3{};
    return st.last_command;
  }
  const Vec3 err = desired - measured.pos;
  Vec3 u = err * cc.kp - measured.vel * cc.kd + st.integral * cc.ki;
  const double lim = cc.thrust_limit_per_axis;
  u.x = std::clamp(u.x, -lim, lim);
  u.y = std::clamp(u.y, -lim, lim);
  u.z = std::clamp(u.z, -lim, lim);
  st.integral += err * dt_command;
  st.fuel_used += fuel_increment(u, dt_command, cc.isp, cc.g0);
  st.last_command = u;
  st.last_measurement = measured;
  return u;
}

// Drives one MU through deployment and (eight-MU) the closing retarget. The
// episode loop calls tick() at the shared 20 Hz sensor/command instants and
// held() at every integrator step in between.
class MuController {
 public:
  MuController(const ControllerConfig& cc, const Vec3& r0, const Vec3& r_final)
      : cc_(cc), r0_(r0), r_final_(r_final) {}

  Vec3 tick(double t, const Measurement& truth, Rng& rng) {
    if (!st_.active || t < 0.0) return Vec3{};
    const Measurement meas = sense(truth, cc_, rng);
    last_desired_ = desired_at(t);
    return pid_thrust(st_, meas, last_desired_, 1.0 / cc_.command_rate, cc_);
  }

  Vec3 held() const { return st_.active ? st_.last_command : Vec3{}; }

  void deactivate() {
    st_.active = false;
    st_.last_command = Vec3{};
  }

  // Closing-phase trajectory: straight ramp from `from` to `to` starting at
  // absolute time t0, then hold.
  void retarget(double t0, const Vec3& from, const Vec3& to, double ramp) {
    retargeted_ = true;
    retarget_t0_ = t0;
    retarget_from_ = from;
    retarget_to_ = to;
    retarget_ramp_ = ramp;
    if (cc_.reset_integral_on_retarget) st_.integral = Vec3{};
  }

  Vec3 desired_at(double t) const {
    if (retargeted_)
      return desired_position(t - retarget_t0_, retarget_from_, retarget_to_, retarget_ramp_);
    return desired_position(t, r0_, r_final_, cc_.t_final);
  }

  const MuControllerState& state() const { return st_; }
  const Vec3& last_desired() const { return last_desired_; }
  double fuel() const { return st_.fuel_used; }
  bool active() const { return st_.active; }
  const Vec3& aim() const { return r_final_; }

 private:
  ControllerConfig cc_;
  MuControllerState st_;
  Vec3 r0_, r_final_;
  Vec3 last_desired_;
  bool retargeted_ = false;
  double retarget_t0_ = 0.0, retarget_ramp_ = 1.0;
  Vec3 retarget_from_, retarget_to_;
};

}  // namespace tethernet
