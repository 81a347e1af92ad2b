#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tethernet/aiming.hpp"
#include "tethernet/capture.hpp"
#include "tethernet/control.hpp"
#include "tethernet/io.hpp"
#include "tethernet/simulator.hpp"
#include "tethernet/surrogate.hpp"

namespace tethernet {

enum class CaptureMode { Full, Surrogate };

inline CaptureMode capture_mode_from_name(const std::string& name) {
  if (name == "full") return CaptureMode::Full;
  if (name == "surrogate") return CaptureMode::Surrogate;
  throw ConfigError("unknown capture mode: " + name + " (expected full|surrogate)");
}

// Rng stream ids; one root seed per episode keeps results independent of
// worker assignment.
inline constexpr uint64_t kStreamSensor = 1;
inline constexpr uint64_t kStreamSurrogate = 2;

struct EpisodeOptions {
  CaptureMode mode = CaptureMode::Full;
  const SurrogateModel* surrogate = nullptr;  // required in Surrogate mode
  bool collect_features = true;               // keep the trigger-time feature row
  bool raw_aiming_table = false;
  JsonlWriter* trajectory_log = nullptr;
  JsonlWriter* control_log = nullptr;
};

struct EpisodeRecord {
  Scenario scenario;
  AimingAction action;  // offsets as applied (before nominal addition)
  CaptureMode mode = CaptureMode::Full;
  CaptureMetrics metrics;
  double fuel_total = 0.0;       // kg, summed over MUs at episode end
  double fuel_at_trigger = 0.0;  // kg, summed at the trigger instant
  double reward = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> features;  // trigger-time surrogate row (may be empty)
  SimEvents events;
  double wall_time_s = 0.0;

  Json to_json() const {
    Json j;
    j["scenario"] = {{"x", scenario.x}, {"y", scenario.y}, {"z", scenario.z},
                     {"seed", scenario.seed}};
    Json act = Json::array();
    for (const auto& a : action) act.push_back({a[0], a[1]});
    j["action"] = act;
    j["mode"] = mode == CaptureMode::Full ? "full" : "surrogate";
    j["triggered"] = metrics.triggered;
    j["trigger_time"] = metrics.trigger_time;
    j["cqi"] = metrics.settled_cqi;
    j["locked_pairs"] = metrics.locked_pairs;
    j["mouth_area_at_trigger"] = metrics.mouth_area_at_trigger;
    j["max_mouth_area"] = metrics.max_mouth_area;
    j["success"] = metrics.success;
    j["failure_reason"] = metrics.failure_reason;
    j["cqi_series"] = metrics.cqi_series;
    j["fuel_per_mu"] = metrics.fuel_per_mu;
    j["fuel_total"] = fuel_total;
    j["fuel_at_trigger"] = fuel_at_trigger;
    // NaN serializes as null, which marks "reward not configured".
    j["reward"] = reward;
    // Wall time stays out: artifacts must be bitwise reproducible, timing
    // goes to the sidecar.
    j["events"] = {{"degenerate_links", events.degenerate_links},
                   {"contact_points", events.contact_points},
                   {"max_link_tension", events.max_link_tension},
                   {"max_cord_tension", events.max_cord_tension}};
    return j;
  }
};

namespace detail {

inline double sum_fuel(const std::vector<MuController>& ctrls) {
  double f = 0.0;
  for (const auto& c : ctrls) f += c.fuel();
  return f;
}

inline std::vector<double> fuel_vector(const std::vector<MuController>& ctrls) {
  std::vector<double> f;
  f.reserve(ctrls.size());
  for (const auto& c : ctrls) f.push_back(c.fuel());
  return f;
}

inline std::vector<Vec3> perimeter_points(const NetAssembly& a, const SystemState& s) {
  std::vector<Vec3> pts;
  pts.reserve(a.perimeter_loop.size());
  for (int idx : a.perimeter_loop) pts.push_back(s.pos[idx]);
  return pts;
}

}  // namespace detail

// Runs one scenario end to end: deployment under PID guidance, trigger
// detection at the sensor rate, then either the full contact/closing phase or
// a surrogate lookup at the trigger snapshot.  Bitwise deterministic for a
// fixed (config, scenario, action, mode) tuple.
inline EpisodeRecord run_episode(const Config& cfg, const Scenario& scenario,
                                 const AimingAction& action, const EpisodeOptions& opt = {}) {
  const auto wall_start = std::chrono::steady_clock::now();
  validate_scenario(scenario, cfg.scenario);
  if (opt.mode == CaptureMode::Surrogate && opt.surrogate == nullptr)
    throw ConfigError("surrogate mode requires a surrogate model");

  auto [a, s] = build_assembly(cfg);
  const Vec3 debris0{scenario.x, scenario.y, scenario.z};
  s.pos[a.debris_index()] = debris0;

  const bool raw_table = opt.raw_aiming_table || cfg.raw_aiming_table;
  // An empty action means "fly the nominal aiming", the common baseline case.
  const AimingAction act =
      action.empty() ? AimingAction(mu_count(cfg.variant), {0.0, 0.0}) : action;
  const std::vector<Vec3> aims = apply_action(
      nominal_aiming(debris0, cfg.variant, cfg.scenario, raw_table), act, 5.0, /*clip=*/true);

  Rng sensor_rng(scenario.seed, kStreamSensor);
  Rng surrogate_rng(scenario.seed, kStreamSurrogate);

  std::vector<MuController> ctrls;
  ctrls.reserve(a.mu_count());
  for (int k = 0; k < a.mu_count(); ++k)
    ctrls.emplace_back(cfg.controller, s.pos[a.mu_index(k)], aims[k]);

  Simulator sim(cfg, a, s);
  const double tick_dt = 1.0 / cfg.controller.command_rate;
  const double dt = cfg.sim.dt;
  const double eps = 0.5 * std::min(dt, cfg.sim.dt_capture);

  EpisodeRecord rec;
  rec.scenario = scenario;
  rec.action = action;
  rec.mode = opt.mode;
  rec.metrics.max_mouth_area = a.flat_mouth_area;

  std::vector<Vec3> controls(a.mu_count(), Vec3{});
  double next_tick = 0.0;
  double next_log = 0.0;

  auto log_trajectory = [&](double t) {
    if (!opt.trajectory_log) return;
    const SystemState& st = sim.state();
    Json j;
    j["t"] = t;
    const Vec3 com = sim.net_com();
    j["net_com"] = {com.x, com.y, com.z};
    const Vec3 dp = st.pos[a.debris_index()];
    j["debris"] = {dp.x, dp.y, dp.z};
    Json mus = Json::array();
    for (int k = 0; k < a.mu_count(); ++k) {
      const Vec3 p = st.pos[a.mu_index(k)];
      mus.push_back({p.x, p.y, p.z});
    }
    j["mu"] = mus;
    j["dist"] = (com - dp).norm();
    j["mouth_area"] = mouth_area(detail::perimeter_points(a, st));
    opt.trajectory_log->write(j);
  };

  auto log_controls = [&](double t) {
    if (!opt.control_log) return;
    const SystemState& st = sim.state();
    for (int k = 0; k < a.mu_count(); ++k) {
      const Vec3 p = st.pos[a.mu_index(k)];
      const Vec3 d = ctrls[k].last_desired();
      const Vec3 u = ctrls[k].held();
      Json j;
      j["t"] = t;
      j["mu"] = k;
      j["desired"] = {d.x, d.y, d.z};
      j["pos"] = {p.x, p.y, p.z};
      j["thrust"] = {u.x, u.y, u.z};
      j["fuel"] = ctrls[k].fuel();
      j["tracking_error"] = (p - d).norm();
      opt.control_log->write(j);
    }
  };

  FeatureWindow window(cfg.surrogate.window);
  const bool want_features = opt.collect_features || opt.mode == CaptureMode::Surrogate;

  // Deployment phase: 20 Hz sense/command ticks, trigger checked at the same
  // instants against the true net and debris centres.
  bool triggered = false;
  double trigger_time = -1.0;
  while (sim.state().time < cfg.capture.max_episode_time - eps) {
    const double t = sim.state().time;
    if (t >= next_tick - eps) {
      const SystemState& st = sim.state();
      if (want_features) window.push(extract_features(a, st, cfg.surrogate.include_mu_states));
      const Vec3 com = sim.net_com();
      if (closing_trigger(com, st.pos[a.debris_index()], cfg.capture.trigger_distance)) {
        triggered = true;
        trigger_time = t;
        sim.state().trigger_fired = true;
        sim.state().trigger_time = t;
      } else {
        for (int k = 0; k < a.mu_count(); ++k) {
          const Measurement truth{st.pos[a.mu_index(k)], st.vel[a.mu_index(k)]};
          controls[k] = ctrls[k].tick(t, truth, sensor_rng);
        }
        log_controls(t);
      }
      next_tick += tick_dt;
      if (triggered) break;
    }
    if (opt.trajectory_log && t >= next_log - eps) {
      log_trajectory(t);
      next_log += cfg.sim.log_interval;
    }
    sim.step(controls, dt);
  }

  rec.metrics.triggered = triggered;
  rec.metrics.trigger_time = trigger_time;

  if (!triggered) {
    // NoTrigger episode: sentinel CQI, empty mouth, all fuel spent.
    rec.metrics.settled_cqi = cfg.reward.no_trigger_cqi;
    rec.metrics.locked_pairs = 0;
    rec.metrics.mouth_area_at_trigger = 0.0;
    rec.metrics.failure_reason = "NoTrigger";
    rec.metrics.success = false;
    rec.metrics.fuel_per_mu = detail::fuel_vector(ctrls);
    rec.fuel_total = detail::sum_fuel(ctrls);
    rec.fuel_at_trigger = rec.fuel_total;
    rec.events = sim.events();
  } else {
    rec.metrics.mouth_area_at_trigger = mouth_area(detail::perimeter_points(a, sim.state()));
    rec.fuel_at_trigger = detail::sum_fuel(ctrls);
    if (want_features) rec.features = window.row();

    if (opt.mode == CaptureMode::Surrogate) {
      const SurrogatePrediction p = opt.surrogate->noisy_predict(rec.features, surrogate_rng);
      rec.metrics.cqi_series = {{trigger_time, p.cqi}};
      rec.metrics.settled_cqi = p.cqi;
      rec.metrics.locked_pairs = p.locked;
      // Thrusters are cut (four-MU) or ramped down (eight-MU) after the
      // trigger; the trigger-time total is the surrogate's fuel estimate.
      rec.metrics.fuel_per_mu = detail::fuel_vector(ctrls);
      rec.fuel_total = rec.fuel_at_trigger;
    } else {
      sim.lock_winch();
      // Four-MU: thrusters cut at the trigger, the cord engages after the
      // configured delay so the rim coasts past the debris first.
      double engage_at = trigger_time + cfg.capture.closing_delay;
      if (cfg.variant == Variant::FourMu) {
        for (auto& c : ctrls) c.deactivate();
        std::fill(controls.begin(), controls.end(), Vec3{});
        if (cfg.capture.closing_delay <= 0.0) sim.engage_closing_cord();
      } else {
        sim.enable_docking();
        const Vec3 dp = sim.state().pos[a.debris_index()];
        const auto& ring = Simulator::docking_ring_order();
        constexpr double kTwoPi = 6.283185307179586476925286766559;
        for (int slot = 0; slot < 8; ++slot) {
          const int mu = ring[slot];
          const double theta = kTwoPi * slot / 8.0;
          const Vec3 to{dp.x + cfg.capture.ring_radius * std::cos(theta),
                        dp.y + cfg.capture.ring_radius * std::sin(theta),
                        dp.z - cfg.capture.ring_depth};
          ctrls[mu].retarget(trigger_time, sim.state().pos[a.mu_index(mu)], to,
                             cfg.capture.closing_ramp);
        }
      }

      const double t_end = trigger_time + cfg.capture.capture_window;
      double next_cqi = trigger_time;
      const double dt_c = cfg.sim.dt_capture;
      while (sim.state().time < t_end - eps) {
        const double t = sim.state().time;
        if (cfg.variant == Variant::FourMu && cfg.capture.closing_delay > 0.0 &&
            t >= engage_at - eps) {
          sim.engage_closing_cord();  // idempotent
        }
        if (cfg.variant == Variant::EightMu && t >= next_tick - eps) {
          const SystemState& st = sim.state();
          for (int k = 0; k < a.mu_count(); ++k) {
            const Measurement truth{st.pos[a.mu_index(k)], st.vel[a.mu_index(k)]};
            controls[k] = ctrls[k].tick(t, truth, sensor_rng);
          }
          log_controls(t);
          next_tick += tick_dt;
        }
        if (t >= next_cqi - eps) {
          const Vec3 com = sim.net_com();
          rec.metrics.cqi_series.emplace_back(
              t, cqi(net_hull_points(a, sim.state()), com,
                     sim.state().pos[a.debris_index()], cfg.capture.target));
          next_cqi += cfg.capture.cqi_sample_interval;
        }
        if (opt.trajectory_log && t >= next_log - eps) {
          log_trajectory(t);
          next_log += cfg.sim.log_interval;
        }
        sim.step(controls, std::min(dt_c, t_end - t));
      }
      // Forced final sample at the window end defines the settled CQI.
      rec.metrics.cqi_series.emplace_back(
          sim.state().time, cqi(net_hull_points(a, sim.state()), sim.net_com(),
                                sim.state().pos[a.debris_index()], cfg.capture.target));
      rec.metrics.settled_cqi = rec.metrics.cqi_series.back().second;
      rec.metrics.locked_pairs = sim.locked_pairs();
      rec.metrics.fuel_per_mu = detail::fuel_vector(ctrls);
      rec.fuel_total = detail::sum_fuel(ctrls);
    }

    const int n_t = cfg.reward_n_t();
    rec.metrics.success = capture_success(rec.metrics.settled_cqi, rec.metrics.locked_pairs,
                                          cfg.reward.cqi_threshold, n_t);
    rec.metrics.failure_reason = failure_reason_of(true, rec.metrics.settled_cqi,
                                                   rec.metrics.locked_pairs,
                                                   cfg.reward.cqi_threshold, n_t);
    rec.events = sim.events();
  }

  if (cfg.reward.m_fmax > 0.0) {
    const RewardInputs in{rec.metrics.mouth_area_at_trigger, rec.metrics.max_mouth_area,
                          rec.metrics.settled_cqi, rec.metrics.locked_pairs, rec.fuel_total};
    rec.reward =
        reward(in, cfg.reward_w(), cfg.reward.m_fmax, cfg.reward.cqi_threshold, cfg.reward_n_t());
  }

  rec.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return rec;
}

}  // namespace tethernet
