#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace tethernet {

using Json = nlohmann::ordered_json;

enum class Variant { FourMu, EightMu };

inline int mu_count(Variant v) { return v == Variant::FourMu ? 4 : 8; }
inline const char* variant_name(Variant v) { return v == Variant::FourMu ? "four_mu" : "eight_mu"; }
inline Variant variant_from_name(const std::string& s) {
  if (s == "four_mu" || s == "four-mu" || s == "4mu") return Variant::FourMu;
  if (s == "eight_mu" || s == "eight-mu" || s == "8mu") return Variant::EightMu;
  throw std::invalid_argument("unknown variant: " + s);
}

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Square cable net plus the threads that hang the MUs off its corners.
struct NetConfig {
  int mesh_n = 23;              // nodes per side
  double side_length = 20.8;    // m
  double mass = 2.0;            // kg, fabric total (nodes share it equally)
  double link_stiffness = 1500.0;  // N/m
  double link_damping = 10.0;      // N s/m
  double thread_rest_length = 3.5;  // m, MU-to-corner thread
  double thread_stiffness = 1500.0;
  double thread_damping = 10.0;
  double stow_scale = 0.1;      // stowed square = stow_scale * side_length
};

struct BodyConfig {
  double mu_mass = 2.5;        // kg
  double chaser_mass = 1600.0;  // kg, 1.5 m cube
  double chaser_side = 1.5;
  double debris_mass = 9000.0;  // kg
  double debris_radius = 1.95;  // m, collision cylinder
  double debris_length = 10.4;  // m
  double debris_spin = 0.0;     // rad/s about the cylinder long axis
};

struct TetherConfig {
  double stiffness = 2000.0;  // N/m when locked
  double damping = 10.0;
};

struct ContactConfig {
  double normal_stiffness = 8000.0;  // N/m
  double normal_damping = 20.0;      // N s/m
  double friction_coefficient = 0.5;
  double friction_regularization_velocity = 0.01;  // m/s
};

struct SimConfig {
  double dt = 1e-3;          // s, deployment phase
  double dt_capture = 8e-5;  // s, post-trigger phase (contact + winch need it)
  double log_interval = 0.05;  // s, trajectory sampling
};

struct ControllerConfig {
  double kp = 10.0;
  double ki = 6.0;
  double kd = 6.0;
  double thrust_limit_per_axis = 5.1;  // N
  double command_rate = 20.0;          // Hz
  double sensor_rate = 20.0;           // Hz
  double pos_noise_3sigma = 0.1;       // m
  double vel_noise_3sigma = 0.1;       // m/s
  double isp = 60.0;                   // s
  double g0 = 9.81;                    // m/s^2
  double t_final = 25.0;               // s, deployment duration
  bool reset_integral_on_retarget = true;
};

struct TargetGeometry {
  double volume = 159.9;                // m^3
  double surface = 59.9;                // m^2
  double characteristic_length = 1.95;  // m
};

struct CaptureConfig {
  double trigger_distance = 2.5;  // m, net COM to debris COM
  double capture_window = 15.0;   // s after trigger
  double max_episode_time = 40.0;  // s, NoTrigger cutoff
  double lock_distance = 0.3;     // m, four-MU adjacency latch engagement
  double docking_distance = 0.5;  // m, eight-MU joint engagement
  int closing_loop_count = 12;    // nodes threaded by the winch cord
  double reel_rate = 8.0;         // m/s
  // The cord starts reeling closing_delay seconds after the trigger so the
  // mouth rim coasts past the debris before it cinches; the winch brake
  // leaves tether_lock_slack meters of travel so the lock does not yank the
  // net off the debris mid-closure.
  double closing_delay = 5.0;       // s
  double tether_lock_slack = 8.0;   // m
  double closing_min_length = 0.24;  // m, total cord floor
  double closing_stiffness = 1500.0;
  double closing_damping = 10.0;
  double closing_tension_cap = 60.0;  // N, winch servo cap
  double ring_radius = 0.5;   // m, eight-MU docking ring
  double ring_depth = 3.25;   // m behind debris COM along approach axis
  double closing_ramp = 8.0;  // s, retarget trajectory duration
  double docking_stiffness = 400.0;
  double docking_damping = 30.0;
  bool com_includes_mus = true;
  double cqi_sample_interval = 0.5;  // s, CQI series resolution
  TargetGeometry target;
};

struct ScenarioBounds {
  double x_min = -9.0, x_max = 9.0;
  double y_min = -9.0, y_max = 9.0;
  double z_min = -60.0, z_max = -40.0;
  double grid = 0.1;
};

struct SurrogateConfig {
  int feature_loop_nodes = 161;  // sampled across the three loops
  bool include_mu_states = true;
  int window = 1;                 // >1: concatenate trailing sensor-tick snapshots
  std::vector<int> hidden = {500, 300};
  double lr = 1e-3;
  int epochs = 300;
  int batch = 64;
  double holdout_fraction = 0.1;
  double error_model_cqi_max = 20.0;  // residual fit restricted to CQI below this
};

struct PolicyConfig {
  std::vector<int> hidden = {64, 64};
  double lr = 1e-3;
  double clip = 0.2;
  int episodes_per_iteration = 32;
  int minibatch = 64;
  int epochs = 4;
  int iterations = 80;
  double entropy_coef = 0.0;
  double init_log_std = 0.0;  // log of sigma in action units (m)
  std::string mode = "surrogate";  // or "full"
};

struct RewardConfig {
  double w = 0.0;       // <= 0: variant default (1.0 four-MU, 1.5 eight-MU)
  double m_fmax = 0.0;  // kg; <= 0: calibrate from 100 nominal episodes
  double cqi_threshold = 2.5;
  int n_t = 0;          // <= 0: variant default (8 four-MU, 6 eight-MU)
  double no_trigger_cqi = 50.0;
};

struct Config {
  Variant variant = Variant::FourMu;
  uint64_t seed = 1;
  int workers = 0;  // 0: hardware concurrency
  bool raw_aiming_table = false;  // use the printed (typo'd) nominal table
  NetConfig net;
  BodyConfig bodies;
  TetherConfig tether;
  ContactConfig contact;
  SimConfig sim;
  ControllerConfig controller;
  CaptureConfig capture;
  ScenarioBounds scenario;
  SurrogateConfig surrogate;
  PolicyConfig policy;
  RewardConfig reward;

  double reward_w() const {
    if (reward.w > 0.0) return reward.w;
    return variant == Variant::FourMu ? 1.0 : 1.5;
  }
  int reward_n_t() const {
    if (reward.n_t > 0) return reward.n_t;
    return variant == Variant::FourMu ? 8 : 6;
  }
  int max_locked_pairs() const { return variant == Variant::FourMu ? 12 : 8; }
};

// Reduced-resolution profile sized for a single-core test box. Geometry,
// debris, controller, and scenario box are unchanged; only discretization and
// network sizes shrink.
inline Config desk_config(Variant variant) {
  Config c;
  c.variant = variant;
  c.net.mesh_n = 9;
  c.sim.dt_capture = 5e-4;
  c.surrogate.feature_loop_nodes = 72;
  c.surrogate.hidden = {64, 32};
  c.surrogate.epochs = 200;
  c.capture.cqi_sample_interval = 1.0;
  return c;
}

namespace detail {

template <typename T>
void get_if(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline void from_json_overlay(const Json& j, NetConfig& c) {
  detail::get_if(j, "mesh_n", c.mesh_n);
  detail::get_if(j, "side_length", c.side_length);
  detail::get_if(j, "mass", c.mass);
  detail::get_if(j, "link_stiffness", c.link_stiffness);
  detail::get_if(j, "link_damping", c.link_damping);
  detail::get_if(j, "thread_rest_length", c.thread_rest_length);
  detail::get_if(j, "thread_stiffness", c.thread_stiffness);
  detail::get_if(j, "thread_damping", c.thread_damping);
  detail::get_if(j, "stow_scale", c.stow_scale);
}

inline void from_json_overlay(const Json& j, BodyConfig& c) {
  detail::get_if(j, "mu_mass", c.mu_mass);
  detail::get_if(j, "chaser_mass", c.chaser_mass);
  detail::get_if(j, "chaser_side", c.chaser_side);
  detail::get_if(j, "debris_mass", c.debris_mass);
  detail::get_if(j, "debris_radius", c.debris_radius);
  detail::get_if(j, "debris_length", c.debris_length);
  detail::get_if(j, "debris_spin", c.debris_spin);
}

inline void from_json_overlay(const Json& j, TetherConfig& c) {
  detail::get_if(j, "stiffness", c.stiffness);
  detail::get_if(j, "damping", c.damping);
}

inline void from_json_overlay(const Json& j, ContactConfig& c) {
  detail::get_if(j, "normal_stiffness", c.normal_stiffness);
  detail::get_if(j, "normal_damping", c.normal_damping);
  detail::get_if(j, "friction_coefficient", c.friction_coefficient);
  detail::get_if(j, "friction_regularization_velocity", c.friction_regularization_velocity);
}

inline void from_json_overlay(const Json& j, SimConfig& c) {
  detail::get_if(j, "dt", c.dt);
  detail::get_if(j, "dt_capture", c.dt_capture);
  detail::get_if(j, "log_interval", c.log_interval);
}

inline void from_json_overlay(const Json& j, ControllerConfig& c) {
  detail::get_if(j, "kp", c.kp);
  detail::get_if(j, "ki", c.ki);
  detail::get_if(j, "kd", c.kd);
  detail::get_if(j, "thrust_limit_per_axis", c.thrust_limit_per_axis);
  detail::get_if(j, "command_rate", c.command_rate);
  detail::get_if(j, "sensor_rate", c.sensor_rate);
  detail::get_if(j, "pos_noise_3sigma", c.pos_noise_3sigma);
  detail::get_if(j, "vel_noise_3sigma", c.vel_noise_3sigma);
  detail::get_if(j, "isp", c.isp);
  detail::get_if(j, "g0", c.g0);
  detail::get_if(j, "t_final", c.t_final);
  detail::get_if(j, "reset_integral_on_retarget", c.reset_integral_on_retarget);
}

inline void from_json_overlay(const Json& j, TargetGeometry& c) {
  detail::get_if(j, "volume", c.volume);
  detail::get_if(j, "surface", c.surface);
  detail::get_if(j, "characteristic_length", c.characteristic_length);
}

inline void from_json_overlay(const Json& j, CaptureConfig& c) {
  detail::get_if(j, "trigger_distance", c.trigger_distance);
  detail::get_if(j, "capture_window", c.capture_window);
  detail::get_if(j, "max_episode_time", c.max_episode_time);
  detail::get_if(j, "lock_distance", c.lock_distance);
  detail::get_if(j, "docking_distance", c.docking_distance);
  detail::get_if(j, "closing_loop_count", c.closing_loop_count);
  detail::get_if(j, "reel_rate", c.reel_rate);
  detail::get_if(j, "closing_min_length", c.closing_min_length);
  detail::get_if(j, "closing_stiffness", c.closing_stiffness);
  detail::get_if(j, "closing_damping", c.closing_damping);
  detail::get_if(j, "closing_tension_cap", c.closing_tension_cap);
  detail::get_if(j, "ring_radius", c.ring_radius);
  detail::get_if(j, "ring_depth", c.ring_depth);
  detail::get_if(j, "closing_delay", c.closing_delay);
  detail::get_if(j, "tether_lock_slack", c.tether_lock_slack);
  detail::get_if(j, "closing_ramp", c.closing_ramp);
  detail::get_if(j, "docking_stiffness", c.docking_stiffness);
  detail::get_if(j, "docking_damping", c.docking_damping);
  detail::get_if(j, "com_includes_mus", c.com_includes_mus);
  detail::get_if(j, "cqi_sample_interval", c.cqi_sample_interval);
  if (j.contains("target")) from_json_overlay(j.at("target"), c.target);
}

inline void from_json_overlay(const Json& j, ScenarioBounds& c) {
  detail::get_if(j, "x_min", c.x_min);
  detail::get_if(j, "x_max", c.x_max);
  detail::get_if(j, "y_min", c.y_min);
  detail::get_if(j, "y_max", c.y_max);
  detail::get_if(j, "z_min", c.z_min);
  detail::get_if(j, "z_max", c.z_max);
  detail::get_if(j, "grid", c.grid);
}

inline void from_json_overlay(const Json& j, SurrogateConfig& c) {
  detail::get_if(j, "feature_loop_nodes", c.feature_loop_nodes);
  detail::get_if(j, "include_mu_states", c.include_mu_states);
  detail::get_if(j, "window", c.window);
  detail::get_if(j, "hidden", c.hidden);
  detail::get_if(j, "lr", c.lr);
  detail::get_if(j, "epochs", c.epochs);
  detail::get_if(j, "batch", c.batch);
  detail::get_if(j, "holdout_fraction", c.holdout_fraction);
  detail::get_if(j, "error_model_cqi_max", c.error_model_cqi_max);
}

inline void from_json_overlay(const Json& j, PolicyConfig& c) {
  detail::get_if(j, "hidden", c.hidden);
  detail::get_if(j, "lr", c.lr);
  detail::get_if(j, "clip", c.clip);
  detail::get_if(j, "episodes_per_iteration", c.episodes_per_iteration);
  detail::get_if(j, "minibatch", c.minibatch);
  detail::get_if(j, "epochs", c.epochs);
  detail::get_if(j, "iterations", c.iterations);
  detail::get_if(j, "entropy_coef", c.entropy_coef);
  detail::get_if(j, "init_log_std", c.init_log_std);
  detail::get_if(j, "mode", c.mode);
}

inline void from_json_overlay(const Json& j, RewardConfig& c) {
  detail::get_if(j, "w", c.w);
  detail::get_if(j, "m_fmax", c.m_fmax);
  detail::get_if(j, "cqi_threshold", c.cqi_threshold);
  detail::get_if(j, "n_t", c.n_t);
  detail::get_if(j, "no_trigger_cqi", c.no_trigger_cqi);
}

inline void from_json_overlay(const Json& j, Config& c) {
  if (j.contains("variant")) c.variant = variant_from_name(j.at("variant").get<std::string>());
  detail::get_if(j, "seed", c.seed);
  detail::get_if(j, "workers", c.workers);
  detail::get_if(j, "raw_aiming_table", c.raw_aiming_table);
  if (j.contains("net")) from_json_overlay(j.at("net"), c.net);
  if (j.contains("bodies")) from_json_overlay(j.at("bodies"), c.bodies);
  if (j.contains("tether")) from_json_overlay(j.at("tether"), c.tether);
  if (j.contains("contact")) from_json_overlay(j.at("contact"), c.contact);
  if (j.contains("sim")) from_json_overlay(j.at("sim"), c.sim);
  if (j.contains("controller")) from_json_overlay(j.at("controller"), c.controller);
  if (j.contains("capture")) from_json_overlay(j.at("capture"), c.capture);
  if (j.contains("scenario")) from_json_overlay(j.at("scenario"), c.scenario);
  if (j.contains("surrogate")) from_json_overlay(j.at("surrogate"), c.surrogate);
  if (j.contains("policy")) from_json_overlay(j.at("policy"), c.policy);
  if (j.contains("reward")) from_json_overlay(j.at("reward"), c.reward);
}

inline Json to_json(const Config& c) {
  Json j;
  j["variant"] = variant_name(c.variant);
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["raw_aiming_table"] = c.raw_aiming_table;
  j["net"] = {{"mesh_n", c.net.mesh_n},
              {"side_length", c.net.side_length},
              {"mass", c.net.mass},
              {"link_stiffness", c.net.link_stiffness},
              {"link_damping", c.net.link_damping},
              {"thread_rest_length", c.net.thread_rest_length},
              {"thread_stiffness", c.net.thread_stiffness},
              {"thread_damping", c.net.thread_damping},
              {"stow_scale", c.net.stow_scale}};
  j["bodies"] = {{"mu_mass", c.bodies.mu_mass},
                 {"chaser_mass", c.bodies.chaser_mass},
                 {"chaser_side", c.bodies.chaser_side},
                 {"debris_mass", c.bodies.debris_mass},
                 {"debris_radius", c.bodies.debris_radius},
                 {"debris_length", c.bodies.debris_length},
                 {"debris_spin", c.bodies.debris_spin}};
  j["tether"] = {{"stiffness", c.tether.stiffness}, {"damping", c.tether.damping}};
  j["contact"] = {{"normal_stiffness", c.contact.normal_stiffness},
                  {"normal_damping", c.contact.normal_damping},
                  {"friction_coefficient", c.contact.friction_coefficient},
                  {"friction_regularization_velocity", c.contact.friction_regularization_velocity}};
  j["sim"] = {{"dt", c.sim.dt},
              {"dt_capture", c.sim.dt_capture},
              {"log_interval", c.sim.log_interval}};
  j["controller"] = {{"kp", c.controller.kp},
                     {"ki", c.controller.ki},
                     {"kd", c.controller.kd},
                     {"thrust_limit_per_axis", c.controller.thrust_limit_per_axis},
                     {"command_rate", c.controller.command_rate},
                     {"sensor_rate", c.controller.sensor_rate},
                     {"pos_noise_3sigma", c.controller.pos_noise_3sigma},
                     {"vel_noise_3sigma", c.controller.vel_noise_3sigma},
                     {"isp", c.controller.isp},
                     {"g0", c.controller.g0},
                     {"t_final", c.controller.t_final},
                     {"reset_integral_on_retarget", c.controller.reset_integral_on_retarget}};
  j["capture"] = {{"trigger_distance", c.capture.trigger_distance},
                  {"capture_window", c.capture.capture_window},
                  {"max_episode_time", c.capture.max_episode_time},
                  {"lock_distance", c.capture.lock_distance},
                  {"docking_distance", c.capture.docking_distance},
                  {"closing_loop_count", c.capture.closing_loop_count},
                  {"reel_rate", c.capture.reel_rate},
                  {"closing_min_length", c.capture.closing_min_length},
                  {"closing_stiffness", c.capture.closing_stiffness},
                  {"closing_damping", c.capture.closing_damping},
                  {"closing_tension_cap", c.capture.closing_tension_cap},
                  {"ring_radius", c.capture.ring_radius},
                  {"ring_depth", c.capture.ring_depth},
                  {"closing_delay", c.capture.closing_delay},
                  {"tether_lock_slack", c.capture.tether_lock_slack},
                  {"closing_ramp", c.capture.closing_ramp},
                  {"docking_stiffness", c.capture.docking_stiffness},
                  {"docking_damping", c.capture.docking_damping},
                  {"com_includes_mus", c.capture.com_includes_mus},
                  {"cqi_sample_interval", c.capture.cqi_sample_interval},
                  {"target",
                   {{"volume", c.capture.target.volume},
                    {"surface", c.capture.target.surface},
                    {"characteristic_length", c.capture.target.characteristic_length}}}};
  j["scenario"] = {{"x_min", c.scenario.x_min}, {"x_max", c.scenario.x_max},
                   {"y_min", c.scenario.y_min}, {"y_max", c.scenario.y_max},
                   {"z_min", c.scenario.z_min}, {"z_max", c.scenario.z_max},
                   {"grid", c.scenario.grid}};
  j["surrogate"] = {{"feature_loop_nodes", c.surrogate.feature_loop_nodes},
                    {"include_mu_states", c.surrogate.include_mu_states},
                    {"window", c.surrogate.window},
                    {"hidden", c.surrogate.hidden},
                    {"lr", c.surrogate.lr},
                    {"epochs", c.surrogate.epochs},
                    {"batch", c.surrogate.batch},
                    {"holdout_fraction", c.surrogate.holdout_fraction},
                    {"error_model_cqi_max", c.surrogate.error_model_cqi_max}};
  j["policy"] = {{"hidden", c.policy.hidden},
                 {"lr", c.policy.lr},
                 {"clip", c.policy.clip},
                 {"episodes_per_iteration", c.policy.episodes_per_iteration},
                 {"minibatch", c.policy.minibatch},
                 {"epochs", c.policy.epochs},
                 {"iterations", c.policy.iterations},
                 {"entropy_coef", c.policy.entropy_coef},
                 {"init_log_std", c.policy.init_log_std},
                 {"mode", c.policy.mode}};
  j["reward"] = {{"w", c.reward.w},
                 {"m_fmax", c.reward.m_fmax},
                 {"cqi_threshold", c.reward.cqi_threshold},
                 {"n_t", c.reward.n_t},
                 {"no_trigger_cqi", c.reward.no_trigger_cqi}};
  return j;
}

// Collects every violation instead of stopping at the first; the CLI prints
// the lot and exits with the config-error code.
inline std::vector<std::string> validate(const Config& c) {
  std::vector<std::string> errs;
  auto require = [&errs](bool ok, const std::string& msg) {
    if (!ok) errs.push_back(msg);
  };
  require(c.net.mesh_n >= 3, "net.mesh_n must be >= 3");
  require(c.net.mesh_n % 2 == 1,
          "net.mesh_n must be odd (central knot and side-midpoint attachments)");
  require(c.net.side_length > 0, "net.side_length must be > 0");
  require(c.net.mass > 0, "net.mass must be > 0");
  require(c.net.link_stiffness > 0, "net.link_stiffness must be > 0");
  require(c.net.link_damping >= 0, "net.link_damping must be >= 0");
  require(c.net.thread_rest_length > 0, "net.thread_rest_length must be > 0");
  require(c.bodies.mu_mass > 0, "bodies.mu_mass must be > 0");
  require(c.bodies.chaser_mass > 0, "bodies.chaser_mass must be > 0");
  require(c.bodies.debris_mass > 0, "bodies.debris_mass must be > 0");
  require(c.bodies.debris_radius > 0, "bodies.debris_radius must be > 0");
  require(c.bodies.debris_length > 0, "bodies.debris_length must be > 0");
  require(c.contact.normal_stiffness > 0, "contact.normal_stiffness must be > 0");
  require(c.contact.normal_damping >= 0, "contact.normal_damping must be >= 0");
  require(c.contact.friction_coefficient >= 0 && c.contact.friction_coefficient <= 2,
          "contact.friction_coefficient must be in [0, 2]");
  require(c.contact.friction_regularization_velocity > 0,
          "contact.friction_regularization_velocity must be > 0");
  require(c.sim.dt > 0, "sim.dt must be > 0");
  require(c.sim.dt_capture > 0, "sim.dt_capture must be > 0");
  require(c.sim.log_interval > 0, "sim.log_interval must be > 0");
  require(c.controller.command_rate > 0, "controller.command_rate must be > 0");
  require(c.controller.sensor_rate > 0, "controller.sensor_rate must be > 0");
  require(c.controller.thrust_limit_per_axis > 0, "controller.thrust_limit_per_axis must be > 0");
  require(c.controller.pos_noise_3sigma >= 0, "controller.pos_noise_3sigma must be >= 0");
  require(c.controller.vel_noise_3sigma >= 0, "controller.vel_noise_3sigma must be >= 0");
  require(c.controller.isp > 0, "controller.isp must be > 0");
  require(c.controller.g0 > 0, "controller.g0 must be > 0");
  require(c.controller.t_final > 0, "controller.t_final must be > 0");
  require(c.capture.trigger_distance > 0, "capture.trigger_distance must be > 0");
  require(c.capture.capture_window > 0, "capture.capture_window must be > 0");
  require(c.capture.max_episode_time > c.controller.t_final,
          "capture.max_episode_time must exceed controller.t_final");
  require(c.capture.closing_loop_count >= 3, "capture.closing_loop_count must be >= 3");
  require(c.capture.reel_rate > 0, "capture.reel_rate must be > 0");
  require(c.capture.closing_delay >= 0, "capture.closing_delay must be >= 0");
  require(c.capture.closing_delay < c.capture.capture_window,
          "capture.closing_delay must be < capture.capture_window");
  require(c.capture.tether_lock_slack >= 0, "capture.tether_lock_slack must be >= 0");
  require(c.capture.target.volume > 0, "capture.target.volume must be > 0");
  require(c.capture.target.surface > 0, "capture.target.surface must be > 0");
  require(c.capture.target.characteristic_length > 0,
          "capture.target.characteristic_length must be > 0");
  require(c.scenario.x_min <= c.scenario.x_max, "scenario x bounds inverted");
  require(c.scenario.y_min <= c.scenario.y_max, "scenario y bounds inverted");
  require(c.scenario.z_min <= c.scenario.z_max, "scenario z bounds inverted");
  require(c.scenario.grid > 0, "scenario.grid must be > 0");
  require(c.surrogate.feature_loop_nodes >= 3, "surrogate.feature_loop_nodes must be >= 3");
  require(c.surrogate.window >= 1, "surrogate.window must be >= 1");
  require(!c.surrogate.hidden.empty(), "surrogate.hidden must not be empty");
  require(c.surrogate.lr > 0, "surrogate.lr must be > 0");
  require(c.surrogate.epochs > 0, "surrogate.epochs must be > 0");
  require(c.surrogate.batch > 0, "surrogate.batch must be > 0");
  require(c.surrogate.holdout_fraction > 0 && c.surrogate.holdout_fraction < 1,
          "surrogate.holdout_fraction must be in (0, 1)");
  require(c.policy.lr > 0, "policy.lr must be > 0");
  require(c.policy.clip > 0, "policy.clip must be > 0");
  require(c.policy.episodes_per_iteration > 0, "policy.episodes_per_iteration must be > 0");
  require(c.policy.minibatch > 0, "policy.minibatch must be > 0");
  require(c.policy.epochs > 0, "policy.epochs must be > 0");
  require(c.policy.iterations > 0, "policy.iterations must be > 0");
  require(c.policy.mode == "surrogate" || c.policy.mode == "full",
          "policy.mode must be 'surrogate' or 'full'");
  require(c.reward.cqi_threshold > 0, "reward.cqi_threshold must be > 0");
  require(c.workers >= 0, "workers must be >= 0");
  return errs;
}

inline Config config_from_json(const Json& j) {
  Config c;
  from_json_overlay(j, c);
  auto errs = validate(c);
  if (!errs.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return c;
}

}  // namespace tethernet
