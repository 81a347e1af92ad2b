#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "tethernet/episode.hpp"
#include "tethernet/policy.hpp"

namespace tethernet {

// Additional Rng streams used by the batch drivers (episode-internal streams
// live in episode.hpp).
inline constexpr uint64_t kStreamScenario = 10;
inline constexpr uint64_t kStreamAction = 11;
inline constexpr uint64_t kStreamPolicyInit = 12;
inline constexpr uint64_t kStreamPolicyUpdate = 13;
inline constexpr uint64_t kStreamTrainer = 14;
inline constexpr uint64_t kStreamCalibration = 15;
inline constexpr uint64_t kStreamEvaluation = 16;

inline int resolve_workers(int configured) {
  if (configured > 0) return configured;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Index-sharded parallel loop. fn(i) must write results only into slot i of
// caller-owned storage, which keeps outputs identical for any worker count.
// The first worker exception is rethrown on the caller thread.
template <typename Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  if (n <= 0) return;
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Wall-clock phase timings; written as a separate sidecar so the result
// artifacts themselves stay bitwise reproducible.
class TimingSidecar {
 public:
  void add(const std::string& phase, double seconds) { entries_.push_back({phase, seconds}); }

  template <typename Fn>
  double time(const std::string& phase, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    add(phase, s);
    return s;
  }

  Json to_json() const {
    Json phases = Json::array();
    double total = 0.0;
    for (const auto& [name, s] : entries_) {
      phases.push_back({{"phase", name}, {"wall_s", s}});
      total += s;
    }
    return Json{{"schema_version", kReportSchemaVersion},
                {"kind", "timing"},
                {"phases", phases},
                {"total_wall_s", total}};
  }

  void write(const std::string& path) const { write_text_file(path, to_json().dump(2) + "\n"); }

 private:
  std::vector<std::pair<std::string, double>> entries_;
};

inline Json run_manifest(const std::string& command, const Config& cfg,
                         const Json& extra = Json::object()) {
  Json j;
  j["schema_version"] = kManifestSchemaVersion;
  j["kind"] = "run_manifest";
  j["command"] = command;
  j["seed"] = cfg.seed;
  j["variant"] = variant_name(cfg.variant);
  j["config"] = to_json(cfg);
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

// ---------------------------------------------------------------------------
// Batch drivers
// ---------------------------------------------------------------------------

struct BatchProgress {
  bool print = false;
  int stride = 25;  // report every N episodes

  void tick(const char* what, int done, int total) const {
    if (!print || done % stride != 0) return;
    std::fprintf(stderr, "%s: %d/%d\n", what, done, total);
  }
};

// Uniform random aiming offset on the action grid, one (dx, dy) per MU.
inline AimingAction random_action(Rng& rng, int mus, double bound, double grid) {
  AimingAction act(mus);
  for (auto& a : act) {
    a[0] = quantize_to_grid(rng.uniform(-bound, bound), grid);
    a[1] = quantize_to_grid(rng.uniform(-bound, bound), grid);
  }
  return act;
}

struct DatasetGenResult {
  Dataset dataset;
  int episodes = 0;
  int triggered = 0;
  int successes = 0;
  double wall_s = 0.0;
};

// Runs `count` full-dynamics episodes at random scenarios and random aiming
// offsets and collects (trigger snapshot, outcome) rows.  Episodes that never
// trigger produce no snapshot and are skipped (counted in the stats).
inline DatasetGenResult generate_dataset(const Config& cfg, int count,
                                         const BatchProgress& progress = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng scn_rng(cfg.seed, kStreamScenario);
  Rng act_rng(cfg.seed, kStreamAction);
  const int mus = mu_count(cfg.variant);

  std::vector<Scenario> scenarios(count);
  std::vector<AimingAction> actions(count);
  for (int i = 0; i < count; ++i) {
    scenarios[i] = sample_scenario(scn_rng, cfg.scenario);
    actions[i] = random_action(act_rng, mus, 5.0, cfg.scenario.grid);
  }

  std::vector<EpisodeRecord> records(count);
  std::atomic<int> done{0};
  parallel_for(count, resolve_workers(cfg.workers), [&](int i) {
    EpisodeOptions opt;
    opt.mode = CaptureMode::Full;
    opt.collect_features = true;
    records[i] = run_episode(cfg, scenarios[i], actions[i], opt);
    progress.tick("gen-dataset", done.fetch_add(1) + 1, count);
  });

  DatasetGenResult out;
  out.episodes = count;
  out.dataset.variant = cfg.variant;
  for (const auto& rec : records) {
    if (!rec.metrics.triggered) continue;
    ++out.triggered;
    if (rec.metrics.success) ++out.successes;
    out.dataset.append(rec.features, rec.metrics.settled_cqi,
                       static_cast<double>(rec.metrics.locked_pairs));
  }
  out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// 95th-percentile (nearest rank) fuel use over nominal-aiming episodes; the
// reward's m_fmax reference when the config leaves it unset.
inline double calibrate_m_fmax(const Config& cfg, int episodes = 100,
                               const BatchProgress& progress = {}) {
  Rng scn_rng(cfg.seed, kStreamCalibration);
  const int mus = mu_count(cfg.variant);
  std::vector<Scenario> scenarios(episodes);
  for (int i = 0; i < episodes; ++i) scenarios[i] = sample_scenario(scn_rng, cfg.scenario);

  std::vector<double> fuel(episodes);
  std::atomic<int> done{0};
  parallel_for(episodes, resolve_workers(cfg.workers), [&](int i) {
    EpisodeOptions opt;
    opt.mode = CaptureMode::Full;
    opt.collect_features = false;
    const EpisodeRecord rec = run_episode(cfg, scenarios[i], AimingAction(mus, {0.0, 0.0}), opt);
    fuel[i] = rec.fuel_total;
    progress.tick("calibrate", done.fetch_add(1) + 1, episodes);
  });
  std::sort(fuel.begin(), fuel.end());
  const int rank = std::max(1, static_cast<int>(std::ceil(0.95 * episodes)));
  return fuel[rank - 1];
}

// ---------------------------------------------------------------------------
// Policy training
// ---------------------------------------------------------------------------

struct PolicyIterationStats {
  int iteration = 0;
  double mean_reward = 0.0;
  double success_rate = 0.0;
  double mean_cqi = 0.0;
  bool updated = false;

  Json to_json() const {
    return {{"iteration", iteration},
            {"mean_reward", mean_reward},
            {"success_rate", success_rate},
            {"mean_cqi", mean_cqi},
            {"updated", updated}};
  }
};

struct PolicyTrainResult {
  PpoAgent agent;
  std::vector<PolicyIterationStats> history;
  double calibrated_m_fmax = 0.0;
  double wall_s = 0.0;
};

// Converts a raw policy sample into the environment action: clip to the
// offset bound, then snap to the aiming grid.  Stays outside the gradient
// path; log-probs are taken on the raw sample.
inline AimingAction action_from_raw(const std::vector<double>& raw, int mus, double bound,
                                    double grid) {
  AimingAction act(mus);
  for (int m = 0; m < mus; ++m) {
    act[m][0] = quantize_to_grid(std::clamp(raw[2 * m], -bound, bound), grid);
    act[m][1] = quantize_to_grid(std::clamp(raw[2 * m + 1], -bound, bound), grid);
  }
  return act;
}

// PPO over one-step aiming episodes.  The environment is either the full
// dynamics or the surrogate, per cfg.policy.mode.  Deterministic for a fixed
// config/seed regardless of worker count: scenarios, policy samples, and
// updates happen sequentially on the caller thread, only episode rollouts
// fan out.
inline PolicyTrainResult train_policy(const Config& cfg_in, const SurrogateModel* surrogate,
                                      JsonlWriter* history_log = nullptr,
                                      const BatchProgress& progress = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  Config cfg = cfg_in;
  const CaptureMode mode = capture_mode_from_name(cfg.policy.mode);
  if (mode == CaptureMode::Surrogate && surrogate == nullptr)
    throw ConfigError("policy mode 'surrogate' requires a surrogate model");

  PolicyTrainResult out;
  if (cfg.reward.m_fmax <= 0.0) {
    // Reward needs a fuel scale; calibrate from nominal episodes up front.
    out.calibrated_m_fmax = calibrate_m_fmax(cfg, 100, progress);
    cfg.reward.m_fmax = out.calibrated_m_fmax;
  } else {
    out.calibrated_m_fmax = cfg.reward.m_fmax;
  }

  const int mus = mu_count(cfg.variant);
  const int act_dim = 2 * mus;
  Rng init_rng(cfg.seed, kStreamPolicyInit);
  Rng update_rng(cfg.seed, kStreamPolicyUpdate);
  Rng trainer_rng(cfg.seed, kStreamTrainer);
  PpoAgent agent(3, act_dim, cfg.policy, init_rng);

  const int wave = cfg.policy.episodes_per_iteration;
  std::vector<Scenario> scenarios(wave);
  std::vector<std::vector<double>> states(wave), raws(wave);
  std::vector<double> logps(wave);
  std::vector<AimingAction> actions(wave);
  std::vector<EpisodeRecord> records(wave);

  for (int iter = 0; iter < cfg.policy.iterations; ++iter) {
    for (int e = 0; e < wave; ++e) {
      scenarios[e] = sample_scenario(trainer_rng, cfg.scenario);
      states[e] = normalize_scenario(scenarios[e].x, scenarios[e].y, scenarios[e].z, cfg.scenario);
      raws[e] = agent.sample_action(states[e], trainer_rng, &logps[e]);
      actions[e] = action_from_raw(raws[e], mus, 5.0, cfg.scenario.grid);
    }
    parallel_for(wave, resolve_workers(cfg.workers), [&](int e) {
      EpisodeOptions opt;
      opt.mode = mode;
      opt.surrogate = surrogate;
      opt.collect_features = false;
      records[e] = run_episode(cfg, scenarios[e], actions[e], opt);
    });

    PolicyIterationStats st;
    st.iteration = iter;
    for (int e = 0; e < wave; ++e) {
      agent.observe(states[e], raws[e], logps[e], records[e].reward);
      st.mean_reward += records[e].reward;
      st.success_rate += records[e].metrics.success ? 1.0 : 0.0;
      st.mean_cqi += records[e].metrics.settled_cqi;
    }
    st.mean_reward /= wave;
    st.success_rate /= wave;
    st.mean_cqi /= wave;
    st.updated = agent.maybe_update(update_rng);
    out.history.push_back(st);
    if (history_log) history_log->write(st.to_json());
    if (progress.print)
      std::fprintf(stderr, "iteration %d: reward %.4f success %.3f%s\n", iter, st.mean_reward,
                   st.success_rate, st.updated ? " [update]" : "");
  }

  out.agent = std::move(agent);
  out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// ---------------------------------------------------------------------------
// Paired evaluation
// ---------------------------------------------------------------------------

struct PairedSummary {
  int episodes = 0;
  double baseline_success = 0.0;
  double policy_success = 0.0;
  double baseline_mean_fuel = 0.0;
  double policy_mean_fuel = 0.0;
  double mean_fuel_delta = 0.0;  // baseline - policy, positive = policy saves fuel
  double baseline_mean_cqi = 0.0;
  double policy_mean_cqi = 0.0;
  double baseline_mean_reward = 0.0;
  double policy_mean_reward = 0.0;

  Json to_json() const {
    return {{"episodes", episodes},
            {"baseline_success", baseline_success},
            {"policy_success", policy_success},
            {"baseline_mean_fuel", baseline_mean_fuel},
            {"policy_mean_fuel", policy_mean_fuel},
            {"mean_fuel_delta", mean_fuel_delta},
            {"baseline_mean_cqi", baseline_mean_cqi},
            {"policy_mean_cqi", policy_mean_cqi},
            {"baseline_mean_reward", baseline_mean_reward},
            {"policy_mean_reward", policy_mean_reward}};
  }
};

struct PairedEvalResult {
  PairedSummary summary;
  Json episodes = Json::array();  // per-pair rows
  double wall_s = 0.0;
};

// Matched-pair comparison: every scenario runs twice with the same seed (and
// therefore identical sensor noise), once at the nominal aiming and once at
// the policy's deterministic (mean) action.
inline PairedEvalResult paired_evaluation(const Config& cfg, const PpoAgent& agent, int episodes,
                                          const SurrogateModel* surrogate = nullptr,
                                          const BatchProgress& progress = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const CaptureMode mode = capture_mode_from_name(cfg.policy.mode);
  if (mode == CaptureMode::Surrogate && surrogate == nullptr)
    throw ConfigError("policy mode 'surrogate' requires a surrogate model");
  if (cfg.reward.m_fmax <= 0.0)
    throw ConfigError("paired evaluation needs reward.m_fmax > 0 (run calibrate-fuel)");

  Rng scn_rng(cfg.seed, kStreamEvaluation);
  const int mus = mu_count(cfg.variant);
  std::vector<Scenario> scenarios(episodes);
  std::vector<AimingAction> policy_actions(episodes);
  const AimingAction nominal(mus, {0.0, 0.0});
  for (int i = 0; i < episodes; ++i) {
    scenarios[i] = sample_scenario(scn_rng, cfg.scenario);
    const auto state =
        normalize_scenario(scenarios[i].x, scenarios[i].y, scenarios[i].z, cfg.scenario);
    policy_actions[i] = action_from_raw(agent.mean_action(state), mus, 5.0, cfg.scenario.grid);
  }

  std::vector<EpisodeRecord> base(episodes), pol(episodes);
  std::atomic<int> done{0};
  parallel_for(2 * episodes, resolve_workers(cfg.workers), [&](int k) {
    const int i = k / 2;
    EpisodeOptions opt;
    opt.mode = mode;
    opt.surrogate = surrogate;
    opt.collect_features = false;
    if (k % 2 == 0)
      base[i] = run_episode(cfg, scenarios[i], nominal, opt);
    else
      pol[i] = run_episode(cfg, scenarios[i], policy_actions[i], opt);
    progress.tick("evaluate", done.fetch_add(1) + 1, 2 * episodes);
  });

  PairedEvalResult out;
  out.summary.episodes = episodes;
  for (int i = 0; i < episodes; ++i) {
    out.summary.baseline_success += base[i].metrics.success ? 1.0 : 0.0;
    out.summary.policy_success += pol[i].metrics.success ? 1.0 : 0.0;
    out.summary.baseline_mean_fuel += base[i].fuel_total;
    out.summary.policy_mean_fuel += pol[i].fuel_total;
    out.summary.baseline_mean_cqi += base[i].metrics.settled_cqi;
    out.summary.policy_mean_cqi += pol[i].metrics.settled_cqi;
    out.summary.baseline_mean_reward += base[i].reward;
    out.summary.policy_mean_reward += pol[i].reward;
    Json row;
    row["scenario"] = {{"x", scenarios[i].x}, {"y", scenarios[i].y}, {"z", scenarios[i].z},
                       {"seed", scenarios[i].seed}};
    row["baseline"] = base[i].to_json();
    row["policy"] = pol[i].to_json();
    row["fuel_delta"] = base[i].fuel_total - pol[i].fuel_total;
    out.episodes.push_back(row);
  }
  const double inv = episodes > 0 ? 1.0 / episodes : 0.0;
  out.summary.baseline_success *= inv;
  out.summary.policy_success *= inv;
  out.summary.baseline_mean_fuel *= inv;
  out.summary.policy_mean_fuel *= inv;
  out.summary.baseline_mean_cqi *= inv;
  out.summary.policy_mean_cqi *= inv;
  out.summary.baseline_mean_reward *= inv;
  out.summary.policy_mean_reward *= inv;
  out.summary.mean_fuel_delta = out.summary.baseline_mean_fuel - out.summary.policy_mean_fuel;
  out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// ---------------------------------------------------------------------------
// Plot exports: tab-separated tables ready for any plotting tool.
// ---------------------------------------------------------------------------

inline void export_policy_curves(const std::string& history_jsonl, const std::string& out_tsv) {
  const auto rows = read_jsonl(history_jsonl);
  std::string tsv = "iteration\tmean_reward\tsuccess_rate\tmean_cqi\n";
  for (const auto& r : rows) {
    tsv += std::to_string(r.value("iteration", 0)) + "\t" +
           std::to_string(r.value("mean_reward", 0.0)) + "\t" +
           std::to_string(r.value("success_rate", 0.0)) + "\t" +
           std::to_string(r.value("mean_cqi", 0.0)) + "\n";
  }
  write_text_file(out_tsv, tsv);
}

inline void export_trajectory(const std::string& traj_jsonl, const std::string& out_tsv) {
  const auto rows = read_jsonl(traj_jsonl);
  std::string tsv = "t\tnet_x\tnet_y\tnet_z\tdebris_x\tdebris_y\tdebris_z\tdist\tmouth_area\n";
  for (const auto& r : rows) {
    const auto& n = r.at("net_com");
    const auto& d = r.at("debris");
    tsv += std::to_string(r.value("t", 0.0)) + "\t" + std::to_string(n[0].get<double>()) + "\t" +
           std::to_string(n[1].get<double>()) + "\t" + std::to_string(n[2].get<double>()) + "\t" +
           std::to_string(d[0].get<double>()) + "\t" + std::to_string(d[1].get<double>()) + "\t" +
           std::to_string(d[2].get<double>()) + "\t" + std::to_string(r.value("dist", 0.0)) +
           "\t" + std::to_string(r.value("mouth_area", 0.0)) + "\n";
  }
  write_text_file(out_tsv, tsv);
}

inline void export_eval_table(const Json& report, const std::string& out_tsv) {
  std::string tsv =
      "index\tx\ty\tz\tbaseline_success\tpolicy_success\tbaseline_cqi\tpolicy_cqi\t"
      "baseline_fuel\tpolicy_fuel\tfuel_delta\n";
  int i = 0;
  for (const auto& row : report.at("episodes")) {
    const auto& s = row.at("scenario");
    const auto& b = row.at("baseline");
    const auto& p = row.at("policy");
    tsv += std::to_string(i++) + "\t" + std::to_string(s.value("x", 0.0)) + "\t" +
           std::to_string(s.value("y", 0.0)) + "\t" + std::to_string(s.value("z", 0.0)) + "\t" +
           std::to_string(static_cast<int>(b.value("success", false))) + "\t" +
           std::to_string(static_cast<int>(p.value("success", false))) + "\t" +
           std::to_string(b.value("cqi", 0.0)) + "\t" + std::to_string(p.value("cqi", 0.0)) +
           "\t" + std::to_string(b.value("fuel_total", 0.0)) + "\t" +
           std::to_string(p.value("fuel_total", 0.0)) + "\t" +
           std::to_string(row.value("fuel_delta", 0.0)) + "\n";
  }
  write_text_file(out_tsv, tsv);
}

}  // namespace tethernet
