// Command-line harness for the tether-net capture pipeline.
//
// Exit codes: 0 success, 1 runtime failure, 2 missing/unreadable file,
// 3 schema version mismatch, 4 tensor/variant shape mismatch, 5 invalid
// config or scenario.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tethernet/tethernet.hpp"

namespace tn = tethernet;

namespace {

struct GlobalOpts {
  std::string config_path;  // empty: defaults (or $TETHERNET_CONFIG)
  bool desk = false;
  std::string variant;
  std::optional<uint64_t> seed;
  std::optional<int> workers;
  bool verbose = false;
};

tn::Config load_config(const GlobalOpts& g) {
  tn::Config cfg = g.desk ? tn::desk_config(tn::Variant::FourMu) : tn::Config{};
  std::string path = g.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("TETHERNET_CONFIG")) path = env;
  }
  if (!path.empty()) tn::from_json_overlay(tn::load_json_file(path), cfg);
  if (!g.variant.empty()) cfg.variant = tn::variant_from_name(g.variant);
  if (g.seed) cfg.seed = *g.seed;
  if (g.workers) cfg.workers = *g.workers;
  const auto errs = tn::validate(cfg);
  if (!errs.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw tn::ConfigError(msg);
  }
  return cfg;
}

void add_global_opts(CLI::App* app, GlobalOpts& g) {
  app->add_option("--config", g.config_path,
                  "JSON config overlay (default: $TETHERNET_CONFIG if set)");
  app->add_flag("--desk", g.desk, "start from the reduced desk-scale profile");
  app->add_option("--variant", g.variant, "four_mu or eight_mu");
  app->add_option("--seed", g.seed, "root seed");
  app->add_option("--workers", g.workers, "worker threads (0 = hardware)");
  app->add_flag("-v,--verbose", g.verbose, "progress output on stderr");
}

// "dx,dy;dx,dy;..." -> per-MU offsets. An empty string means all zeros.
tn::AimingAction parse_action(const std::string& text, int mus) {
  tn::AimingAction act(mus, {0.0, 0.0});
  if (text.empty()) return act;
  std::stringstream ss(text);
  std::string pair;
  int k = 0;
  while (std::getline(ss, pair, ';')) {
    if (k >= mus) throw tn::ShapeError("action has more pairs than MUs");
    const auto comma = pair.find(',');
    if (comma == std::string::npos) throw tn::ShapeError("action pair missing comma: " + pair);
    act[k][0] = std::stod(pair.substr(0, comma));
    act[k][1] = std::stod(pair.substr(comma + 1));
    ++k;
  }
  if (k != mus)
    throw tn::ShapeError("action has " + std::to_string(k) + " pairs, expected " +
                         std::to_string(mus));
  return act;
}

void write_artifact(const std::string& path, const tn::Json& j) {
  tn::write_text_file(path, j.dump(2) + "\n");
}

tn::SurrogateModel load_surrogate(const std::string& path) {
  return tn::SurrogateModel::from_json(tn::load_json_file(path));
}

int run(int argc, char** argv) {
  CLI::App app{"tether-net capture pipeline"};
  app.require_subcommand(1);

  // --- print-config ---------------------------------------------------
  auto* cmd_print = app.add_subcommand("print-config", "dump the effective config JSON");
  GlobalOpts g_print;
  add_global_opts(cmd_print, g_print);
  std::string print_out;
  cmd_print->add_option("--out", print_out, "write to file instead of stdout");

  // --- simulate ---------------------------------------------------------
  auto* cmd_sim = app.add_subcommand("simulate", "run one episode");
  GlobalOpts g_sim;
  add_global_opts(cmd_sim, g_sim);
  double sim_x = 0.0, sim_y = 0.0, sim_z = -50.0;
  uint64_t sim_seed = 1;
  std::string sim_action, sim_mode = "full", sim_surrogate, sim_out, sim_traj, sim_ctrl;
  cmd_sim->add_option("--x", sim_x, "debris x (m)");
  cmd_sim->add_option("--y", sim_y, "debris y (m)");
  cmd_sim->add_option("--z", sim_z, "debris z (m)");
  cmd_sim->add_option("--episode-seed", sim_seed, "episode seed");
  cmd_sim->add_option("--action", sim_action, "aiming offsets 'dx,dy;dx,dy;...'");
  cmd_sim->add_option("--mode", sim_mode, "full or surrogate");
  cmd_sim->add_option("--surrogate", sim_surrogate, "surrogate model (surrogate mode)");
  cmd_sim->add_option("--out", sim_out, "episode record JSON");
  cmd_sim->add_option("--trajectory", sim_traj, "trajectory JSONL");
  cmd_sim->add_option("--controls", sim_ctrl, "controller JSONL");

  // --- gen-dataset --------------------------------------------------------
  auto* cmd_gen = app.add_subcommand("gen-dataset", "random-action episodes -> dataset");
  GlobalOpts g_gen;
  add_global_opts(cmd_gen, g_gen);
  int gen_count = 100;
  std::string gen_out = "dataset.bin";
  cmd_gen->add_option("--count", gen_count, "episodes to run")->check(CLI::PositiveNumber);
  cmd_gen->add_option("--out", gen_out, "output dataset path");

  // --- train-surrogate ------------------------------------------------
  auto* cmd_ts = app.add_subcommand("train-surrogate", "fit the outcome predictor");
  GlobalOpts g_ts;
  add_global_opts(cmd_ts, g_ts);
  std::string ts_dataset, ts_out = "surrogate.json";
  cmd_ts->add_option("--dataset", ts_dataset, "training dataset")->required();
  cmd_ts->add_option("--out", ts_out, "model output path");

  // --- eval-surrogate ----------------------------------------------------
  auto* cmd_es = app.add_subcommand("eval-surrogate", "score a model on a dataset");
  GlobalOpts g_es;
  add_global_opts(cmd_es, g_es);
  std::string es_model, es_dataset, es_out;
  cmd_es->add_option("--model", es_model, "surrogate model")->required();
  cmd_es->add_option("--dataset", es_dataset, "evaluation dataset")->required();
  cmd_es->add_option("--out", es_out, "stats JSON (default stdout)");

  // --- calibrate-fuel ------------------------------------------------------
  auto* cmd_cal = app.add_subcommand("calibrate-fuel", "m_fmax from nominal episodes");
  GlobalOpts g_cal;
  add_global_opts(cmd_cal, g_cal);
  int cal_episodes = 100;
  std::string cal_out;
  cmd_cal->add_option("--episodes", cal_episodes, "sample size")->check(CLI::PositiveNumber);
  cmd_cal->add_option("--out", cal_out, "write {m_fmax} JSON");

  // --- train-policy ---------------------------------------------------
  auto* cmd_tp = app.add_subcommand("train-policy", "PPO over aiming offsets");
  GlobalOpts g_tp;
  add_global_opts(cmd_tp, g_tp);
  std::string tp_surrogate, tp_out = "policy.json", tp_history, tp_mode;
  std::optional<int> tp_iterations;
  cmd_tp->add_option("--surrogate", tp_surrogate, "surrogate model (surrogate mode)");
  cmd_tp->add_option("--out", tp_out, "policy output path");
  cmd_tp->add_option("--history", tp_history, "per-iteration JSONL");
  cmd_tp->add_option("--mode", tp_mode, "override policy.mode (full|surrogate)");
  cmd_tp->add_option("--iterations", tp_iterations, "override policy.iterations");

  // --- evaluate ---------------------------------------------------------
  auto* cmd_ev = app.add_subcommand("evaluate", "paired nominal-vs-policy evaluation");
  GlobalOpts g_ev;
  add_global_opts(cmd_ev, g_ev);
  std::string ev_policy, ev_surrogate, ev_out = "report.json", ev_mode;
  int ev_episodes = 50;
  double ev_mfmax = 0.0;
  cmd_ev->add_option("--policy", ev_policy, "policy model")->required();
  cmd_ev->add_option("--surrogate", ev_surrogate, "surrogate model (surrogate mode)");
  cmd_ev->add_option("--episodes", ev_episodes, "paired episodes")->check(CLI::PositiveNumber);
  cmd_ev->add_option("--out", ev_out, "report JSON path");
  cmd_ev->add_option("--mode", ev_mode, "override policy.mode (full|surrogate)");
  cmd_ev->add_option("--m-fmax", ev_mfmax, "override reward.m_fmax (kg)");

  // --- export-plots ------------------------------------------------------
  auto* cmd_ex = app.add_subcommand("export-plots", "JSONL/JSON artifacts -> TSV tables");
  std::string ex_history, ex_traj, ex_report, ex_out;
  cmd_ex->add_option("--history", ex_history, "training history JSONL");
  cmd_ex->add_option("--trajectory", ex_traj, "trajectory JSONL");
  cmd_ex->add_option("--report", ex_report, "evaluation report JSON");
  cmd_ex->add_option("--out", ex_out, "output TSV path")->required();

  CLI11_PARSE(app, argc, argv);

  if (cmd_print->parsed()) {
    const tn::Config cfg = load_config(g_print);
    const std::string text = tn::to_json(cfg).dump(2) + "\n";
    if (print_out.empty())
      std::cout << text;
    else
      tn::write_text_file(print_out, text);
    return 0;
  }

  if (cmd_sim->parsed()) {
    const tn::Config cfg = load_config(g_sim);
    tn::Scenario scenario{sim_x, sim_y, sim_z, sim_seed};
    tn::EpisodeOptions opt;
    opt.mode = tn::capture_mode_from_name(sim_mode);
    opt.collect_features = false;
    std::unique_ptr<tn::SurrogateModel> model;
    if (opt.mode == tn::CaptureMode::Surrogate) {
      if (sim_surrogate.empty()) throw tn::ConfigError("surrogate mode needs --surrogate");
      model = std::make_unique<tn::SurrogateModel>(load_surrogate(sim_surrogate));
      opt.surrogate = model.get();
      opt.collect_features = true;
    }
    std::unique_ptr<tn::JsonlWriter> traj, ctrl;
    if (!sim_traj.empty()) {
      traj = std::make_unique<tn::JsonlWriter>(sim_traj);
      opt.trajectory_log = traj.get();
    }
    if (!sim_ctrl.empty()) {
      ctrl = std::make_unique<tn::JsonlWriter>(sim_ctrl);
      opt.control_log = ctrl.get();
    }
    const auto action = parse_action(sim_action, tn::mu_count(cfg.variant));
    const tn::EpisodeRecord rec = tn::run_episode(cfg, scenario, action, opt);
    tn::Json out = rec.to_json();
    if (sim_out.empty())
      std::cout << out.dump(2) << "\n";
    else {
      write_artifact(sim_out, out);
      tn::TimingSidecar timing;
      timing.add("episode", rec.wall_time_s);
      timing.write(sim_out + ".timing.json");
    }
    std::fprintf(stderr, "%s cqi=%.3f locked=%d fuel=%.4f kg%s\n",
                 rec.metrics.success ? "SUCCESS" : "FAILURE", rec.metrics.settled_cqi,
                 rec.metrics.locked_pairs, rec.fuel_total,
                 rec.metrics.triggered ? "" : " (no trigger)");
    return 0;
  }

  if (cmd_gen->parsed()) {
    const tn::Config cfg = load_config(g_gen);
    tn::BatchProgress progress{g_gen.verbose, 25};
    const tn::DatasetGenResult res = tn::generate_dataset(cfg, gen_count, progress);
    tn::write_dataset(gen_out, res.dataset);
    write_artifact(gen_out + ".manifest.json",
                   tn::run_manifest("gen-dataset", cfg,
                                    tn::Json{{"episodes", res.episodes},
                                             {"triggered", res.triggered},
                                             {"successes", res.successes},
                                             {"rows", res.dataset.size()},
                                             {"width", res.dataset.width},
                                             {"output", gen_out}}));
    tn::TimingSidecar timing;
    timing.add("gen-dataset", res.wall_s);
    timing.write(gen_out + ".timing.json");
    std::fprintf(stderr, "dataset: %zu rows (width %d), %d/%d triggered, %d successes\n",
                 res.dataset.size(), res.dataset.width, res.triggered, res.episodes,
                 res.successes);
    return 0;
  }

  if (cmd_ts->parsed()) {
    const tn::Config cfg = load_config(g_ts);
    const tn::Dataset ds = tn::read_dataset(ts_dataset);
    if (ds.variant != cfg.variant)
      throw tn::ShapeError("dataset variant " + std::string(tn::variant_name(ds.variant)) +
                           " does not match configured variant " +
                           tn::variant_name(cfg.variant));
    tn::Rng rng(cfg.seed, tn::kStreamTrainer);
    tn::TimingSidecar timing;
    tn::SurrogateModel model;
    timing.time("train-surrogate", [&] { model = tn::train_surrogate(ds, cfg, rng); });
    write_artifact(ts_out, model.to_json());
    write_artifact(ts_out + ".manifest.json",
                   tn::run_manifest("train-surrogate", cfg,
                                    tn::Json{{"dataset", ts_dataset},
                                             {"rows", ds.size()},
                                             {"stats", model.to_json().at("stats")},
                                             {"output", ts_out}}));
    timing.write(ts_out + ".timing.json");
    std::fprintf(stderr,
                 "trained on %d rows: val MSE %.4f, CQI MSE %.4f, classification %.3f\n",
                 model.stats.train_rows, model.stats.val_mse, model.stats.val_cqi_mse,
                 model.stats.classification_accuracy);
    return 0;
  }

  if (cmd_es->parsed()) {
    const tn::Config cfg = load_config(g_es);
    const tn::SurrogateModel model = load_surrogate(es_model);
    const tn::Dataset ds = tn::read_dataset(es_dataset);
    const tn::SurrogateStats st =
        tn::evaluate_surrogate(model, ds, cfg.reward.cqi_threshold, cfg.reward_n_t());
    tn::Json out{{"rows", st.val_rows},
                 {"mse", st.val_mse},
                 {"cqi_mse", st.val_cqi_mse},
                 {"cqi_success_mse", st.val_cqi_success_mse},
                 {"locked_mse", st.val_locked_mse},
                 {"classification_accuracy", st.classification_accuracy}};
    if (es_out.empty())
      std::cout << out.dump(2) << "\n";
    else
      write_artifact(es_out, out);
    return 0;
  }

  if (cmd_cal->parsed()) {
    const tn::Config cfg = load_config(g_cal);
    tn::BatchProgress progress{g_cal.verbose, 10};
    const double m_fmax = tn::calibrate_m_fmax(cfg, cal_episodes, progress);
    tn::Json out{{"m_fmax", m_fmax}, {"episodes", cal_episodes}};
    if (cal_out.empty())
      std::cout << out.dump(2) << "\n";
    else
      write_artifact(cal_out, out);
    return 0;
  }

  if (cmd_tp->parsed()) {
    tn::Config cfg = load_config(g_tp);
    if (!tp_mode.empty()) cfg.policy.mode = tp_mode;
    if (tp_iterations) cfg.policy.iterations = *tp_iterations;
    std::unique_ptr<tn::SurrogateModel> model;
    if (cfg.policy.mode == "surrogate") {
      if (tp_surrogate.empty()) throw tn::ConfigError("policy mode 'surrogate' needs --surrogate");
      model = std::make_unique<tn::SurrogateModel>(load_surrogate(tp_surrogate));
      if (model->variant != cfg.variant)
        throw tn::ShapeError("surrogate variant does not match configured variant");
    }
    std::unique_ptr<tn::JsonlWriter> history;
    if (!tp_history.empty()) history = std::make_unique<tn::JsonlWriter>(tp_history);
    tn::BatchProgress progress{g_tp.verbose, 25};
    const tn::PolicyTrainResult res =
        tn::train_policy(cfg, model.get(), history.get(), progress);
    write_artifact(tp_out, res.agent.to_json());
    write_artifact(tp_out + ".manifest.json",
                   tn::run_manifest("train-policy", cfg,
                                    tn::Json{{"iterations", cfg.policy.iterations},
                                             {"m_fmax", res.calibrated_m_fmax},
                                             {"final_mean_reward",
                                              res.history.empty() ? 0.0
                                                                  : res.history.back().mean_reward},
                                             {"output", tp_out}}));
    tn::TimingSidecar timing;
    timing.add("train-policy", res.wall_s);
    timing.write(tp_out + ".timing.json");
    if (!res.history.empty())
      std::fprintf(stderr, "final iteration: reward %.4f success %.3f (m_fmax %.5f kg)\n",
                   res.history.back().mean_reward, res.history.back().success_rate,
                   res.calibrated_m_fmax);
    return 0;
  }

  if (cmd_ev->parsed()) {
    tn::Config cfg = load_config(g_ev);
    if (!ev_mode.empty()) cfg.policy.mode = ev_mode;
    if (ev_mfmax > 0.0) cfg.reward.m_fmax = ev_mfmax;
    std::unique_ptr<tn::SurrogateModel> model;
    if (cfg.policy.mode == "surrogate") {
      if (ev_surrogate.empty()) throw tn::ConfigError("policy mode 'surrogate' needs --surrogate");
      model = std::make_unique<tn::SurrogateModel>(load_surrogate(ev_surrogate));
    }
    const tn::Json pj = tn::load_json_file(ev_policy);
    const tn::PpoAgent agent = tn::PpoAgent::from_json(pj, cfg.policy);
    if (agent.act_dim() != 2 * tn::mu_count(cfg.variant))
      throw tn::ShapeError("policy act_dim does not match configured variant");
    if (cfg.reward.m_fmax <= 0.0) {
      tn::BatchProgress cal_progress{g_ev.verbose, 10};
      cfg.reward.m_fmax = tn::calibrate_m_fmax(cfg, 100, cal_progress);
    }
    tn::BatchProgress progress{g_ev.verbose, 10};
    const tn::PairedEvalResult res =
        tn::paired_evaluation(cfg, agent, ev_episodes, model.get(), progress);
    tn::Json report;
    report["schema_version"] = tn::kReportSchemaVersion;
    report["kind"] = "paired_evaluation";
    report["summary"] = res.summary.to_json();
    report["episodes"] = res.episodes;
    write_artifact(ev_out, report);
    write_artifact(ev_out + ".manifest.json",
                   tn::run_manifest("evaluate", cfg,
                                    tn::Json{{"policy", ev_policy},
                                             {"episodes", ev_episodes},
                                             {"summary", res.summary.to_json()},
                                             {"output", ev_out}}));
    tn::TimingSidecar timing;
    timing.add("evaluate", res.wall_s);
    timing.write(ev_out + ".timing.json");
    std::fprintf(stderr,
                 "paired eval (%d episodes): success %.3f -> %.3f, fuel %.5f -> %.5f kg "
                 "(delta %.5f)\n",
                 ev_episodes, res.summary.baseline_success, res.summary.policy_success,
                 res.summary.baseline_mean_fuel, res.summary.policy_mean_fuel,
                 res.summary.mean_fuel_delta);
    return 0;
  }

  if (cmd_ex->parsed()) {
    int sources = (!ex_history.empty()) + (!ex_traj.empty()) + (!ex_report.empty());
    if (sources != 1)
      throw tn::ConfigError("export-plots needs exactly one of --history/--trajectory/--report");
    if (!ex_history.empty())
      tn::export_policy_curves(ex_history, ex_out);
    else if (!ex_traj.empty())
      tn::export_trajectory(ex_traj, ex_out);
    else
      tn::export_eval_table(tn::load_json_file(ex_report), ex_out);
    std::fprintf(stderr, "wrote %s\n", ex_out.c_str());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const tn::FileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const tn::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const tn::ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const tn::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const tn::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
