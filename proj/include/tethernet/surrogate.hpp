#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "tethernet/assembly.hpp"
#include "tethernet/config.hpp"
#include "tethernet/io.hpp"
#include "tethernet/mlp.hpp"
#include "tethernet/rng.hpp"

namespace tethernet {

// ---------------------------------------------------------------------------
// Feature extraction
//
// Feature vector layout (one snapshot):
//   [ positions of loop-1 nodes, loop-2 nodes, loop-3 nodes, (MU positions) ]
//   [ velocities in the same order ]
// Every position is relative to the debris centre of mass, every velocity
// relative to the debris velocity, components in x,y,z order.  Loop nodes are
// the ring subsamples prepared by build_assembly (surrogate_loops).
// ---------------------------------------------------------------------------

inline int snapshot_width(const NetAssembly& a, bool include_mus) {
  std::size_t n = 0;
  for (const auto& loop : a.surrogate_loops) n += loop.size();
  if (include_mus) n += static_cast<std::size_t>(a.mu_count());
  return static_cast<int>(6 * n);
}

inline std::vector<double> extract_features(const NetAssembly& a, const SystemState& s,
                                            bool include_mus) {
  if (a.surrogate_loops[0].empty())
    throw ConfigError("mesh too small for surrogate feature loops");
  std::vector<int> bodies;
  for (const auto& loop : a.surrogate_loops)
    bodies.insert(bodies.end(), loop.begin(), loop.end());
  if (include_mus)
    for (int m = 0; m < a.mu_count(); ++m) bodies.push_back(a.mu_index(m));

  const Vec3 dp = s.pos[a.debris_index()];
  const Vec3 dv = s.vel[a.debris_index()];
  std::vector<double> f;
  f.reserve(6 * bodies.size());
  for (int b : bodies) {
    const Vec3 r = s.pos[b] - dp;
    f.push_back(r.x);
    f.push_back(r.y);
    f.push_back(r.z);
  }
  for (int b : bodies) {
    const Vec3 r = s.vel[b] - dv;
    f.push_back(r.x);
    f.push_back(r.y);
    f.push_back(r.z);
  }
  return f;
}

// Rolling window of snapshots; produces the concatenated feature row once
// `window` snapshots have been pushed.  window == 1 degenerates to a plain
// single-snapshot extractor.
class FeatureWindow {
 public:
  explicit FeatureWindow(int window) : window_(window) {
    if (window < 1) throw ConfigError("feature window must be >= 1");
  }

  void push(std::vector<double> snapshot) {
    buf_.push_back(std::move(snapshot));
    if (static_cast<int>(buf_.size()) > window_) buf_.pop_front();
  }

  bool full() const { return static_cast<int>(buf_.size()) == window_; }

  // Oldest snapshot first.  Pads by repeating the oldest entry when fewer
  // than `window` snapshots exist, so a row is always available once one
  // snapshot has been pushed.
  std::vector<double> row() const {
    if (buf_.empty()) throw ShapeError("feature window is empty");
    std::vector<double> out;
    out.reserve(window_ * buf_.front().size());
    const int pad = window_ - static_cast<int>(buf_.size());
    for (int i = 0; i < pad; ++i)
      out.insert(out.end(), buf_.front().begin(), buf_.front().end());
    for (const auto& snap : buf_)
      out.insert(out.end(), snap.begin(), snap.end());
    return out;
  }

 private:
  int window_;
  std::deque<std::vector<double>> buf_;
};

// ---------------------------------------------------------------------------
// Dataset container + binary serialization
//
// Format (little endian, native doubles):
//   magic "TNDS" | u32 version | u32 variant | u32 width | u64 count
//   count rows of (width + 2) doubles: features..., cqi, locked_pairs
// ---------------------------------------------------------------------------

struct Dataset {
  Variant variant = Variant::FourMu;
  int width = 0;
  std::vector<std::vector<double>> features;
  std::vector<double> cqi;
  std::vector<double> locked;

  std::size_t size() const { return features.size(); }

  void append(std::vector<double> row, double cqi_value, double locked_value) {
    if (width == 0) width = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != width)
      throw ShapeError("dataset row width mismatch: got " + std::to_string(row.size()) +
                       ", expected " + std::to_string(width));
    features.push_back(std::move(row));
    cqi.push_back(cqi_value);
    locked.push_back(locked_value);
  }
};

namespace detail {

template <typename T>
void put_raw(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get_raw(std::istream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FileError("truncated dataset file: " + path);
  return v;
}

}  // namespace detail

inline void write_dataset(const std::string& path, const Dataset& ds) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write file: " + path);
  out.write("TNDS", 4);
  detail::put_raw(out, kDatasetVersion);
  detail::put_raw(out, static_cast<uint32_t>(mu_count(ds.variant)));
  detail::put_raw(out, static_cast<uint32_t>(ds.width));
  detail::put_raw(out, static_cast<uint64_t>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out.write(reinterpret_cast<const char*>(ds.features[i].data()),
              static_cast<std::streamsize>(sizeof(double) * ds.features[i].size()));
    detail::put_raw(out, ds.cqi[i]);
    detail::put_raw(out, ds.locked[i]);
  }
  if (!out) throw FileError("write failed: " + path);
}

inline Dataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open file: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "TNDS")
    throw SchemaError("not a dataset file (bad magic): " + path);
  const auto version = detail::get_raw<uint32_t>(in, path);
  if (version != kDatasetVersion)
    throw SchemaError("dataset version " + std::to_string(version) + " unsupported: " + path);
  const auto mus = detail::get_raw<uint32_t>(in, path);
  if (mus != 4 && mus != 8)
    throw SchemaError("dataset has invalid MU count " + std::to_string(mus) + ": " + path);
  Dataset ds;
  ds.variant = mus == 4 ? Variant::FourMu : Variant::EightMu;
  ds.width = static_cast<int>(detail::get_raw<uint32_t>(in, path));
  const auto count = detail::get_raw<uint64_t>(in, path);
  ds.features.reserve(count);
  ds.cqi.reserve(count);
  ds.locked.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    std::vector<double> row(static_cast<std::size_t>(ds.width));
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(sizeof(double) * row.size()));
    if (!in) throw FileError("truncated dataset file: " + path);
    const double c = detail::get_raw<double>(in, path);
    const double l = detail::get_raw<double>(in, path);
    ds.features.push_back(std::move(row));
    ds.cqi.push_back(c);
    ds.locked.push_back(l);
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Surrogate model
// ---------------------------------------------------------------------------

struct SurrogatePrediction {
  double cqi = 0.0;
  double locked_raw = 0.0;  // regression output before clamping
  int locked = 0;           // rounded and clamped to [0, max pairs]
};

struct SurrogateStats {
  double train_mse = 0.0;
  double val_mse = 0.0;
  double val_cqi_mse = 0.0;
  double val_cqi_success_mse = 0.0;
  double val_locked_mse = 0.0;
  double classification_accuracy = 0.0;
  int train_rows = 0;
  int val_rows = 0;
};

struct SurrogateModel {
  Variant variant = Variant::FourMu;
  int feature_width = 0;  // width of one stored row (window already applied)
  int window = 1;
  bool include_mu_states = true;
  Mlp net;
  Standardizer x_std;
  Standardizer y_std;
  double err_mean = 0.0;
  double err_sigma = 0.0;
  bool has_error_model = false;
  SurrogateStats stats;

  SurrogatePrediction predict(const std::vector<double>& features) const {
    if (static_cast<int>(features.size()) != feature_width)
      throw ShapeError("feature width " + std::to_string(features.size()) +
                       " does not match model width " + std::to_string(feature_width));
    std::vector<double> x = features;
    x_std.apply(x);
    std::vector<double> y = net.predict(x);
    y_std.invert(y);
    SurrogatePrediction p;
    p.cqi = y[0];
    p.locked_raw = y[1];
    const double max_pairs = static_cast<double>(max_locked_pairs_for(variant));
    p.locked = static_cast<int>(std::lround(std::clamp(y[1], 0.0, max_pairs)));
    return p;
  }

  // Simulation-mimicking prediction: CQI perturbed by the fitted residual
  // distribution, locked-pair count left deterministic.
  SurrogatePrediction noisy_predict(const std::vector<double>& features, Rng& rng) const {
    SurrogatePrediction p = predict(features);
    if (has_error_model) p.cqi += err_mean + err_sigma * rng.normal();
    return p;
  }

  static int max_locked_pairs_for(Variant v) { return v == Variant::FourMu ? 12 : 8; }

  Json to_json() const {
    Json j;
    j["schema_version"] = kSurrogateSchemaVersion;
    j["kind"] = "surrogate_model";
    j["variant"] = variant_name(variant);
    j["feature_width"] = feature_width;
    j["window"] = window;
    j["include_mu_states"] = include_mu_states;
    j["net"] = net.to_json();
    j["x_std"] = x_std.to_json();
    j["y_std"] = y_std.to_json();
    j["error_model"] = Json{{"fitted", has_error_model}, {"mean", err_mean}, {"sigma", err_sigma}};
    j["stats"] = Json{{"train_mse", stats.train_mse},
                      {"val_mse", stats.val_mse},
                      {"val_cqi_mse", stats.val_cqi_mse},
                      {"val_cqi_success_mse", stats.val_cqi_success_mse},
                      {"val_locked_mse", stats.val_locked_mse},
                      {"classification_accuracy", stats.classification_accuracy},
                      {"train_rows", stats.train_rows},
                      {"val_rows", stats.val_rows}};
    return j;
  }

  static SurrogateModel from_json(const Json& j) {
    check_schema_version(j, kSurrogateSchemaVersion, "surrogate model");
    if (j.value("kind", "") != std::string("surrogate_model"))
      throw SchemaError("not a surrogate model file");
    SurrogateModel m;
    m.variant = variant_from_name(j.at("variant").get<std::string>());
    m.feature_width = j.at("feature_width").get<int>();
    m.window = j.value("window", 1);
    m.include_mu_states = j.value("include_mu_states", true);
    m.net = Mlp::from_json(j.at("net"));
    m.x_std = Standardizer::from_json(j.at("x_std"));
    m.y_std = Standardizer::from_json(j.at("y_std"));
    const auto& em = j.at("error_model");
    m.has_error_model = em.value("fitted", false);
    m.err_mean = em.value("mean", 0.0);
    m.err_sigma = em.value("sigma", 0.0);
    const auto& st = j.at("stats");
    m.stats.train_mse = st.value("train_mse", 0.0);
    m.stats.val_mse = st.value("val_mse", 0.0);
    m.stats.val_cqi_mse = st.value("val_cqi_mse", 0.0);
    m.stats.val_cqi_success_mse = st.value("val_cqi_success_mse", 0.0);
    m.stats.val_locked_mse = st.value("val_locked_mse", 0.0);
    m.stats.classification_accuracy = st.value("classification_accuracy", 0.0);
    m.stats.train_rows = st.value("train_rows", 0);
    m.stats.val_rows = st.value("val_rows", 0);
    return m;
  }
};

// Success label used both for training diagnostics and for classification
// accuracy: CQI at or below threshold and enough locked pairs.
inline bool outcome_success(double cqi, double locked, double cqi_threshold, int n_t) {
  return cqi <= cqi_threshold && locked >= static_cast<double>(n_t) - 0.5;
}

// Gaussian residual model for the CQI head.  Residuals are (true - predicted)
// restricted to rows whose true CQI is below `cqi_max`, which keeps the
// NoTrigger sentinel (CQI 50) from polluting the fit.  Refuses to fit on
// fewer than 10 residuals.
inline void fit_error_model(SurrogateModel& model, const Dataset& ds, double cqi_max) {
  std::vector<double> residuals;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.cqi[i] >= cqi_max) continue;
    residuals.push_back(ds.cqi[i] - model.predict(ds.features[i]).cqi);
  }
  if (residuals.size() < 10)
    throw ShapeError("error model needs >= 10 residuals, got " +
                     std::to_string(residuals.size()));
  double mean = std::accumulate(residuals.begin(), residuals.end(), 0.0) /
                static_cast<double>(residuals.size());
  double var = 0.0;
  for (double r : residuals) var += (r - mean) * (r - mean);
  var /= static_cast<double>(residuals.size());
  model.err_mean = mean;
  model.err_sigma = std::sqrt(var);
  model.has_error_model = true;
}

// Trains the two-output regression net on the dataset.  Shuffled holdout
// split, standardized inputs and outputs, Adam on minibatches, loss = sum of
// squared errors over the two outputs averaged over the batch.
inline SurrogateModel train_surrogate(const Dataset& ds, const Config& cfg, Rng& rng,
                                      std::vector<double>* epoch_losses = nullptr) {
  const auto& sc = cfg.surrogate;
  if (ds.size() < 100)
    throw ShapeError("dataset too small to train on: " + std::to_string(ds.size()) + " rows");
  const int n = static_cast<int>(ds.size());

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.next_u64() % static_cast<uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }
  const int n_val = std::max(1, static_cast<int>(std::lround(sc.holdout_fraction * n)));
  const int n_train = n - n_val;
  if (n_train < 1) throw ShapeError("holdout fraction leaves no training rows");
  const std::vector<int> train_idx(order.begin(), order.begin() + n_train);
  const std::vector<int> val_idx(order.begin() + n_train, order.end());

  SurrogateModel model;
  model.variant = ds.variant;
  model.feature_width = ds.width;
  model.window = sc.window;
  model.include_mu_states = sc.include_mu_states;

  std::vector<std::vector<double>> xs(train_idx.size());
  std::vector<std::vector<double>> ys(train_idx.size());
  for (std::size_t k = 0; k < train_idx.size(); ++k) {
    xs[k] = ds.features[train_idx[k]];
    ys[k] = {ds.cqi[train_idx[k]], ds.locked[train_idx[k]]};
  }
  model.x_std.fit(xs);
  model.y_std.fit(ys);
  for (auto& x : xs) model.x_std.apply(x);
  for (auto& y : ys) model.y_std.apply(y);

  std::vector<int> widths;
  widths.push_back(ds.width);
  for (int h : sc.hidden) widths.push_back(h);
  widths.push_back(2);
  model.net = Mlp(widths);
  model.net.init_xavier(rng);

  Adam opt(sc.lr);
  Mlp::Workspace ws;
  std::vector<double> grad(model.net.params().size(), 0.0);
  std::vector<int> idx(train_idx.size());
  std::iota(idx.begin(), idx.end(), 0);

  for (int epoch = 0; epoch < sc.epochs; ++epoch) {
    for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.next_u64() % static_cast<uint64_t>(i + 1));
      std::swap(idx[i], idx[j]);
    }
    double epoch_loss = 0.0;
    const auto batch = static_cast<std::size_t>(std::max(1, sc.batch));
    for (std::size_t start = 0; start < idx.size(); start += batch) {
      const std::size_t stop = std::min(idx.size(), start + batch);
      const double inv = 1.0 / static_cast<double>(stop - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < stop; ++k) {
        const auto& x = xs[idx[k]];
        const auto& t = ys[idx[k]];
        model.net.forward(x, ws);
        const std::vector<double>& y = ws.a.back();
        std::vector<double> dl(2);
        for (int o = 0; o < 2; ++o) {
          const double e = y[o] - t[o];
          epoch_loss += e * e;
          dl[o] = 2.0 * e * inv;
        }
        model.net.backward(ws, dl, grad);
      }
      opt.step(model.net.params(), grad);
    }
    epoch_loss /= static_cast<double>(idx.size());
    if (!std::isfinite(epoch_loss))
      throw std::runtime_error("surrogate training diverged at epoch " + std::to_string(epoch) +
                               " (non-finite loss)");
    if (epoch_losses) epoch_losses->push_back(epoch_loss);
  }

  // Final stats in physical units.
  const int n_t = cfg.reward_n_t();
  auto eval_rows = [&](const std::vector<int>& rows, SurrogateStats& st, bool val) {
    double mse = 0.0, cqi_mse = 0.0, cqi_s_mse = 0.0, locked_mse = 0.0;
    int succ_rows = 0, correct = 0;
    for (int r : rows) {
      const SurrogatePrediction p = model.predict(ds.features[r]);
      const double ec = p.cqi - ds.cqi[r];
      const double el = p.locked_raw - ds.locked[r];
      mse += ec * ec + el * el;
      cqi_mse += ec * ec;
      locked_mse += el * el;
      const bool truth = outcome_success(ds.cqi[r], ds.locked[r], cfg.reward.cqi_threshold, n_t);
      if (truth) {
        cqi_s_mse += ec * ec;
        ++succ_rows;
      }
      const bool pred =
          outcome_success(p.cqi, static_cast<double>(p.locked), cfg.reward.cqi_threshold, n_t);
      if (pred == truth) ++correct;
    }
    const double inv = rows.empty() ? 0.0 : 1.0 / static_cast<double>(rows.size());
    if (val) {
      st.val_mse = mse * inv;
      st.val_cqi_mse = cqi_mse * inv;
      st.val_locked_mse = locked_mse * inv;
      st.val_cqi_success_mse = succ_rows > 0 ? cqi_s_mse / succ_rows : 0.0;
      st.classification_accuracy = rows.empty() ? 0.0 : static_cast<double>(correct) / rows.size();
      st.val_rows = static_cast<int>(rows.size());
    } else {
      st.train_mse = mse * inv;
      st.train_rows = static_cast<int>(rows.size());
    }
  };
  eval_rows(train_idx, model.stats, false);
  eval_rows(val_idx, model.stats, true);

  // Residual model on the holdout rows; skipped (not fatal) when the holdout
  // has too few in-range rows.
  Dataset holdout;
  holdout.variant = ds.variant;
  holdout.width = ds.width;
  for (int r : val_idx) holdout.append(ds.features[r], ds.cqi[r], ds.locked[r]);
  try {
    fit_error_model(model, holdout, sc.error_model_cqi_max);
  } catch (const ShapeError&) {
    model.has_error_model = false;
  }
  return model;
}

// Holdout-style evaluation of a stored model against an arbitrary dataset.
inline SurrogateStats evaluate_surrogate(const SurrogateModel& model, const Dataset& ds,
                                         double cqi_threshold, int n_t) {
  if (ds.width != model.feature_width)
    throw ShapeError("dataset width " + std::to_string(ds.width) + " does not match model width " +
                     std::to_string(model.feature_width));
  if (ds.variant != model.variant)
    throw ShapeError("dataset variant does not match model variant");
  SurrogateStats st;
  double mse = 0.0, cqi_mse = 0.0, cqi_s_mse = 0.0, locked_mse = 0.0;
  int succ_rows = 0, correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const SurrogatePrediction p = model.predict(ds.features[i]);
    const double ec = p.cqi - ds.cqi[i];
    const double el = p.locked_raw - ds.locked[i];
    mse += ec * ec + el * el;
    cqi_mse += ec * ec;
    locked_mse += el * el;
    const bool truth = outcome_success(ds.cqi[i], ds.locked[i], cqi_threshold, n_t);
    if (truth) {
      cqi_s_mse += ec * ec;
      ++succ_rows;
    }
    const bool pred = outcome_success(p.cqi, static_cast<double>(p.locked), cqi_threshold, n_t);
    if (pred == truth) ++correct;
  }
  const double inv = ds.size() ? 1.0 / static_cast<double>(ds.size()) : 0.0;
  st.val_mse = mse * inv;
  st.val_cqi_mse = cqi_mse * inv;
  st.val_locked_mse = locked_mse * inv;
  st.val_cqi_success_mse = succ_rows > 0 ? cqi_s_mse / succ_rows : 0.0;
  st.classification_accuracy = ds.size() ? static_cast<double>(correct) / ds.size() : 0.0;
  st.val_rows = static_cast<int>(ds.size());
  return st;
}

}  // namespace tethernet
