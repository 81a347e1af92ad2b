#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "tethernet/rng.hpp"

namespace tethernet {

// Dense feedforward net, tanh hidden activations, linear output. Parameters
// live in one flat vector (weights then biases per layer) so the optimizer
// and the finite-difference tests can treat the model as a single vector.
class Mlp {
 public:
  Mlp() = default;

  explicit Mlp(std::vector<int> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2) throw std::invalid_argument("Mlp: need at least 2 layers");
    size_t total = 0;
    for (size_t l = 0; l + 1 < widths_.size(); ++l) {
      w_offset_.push_back(total);
      total += static_cast<size_t>(widths_[l + 1]) * widths_[l];
      b_offset_.push_back(total);
      total += widths_[l + 1];
    }
    params_.assign(total, 0.0);
  }

  void init_xavier(Rng& rng) {
    for (size_t l = 0; l + 1 < widths_.size(); ++l) {
      const double limit = std::sqrt(6.0 / (widths_[l] + widths_[l + 1]));
      double* w = params_.data() + w_offset_[l];
      const size_t cnt = static_cast<size_t>(widths_[l + 1]) * widths_[l];
      for (size_t i = 0; i < cnt; ++i) w[i] = rng.uniform(-limit, limit);
      double* b = params_.data() + b_offset_[l];
      for (int i = 0; i < widths_[l + 1]; ++i) b[i] = 0.0;
    }
  }

  // Shrinks the output layer's weights (its biases start at zero), so a
  // freshly initialized net maps everything near zero. Policy heads want
  // this: early exploration should come from the sampling noise, not from
  // whatever the random init happens to output.
  void scale_output_layer(double s) {
    const size_t l = widths_.size() - 2;
    double* w = params_.data() + w_offset_[l];
    const size_t cnt = static_cast<size_t>(widths_[l + 1]) * widths_[l];
    for (size_t i = 0; i < cnt; ++i) w[i] *= s;
  }

  int input_width() const { return widths_.front(); }
  int output_width() const { return widths_.back(); }
  const std::vector<int>& widths() const { return widths_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // Per-layer activations kept for backprop; a[0] is the input copy.
  struct Workspace {
    std::vector<std::vector<double>> a;
    std::vector<std::vector<double>> delta;
  };

  void forward(const std::vector<double>& x, Workspace& ws) const {
    if (static_cast<int>(x.size()) != widths_.front())
      throw std::invalid_argument("Mlp::forward: input width mismatch");
    const size_t layers = widths_.size();
    ws.a.resize(layers);
    ws.a[0] = x;
    for (size_t l = 0; l + 1 < layers; ++l) {
      const int nin = widths_[l], nout = widths_[l + 1];
      ws.a[l + 1].assign(nout, 0.0);
      const double* w = params_.data() + w_offset_[l];
      const double* b = params_.data() + b_offset_[l];
      const double* in = ws.a[l].data();
      double* out = ws.a[l + 1].data();
      for (int j = 0; j < nout; ++j) {
        double s = b[j];
        const double* row = w + static_cast<size_t>(j) * nin;
        for (int i = 0; i < nin; ++i) s += row[i] * in[i];
        out[j] = (l + 2 < layers) ? std::tanh(s) : s;
      }
    }
  }

  std::vector<double> predict(const std::vector<double>& x) const {
    Workspace ws;
    forward(x, ws);
    return ws.a.back();
  }

  // Accumulates dLoss/dparams into grad given dLoss/doutput. grad must have
  // params size; callers zero it between batches.
  void backward(Workspace& ws, const std::vector<double>& dloss_dout,
                std::vector<double>& grad) const {
    const size_t layers = widths_.size();
    ws.delta.resize(layers);
    ws.delta[layers - 1] = dloss_dout;
    for (size_t l = layers - 1; l-- > 0;) {
      const int nin = widths_[l], nout = widths_[l + 1];
      const double* w = params_.data() + w_offset_[l];
      const std::vector<double>& dnext = ws.delta[l + 1];
      const double* in = ws.a[l].data();
      double* gw = grad.data() + w_offset_[l];
      double* gb = grad.data() + b_offset_[l];
      for (int j = 0; j < nout; ++j) {
        const double d = dnext[j];
        gb[j] += d;
        double* grow = gw + static_cast<size_t>(j) * nin;
        for (int i = 0; i < nin; ++i) grow[i] += d * in[i];
      }
      if (l == 0) break;
      std::vector<double>& dprev = ws.delta[l];
      dprev.assign(nin, 0.0);
      for (int j = 0; j < nout; ++j) {
        const double d = dnext[j];
        const double* row = w + static_cast<size_t>(j) * nin;
        for (int i = 0; i < nin; ++i) dprev[i] += d * row[i];
      }
      // tanh'(z) = 1 - a^2, with a the stored post-activation
      const double* act = ws.a[l].data();
      for (int i = 0; i < nin; ++i) dprev[i] *= 1.0 - act[i] * act[i];
    }
  }

  nlohmann::ordered_json to_json() const {
    return {{"widths", widths_}, {"params", params_}};
  }

  static Mlp from_json(const nlohmann::ordered_json& j) {
    Mlp m(j.at("widths").get<std::vector<int>>());
    auto p = j.at("params").get<std::vector<double>>();
    if (p.size() != m.params_.size())
      throw std::invalid_argument("Mlp::from_json: parameter count mismatch");
    m.params_ = std::move(p);
    return m;
  }

 private:
  std::vector<int> widths_;
  std::vector<double> params_;
  std::vector<size_t> w_offset_, b_offset_;
};

// Adam with bias correction; state sized lazily to the parameter vector.
class Adam {
 public:
  explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<double>& params, const std::vector<double>& grad) {
    if (m_.size() != params.size()) {
      m_.assign(params.size(), 0.0);
      v_.assign(params.size(), 0.0);
      t_ = 0;
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
      params[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
    }
  }

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

  nlohmann::ordered_json to_json() const {
    return {{"lr", lr_}, {"beta1", beta1_}, {"beta2", beta2_}, {"eps", eps_},
            {"t", t_},   {"m", m_},         {"v", v_}};
  }

  static Adam from_json(const nlohmann::ordered_json& j) {
    Adam a(j.at("lr").get<double>(), j.at("beta1").get<double>(),
           j.at("beta2").get<double>(), j.at("eps").get<double>());
    a.t_ = j.at("t").get<long>();
    a.m_ = j.at("m").get<std::vector<double>>();
    a.v_ = j.at("v").get<std::vector<double>>();
    return a;
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

// Per-dimension affine standardizer fitted on a dataset column block.
struct Standardizer {
  std::vector<double> mean, stddev;

  void fit(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("Standardizer::fit: empty data");
    const size_t d = rows[0].size();
    mean.assign(d, 0.0);
    stddev.assign(d, 0.0);
    for (const auto& r : rows)
      for (size_t i = 0; i < d; ++i) mean[i] += r[i];
    for (size_t i = 0; i < d; ++i) mean[i] /= rows.size();
    for (const auto& r : rows)
      for (size_t i = 0; i < d; ++i) stddev[i] += (r[i] - mean[i]) * (r[i] - mean[i]);
    for (size_t i = 0; i < d; ++i) {
      stddev[i] = std::sqrt(stddev[i] / rows.size());
      if (stddev[i] < 1e-12) stddev[i] = 1.0;  // constant column: pass through
    }
  }

  void apply(std::vector<double>& x) const {
    for (size_t i = 0; i < x.size(); ++i) x[i] = (x[i] - mean[i]) / stddev[i];
  }

  void invert(std::vector<double>& x) const {
    for (size_t i = 0; i < x.size(); ++i) x[i] = x[i] * stddev[i] + mean[i];
  }

  nlohmann::ordered_json to_json() const { return {{"mean", mean}, {"stddev", stddev}}; }

  static Standardizer from_json(const nlohmann::ordered_json& j) {
    Standardizer s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.stddev = j.at("stddev").get<std::vector<double>>();
    return s;
  }
};

}  // namespace tethernet
