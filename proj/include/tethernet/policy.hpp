#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "tethernet/config.hpp"
#include "tethernet/io.hpp"
#include "tethernet/mlp.hpp"
#include "tethernet/rng.hpp"

namespace tethernet {

// Diagonal-Gaussian PPO for one-step (contextual bandit) episodes: the
// aiming problem has a single action per episode, so returns equal rewards
// and the advantage is reward minus the state value.
//
// Actor: Mlp state -> hidden -> action means, plus a state-independent
// learnable log-std vector.  Critic: Mlp state -> 1.  Separate Adam
// optimizers for the three parameter groups.
class PpoAgent {
 public:
  PpoAgent() = default;

  PpoAgent(int state_dim, int act_dim, const PolicyConfig& pc, Rng& init_rng)
      : pc_(pc), state_dim_(state_dim), act_dim_(act_dim) {
    std::vector<int> widths;
    widths.push_back(state_dim);
    for (int h : pc.hidden) widths.push_back(h);
    widths.push_back(act_dim);
    actor_ = Mlp(widths);
    actor_.init_xavier(init_rng);
    actor_.scale_output_layer(0.01);  // start at the near-zero action
    widths.back() = 1;
    critic_ = Mlp(widths);
    critic_.init_xavier(init_rng);
    log_std_.assign(act_dim, pc.init_log_std);
    opt_actor_ = Adam(pc.lr);
    opt_logstd_ = Adam(pc.lr);
    opt_critic_ = Adam(pc.lr);
  }

  int state_dim() const { return state_dim_; }
  int act_dim() const { return act_dim_; }
  const std::vector<double>& log_std() const { return log_std_; }

  std::vector<double> mean_action(const std::vector<double>& state) const {
    return actor_.predict(state);
  }

  double value(const std::vector<double>& state) const { return critic_.predict(state)[0]; }

  // Draws action ~ N(mean, diag(exp(log_std)^2)); returns the raw
  // (unquantized) action and its log density.  Quantization to the aiming
  // grid happens outside the gradient path.
  std::vector<double> sample_action(const std::vector<double>& state, Rng& rng,
                                    double* log_prob_out) const {
    const std::vector<double> mu = actor_.predict(state);
    std::vector<double> a(act_dim_);
    for (int i = 0; i < act_dim_; ++i)
      a[i] = mu[i] + std::exp(log_std_[i]) * rng.normal();
    if (log_prob_out) *log_prob_out = log_prob(mu, a);
    return a;
  }

  double log_prob_for(const std::vector<double>& state, const std::vector<double>& action) const {
    return log_prob(actor_.predict(state), action);
  }

  // One transition of experience.  Rewards must be finite.
  void observe(const std::vector<double>& state, const std::vector<double>& action,
               double log_prob_old, double reward) {
    if (!std::isfinite(reward))
      throw std::runtime_error("PpoAgent::observe: non-finite reward");
    buf_states_.push_back(state);
    buf_actions_.push_back(action);
    buf_logp_.push_back(log_prob_old);
    buf_rewards_.push_back(reward);
  }

  std::size_t buffered() const { return buf_states_.size(); }

  // Runs the clipped-surrogate update once the buffer holds at least one
  // minibatch, then clears the buffer.  Returns true when an update ran.
  bool maybe_update(Rng& rng) {
    if (buf_states_.size() < static_cast<std::size_t>(pc_.minibatch)) return false;
    update(rng);
    buf_states_.clear();
    buf_actions_.clear();
    buf_logp_.clear();
    buf_rewards_.clear();
    return true;
  }

  Json to_json() const {
    Json j;
    j["schema_version"] = kPolicySchemaVersion;
    j["kind"] = "policy_model";
    j["state_dim"] = state_dim_;
    j["act_dim"] = act_dim_;
    j["actor"] = actor_.to_json();
    j["critic"] = critic_.to_json();
    j["log_std"] = log_std_;
    j["config"] = Json{{"lr", pc_.lr},
                       {"clip", pc_.clip},
                       {"minibatch", pc_.minibatch},
                       {"epochs", pc_.epochs},
                       {"entropy_coef", pc_.entropy_coef}};
    return j;
  }

  static PpoAgent from_json(const Json& j, const PolicyConfig& pc) {
    check_schema_version(j, kPolicySchemaVersion, "policy model");
    if (j.value("kind", "") != std::string("policy_model"))
      throw SchemaError("not a policy model file");
    PpoAgent agent;
    agent.pc_ = pc;
    agent.state_dim_ = j.at("state_dim").get<int>();
    agent.act_dim_ = j.at("act_dim").get<int>();
    agent.actor_ = Mlp::from_json(j.at("actor"));
    agent.critic_ = Mlp::from_json(j.at("critic"));
    agent.log_std_ = j.at("log_std").get<std::vector<double>>();
    if (static_cast<int>(agent.log_std_.size()) != agent.act_dim_)
      throw ShapeError("policy log_std length != act_dim");
    agent.opt_actor_ = Adam(pc.lr);
    agent.opt_logstd_ = Adam(pc.lr);
    agent.opt_critic_ = Adam(pc.lr);
    return agent;
  }

 private:
  double log_prob(const std::vector<double>& mu, const std::vector<double>& a) const {
    constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
    double lp = 0.0;
    for (int i = 0; i < act_dim_; ++i) {
      const double z = (a[i] - mu[i]) / std::exp(log_std_[i]);
      lp += -0.5 * z * z - log_std_[i] - 0.5 * kLogTwoPi;
    }
    return lp;
  }

  void update(Rng& rng) {
    const int n = static_cast<int>(buf_states_.size());

    // Advantage = reward - V(s), normalized across the whole buffer.
    std::vector<double> adv(n), returns(buf_rewards_);
    for (int i = 0; i < n; ++i) adv[i] = buf_rewards_[i] - value(buf_states_[i]);
    double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    var /= n;
    const double sd = std::sqrt(var);
    if (sd > 1e-12)
      for (double& a : adv) a = (a - mean) / sd;
    else
      for (double& a : adv) a -= mean;

    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Mlp::Workspace ws;
    std::vector<double> ga(actor_.params().size());
    std::vector<double> gs(log_std_.size());
    std::vector<double> gc(critic_.params().size());

    for (int epoch = 0; epoch < pc_.epochs; ++epoch) {
      for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.next_u64() % static_cast<uint64_t>(i + 1));
        std::swap(idx[i], idx[j]);
      }
      for (int start = 0; start < n; start += pc_.minibatch) {
        const int stop = std::min(n, start + pc_.minibatch);
        const double inv = 1.0 / static_cast<double>(stop - start);
        std::fill(ga.begin(), ga.end(), 0.0);
        std::fill(gs.begin(), gs.end(), 0.0);
        std::fill(gc.begin(), gc.end(), 0.0);

        for (int k = start; k < stop; ++k) {
          const int r = idx[k];
          const auto& st = buf_states_[r];
          const auto& ac = buf_actions_[r];

          actor_.forward(st, ws);
          const std::vector<double>& mu = ws.a.back();
          const double lp = log_prob(mu, ac);
          const double ratio = std::exp(lp - buf_logp_[r]);
          const double a_hat = adv[r];

          // Clipped surrogate: gradient only where min() selects the
          // unclipped branch.
          const bool clipped = (a_hat >= 0.0 && ratio > 1.0 + pc_.clip) ||
                               (a_hat < 0.0 && ratio < 1.0 - pc_.clip);
          if (!clipped) {
            // d(-ratio*A)/dmu_i and d/dlog_std_i, scaled for the batch mean
            const double scale = -a_hat * ratio * inv;
            std::vector<double> dmu(act_dim_);
            for (int i = 0; i < act_dim_; ++i) {
              const double sig = std::exp(log_std_[i]);
              const double z = (ac[i] - mu[i]) / sig;
              dmu[i] = scale * (z / sig);
              gs[i] += scale * (z * z - 1.0);
            }
            actor_.backward(ws, dmu, ga);
          }
          // Entropy bonus pushes log_std up; mean-parameters unaffected.
          if (pc_.entropy_coef > 0.0)
            for (int i = 0; i < act_dim_; ++i) gs[i] -= pc_.entropy_coef * inv;

          critic_.forward(st, ws);
          const double v = ws.a.back()[0];
          const std::vector<double> dv{2.0 * (v - returns[r]) * inv};
          critic_.backward(ws, dv, gc);
        }

        opt_actor_.step(actor_.params(), ga);
        opt_logstd_.step(log_std_, gs);
        opt_critic_.step(critic_.params(), gc);
      }
    }
  }

  PolicyConfig pc_;
  int state_dim_ = 0;
  int act_dim_ = 0;
  Mlp actor_, critic_;
  std::vector<double> log_std_;
  Adam opt_actor_, opt_logstd_, opt_critic_;
  std::vector<std::vector<double>> buf_states_;
  std::vector<std::vector<double>> buf_actions_;
  std::vector<double> buf_logp_;
  std::vector<double> buf_rewards_;
};

// Scenario -> normalized policy state: each coordinate mapped to [-1, 1]
// through the scenario box.
inline std::vector<double> normalize_scenario(double x, double y, double z,
                                              const ScenarioBounds& b) {
  auto norm = [](double v, double lo, double hi) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    return h > 0 ? (v - c) / h : 0.0;
  };
  return {norm(x, b.x_min, b.x_max), norm(y, b.y_min, b.y_max), norm(z, b.z_min, b.z_max)};
}

}  // namespace tethernet
