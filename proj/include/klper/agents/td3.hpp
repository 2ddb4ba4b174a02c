#pragma once

#include "klper/agents/agent.hpp"

namespace klper {

/// TD3: twin critics with a clipped double-Q target, target policy smoothing,
/// and actor/target updates every `policy_delay` critic updates.
class Td3Agent : public Agent {
public:
  Td3Agent(std::size_t state_dim, std::size_t action_dim, AgentConfig cfg, Rng& init_rng)
      : Agent(state_dim, action_dim, std::move(cfg)) {
    actor_ = Mlp::fan_in_init(layer_sizes(m_, cfg_.hidden, l_), Activation::relu,
                              Activation::tanh, init_rng);
    const auto critic_sizes = layer_sizes(m_ + l_, cfg_.hidden, 1);
    critic1_ = Mlp::fan_in_init(critic_sizes, Activation::relu, Activation::identity, init_rng);
    critic2_ = Mlp::fan_in_init(critic_sizes, Activation::relu, Activation::identity, init_rng);
    actor_target_ = actor_;
    critic1_target_ = critic1_;
    critic2_target_ = critic2_;
    make_optimizers();
  }

  std::string algorithm() const override { return "td3"; }

  /// Target actor action plus clipped Gaussian smoothing noise, clipped to [-1, 1].
  Matrix smoothed_target_actions(const Matrix& next_states, Rng& rng) const {
    Matrix a = actor_target_.forward(next_states);
    if (cfg_.smoothing_std > 0.0) {
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double eps = std::clamp(cfg_.smoothing_std * standard_normal(rng),
                                      -cfg_.smoothing_clip, cfg_.smoothing_clip);
        a.data()[i] = std::clamp(a.data()[i] + eps, -1.0, 1.0);
      }
    }
    return a;
  }

  Vector critic_targets(const CandidateBatch& batch, Rng& rng) const override {
    check_batch(batch);
    const Matrix a_next = smoothed_target_actions(batch.next_states, rng);
    const Matrix in = hcat(batch.next_states, a_next);
    const Matrix q1 = critic1_target_.forward(in);
    const Matrix q2 = critic2_target_.forward(in);
    Vector y(q1.rows());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      y[i] = clipped_double_q_target(batch.rewards[i], cfg_.gamma, q1(i, 0), q2(i, 0),
                                     batch.dones[i]);
    }
    return y;
  }

  UpdateStats update(const CandidateBatch& batch, std::uint64_t update_index, Rng& rng) override {
    check_batch(batch);
    UpdateStats st;
    st.targets = critic_targets(batch, rng);
    const Matrix critic_in = hcat(batch.states, batch.actions);
    auto c1 = critic_step(critic1_, critic1_opt_, critic_in, st.targets, batch.weights);
    auto c2 = critic_step(critic2_, critic2_opt_, critic_in, st.targets, batch.weights);
    st.critic_loss = c1.loss + c2.loss;
    st.td_abs = std::move(c1.td_abs);

    if (update_index % cfg_.policy_delay == 0) {
      auto a = actor_step(actor_, actor_opt_, critic1_, batch.states);
      st.actor_loss = a.loss;
      st.actor_grad_norm = a.grad_norm;
      st.actor_updated = true;
      soft_update(actor_target_, actor_, cfg_.tau);
      soft_update(critic1_target_, critic1_, cfg_.tau);
      soft_update(critic2_target_, critic2_, cfg_.tau);
    }
    ++updates_;
    check_finite_parameters();
    return st;
  }

  std::vector<std::pair<std::string, const Mlp*>> networks() const override {
    return {{"actor", &actor_},
            {"critic1", &critic1_},
            {"critic2", &critic2_},
            {"actor_target", &actor_target_},
            {"critic1_target", &critic1_target_},
            {"critic2_target", &critic2_target_}};
  }
  std::vector<std::pair<std::string, Mlp*>> mutable_networks() override {
    return {{"actor", &actor_},
            {"critic1", &critic1_},
            {"critic2", &critic2_},
            {"actor_target", &actor_target_},
            {"critic1_target", &critic1_target_},
            {"critic2_target", &critic2_target_}};
  }

  const Mlp& actor() const override { return actor_; }
  Mlp& actor() { return actor_; }
  Mlp& critic1() { return critic1_; }
  Mlp& critic2() { return critic2_; }
  const Mlp& critic1() const { return critic1_; }
  const Mlp& critic2() const { return critic2_; }
  Mlp& actor_target() { return actor_target_; }
  Mlp& critic1_target() { return critic1_target_; }
  Mlp& critic2_target() { return critic2_target_; }
  const Mlp& actor_target() const { return actor_target_; }
  const Mlp& critic1_target() const { return critic1_target_; }
  const Mlp& critic2_target() const { return critic2_target_; }

  void make_optimizers() {
    actor_opt_ = Adam(actor_, {.lr = cfg_.actor_lr});
    critic1_opt_ = Adam(critic1_, {.lr = cfg_.critic_lr});
    critic2_opt_ = Adam(critic2_, {.lr = cfg_.critic_lr});
  }

private:
  Mlp actor_, critic1_, critic2_, actor_target_, critic1_target_, critic2_target_;
  Adam actor_opt_, critic1_opt_, critic2_opt_;
};

} // namespace klper
