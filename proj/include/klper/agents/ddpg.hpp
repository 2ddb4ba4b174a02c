#pragma once

#include "klper/agents/agent.hpp"

namespace klper {

/// DDPG: one critic over [state | action], tanh actor, soft-updated targets.
/// Actor and targets are stepped on every update.
class DdpgAgent : public Agent {
public:
  DdpgAgent(std::size_t state_dim, std::size_t action_dim, AgentConfig cfg, Rng& init_rng)
      : Agent(state_dim, action_dim, std::move(cfg)) {
    actor_ = Mlp::fan_in_init(layer_sizes(m_, cfg_.hidden, l_), Activation::relu,
                              Activation::tanh, init_rng);
    critic_ = Mlp::fan_in_init(layer_sizes(m_ + l_, cfg_.hidden, 1), Activation::relu,
                               Activation::identity, init_rng);
    actor_target_ = actor_;
    critic_target_ = critic_;
    make_optimizers();
  }

  std::string algorithm() const override { return "ddpg"; }

  Vector critic_targets(const CandidateBatch& batch, Rng&) const override {
    check_batch(batch);
    const Matrix a_next = actor_target_.forward(batch.next_states);
    const Matrix q_next = critic_target_.forward(hcat(batch.next_states, a_next));
    Vector y(q_next.rows());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      y[i] = clipped_double_q_target(batch.rewards[i], cfg_.gamma, q_next(i, 0), q_next(i, 0),
                                     batch.dones[i]);
    }
    return y;
  }

  UpdateStats update(const CandidateBatch& batch, std::uint64_t, Rng& rng) override {
    check_batch(batch);
    UpdateStats st;
    st.targets = critic_targets(batch, rng);
    auto c = critic_step(critic_, critic_opt_, hcat(batch.states, batch.actions), st.targets,
                         batch.weights);
    st.critic_loss = c.loss;
    st.td_abs = std::move(c.td_abs);

    auto a = actor_step(actor_, actor_opt_, critic_, batch.states);
    st.actor_loss = a.loss;
    st.actor_grad_norm = a.grad_norm;
    st.actor_updated = true;

    soft_update(actor_target_, actor_, cfg_.tau);
    soft_update(critic_target_, critic_, cfg_.tau);
    ++updates_;
    check_finite_parameters();
    return st;
  }

  std::vector<std::pair<std::string, const Mlp*>> networks() const override {
    return {{"actor", &actor_},
            {"critic", &critic_},
            {"actor_target", &actor_target_},
            {"critic_target", &critic_target_}};
  }
  std::vector<std::pair<std::string, Mlp*>> mutable_networks() override {
    return {{"actor", &actor_},
            {"critic", &critic_},
            {"actor_target", &actor_target_},
            {"critic_target", &critic_target_}};
  }

  const Mlp& actor() const override { return actor_; }
  Mlp& actor() { return actor_; }
  Mlp& critic() { return critic_; }
  const Mlp& critic() const { return critic_; }
  Mlp& actor_target() { return actor_target_; }
  const Mlp& actor_target() const { return actor_target_; }
  Mlp& critic_target() { return critic_target_; }
  const Mlp& critic_target() const { return critic_target_; }

  /// Recreates optimizer state, e.g. after networks were replaced.
  void make_optimizers() {
    actor_opt_ = Adam(actor_, {.lr = cfg_.actor_lr});
    critic_opt_ = Adam(critic_, {.lr = cfg_.critic_lr});
  }

private:
  Mlp actor_, critic_, actor_target_, critic_target_;
  Adam actor_opt_, critic_opt_;
};

} // namespace klper
