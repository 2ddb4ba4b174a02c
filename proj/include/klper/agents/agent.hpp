#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "klper/error.hpp"
#include "klper/numcore/adam.hpp"
#include "klper/numcore/mlp.hpp"
#include "klper/random.hpp"
#include "klper/replay/buffer.hpp"

namespace klper {

// Actions are handled in normalized coordinates: every dimension lies in
// [-1, 1] and the environment boundary multiplies by the action bound.
struct AgentConfig {
  std::vector<std::size_t> hidden{400, 300};
  double gamma = 0.99;
  double tau = 0.005;
  double actor_lr = 1e-4;
  double critic_lr = 3e-4;
  double exploration_std = 0.1;
  // TD3 only.
  std::size_t policy_delay = 2;
  double smoothing_std = 0.2;
  double smoothing_clip = 0.5;

  void validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
    if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in (0, 1]");
    if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw ConfigError("learning rates must be > 0");
    if (!(exploration_std >= 0.0)) throw ConfigError("exploration std must be >= 0");
    if (policy_delay < 1) throw ConfigError("policy delay M must be >= 1");
    if (!(smoothing_std >= 0.0) || !(smoothing_clip >= 0.0)) {
      throw ConfigError("smoothing noise std and clip must be >= 0");
    }
    if (hidden.empty()) throw ConfigError("at least one hidden layer is required");
    for (auto h : hidden) {
      if (h == 0) throw ConfigError("hidden layer sizes must be >= 1");
    }
  }
};

struct UpdateStats {
  double critic_loss = 0.0;
  double actor_loss = std::numeric_limits<double>::quiet_NaN(); // NaN when the actor was not stepped
  bool actor_updated = false;
  double actor_grad_norm = 0.0;
  Vector targets;             // bootstrap targets y, one per batch row
  std::vector<double> td_abs; // |y - Q1| before the critic step
};

/// y = r + gamma * min(q1, q2) * (1 - done).
inline double clipped_double_q_target(double r, double gamma, double q1, double q2, double done) {
  return r + gamma * std::min(q1, q2) * (1.0 - done);
}

inline std::vector<std::size_t> layer_sizes(std::size_t in, const std::vector<std::size_t>& hidden,
                                            std::size_t out) {
  std::vector<std::size_t> sizes;
  sizes.reserve(hidden.size() + 2);
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

/// Common surface of the deterministic actor-critic agents.
class Agent {
public:
  Agent(std::size_t state_dim, std::size_t action_dim, AgentConfig cfg)
      : m_(state_dim), l_(action_dim), cfg_(std::move(cfg)) {
    if (state_dim == 0 || action_dim == 0) throw ConfigError("agent dimensions must be >= 1");
    cfg_.validate();
  }
  virtual ~Agent() = default;
  Agent(const Agent&) = default;
  Agent& operator=(const Agent&) = default;

  virtual std::string algorithm() const = 0;

  /// One gradient update on `batch`. `update_index` counts updates from 1.
  virtual UpdateStats update(const CandidateBatch& batch, std::uint64_t update_index,
                             Rng& smoothing_rng) = 0;

  /// Bootstrap targets the next update would regress onto.
  virtual Vector critic_targets(const CandidateBatch& batch, Rng& smoothing_rng) const = 0;

  /// Named networks, in checkpoint order.
  virtual std::vector<std::pair<std::string, const Mlp*>> networks() const = 0;
  virtual std::vector<std::pair<std::string, Mlp*>> mutable_networks() = 0;

  virtual const Mlp& actor() const = 0;

  /// Deterministic actor output, plus clipped Gaussian noise when exploring.
  Vector act(const Vector& s, bool explore, Rng& rng) const {
    if (static_cast<std::size_t>(s.size()) != m_) {
      throw ShapeError("act: state has " + std::to_string(s.size()) + " entries, expected " +
                       std::to_string(m_));
    }
    Vector a = actor().forward(s.transpose()).row(0).transpose();
    if (explore) {
      for (Eigen::Index j = 0; j < a.size(); ++j) {
        a[j] = std::clamp(a[j] + cfg_.exploration_std * standard_normal(rng), -1.0, 1.0);
      }
    }
    return a;
  }

  std::size_t state_dim() const { return m_; }
  std::size_t action_dim() const { return l_; }
  const AgentConfig& config() const { return cfg_; }
  std::uint64_t updates() const { return updates_; }
  void set_updates(std::uint64_t n) { updates_ = n; }

protected:
  void check_batch(const CandidateBatch& batch) const {
    if (batch.size() == 0) throw ConfigError("update needs a non-empty batch");
    if (static_cast<std::size_t>(batch.states.cols()) != m_ ||
        static_cast<std::size_t>(batch.actions.cols()) != l_) {
      throw ShapeError("batch dimensions do not match the agent");
    }
  }

  struct CriticStep {
    double loss;
    std::vector<double> td_abs;
  };

  // Weighted mean squared TD regression of `critic` onto `targets`.
  static CriticStep critic_step(Mlp& critic, Adam& opt, const Matrix& critic_in,
                                const Vector& targets, const Vector& weights) {
    Tape tape;
    const Matrix q = critic.forward(critic_in, tape);
    const auto b = static_cast<double>(q.rows());
    const Vector diff = q.col(0) - targets;
    CriticStep out;
    out.loss = (weights.array() * diff.array().square()).sum() / b;
    if (!std::isfinite(out.loss)) throw DivergenceError("critic loss is not finite");
    out.td_abs.resize(static_cast<std::size_t>(diff.size()));
    for (Eigen::Index i = 0; i < diff.size(); ++i) {
      out.td_abs[static_cast<std::size_t>(i)] = std::abs(diff[i]);
    }
    Matrix upstream = (2.0 / b) * (weights.array() * diff.array()).matrix();
    opt.step(critic, critic.backward(tape, upstream));
    return out;
  }

  struct ActorStep {
    double loss;
    double grad_norm;
  };

  // Ascends mean Q(s, actor(s)); `critic` is read, never modified.
  ActorStep actor_step(Mlp& actor, Adam& opt, const Mlp& critic, const Matrix& states) const {
    Tape actor_tape, critic_tape;
    const Matrix a = actor.forward(states, actor_tape);
    const Matrix q = critic.forward(hcat(states, a), critic_tape);
    const auto b = static_cast<double>(q.rows());
    ActorStep out;
    out.loss = -q.mean();
    if (!std::isfinite(out.loss)) throw DivergenceError("actor loss is not finite");
    const Matrix upstream = Matrix::Constant(q.rows(), 1, -1.0 / b);
    const MlpGrad dq = critic.backward(critic_tape, upstream, false);
    const Matrix da = dq.input.rightCols(static_cast<Eigen::Index>(l_));
    const MlpGrad grad = actor.backward(actor_tape, da);
    double sq = 0.0;
    for (const auto& layer : grad.layers) sq += layer.weight.squaredNorm() + layer.bias.squaredNorm();
    out.grad_norm = std::sqrt(sq);
    opt.step(actor, grad);
    return out;
  }

  void check_finite_parameters() const {
    for (const auto& [name, net] : networks()) {
      if (!net->parameters_finite()) {
        throw DivergenceError("non-finite parameter in " + name + " after update " +
                              std::to_string(updates_));
      }
    }
  }

  std::size_t m_;
  std::size_t l_;
  AgentConfig cfg_;
  std::uint64_t updates_ = 0;
};

} // namespace klper
