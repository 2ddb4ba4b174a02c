#pragma once

// Proportional prioritized replay: P(i) = p_i^alpha / sum_k p_k^alpha with
// stratified sum-tree sampling and max-normalized importance weights.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "klper/error.hpp"
#include "klper/numcore/mlp.hpp"
#include "klper/random.hpp"
#include "klper/replay/buffer.hpp"
#include "klper/replay/sum_tree.hpp"

namespace klper {

struct PerConfig {
  double alpha = 0.6;
  double beta = 0.4;
  double eps = 1e-6; // priority floor added to |delta|
  bool importance_weights = true;
};

/// Priorities (already raised to alpha) for every replay slot.
class PriorityIndex {
public:
  PriorityIndex(std::size_t capacity, PerConfig cfg) : tree_(capacity), cfg_(cfg) {
    if (!(cfg.alpha >= 0.0) || !(cfg.beta >= 0.0) || !(cfg.eps > 0.0)) {
      throw ConfigError("PER needs alpha >= 0, beta >= 0, eps > 0");
    }
  }

  /// New transitions get the largest priority assigned so far.
  void on_insert(std::size_t slot) { tree_.set(slot, max_priority_); }

  /// Sets a leaf to an already-exponentiated priority.
  void set_priority(std::size_t slot, double leaf_priority) {
    tree_.set(slot, leaf_priority);
    max_priority_ = std::max(max_priority_, leaf_priority);
  }

  /// leaf <- (|delta| + eps)^alpha for each sampled slot.
  void update_priorities(std::span<const std::size_t> slots, std::span<const double> td_abs) {
    if (slots.size() != td_abs.size()) {
      throw ShapeError("update_priorities: " + std::to_string(slots.size()) + " slots but " +
                       std::to_string(td_abs.size()) + " TD errors");
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (!(td_abs[i] >= 0.0) || !std::isfinite(td_abs[i])) {
        throw DomainError("update_priorities: |delta| must be finite and non-negative");
      }
      set_priority(slots[i], std::pow(td_abs[i] + cfg_.eps, cfg_.alpha));
    }
  }

  double probability(std::size_t slot) const {
    if (!(tree_.total() > 0.0)) throw EmptyPriorityError("PER index has zero total priority");
    return tree_.get(slot) / tree_.total();
  }

  const SumTree& tree() const { return tree_; }
  const PerConfig& config() const { return cfg_; }
  double max_priority() const { return max_priority_; }

private:
  SumTree tree_;
  PerConfig cfg_;
  double max_priority_ = 1.0;
};

/// b slots drawn with P(i) proportional to their leaf priority, one per equal
/// mass segment. Weights are (size * P(i))^-beta divided by the batch max.
inline CandidateBatch per_sample(const PriorityIndex& index, const ReplayBuffer& buffer,
                                 std::size_t b, Rng& rng) {
  if (b == 0) throw ConfigError("batch size must be >= 1");
  if (buffer.size() < b) {
    throw UnderfullError("replay buffer holds " + std::to_string(buffer.size()) +
                         " transitions, batch needs " + std::to_string(b));
  }
  if (index.tree().capacity() < buffer.capacity()) {
    throw ShapeError("PER index is smaller than the replay buffer");
  }
  const SumTree& tree = index.tree();
  const double total = tree.total();
  if (!(total > 0.0)) throw EmptyPriorityError("PER index has zero total priority");

  const double segment = total / static_cast<double>(b);
  const double below_total = std::nextafter(total, 0.0);
  std::vector<std::size_t> slots(b);
  for (std::size_t i = 0; i < b; ++i) {
    const double u = unit_uniform(rng);
    const double value = std::min((static_cast<double>(i) + u) * segment, below_total);
    slots[i] = tree.find_prefix(value);
  }

  CandidateBatch batch = buffer.gather(slots);
  if (index.config().importance_weights) {
    const double n = static_cast<double>(buffer.size());
    double max_w = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
      const double p = tree.get(slots[i]) / total;
      const double w = std::pow(n * p, -index.config().beta);
      batch.weights[static_cast<Eigen::Index>(i)] = w;
      max_w = std::max(max_w, w);
    }
    batch.weights /= max_w;
  }
  return batch;
}

/// |r + gamma * Q'(s', pi'(s')) - Q(s, a)|, bootstrap dropped for terminal
/// transitions. Critics take [state | action].
inline double td_error(const Transition& t, const Mlp& critic, const Mlp& actor_target,
                       const Mlp& critic_target, double gamma) {
  const Matrix s = t.s.transpose();
  const Matrix a = t.a.transpose();
  const Matrix s_next = t.s_next.transpose();
  const double q = critic.forward(hcat(s, a))(0, 0);
  double y = t.r;
  if (!t.done) {
    const Matrix a_next = actor_target.forward(s_next);
    y += gamma * critic_target.forward(hcat(s_next, a_next))(0, 0);
  }
  return std::abs(y - q);
}

/// Expected number of updates between two draws of a transition with sampling
/// probability p under batch size b: 1 / (p * b). p = 0 gives +infinity.
inline double expected_sampling_period(double p, std::size_t b) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("sampling probability must lie in [0, 1]");
  if (b == 0) throw DomainError("batch size must be >= 1");
  if (p == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (p * static_cast<double>(b));
}

} // namespace klper
