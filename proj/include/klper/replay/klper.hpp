#pragma once

// KL-scored batch selection: draw N uniform candidate batches, fit a Gaussian
// to each batch's action deltas against the current actor, and keep the batch
// closest (in KL) to N(0, sigma I).

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "klper/error.hpp"
#include "klper/gauss.hpp"
#include "klper/numcore/mlp.hpp"
#include "klper/random.hpp"
#include "klper/replay/buffer.hpp"

namespace klper {

/// actor(states) - stored actions, row i pairing transition i's state and action.
inline Matrix compute_action_deltas(const CandidateBatch& batch, const Mlp& actor) {
  if (actor.input_size() != static_cast<std::size_t>(batch.states.cols()) ||
      actor.output_size() != static_cast<std::size_t>(batch.actions.cols())) {
    throw ShapeError("actor (" + std::to_string(actor.input_size()) + " -> " +
                     std::to_string(actor.output_size()) + ") does not fit batch (" +
                     std::to_string(batch.states.cols()) + ", " +
                     std::to_string(batch.actions.cols()) + ")");
  }
  return actor.forward(batch.states) - batch.actions;
}

inline double batch_kappa(const CandidateBatch& batch, const Mlp& actor, const KlTarget& target) {
  return kl_to_isotropic(fit_batch_policy(compute_action_deltas(batch, actor)), target);
}

/// Index of the smallest score; the lowest index wins ties.
inline std::size_t argmin_kappa(std::span<const double> kappas) {
  if (kappas.empty()) throw ConfigError("argmin_kappa: no candidates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < kappas.size(); ++i) {
    if (kappas[i] < kappas[best]) best = i;
  }
  return best;
}

/// min(kappas) + mean(kappas - min). Never below the minimum, even after rounding.
inline double candidate_mean(std::span<const double> kappas, double min_kappa) {
  double acc = 0.0;
  for (double k : kappas) acc += k - min_kappa;
  return min_kappa + acc / static_cast<double>(kappas.size());
}

struct KlperSelection {
  CandidateBatch chosen;
  std::size_t chosen_index = 0;
  std::vector<double> kappas;
  std::vector<std::vector<std::size_t>> candidate_indices;

  double kappa_selected() const { return kappas[chosen_index]; }
  double kappa_candidates_mean() const { return candidate_mean(kappas, kappa_selected()); }
};

/// Draws `n_candidates` independent uniform batches (overlap allowed) and
/// returns the one with minimum KL score together with every score.
inline KlperSelection klper_select(const ReplayBuffer& buffer, std::size_t n_candidates,
                                   std::size_t b, const Mlp& actor, const KlTarget& target,
                                   Rng& rng) {
  if (n_candidates == 0) throw ConfigError("klper_select: N must be >= 1");
  if (buffer.size() < b) {
    throw UnderfullError("replay buffer holds " + std::to_string(buffer.size()) +
                         " transitions, batch needs " + std::to_string(b));
  }
  KlperSelection sel;
  sel.kappas.reserve(n_candidates);
  sel.candidate_indices.reserve(n_candidates);
  std::vector<CandidateBatch> candidates;
  candidates.reserve(n_candidates);
  for (std::size_t n = 0; n < n_candidates; ++n) {
    candidates.push_back(sample_uniform(buffer, b, rng));
    sel.kappas.push_back(batch_kappa(candidates.back(), actor, target));
    sel.candidate_indices.push_back(candidates.back().indices);
  }
  sel.chosen_index = argmin_kappa(sel.kappas);
  sel.chosen = std::move(candidates[sel.chosen_index]);
  sel.chosen.kappa = sel.kappas[sel.chosen_index];
  return sel;
}

} // namespace klper
