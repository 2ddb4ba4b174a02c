#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "klper/agents/checkpoint.hpp"
#include "klper/agents/ddpg.hpp"
#include "klper/agents/td3.hpp"
#include "klper/envs/registry.hpp"
#include "klper/gauss.hpp"
#include "klper/harness/config.hpp"
#include "klper/harness/metrics.hpp"
#include "klper/random.hpp"
#include "klper/replay/buffer.hpp"
#include "klper/replay/klper.hpp"
#include "klper/replay/per.hpp"

namespace klper {

struct EvalResult {
  double mean = 0.0;
  double std = 0.0; // population standard deviation
  std::vector<double> returns;
};

using Policy = std::function<Vector(const Vector&)>;

/// Undiscounted returns of `policy` (normalized actions) over `episodes` episodes.
inline EvalResult evaluate_policy(const Policy& policy, Env& env, std::size_t episodes, Rng& rng) {
  if (episodes < 1) throw ConfigError("evaluate: episodes must be >= 1");
  const EnvSpec spec = env.spec();
  EvalResult res;
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    Vector obs = env.reset(rng);
    double ret = 0.0;
    while (true) {
      const StepResult r = env.step(scale_action(policy(obs), spec));
      ret += r.reward;
      if (r.done) break;
      obs = r.next_state;
    }
    res.returns.push_back(ret);
  }
  for (std::size_t i = 0; i < episodes; ++i) {
    res.mean += (res.returns[i] - res.mean) / static_cast<double>(i + 1);
  }
  double sq = 0.0;
  for (double r : res.returns) sq += (r - res.mean) * (r - res.mean);
  res.std = std::sqrt(sq / static_cast<double>(episodes));
  return res;
}

/// Deterministic-policy evaluation (no exploration noise).
inline EvalResult evaluate(const Agent& agent, Env& env, std::size_t episodes, Rng& rng) {
  Rng unused(0);
  return evaluate_policy([&](const Vector& s) { return agent.act(s, false, unused); }, env,
                         episodes, rng);
}

inline std::unique_ptr<Agent> make_agent(const RunConfig& cfg, const EnvSpec& spec, Rng& init_rng) {
  if (cfg.algorithm == Algorithm::ddpg) {
    return std::make_unique<DdpgAgent>(spec.state_dim, spec.action_dim, cfg.agent, init_rng);
  }
  return std::make_unique<Td3Agent>(spec.state_dim, spec.action_dim, cfg.agent, init_rng);
}

struct TrainResult {
  std::vector<MetricsRow> rows;
  std::uint64_t env_steps = 0;
  std::uint64_t updates = 0;
  std::uint64_t warmup_transitions = 0;     // stored with uniformly random actions
  std::uint64_t stored_at_first_update = 0; // buffer size when the first update ran
  bool diverged = false;
  std::string error;
  std::filesystem::path metrics_path;
};

namespace detail {

struct WindowMean {
  double sum = 0.0;
  std::uint64_t n = 0;

  void add(double v) {
    sum += v;
    ++n;
  }
  double take() {
    const double m = n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
    *this = {};
    return m;
  }
};

} // namespace detail

/// Runs one experiment: random-action warmup, then per step act with
/// exploration, store, select a batch with the configured strategy, update.
/// Evaluates at step 0 and every `eval_interval` steps. Writes metrics.csv,
/// config.txt, summary.json and (optionally) a checkpoint into cfg.out_dir.
/// A divergence stops the run; rows collected so far are still written.
inline TrainResult train(const RunConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  const fs::path out(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw FileError(out.string(), "cannot create output directory: " + ec.message());
  {
    const auto p = (out / "config.txt").string();
    std::ofstream os(p, std::ios::binary);
    if (!os) throw FileError(p, "cannot open for writing");
    os << to_key_values(cfg);
  }

  const auto clock_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    if (!cfg.record_wallclock) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  };

  Rng env_rng = make_stream(cfg.seed, Stream::env);
  Rng explore_rng = make_stream(cfg.seed, Stream::exploration);
  Rng replay_rng = make_stream(cfg.seed, Stream::replay);
  Rng init_rng = make_stream(cfg.seed, Stream::init);
  Rng eval_rng = make_stream(cfg.seed, Stream::eval);
  Rng smoothing_rng = make_stream(cfg.seed, Stream::smoothing);

  auto env = make_env(cfg.env);
  auto eval_env = make_env(cfg.env);
  const EnvSpec spec = env->spec();
  auto agent = make_agent(cfg, spec, init_rng);
  ReplayBuffer buffer(cfg.buffer_capacity, spec.state_dim, spec.action_dim);
  std::optional<PriorityIndex> priorities;
  if (cfg.replay == ReplayKind::per) priorities.emplace(cfg.buffer_capacity, cfg.per);
  const KlTarget kl_target(cfg.kl_sigma, spec.action_dim);

  TrainResult result;
  detail::WindowMean critic_loss, actor_loss, kappa_sel, kappa_mean;

  auto eval_row = [&](std::uint64_t step) {
    const EvalResult ev = evaluate(*agent, *eval_env, cfg.eval_episodes, eval_rng);
    MetricsRow row;
    row.step = step;
    row.eval_return_mean = ev.mean;
    row.eval_return_std = ev.std;
    row.critic_loss = critic_loss.take();
    row.actor_loss = actor_loss.take();
    row.kappa_selected = kappa_sel.take();
    row.kappa_candidates_mean = kappa_mean.take();
    row.wallclock_s = elapsed();
    result.rows.push_back(row);
  };

  eval_row(0);
  Vector obs = env->reset(env_rng);
  const auto l = static_cast<Eigen::Index>(spec.action_dim);
  try {
    for (std::uint64_t t = 1; t <= cfg.total_steps; ++t) {
      Vector action(l);
      if (t <= cfg.warmup) {
        for (Eigen::Index j = 0; j < l; ++j) action[j] = uniform(explore_rng, -1.0, 1.0);
        ++result.warmup_transitions;
      } else {
        action = agent->act(obs, true, explore_rng);
      }
      const StepResult step = env->step(scale_action(action, spec));
      ++result.env_steps;
      const std::size_t slot =
          buffer.push({obs, action, step.reward, step.next_state, step.terminal});
      if (priorities) priorities->on_insert(slot);
      obs = step.done ? env->reset(env_rng) : step.next_state;

      if (t > cfg.warmup && buffer.size() >= cfg.batch) {
        if (result.updates == 0) result.stored_at_first_update = buffer.size();
        CandidateBatch batch;
        double k_sel = 0.0, k_mean = 0.0;
        switch (cfg.replay) {
        case ReplayKind::vanilla:
          batch = sample_uniform(buffer, cfg.batch, replay_rng);
          k_sel = k_mean = batch_kappa(batch, agent->actor(), kl_target);
          break;
        case ReplayKind::per:
          batch = per_sample(*priorities, buffer, cfg.batch, replay_rng);
          k_sel = k_mean = batch_kappa(batch, agent->actor(), kl_target);
          break;
        case ReplayKind::klper: {
          KlperSelection sel =
              klper_select(buffer, cfg.candidates, cfg.batch, agent->actor(), kl_target, replay_rng);
          k_sel = sel.kappa_selected();
          k_mean = sel.kappa_candidates_mean();
          batch = std::move(sel.chosen);
          break;
        }
        }
        const UpdateStats st = agent->update(batch, result.updates + 1, smoothing_rng);
        ++result.updates;
        if (priorities) priorities->update_priorities(batch.indices, st.td_abs);
        critic_loss.add(st.critic_loss);
        if (st.actor_updated) actor_loss.add(st.actor_loss);
        kappa_sel.add(k_sel);
        kappa_mean.add(k_mean);
      }

      if (t % cfg.eval_interval == 0) eval_row(t);
    }
  } catch (const DivergenceError& e) {
    result.diverged = true;
    result.error = e.what();
  }

  result.metrics_path = out / "metrics.csv";
  write_metrics_csv(result.metrics_path.string(), result.rows);

  nlohmann::json summary = {
      {"algorithm", to_string(cfg.algorithm)},
      {"replay", to_string(cfg.replay)},
      {"env", cfg.env},
      {"seed", cfg.seed},
      {"env_steps", result.env_steps},
      {"updates", result.updates},
      {"diverged", result.diverged},
      {"final_eval_return_mean", result.rows.back().eval_return_mean},
  };
  if (result.diverged) summary["error"] = result.error;
  if (cfg.record_wallclock) summary["wallclock_s"] = elapsed();
  {
    const auto p = (out / "summary.json").string();
    std::ofstream os(p, std::ios::binary);
    if (!os) throw FileError(p, "cannot open for writing");
    os << summary.dump(2) << '\n';
  }

  if (!result.diverged) {
    if (cfg.save_checkpoint) save_checkpoint(*agent, out / "checkpoint");
    if (cfg.save_buffer) buffer.save((out / "replay.bin").string());
  }
  return result;
}

} // namespace klper
