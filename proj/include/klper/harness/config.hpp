#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "klper/agents/agent.hpp"
#include "klper/error.hpp"
#include "klper/replay/per.hpp"
#include "klper/text.hpp"

namespace klper {

enum class Algorithm { ddpg, td3 };
enum class ReplayKind { vanilla, per, klper };

inline std::string to_string(Algorithm a) { return a == Algorithm::ddpg ? "ddpg" : "td3"; }

inline std::string to_string(ReplayKind r) {
  switch (r) {
  case ReplayKind::vanilla: return "vanilla";
  case ReplayKind::per: return "per";
  case ReplayKind::klper: return "klper";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "ddpg") return Algorithm::ddpg;
  if (s == "td3") return Algorithm::td3;
  throw UsageError("unknown algorithm '" + s + "' (expected ddpg or td3)");
}

inline ReplayKind parse_replay(const std::string& s) {
  if (s == "vanilla") return ReplayKind::vanilla;
  if (s == "per") return ReplayKind::per;
  if (s == "klper") return ReplayKind::klper;
  throw UsageError("unknown replay strategy '" + s + "' (expected vanilla, per or klper)");
}

/// Full description of one training run.
struct RunConfig {
  Algorithm algorithm = Algorithm::ddpg;
  ReplayKind replay = ReplayKind::vanilla;
  std::string env = "pendulum";
  std::uint64_t total_steps = 50000;
  std::uint64_t warmup = 10000;
  std::size_t batch = 64;
  std::size_t candidates = 4;
  double kl_sigma = 0.1;
  PerConfig per;
  AgentConfig agent;
  std::uint64_t seed = 0;
  std::uint64_t eval_interval = 2500;
  std::size_t eval_episodes = 5;
  std::size_t buffer_capacity = 1000000;
  std::string out_dir = "runs/default";
  bool record_wallclock = false;
  bool save_checkpoint = true;
  bool save_buffer = false;

  /// Per-algorithm defaults. DDPG: 400-300 nets, b = 64, N = 4, sigma = 0.1,
  /// warmup 10000, lr 1e-4 / 3e-4. TD3: 256-256 nets, b = 256, N = 8,
  /// sigma = 0.2, warmup 25000, lr 1e-3.
  static RunConfig defaults_for(Algorithm algo) {
    RunConfig c;
    c.algorithm = algo;
    if (algo == Algorithm::td3) {
      c.batch = 256;
      c.candidates = 8;
      c.kl_sigma = 0.2;
      c.warmup = 25000;
      c.agent.hidden = {256, 256};
      c.agent.actor_lr = 1e-3;
      c.agent.critic_lr = 1e-3;
      c.agent.policy_delay = 2;
    } else {
      c.agent.hidden = {400, 300};
      c.agent.actor_lr = 1e-4;
      c.agent.critic_lr = 3e-4;
      c.agent.policy_delay = 1;
    }
    return c;
  }

  void validate() const {
    if (candidates < 1) throw UsageError("candidates (N) must be >= 1");
    if (batch < 2) throw UsageError("batch must be >= 2 (the batch covariance divides by b - 1)");
    if (eval_interval < 1) throw UsageError("eval_interval must be >= 1");
    if (eval_episodes < 1) throw UsageError("eval_episodes must be >= 1");
    if (warmup > total_steps) throw UsageError("warmup must not exceed total_steps");
    if (buffer_capacity < batch) throw UsageError("buffer_capacity must be >= batch");
    if (!(kl_sigma > 0.0)) throw UsageError("kl_sigma must be > 0");
    if (!(per.alpha >= 0.0) || !(per.beta >= 0.0) || !(per.eps > 0.0)) {
      throw UsageError("per_alpha and per_beta must be >= 0, per_eps > 0");
    }
    if (env != "pendulum" && env != "reacher2d") {
      throw UsageError("unknown environment '" + env + "' (expected pendulum or reacher2d)");
    }
    try {
      agent.validate();
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
  }
};

namespace detail {

inline bool parse_bool(const std::string& s) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw UsageError("not a boolean: '" + s + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

// Every configurable key. Config files and CLI flags share these names
// (flags use '-' where keys use '_').
inline const std::map<std::string, Setter>& setters() {
  using text::parse_double;
  using text::parse_uint;
  static const std::map<std::string, Setter> table = {
      {"algo", [](RunConfig& c, const std::string& v) { c.algorithm = parse_algorithm(v); }},
      {"replay", [](RunConfig& c, const std::string& v) { c.replay = parse_replay(v); }},
      {"env", [](RunConfig& c, const std::string& v) { c.env = v; }},
      {"total_steps", [](RunConfig& c, const std::string& v) { c.total_steps = parse_uint(v); }},
      {"warmup", [](RunConfig& c, const std::string& v) { c.warmup = parse_uint(v); }},
      {"batch", [](RunConfig& c, const std::string& v) { c.batch = parse_uint(v); }},
      {"candidates", [](RunConfig& c, const std::string& v) { c.candidates = parse_uint(v); }},
      {"kl_sigma", [](RunConfig& c, const std::string& v) { c.kl_sigma = parse_double(v); }},
      {"per_alpha", [](RunConfig& c, const std::string& v) { c.per.alpha = parse_double(v); }},
      {"per_beta", [](RunConfig& c, const std::string& v) { c.per.beta = parse_double(v); }},
      {"per_eps", [](RunConfig& c, const std::string& v) { c.per.eps = parse_double(v); }},
      {"per_weights", [](RunConfig& c, const std::string& v) { c.per.importance_weights = parse_bool(v); }},
      {"hidden", [](RunConfig& c, const std::string& v) { c.agent.hidden = text::parse_size_list(v); }},
      {"gamma", [](RunConfig& c, const std::string& v) { c.agent.gamma = parse_double(v); }},
      {"tau", [](RunConfig& c, const std::string& v) { c.agent.tau = parse_double(v); }},
      {"lr", [](RunConfig& c, const std::string& v) { c.agent.actor_lr = c.agent.critic_lr = parse_double(v); }},
      {"actor_lr", [](RunConfig& c, const std::string& v) { c.agent.actor_lr = parse_double(v); }},
      {"critic_lr", [](RunConfig& c, const std::string& v) { c.agent.critic_lr = parse_double(v); }},
      {"exploration_std", [](RunConfig& c, const std::string& v) { c.agent.exploration_std = parse_double(v); }},
      {"policy_delay", [](RunConfig& c, const std::string& v) { c.agent.policy_delay = parse_uint(v); }},
      {"smoothing_std", [](RunConfig& c, const std::string& v) { c.agent.smoothing_std = parse_double(v); }},
      {"smoothing_clip", [](RunConfig& c, const std::string& v) { c.agent.smoothing_clip = parse_double(v); }},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_uint(v); }},
      {"eval_interval", [](RunConfig& c, const std::string& v) { c.eval_interval = parse_uint(v); }},
      {"eval_episodes", [](RunConfig& c, const std::string& v) { c.eval_episodes = parse_uint(v); }},
      {"buffer_capacity", [](RunConfig& c, const std::string& v) { c.buffer_capacity = parse_uint(v); }},
      {"out", [](RunConfig& c, const std::string& v) { c.out_dir = v; }},
      {"record_wallclock", [](RunConfig& c, const std::string& v) { c.record_wallclock = parse_bool(v); }},
      {"save_checkpoint", [](RunConfig& c, const std::string& v) { c.save_checkpoint = parse_bool(v); }},
      {"save_buffer", [](RunConfig& c, const std::string& v) { c.save_buffer = parse_bool(v); }},
  };
  return table;
}

} // namespace detail

inline std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : detail::setters()) keys.push_back(k);
  return keys;
}

/// Resolves a configuration from layered key=value sources: algorithm defaults,
/// then `file_values`, then `overrides` (later layers win). The algorithm is
/// looked up first so the right defaults are used.
inline RunConfig resolve_config(const std::map<std::string, std::string>& file_values,
                                const std::map<std::string, std::string>& overrides) {
  Algorithm algo = Algorithm::ddpg;
  if (auto it = file_values.find("algo"); it != file_values.end()) algo = parse_algorithm(it->second);
  if (auto it = overrides.find("algo"); it != overrides.end()) algo = parse_algorithm(it->second);
  RunConfig cfg = RunConfig::defaults_for(algo);
  const auto& table = detail::setters();
  for (const auto* layer : {&file_values, &overrides}) {
    // "lr" first so actor_lr / critic_lr in the same layer can refine it.
    if (auto it = layer->find("lr"); it != layer->end()) table.at("lr")(cfg, it->second);
    for (const auto& [key, value] : *layer) {
      if (key == "lr") continue;
      auto it = table.find(key);
      if (it == table.end()) throw UsageError("unknown configuration key '" + key + "'");
      try {
        it->second(cfg, value);
      } catch (const UsageError& e) {
        throw UsageError(key + ": " + e.what());
      }
    }
  }
  cfg.validate();
  return cfg;
}

/// Resolved configuration as key=value text; feeding it back through
/// resolve_config reproduces the same RunConfig.
inline std::string to_key_values(const RunConfig& c) {
  using text::format_double;
  std::ostringstream os;
  os << "algo=" << to_string(c.algorithm) << '\n'
     << "replay=" << to_string(c.replay) << '\n'
     << "env=" << c.env << '\n'
     << "total_steps=" << c.total_steps << '\n'
     << "warmup=" << c.warmup << '\n'
     << "batch=" << c.batch << '\n'
     << "candidates=" << c.candidates << '\n'
     << "kl_sigma=" << format_double(c.kl_sigma) << '\n'
     << "per_alpha=" << format_double(c.per.alpha) << '\n'
     << "per_beta=" << format_double(c.per.beta) << '\n'
     << "per_eps=" << format_double(c.per.eps) << '\n'
     << "per_weights=" << (c.per.importance_weights ? "true" : "false") << '\n'
     << "hidden=" << text::join_sizes(c.agent.hidden) << '\n'
     << "gamma=" << format_double(c.agent.gamma) << '\n'
     << "tau=" << format_double(c.agent.tau) << '\n'
     << "actor_lr=" << format_double(c.agent.actor_lr) << '\n'
     << "critic_lr=" << format_double(c.agent.critic_lr) << '\n'
     << "exploration_std=" << format_double(c.agent.exploration_std) << '\n'
     << "policy_delay=" << c.agent.policy_delay << '\n'
     << "smoothing_std=" << format_double(c.agent.smoothing_std) << '\n'
     << "smoothing_clip=" << format_double(c.agent.smoothing_clip) << '\n'
     << "seed=" << c.seed << '\n'
     << "eval_interval=" << c.eval_interval << '\n'
     << "eval_episodes=" << c.eval_episodes << '\n'
     << "buffer_capacity=" << c.buffer_capacity << '\n'
     << "out=" << c.out_dir << '\n'
     << "record_wallclock=" << (c.record_wallclock ? "true" : "false") << '\n'
     << "save_checkpoint=" << (c.save_checkpoint ? "true" : "false") << '\n'
     << "save_buffer=" << (c.save_buffer ? "true" : "false") << '\n';
  return os.str();
}

} // namespace klper
