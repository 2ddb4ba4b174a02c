#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "klper/agents/checkpoint.hpp"
#include "klper/envs/registry.hpp"
#include "klper/harness/config.hpp"
#include "klper/harness/trainer.hpp"
#include "klper/text.hpp"

namespace klper {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDivergence = 3;

struct Command {
  enum class Kind { train, eval, compare, help };
  Kind kind = Kind::help;
  RunConfig config;
  std::vector<std::uint64_t> seeds; // compare
  std::size_t jobs = 1;             // compare
  std::string checkpoint;           // eval
  std::string env;                  // eval
  std::size_t episodes = 5;         // eval
  std::uint64_t seed = 0;           // eval
  std::string help_text;
};

/// "3" -> {3}; "0..4" -> {0, 1, 2, 3, 4}; "1,5,9" -> {1, 5, 9}.
inline std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> seeds;
  if (const auto dots = s.find(".."); dots != std::string::npos) {
    const auto lo = text::parse_uint(std::string_view(s).substr(0, dots));
    const auto hi = text::parse_uint(std::string_view(s).substr(dots + 2));
    if (hi < lo) throw UsageError("empty seed range '" + s + "'");
    for (auto v = lo; v <= hi; ++v) seeds.push_back(v);
  } else {
    for (const auto& part : text::split(s, ',')) seeds.push_back(text::parse_uint(part));
  }
  return seeds;
}

namespace detail {

inline std::string flag_for(const std::string& key) {
  std::string f = "--" + key;
  for (auto& ch : f) {
    if (ch == '_') ch = '-';
  }
  return f;
}

inline const char* key_help(const std::string& key) {
  static const std::map<std::string, const char*> help = {
      {"algo", "ddpg | td3"},
      {"replay", "vanilla | per | klper"},
      {"env", "pendulum | reacher2d"},
      {"total_steps", "environment steps"},
      {"warmup", "random-action steps before the first update"},
      {"batch", "mini-batch size b (>= 2)"},
      {"candidates", "KLPER candidate batches N"},
      {"kl_sigma", "variance of the N(0, sigma I) KL target"},
      {"per_alpha", "PER priority exponent"},
      {"per_beta", "PER importance-weight exponent"},
      {"per_eps", "PER priority floor"},
      {"per_weights", "apply PER importance weights (true/false)"},
      {"hidden", "hidden layer sizes, e.g. 400,300"},
      {"gamma", "discount factor"},
      {"tau", "soft target update rate"},
      {"lr", "actor and critic learning rate"},
      {"actor_lr", "actor learning rate"},
      {"critic_lr", "critic learning rate"},
      {"exploration_std", "Gaussian exploration noise std (normalized actions)"},
      {"policy_delay", "TD3 policy delay M"},
      {"smoothing_std", "TD3 target smoothing noise std"},
      {"smoothing_clip", "TD3 target smoothing noise clip"},
      {"seed", "master seed"},
      {"eval_interval", "steps between evaluations"},
      {"eval_episodes", "episodes per evaluation"},
      {"buffer_capacity", "replay buffer capacity"},
      {"out", "output directory"},
      {"record_wallclock", "fill the wallclock_s column (breaks byte-identical reruns)"},
      {"save_checkpoint", "write a checkpoint at the end of the run"},
      {"save_buffer", "write the replay buffer snapshot at the end of the run"},
  };
  auto it = help.find(key);
  return it == help.end() ? "" : it->second;
}

struct KeyOptions {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string config_file;
  CLI::Option* config_option = nullptr;

  void attach(CLI::App* app, const std::vector<std::string>& skip = {}) {
    config_option = app->add_option("--config", config_file, "key=value configuration file");
    for (const auto& key : config_keys()) {
      if (std::find(skip.begin(), skip.end(), key) != skip.end()) continue;
      options[key] = app->add_option(flag_for(key), values[key], key_help(key));
    }
  }

  RunConfig resolve() const {
    std::map<std::string, std::string> file_values;
    if (config_option->count() > 0) file_values = text::read_key_values(config_file);
    std::map<std::string, std::string> overrides;
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) overrides[key] = values.at(key);
    }
    return resolve_config(file_values, overrides);
  }
};

} // namespace detail

/// Parses argv into a command. Throws UsageError on invalid input.
inline Command cli_parse(int argc, const char* const* argv) {
  CLI::App app{"Deterministic policy-gradient agents with uniform, prioritized and "
               "KL-scored batch replay",
               "klper"};
  app.require_subcommand(1, 1);

  detail::KeyOptions train_opts, compare_opts;
  auto* train = app.add_subcommand("train", "train one agent and write metrics");
  train_opts.attach(train);

  auto* compare =
      app.add_subcommand("compare", "run the {vanilla, per, klper} x seeds matrix");
  compare_opts.attach(compare, {"replay", "seed"});
  std::string seeds = "0..4";
  std::size_t jobs = 1;
  compare->add_option("--seeds", seeds, "seed list (e.g. 0..4 or 0,3,7)");
  compare->add_option("--jobs", jobs, "cells run in parallel, one process each");

  Command cmd;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint with the deterministic policy");
  eval->add_option("--checkpoint", cmd.checkpoint, "checkpoint directory")->required();
  eval->add_option("--env", cmd.env, "pendulum | reacher2d")->required();
  eval->add_option("--episodes", cmd.episodes, "evaluation episodes");
  eval->add_option("--seed", cmd.seed, "seed of the evaluation stream");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    cmd.kind = Command::Kind::help;
    cmd.help_text = app.help();
    return cmd;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (train->parsed()) {
    cmd.kind = Command::Kind::train;
    cmd.config = train_opts.resolve();
  } else if (compare->parsed()) {
    cmd.kind = Command::Kind::compare;
    cmd.config = compare_opts.resolve();
    cmd.seeds = parse_seeds(seeds);
    if (jobs < 1) throw UsageError("--jobs must be >= 1");
    cmd.jobs = jobs;
  } else {
    cmd.kind = Command::Kind::eval;
    if (cmd.episodes < 1) throw UsageError("--episodes must be >= 1");
    try {
      make_env(cmd.env);
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
  }
  return cmd;
}

/// One cell of the compare matrix.
struct CompareCell {
  ReplayKind replay;
  std::uint64_t seed;
  RunConfig config;
};

inline std::vector<CompareCell> compare_cells(const RunConfig& base,
                                              const std::vector<std::uint64_t>& seeds) {
  std::vector<CompareCell> cells;
  for (ReplayKind r : {ReplayKind::vanilla, ReplayKind::per, ReplayKind::klper}) {
    for (auto s : seeds) {
      RunConfig c = base;
      c.replay = r;
      c.seed = s;
      c.out_dir = (std::filesystem::path(base.out_dir) / to_string(r) / ("seed" + std::to_string(s)))
                      .string();
      cells.push_back({r, s, std::move(c)});
    }
  }
  return cells;
}

namespace detail {

inline int run_cell(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const TrainResult r = train(cfg);
  if (r.diverged) {
    err << "klper: run diverged: " << r.error << " (partial metrics in " << r.metrics_path.string()
        << ")\n";
    return kExitDivergence;
  }
  out << r.metrics_path.string() << " final_eval_return_mean="
      << text::format_double(r.rows.back().eval_return_mean) << '\n';
  return kExitOk;
}

inline int run_compare(const Command& cmd, std::ostream& out, std::ostream& err) {
  const auto cells = compare_cells(cmd.config, cmd.seeds);
  int worst = kExitOk;
  auto merge = [&](int code) {
    if (code == kExitDivergence || worst == kExitOk) worst = std::max(worst, code);
  };
  if (cmd.jobs <= 1) {
    for (const auto& cell : cells) merge(run_cell(cell.config, out, err));
    return worst;
  }
  std::size_t next = 0, running = 0;
  while (next < cells.size() || running > 0) {
    while (running < cmd.jobs && next < cells.size()) {
      out.flush();
      err.flush();
      const pid_t pid = fork();
      if (pid < 0) throw Error("fork failed");
      if (pid == 0) {
        int code = kExitFailure;
        try {
          code = run_cell(cells[next].config, std::cout, std::cerr);
        } catch (const std::exception& e) {
          std::cerr << "klper: " << e.what() << '\n';
        }
        std::cout.flush();
        std::cerr.flush();
        _exit(code);
      }
      ++next;
      ++running;
    }
    int status = 0;
    if (wait(&status) > 0) {
      --running;
      merge(WIFEXITED(status) ? WEXITSTATUS(status) : kExitFailure);
    }
  }
  return worst;
}

} // namespace detail

/// Entry point shared by the CLI binary and the integration tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    const Command cmd = cli_parse(argc, argv);
    switch (cmd.kind) {
    case Command::Kind::help:
      out << cmd.help_text;
      return kExitOk;
    case Command::Kind::train:
      return detail::run_cell(cmd.config, out, err);
    case Command::Kind::compare:
      return detail::run_compare(cmd, out, err);
    case Command::Kind::eval: {
      const auto agent = load_checkpoint(cmd.checkpoint);
      auto env = make_env(cmd.env);
      if (env->spec().state_dim != agent->state_dim() ||
          env->spec().action_dim != agent->action_dim()) {
        throw UsageError("checkpoint dimensions do not match environment '" + cmd.env + "'");
      }
      Rng rng = make_stream(cmd.seed, Stream::eval);
      const EvalResult ev = evaluate(*agent, *env, cmd.episodes, rng);
      nlohmann::json j = {{"algorithm", agent->algorithm()},
                          {"env", cmd.env},
                          {"episodes", cmd.episodes},
                          {"return_mean", ev.mean},
                          {"return_std", ev.std},
                          {"returns", ev.returns}};
      out << j.dump(2) << '\n';
      return kExitOk;
    }
    }
  } catch (const UsageError& e) {
    err << "klper: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DivergenceError& e) {
    err << "klper: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    err << "klper: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

} // namespace klper
