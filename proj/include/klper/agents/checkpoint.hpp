#pragma once

// Agent checkpoint directory:
//   manifest.txt        key=value: algorithm, dimensions, hyperparameters, update count
//   <network>.bin       one Mlp snapshot per network (see numcore/snapshot.hpp)

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "klper/agents/ddpg.hpp"
#include "klper/agents/td3.hpp"
#include "klper/numcore/snapshot.hpp"
#include "klper/text.hpp"

namespace klper {

inline void save_checkpoint(const Agent& agent, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw FileError(dir.string(), "cannot create directory: " + ec.message());

  const auto manifest = (dir / "manifest.txt").string();
  std::ofstream os(manifest);
  if (!os) throw FileError(manifest, "cannot open for writing");
  const auto& c = agent.config();
  using text::format_double;
  os << "algorithm=" << agent.algorithm() << '\n'
     << "state_dim=" << agent.state_dim() << '\n'
     << "action_dim=" << agent.action_dim() << '\n'
     << "hidden=" << text::join_sizes(c.hidden) << '\n'
     << "gamma=" << format_double(c.gamma) << '\n'
     << "tau=" << format_double(c.tau) << '\n'
     << "actor_lr=" << format_double(c.actor_lr) << '\n'
     << "critic_lr=" << format_double(c.critic_lr) << '\n'
     << "exploration_std=" << format_double(c.exploration_std) << '\n'
     << "policy_delay=" << c.policy_delay << '\n'
     << "smoothing_std=" << format_double(c.smoothing_std) << '\n'
     << "smoothing_clip=" << format_double(c.smoothing_clip) << '\n'
     << "updates=" << agent.updates() << '\n';
  if (!os) throw FileError(manifest, "write failed");

  for (const auto& [name, net] : agent.networks()) save_mlp((dir / (name + ".bin")).string(), *net);
}

inline std::unique_ptr<Agent> load_checkpoint(const std::filesystem::path& dir) {
  const auto manifest = (dir / "manifest.txt").string();
  const auto kv = text::read_key_values(manifest);
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw FileError(manifest, "missing key '" + key + "'");
    return it->second;
  };

  AgentConfig c;
  c.hidden = text::parse_size_list(get("hidden"));
  c.gamma = text::parse_double(get("gamma"));
  c.tau = text::parse_double(get("tau"));
  c.actor_lr = text::parse_double(get("actor_lr"));
  c.critic_lr = text::parse_double(get("critic_lr"));
  c.exploration_std = text::parse_double(get("exploration_std"));
  c.policy_delay = text::parse_uint(get("policy_delay"));
  c.smoothing_std = text::parse_double(get("smoothing_std"));
  c.smoothing_clip = text::parse_double(get("smoothing_clip"));
  const auto m = text::parse_uint(get("state_dim"));
  const auto l = text::parse_uint(get("action_dim"));

  Rng unused(0);
  std::unique_ptr<Agent> agent;
  const auto& algo = get("algorithm");
  if (algo == "ddpg") {
    agent = std::make_unique<DdpgAgent>(m, l, c, unused);
  } else if (algo == "td3") {
    agent = std::make_unique<Td3Agent>(m, l, c, unused);
  } else {
    throw FileError(manifest, "unknown algorithm '" + algo + "'");
  }
  for (auto& [name, net] : agent->mutable_networks()) {
    Mlp loaded = load_mlp((dir / (name + ".bin")).string());
    if (!loaded.same_architecture(*net)) {
      throw FileError((dir / (name + ".bin")).string(), "architecture does not match manifest");
    }
    *net = std::move(loaded);
  }
  if (auto* d = dynamic_cast<DdpgAgent*>(agent.get())) d->make_optimizers();
  if (auto* t = dynamic_cast<Td3Agent*>(agent.get())) t->make_optimizers();
  agent->set_updates(text::parse_uint(get("updates")));
  return agent;
}

} // namespace klper
