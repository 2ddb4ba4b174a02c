#pragma once

#include <memory>
#include <string>
#include <vector>

#include "klper/envs/pendulum.hpp"
#include "klper/envs/reacher.hpp"

namespace klper {

inline std::vector<std::string> env_names() { return {"pendulum", "reacher2d"}; }

inline std::unique_ptr<Env> make_env(const std::string& name) {
  if (name == "pendulum") return std::make_unique<Pendulum>();
  if (name == "reacher2d") return std::make_unique<Reacher2d>();
  throw ConfigError("unknown environment '" + name + "' (expected pendulum or reacher2d)");
}

/// Normalized action in [-1, 1] to physical units.
inline Vector scale_action(const Vector& normalized, const EnvSpec& spec) {
  Vector a = normalized;
  for (Eigen::Index j = 0; j < a.size(); ++j) a[j] *= spec.action_bound[static_cast<std::size_t>(j)];
  return a;
}

} // namespace klper
