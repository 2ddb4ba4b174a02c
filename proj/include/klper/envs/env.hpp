#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "klper/error.hpp"
#include "klper/numcore/matrix.hpp"
#include "klper/random.hpp"

namespace klper {

struct EnvSpec {
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::vector<double> action_bound; // per dimension, > 0
  std::size_t max_episode_steps = 0;
};

struct StepResult {
  Vector next_state;
  double reward = 0.0;
  bool done = false;     // terminal or time limit reached
  bool terminal = false; // a true terminal state; false on time-limit truncation
  std::size_t episode_step = 0;
  bool action_clipped = false;
};

/// Episodic continuous-control task. Actions are in physical units, within
/// +-action_bound per dimension.
class Env {
public:
  virtual ~Env() = default;

  virtual std::string name() const = 0;
  virtual EnvSpec spec() const = 0;

  /// Number of U[0, 1) draws consumed by reset().
  virtual std::size_t reset_draws() const = 0;

  /// Initial state from explicit unit draws; `unit` must hold reset_draws() values.
  virtual Vector reset_with(std::span<const double> unit) = 0;

  virtual StepResult step(const Vector& action) = 0;

  virtual Vector observation() const = 0;

  template <class Gen>
  Vector reset(Gen& rng) {
    std::vector<double> u(reset_draws());
    for (auto& x : u) x = unit_uniform(rng);
    return reset_with(u);
  }

protected:
  // Clips to the action bounds; returns whether any component was clipped.
  bool clip_action(const Vector& in, Vector& out) const {
    const auto s = spec();
    if (static_cast<std::size_t>(in.size()) != s.action_dim) {
      throw ShapeError("action has " + std::to_string(in.size()) + " entries, expected " +
                       std::to_string(s.action_dim));
    }
    if (!in.allFinite()) throw DomainError("action contains a non-finite value");
    out = in;
    bool clipped = false;
    for (Eigen::Index j = 0; j < in.size(); ++j) {
      const double b = s.action_bound[static_cast<std::size_t>(j)];
      if (out[j] > b || out[j] < -b) {
        out[j] = std::clamp(out[j], -b, b);
        clipped = true;
      }
    }
    return clipped;
  }

  static void check_draws(std::span<const double> unit, std::size_t n) {
    if (unit.size() != n) {
      throw ShapeError("reset expects " + std::to_string(n) + " unit draws, got " +
                       std::to_string(unit.size()));
    }
  }
};

/// Angle wrapped into (-pi, pi].
inline double wrap_angle(double x) {
  constexpr double pi = std::numbers::pi;
  double r = x - 2.0 * pi * std::ceil((x - pi) / (2.0 * pi));
  if (r > pi) r -= 2.0 * pi;
  if (r <= -pi) r += 2.0 * pi;
  return r;
}

} // namespace klper
