#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "klper/envs/env.hpp"

namespace klper {

// Pendulum swing-up. theta = 0 is upright.
//
//   theta_ddot = 3g/(2L) sin(theta) + 3/(m L^2) u
//   theta_dot' = clip(theta_dot + theta_ddot * dt, -8, 8)
//   theta'     = wrap(theta + theta_dot' * dt)
//   reward     = -(wrap(theta)^2 + 0.1 theta_dot^2 + 0.001 u^2)   (pre-step state)
//
// g = 10, m = L = 1, dt = 0.05, |u| <= 2, 200 steps, never terminal.
// Initial state: theta = wrap(U[0, 2pi)), theta_dot = U[-1, 1).
// Observation: (cos theta, sin theta, theta_dot).
class Pendulum : public Env {
public:
  static constexpr double kGravity = 10.0;
  static constexpr double kMass = 1.0;
  static constexpr double kLength = 1.0;
  static constexpr double kDt = 0.05;
  static constexpr double kMaxTorque = 2.0;
  static constexpr double kMaxSpeed = 8.0;
  static constexpr std::size_t kHorizon = 200;

  struct State {
    double theta = 0.0;
    double theta_dot = 0.0;
  };

  std::string name() const override { return "pendulum"; }

  EnvSpec spec() const override { return {3, 1, {kMaxTorque}, kHorizon}; }

  std::size_t reset_draws() const override { return 2; }

  Vector reset_with(std::span<const double> unit) override {
    check_draws(unit, 2);
    state_.theta = wrap_angle(2.0 * std::numbers::pi * unit[0]);
    state_.theta_dot = -1.0 + 2.0 * unit[1];
    step_ = 0;
    return observation();
  }

  /// One integration step of the documented dynamics; pure.
  static State advance(const State& s, double u) {
    const double acc = 3.0 * kGravity / (2.0 * kLength) * std::sin(s.theta) +
                       3.0 / (kMass * kLength * kLength) * u;
    State n;
    n.theta_dot = std::clamp(s.theta_dot + acc * kDt, -kMaxSpeed, kMaxSpeed);
    n.theta = wrap_angle(s.theta + n.theta_dot * kDt);
    return n;
  }

  static double reward(const State& s, double u) {
    const double th = wrap_angle(s.theta);
    return -(th * th + 0.1 * s.theta_dot * s.theta_dot + 0.001 * u * u);
  }

  static Vector observe(const State& s) {
    Vector o(3);
    o << std::cos(s.theta), std::sin(s.theta), s.theta_dot;
    return o;
  }

  StepResult step(const Vector& action) override {
    if (step_ >= kHorizon) throw StateError("pendulum episode finished; call reset()");
    Vector u;
    StepResult r;
    r.action_clipped = clip_action(action, u);
    r.reward = reward(state_, u[0]);
    state_ = advance(state_, u[0]);
    ++step_;
    r.next_state = observation();
    r.episode_step = step_;
    r.terminal = false;
    r.done = step_ >= kHorizon;
    return r;
  }

  Vector observation() const override { return observe(state_); }

  const State& state() const { return state_; }
  void set_state(State s, std::size_t episode_step = 0) {
    state_ = s;
    step_ = episode_step;
  }

private:
  State state_;
  std::size_t step_ = 0;
};

} // namespace klper
