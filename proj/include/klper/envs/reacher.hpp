#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "klper/envs/env.hpp"

namespace klper {

// Planar point-mass reacher (double integrator, unit mass).
//
//   vel' = clip(vel + force * dt, -2, 2)        per axis
//   pos' = clip(pos + vel' * dt, -2, 2)          walls; velocity zeroed on contact
//   reward = -|pos' - target|
//
// dt = 0.05, |force| <= 1 per axis. Terminal when |pos' - target| < 0.05;
// time limit 150 steps.
// Initial state: pos = U[-0.5, 0.5)^2, vel = 0, target at radius U[0.3, 0.9)
// and angle U[-pi, pi). The distribution midpoint is pos = (0, 0),
// target = (0.6, 0).
// Observation: (px, py, vx, vy, tx, ty).
class Reacher2d : public Env {
public:
  static constexpr double kDt = 0.05;
  static constexpr double kMaxForce = 1.0;
  static constexpr double kMaxSpeed = 2.0;
  static constexpr double kArena = 2.0;
  static constexpr double kGoalRadius = 0.05;
  static constexpr std::size_t kHorizon = 150;

  struct State {
    double px = 0.0, py = 0.0;
    double vx = 0.0, vy = 0.0;
    double tx = 0.6, ty = 0.0;
  };

  /// Largest possible distance between a point in the arena and a target.
  static double max_distance() {
    return std::sqrt(2.0) * kArena + 0.9;
  }

  std::string name() const override { return "reacher2d"; }

  EnvSpec spec() const override { return {6, 2, {kMaxForce, kMaxForce}, kHorizon}; }

  std::size_t reset_draws() const override { return 4; }

  Vector reset_with(std::span<const double> unit) override {
    check_draws(unit, 4);
    state_ = State{};
    state_.px = -0.5 + unit[0];
    state_.py = -0.5 + unit[1];
    const double radius = 0.3 + 0.6 * unit[2];
    const double angle = -std::numbers::pi + 2.0 * std::numbers::pi * unit[3];
    state_.tx = radius * std::cos(angle);
    state_.ty = radius * std::sin(angle);
    step_ = 0;
    finished_ = false;
    return observation();
  }

  static State advance(const State& s, double fx, double fy) {
    State n = s;
    n.vx = std::clamp(s.vx + fx * kDt, -kMaxSpeed, kMaxSpeed);
    n.vy = std::clamp(s.vy + fy * kDt, -kMaxSpeed, kMaxSpeed);
    n.px = s.px + n.vx * kDt;
    n.py = s.py + n.vy * kDt;
    if (n.px > kArena || n.px < -kArena) {
      n.px = std::clamp(n.px, -kArena, kArena);
      n.vx = 0.0;
    }
    if (n.py > kArena || n.py < -kArena) {
      n.py = std::clamp(n.py, -kArena, kArena);
      n.vy = 0.0;
    }
    return n;
  }

  static double distance(const State& s) { return std::hypot(s.px - s.tx, s.py - s.ty); }

  StepResult step(const Vector& action) override {
    if (finished_) throw StateError("reacher episode finished; call reset()");
    Vector f;
    StepResult r;
    r.action_clipped = clip_action(action, f);
    state_ = advance(state_, f[0], f[1]);
    ++step_;
    const double d = distance(state_);
    r.reward = -d;
    r.next_state = observation();
    r.episode_step = step_;
    r.terminal = d < kGoalRadius;
    r.done = r.terminal || step_ >= kHorizon;
    finished_ = r.done;
    return r;
  }

  Vector observation() const override {
    Vector o(6);
    o << state_.px, state_.py, state_.vx, state_.vy, state_.tx, state_.ty;
    return o;
  }

  const State& state() const { return state_; }
  void set_state(State s, std::size_t episode_step = 0) {
    state_ = s;
    step_ = episode_step;
    finished_ = false;
  }

private:
  State state_;
  std::size_t step_ = 0;
  bool finished_ = false;
};

} // namespace klper
