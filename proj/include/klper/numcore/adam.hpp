#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "klper/error.hpp"
#include "klper/numcore/mlp.hpp"

namespace klper {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias-corrected moments. Accumulators mirror the shapes of the
/// network the optimizer was created for.
class Adam {
public:
  Adam() = default;

  Adam(const Mlp& net, AdamConfig cfg) : cfg_(cfg) {
    if (!(cfg_.lr > 0.0)) throw ConfigError("Adam: learning rate must be > 0");
    if (!(cfg_.beta1 >= 0.0 && cfg_.beta1 < 1.0) || !(cfg_.beta2 >= 0.0 && cfg_.beta2 < 1.0)) {
      throw ConfigError("Adam: betas must lie in [0, 1)");
    }
    if (!(cfg_.eps > 0.0)) throw ConfigError("Adam: eps must be > 0");
    for (const auto& l : net.layers()) {
      first_.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), RowVector::Zero(l.bias.size())});
    }
    second_ = first_;
  }

  void step(Mlp& net, const MlpGrad& grad) {
    auto& layers = net.layers();
    if (grad.layers.size() != layers.size() || first_.size() != layers.size()) {
      throw ShapeError("Adam::step: layer count mismatch");
    }
    for (std::size_t k = 0; k < layers.size(); ++k) {
      require_same_shape(grad.layers[k].weight, layers[k].weight, "Adam::step weight");
      require_same_shape(grad.layers[k].bias, layers[k].bias, "Adam::step bias");
      require_same_shape(first_[k].weight, layers[k].weight, "Adam::step state");
    }

    ++step_;
    const double t = static_cast<double>(step_);
    const double c1 = 1.0 - std::pow(cfg_.beta1, t);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t);
    for (std::size_t k = 0; k < layers.size(); ++k) {
      update(layers[k].weight.array(), grad.layers[k].weight.array(), first_[k].weight.array(),
             second_[k].weight.array(), c1, c2);
      update(layers[k].bias.array(), grad.layers[k].bias.array(), first_[k].bias.array(),
             second_[k].bias.array(), c1, c2);
    }
  }

  std::uint64_t step_count() const { return step_; }
  const AdamConfig& config() const { return cfg_; }
  const std::vector<Layer>& first_moment() const { return first_; }
  const std::vector<Layer>& second_moment() const { return second_; }

private:
  template <class P, class G, class M>
  void update(P&& p, const G& g, M&& m, M&& v, double c1, double c2) const {
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.square();
    p -= cfg_.lr * (m / c1) / ((v / c2).sqrt() + cfg_.eps);
  }

  AdamConfig cfg_;
  std::vector<Layer> first_;
  std::vector<Layer> second_;
  std::uint64_t step_ = 0;
};

} // namespace klper
