#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "klper/error.hpp"
#include "klper/numcore/matrix.hpp"
#include "klper/random.hpp"

namespace klper {

enum class Activation : std::uint8_t { identity = 0, relu = 1, tanh = 2 };

inline const char* to_string(Activation a) {
  switch (a) {
  case Activation::identity: return "identity";
  case Activation::relu: return "relu";
  case Activation::tanh: return "tanh";
  }
  return "?";
}

// One affine map y = x * weight + bias, weight is fan_in x fan_out.
struct Layer {
  Matrix weight;
  RowVector bias;
};

// Activations recorded by a forward pass; acts[0] is the input, acts[k + 1]
// the post-activation output of layer k.
struct Tape {
  std::vector<Matrix> acts;

  bool empty() const { return acts.empty(); }
  void clear() { acts.clear(); }
};

struct MlpGrad {
  std::vector<Layer> layers; // empty when only the input gradient was requested
  Matrix input;
};

/// Fully-connected network: `hidden` activation between layers, `output`
/// activation on the last layer.
class Mlp {
public:
  Mlp() = default;

  /// Zero-initialized network with the given layer sizes (input first).
  Mlp(std::vector<std::size_t> sizes, Activation hidden, Activation output)
      : sizes_(std::move(sizes)), hidden_(hidden), output_(output) {
    if (sizes_.size() < 2) {
      throw ShapeError("Mlp needs at least an input and an output size");
    }
    for (auto s : sizes_) {
      if (s == 0) throw ShapeError("Mlp layer sizes must be positive");
    }
    layers_.reserve(sizes_.size() - 1);
    for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) {
      const auto in = static_cast<Eigen::Index>(sizes_[k]);
      const auto out = static_cast<Eigen::Index>(sizes_[k + 1]);
      layers_.push_back({Matrix::Zero(in, out), RowVector::Zero(out)});
    }
  }

  /// Hidden layers uniform in +-1/sqrt(fan_in), final layer uniform in +-3e-3.
  static Mlp fan_in_init(std::vector<std::size_t> sizes, Activation hidden, Activation output,
                         Rng& rng) {
    Mlp net(std::move(sizes), hidden, output);
    net.init_fan_in(rng);
    return net;
  }

  void init_fan_in(Rng& rng) {
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      const bool last = k + 1 == layers_.size();
      const double bound =
          last ? 3e-3 : 1.0 / std::sqrt(static_cast<double>(layers_[k].weight.rows()));
      for (Eigen::Index i = 0; i < layers_[k].weight.size(); ++i) {
        layers_[k].weight.data()[i] = uniform(rng, -bound, bound);
      }
      for (Eigen::Index i = 0; i < layers_[k].bias.size(); ++i) {
        layers_[k].bias[i] = uniform(rng, -bound, bound);
      }
    }
  }

  Matrix forward(const Matrix& input) const {
    check_input(input);
    Matrix x = input;
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      Matrix z = x * layers_[k].weight;
      z.rowwise() += layers_[k].bias;
      apply(activation_of(k), z);
      x = std::move(z);
    }
    return x;
  }

  /// Forward pass that records activations for a later backward().
  Matrix forward(const Matrix& input, Tape& tape) const {
    check_input(input);
    tape.acts.resize(layers_.size() + 1);
    tape.acts[0] = input;
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      Matrix& z = tape.acts[k + 1];
      z.noalias() = tape.acts[k] * layers_[k].weight;
      z.rowwise() += layers_[k].bias;
      apply(activation_of(k), z);
    }
    return tape.acts.back();
  }

  /// Reverse-mode gradients of sum(upstream .* output) w.r.t. every parameter
  /// and the input. With `param_grads == false` only the input gradient is
  /// produced.
  MlpGrad backward(const Tape& tape, const Matrix& upstream, bool param_grads = true) const {
    bool matches = !tape.empty() && tape.acts.size() == layers_.size() + 1 &&
                   tape.acts[0].cols() == layers_.front().weight.rows();
    for (std::size_t k = 0; matches && k < layers_.size(); ++k) {
      matches = tape.acts[k + 1].cols() == layers_[k].weight.cols();
    }
    if (!matches) throw StateError("Mlp::backward called without a matching forward pass");
    const Matrix& out = tape.acts.back();
    require_same_shape(upstream, out, "Mlp::backward upstream gradient");

    MlpGrad grad;
    if (param_grads) grad.layers.resize(layers_.size());

    Matrix g = upstream;
    scale_by_derivative(output_, tape.acts.back(), g);
    for (std::size_t k = layers_.size(); k-- > 0;) {
      if (param_grads) {
        grad.layers[k].weight.noalias() = tape.acts[k].transpose() * g;
        grad.layers[k].bias = g.colwise().sum();
      }
      Matrix prev = g * layers_[k].weight.transpose();
      if (k > 0) {
        scale_by_derivative(hidden_, tape.acts[k], prev);
        g = std::move(prev);
      } else {
        grad.input = std::move(prev);
      }
    }
    return grad;
  }

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
  }

  /// Parameters flattened layer by layer, weight (row-major) then bias.
  Vector flat_parameters() const {
    Vector v(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index o = 0;
    for (const auto& l : layers_) {
      for (Eigen::Index i = 0; i < l.weight.size(); ++i) v[o++] = l.weight.data()[i];
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) v[o++] = l.bias[i];
    }
    return v;
  }

  void set_flat_parameters(const Vector& v) {
    if (static_cast<std::size_t>(v.size()) != parameter_count()) {
      throw ShapeError("set_flat_parameters: expected " + std::to_string(parameter_count()) +
                       " values, got " + std::to_string(v.size()));
    }
    Eigen::Index o = 0;
    for (auto& l : layers_) {
      for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = v[o++];
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = v[o++];
    }
  }

  bool parameters_finite() const {
    for (const auto& l : layers_) {
      if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    }
    return true;
  }

  bool same_architecture(const Mlp& other) const {
    return sizes_ == other.sizes_ && hidden_ == other.hidden_ && output_ == other.output_;
  }

  friend bool operator==(const Mlp& a, const Mlp& b) {
    if (!a.same_architecture(b)) return false;
    for (std::size_t k = 0; k < a.layers_.size(); ++k) {
      if (a.layers_[k].weight != b.layers_[k].weight || a.layers_[k].bias != b.layers_[k].bias) {
        return false;
      }
    }
    return true;
  }

private:
  Activation activation_of(std::size_t k) const {
    return k + 1 == layers_.size() ? output_ : hidden_;
  }

  void check_input(const Matrix& input) const {
    if (layers_.empty()) throw StateError("Mlp has no layers");
    if (static_cast<std::size_t>(input.cols()) != input_size()) {
      throw ShapeError("Mlp input has " + std::to_string(input.cols()) + " columns, expected " +
                       std::to_string(input_size()));
    }
  }

  static void apply(Activation a, Matrix& z) {
    switch (a) {
    case Activation::identity: break;
    case Activation::relu: z = z.cwiseMax(0.0); break;
    case Activation::tanh: z = z.array().tanh().matrix(); break;
    }
  }

  // g <- g .* f'(.) where y is the post-activation value.
  static void scale_by_derivative(Activation a, const Matrix& y, Matrix& g) {
    switch (a) {
    case Activation::identity: break;
    case Activation::relu: g = (y.array() > 0.0).select(g, 0.0); break;
    case Activation::tanh: g.array() *= 1.0 - y.array().square(); break;
    }
  }

  std::vector<std::size_t> sizes_;
  Activation hidden_ = Activation::relu;
  Activation output_ = Activation::identity;
  std::vector<Layer> layers_;
};

/// target <- tau * online + (1 - tau) * target, entrywise.
inline void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw ConfigError("soft_update: tau must lie in [0, 1], got " + std::to_string(tau));
  }
  if (!target.same_architecture(online)) {
    throw ShapeError("soft_update: target and online networks differ in architecture");
  }
  auto& t = target.layers();
  const auto& o = online.layers();
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (tau == 1.0) {
      t[k] = o[k];
      continue;
    }
    t[k].weight = tau * o[k].weight + (1.0 - tau) * t[k].weight;
    t[k].bias = tau * o[k].bias + (1.0 - tau) * t[k].bias;
  }
}

} // namespace klper
