#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "klper/error.hpp"

namespace klper {

// Complete binary tree over `capacity` leaves (padded to a power of two).
// nodes_[1] is the root; leaf i lives at nodes_[leaf_base_ + i]. Each internal
// node is recomputed as left + right on every update, never adjusted by deltas,
// so nodes stay exactly consistent with their children.
class SumTree {
public:
  explicit SumTree(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("SumTree capacity must be >= 1");
    leaf_base_ = 1;
    while (leaf_base_ < capacity) leaf_base_ <<= 1;
    nodes_.assign(2 * leaf_base_, 0.0);
  }

  void set(std::size_t leaf, double priority) {
    check_leaf(leaf);
    if (!(priority >= 0.0) || !std::isfinite(priority)) {
      throw DomainError("SumTree priority must be finite and non-negative");
    }
    std::size_t node = leaf_base_ + leaf;
    nodes_[node] = priority;
    for (node >>= 1; node >= 1; node >>= 1) {
      nodes_[node] = nodes_[2 * node] + nodes_[2 * node + 1];
    }
  }

  double get(std::size_t leaf) const {
    check_leaf(leaf);
    return nodes_[leaf_base_ + leaf];
  }

  double total() const { return nodes_[1]; }

  /// Leaf whose prefix-sum interval contains `value`. Values at or beyond the
  /// total resolve to the last leaf with positive priority.
  std::size_t find_prefix(double value) const {
    if (!(total() > 0.0)) throw EmptyPriorityError("SumTree has zero total priority");
    std::size_t node = 1;
    while (node < leaf_base_) {
      const double left = nodes_[2 * node];
      const double right = nodes_[2 * node + 1];
      if ((value < left && left > 0.0) || right <= 0.0) {
        node = 2 * node;
      } else {
        value -= left;
        node = 2 * node + 1;
      }
    }
    return node - leaf_base_;
  }

  /// Recomputes every internal node bottom-up from the leaves.
  void rebuild() {
    for (std::size_t node = leaf_base_; node-- > 1;) {
      nodes_[node] = nodes_[2 * node] + nodes_[2 * node + 1];
    }
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t leaf_base() const { return leaf_base_; }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> leaves() const {
    return std::span<const double>(nodes_).subspan(leaf_base_, capacity_);
  }

private:
  void check_leaf(std::size_t leaf) const {
    if (leaf >= capacity_) {
      throw DomainError("SumTree leaf " + std::to_string(leaf) + " out of range");
    }
  }

  std::size_t capacity_;
  std::size_t leaf_base_ = 1;
  std::vector<double> nodes_;
};

} // namespace klper
