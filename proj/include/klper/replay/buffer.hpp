#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "klper/error.hpp"
#include "klper/numcore/matrix.hpp"
#include "klper/numcore/snapshot.hpp"
#include "klper/random.hpp"

namespace klper {

/// One experience tuple. `done` marks a true terminal state: the bootstrap term
/// is dropped for it. Time-limit truncation is not terminal.
struct Transition {
  Vector s;
  Vector a;
  double r = 0.0;
  Vector s_next;
  bool done = false;
};

/// A batch materialized from the replay buffer, one transition per row.
struct CandidateBatch {
  std::vector<std::size_t> indices;
  Matrix states;
  Matrix actions;
  Vector rewards;
  Matrix next_states;
  Vector dones;   // 1.0 for terminal transitions
  Vector weights; // importance weights; all ones unless drawn by PER
  std::optional<double> kappa;

  std::size_t size() const { return indices.size(); }
};

/// Fixed-capacity ring of transitions, stored column-per-field. Slot indices are
/// stable until the slot is overwritten.
class ReplayBuffer {
public:
  ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_dim)
      : capacity_(capacity), m_(state_dim), l_(action_dim) {
    if (capacity == 0) throw ConfigError("replay capacity must be >= 1");
    if (state_dim == 0 || action_dim == 0) throw ConfigError("replay dimensions must be >= 1");
  }

  /// Stores `t` and returns the slot it was written to.
  std::size_t push(const Transition& t) {
    if (static_cast<std::size_t>(t.s.size()) != m_ ||
        static_cast<std::size_t>(t.s_next.size()) != m_ ||
        static_cast<std::size_t>(t.a.size()) != l_) {
      throw ShapeError("transition dimensions (" + std::to_string(t.s.size()) + ", " +
                       std::to_string(t.a.size()) + ") do not match buffer (" +
                       std::to_string(m_) + ", " + std::to_string(l_) + ")");
    }
    if (!t.s.allFinite() || !t.a.allFinite() || !t.s_next.allFinite() || !std::isfinite(t.r)) {
      throw DomainError("transition contains a non-finite value");
    }
    const std::size_t slot = cursor_;
    if (size_ < capacity_) {
      states_.insert(states_.end(), t.s.data(), t.s.data() + m_);
      actions_.insert(actions_.end(), t.a.data(), t.a.data() + l_);
      rewards_.push_back(t.r);
      next_states_.insert(next_states_.end(), t.s_next.data(), t.s_next.data() + m_);
      dones_.push_back(t.done ? 1.0 : 0.0);
      ++size_;
    } else {
      std::copy_n(t.s.data(), m_, states_.begin() + static_cast<std::ptrdiff_t>(slot * m_));
      std::copy_n(t.a.data(), l_, actions_.begin() + static_cast<std::ptrdiff_t>(slot * l_));
      rewards_[slot] = t.r;
      std::copy_n(t.s_next.data(), m_,
                  next_states_.begin() + static_cast<std::ptrdiff_t>(slot * m_));
      dones_[slot] = t.done ? 1.0 : 0.0;
    }
    cursor_ = (cursor_ + 1) % capacity_;
    return slot;
  }

  Transition at(std::size_t slot) const {
    check_slot(slot);
    Transition t;
    t.s = Eigen::Map<const Vector>(states_.data() + slot * m_, static_cast<Eigen::Index>(m_));
    t.a = Eigen::Map<const Vector>(actions_.data() + slot * l_, static_cast<Eigen::Index>(l_));
    t.r = rewards_[slot];
    t.s_next =
        Eigen::Map<const Vector>(next_states_.data() + slot * m_, static_cast<Eigen::Index>(m_));
    t.done = dones_[slot] != 0.0;
    return t;
  }

  /// Slot of the i-th oldest stored transition (0 = oldest).
  std::size_t slot_by_age(std::size_t i) const {
    if (i >= size_) throw DomainError("slot_by_age: index beyond buffer size");
    const std::size_t oldest = size_ < capacity_ ? 0 : cursor_;
    return (oldest + i) % capacity_;
  }

  CandidateBatch gather(std::span<const std::size_t> indices) const {
    const auto b = static_cast<Eigen::Index>(indices.size());
    const auto m = static_cast<Eigen::Index>(m_);
    const auto l = static_cast<Eigen::Index>(l_);
    CandidateBatch batch;
    batch.indices.assign(indices.begin(), indices.end());
    batch.states.resize(b, m);
    batch.actions.resize(b, l);
    batch.rewards.resize(b);
    batch.next_states.resize(b, m);
    batch.dones.resize(b);
    batch.weights = Vector::Ones(b);
    for (Eigen::Index i = 0; i < b; ++i) {
      const std::size_t slot = indices[static_cast<std::size_t>(i)];
      check_slot(slot);
      std::memcpy(batch.states.row(i).data(), states_.data() + slot * m_, m_ * sizeof(double));
      std::memcpy(batch.actions.row(i).data(), actions_.data() + slot * l_, l_ * sizeof(double));
      batch.rewards[i] = rewards_[slot];
      std::memcpy(batch.next_states.row(i).data(), next_states_.data() + slot * m_,
                  m_ * sizeof(double));
      batch.dones[i] = dones_[slot];
    }
    return batch;
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t cursor() const { return cursor_; }
  std::size_t state_dim() const { return m_; }
  std::size_t action_dim() const { return l_; }

  // Snapshot layout: magic "KLPRRB01", u64 m, l, capacity, size, cursor, then
  // `size` records in slot order, each s[m] a[l] r s_next[m] done as f64.
  void save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FileError(path, "cannot open for writing");
    os.write(kMagic, sizeof kMagic);
    for (std::uint64_t v : {std::uint64_t{m_}, std::uint64_t{l_}, std::uint64_t{capacity_},
                            std::uint64_t{size_}, std::uint64_t{cursor_}}) {
      io::write_pod(os, v);
    }
    for (std::size_t slot = 0; slot < size_; ++slot) {
      io::write_f64s(os, states_.data() + slot * m_, m_);
      io::write_f64s(os, actions_.data() + slot * l_, l_);
      io::write_f64s(os, &rewards_[slot], 1);
      io::write_f64s(os, next_states_.data() + slot * m_, m_);
      io::write_f64s(os, &dones_[slot], 1);
    }
    if (!os) throw FileError(path, "write failed");
  }

  static ReplayBuffer load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FileError(path, "cannot open for reading");
    try {
      char magic[8];
      is.read(magic, sizeof magic);
      if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0) {
        throw Error("not a replay buffer snapshot (bad magic)");
      }
      const auto m = io::read_pod<std::uint64_t>(is);
      const auto l = io::read_pod<std::uint64_t>(is);
      const auto cap = io::read_pod<std::uint64_t>(is);
      const auto size = io::read_pod<std::uint64_t>(is);
      const auto cursor = io::read_pod<std::uint64_t>(is);
      if (size > cap || cursor >= cap || (size < cap && cursor != size)) {
        throw Error("inconsistent replay snapshot header");
      }
      ReplayBuffer buf(cap, m, l);
      buf.states_.resize(size * m);
      buf.actions_.resize(size * l);
      buf.rewards_.resize(size);
      buf.next_states_.resize(size * m);
      buf.dones_.resize(size);
      for (std::size_t slot = 0; slot < size; ++slot) {
        io::read_f64s(is, buf.states_.data() + slot * m, m);
        io::read_f64s(is, buf.actions_.data() + slot * l, l);
        io::read_f64s(is, &buf.rewards_[slot], 1);
        io::read_f64s(is, buf.next_states_.data() + slot * m, m);
        io::read_f64s(is, &buf.dones_[slot], 1);
      }
      buf.size_ = size;
      buf.cursor_ = cursor;
      return buf;
    } catch (const FileError&) {
      throw;
    } catch (const Error& e) {
      throw FileError(path, e.what());
    }
  }

  friend bool operator==(const ReplayBuffer& a, const ReplayBuffer& b) {
    return a.capacity_ == b.capacity_ && a.m_ == b.m_ && a.l_ == b.l_ && a.size_ == b.size_ &&
           a.cursor_ == b.cursor_ && bits_equal(a.states_, b.states_) &&
           bits_equal(a.actions_, b.actions_) && bits_equal(a.rewards_, b.rewards_) &&
           bits_equal(a.next_states_, b.next_states_) && bits_equal(a.dones_, b.dones_);
  }

private:
  static constexpr char kMagic[8] = {'K', 'L', 'P', 'R', 'R', 'B', '0', '1'};

  static bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  }

  void check_slot(std::size_t slot) const {
    if (slot >= size_) {
      throw DomainError("replay slot " + std::to_string(slot) + " is not populated (size " +
                        std::to_string(size_) + ")");
    }
  }

  std::size_t capacity_;
  std::size_t m_;
  std::size_t l_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;
  std::vector<double> states_;
  std::vector<double> actions_;
  std::vector<double> rewards_;
  std::vector<double> next_states_;
  std::vector<double> dones_;
};

/// b indices drawn uniformly with replacement.
inline CandidateBatch sample_uniform(const ReplayBuffer& buffer, std::size_t b, Rng& rng) {
  if (b == 0) throw ConfigError("batch size must be >= 1");
  if (buffer.size() < b) {
    throw UnderfullError("replay buffer holds " + std::to_string(buffer.size()) +
                         " transitions, batch needs " + std::to_string(b));
  }
  std::vector<std::size_t> idx(b);
  for (auto& i : idx) i = uniform_index(rng, buffer.size());
  return buffer.gather(idx);
}

} // namespace klper
