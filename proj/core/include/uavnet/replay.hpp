#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "uavnet/highway_env.hpp"
#include "uavnet/rng.hpp"

namespace uavnet {

// One replay record (s, a, s', r_tran, r_tele, terminal).
struct Transition {
  Observation s;
  BranchedAction a;
  Observation s2;
  double r_tran = 0.0;
  double r_tele = 0.0;
  bool terminal = false;

  double reward() const { return r_tran + r_tele; }
};

// Fixed-capacity ring buffer with seeded uniform sampling (with replacement).
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed)
      : capacity_(capacity), rng_(seed) {
    if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity must be > 0");
    data_.reserve(capacity_);
  }

  void push(Transition t) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(t));
    } else {
      data_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
  }

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool can_sample(std::size_t m) const { return m >= 1 && data_.size() >= m; }

  std::vector<const Transition*> sample(std::size_t m) {
    if (!can_sample(m)) throw std::logic_error("ReplayBuffer: not enough transitions");
    std::vector<const Transition*> out(m);
    for (std::size_t k = 0; k < m; ++k) {
      out[k] = &data_[rng_.uniform_int(data_.size())];
    }
    return out;
  }

  const Transition& at(std::size_t i) const { return data_.at(i); }

  void clear() {
    data_.clear();
    next_ = 0;
  }

  Rng& rng() { return rng_; }
  const Rng& rng() const { return rng_; }

 private:
  std::vector<Transition> data_;
  std::size_t capacity_ = 0;
  std::size_t next_ = 0;
  Rng rng_;
};

}  // namespace uavnet
