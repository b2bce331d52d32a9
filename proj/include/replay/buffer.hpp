#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <vector>

#include "replay/transition.hpp"

namespace replay {

// FIFO replay memory. Index 0 is always the oldest stored transition and
// indices stay contiguous; when full, a push evicts index 0 and shifts the
// view down by one. All samplers address the buffer through these indices.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity);

  // Appends t and returns its index (== size() - 1 after the call).
  size_t push(Transition t);

  size_t size() const { return slots_.size(); }
  size_t capacity() const { return capacity_; }

  // Total pushes ever, including evicted ones.
  uint64_t insert_count() const { return insert_count_; }

  const Transition& operator[](size_t i) const;

  // The b transitions ending at index `last` inclusive, oldest first.
  // Clipped at the front: fewer than b rows when last + 1 < b.
  Batch block_ending_at(size_t last, size_t b) const;

  // Rows at the given indices, in the given order.
  Batch gather(const std::vector<size_t>& indices,
               std::vector<double> weights = {}) const;

 private:
  size_t capacity_;
  std::deque<Transition> slots_;
  uint64_t insert_count_ = 0;
};

}  // namespace replay
