#include "replay/buffer.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace replay {

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
}

size_t ReplayBuffer::push(Transition t) {
  if (slots_.size() == capacity_) slots_.pop_front();
  slots_.push_back(std::move(t));
  ++insert_count_;
  return slots_.size() - 1;
}

const Transition& ReplayBuffer::operator[](size_t i) const {
  if (i >= slots_.size()) {
    throw std::out_of_range("ReplayBuffer: index " + std::to_string(i) +
                            " out of range (size " + std::to_string(slots_.size()) + ")");
  }
  return slots_[i];
}

Batch ReplayBuffer::block_ending_at(size_t last, size_t b) const {
  if (last >= slots_.size()) {
    throw std::out_of_range("ReplayBuffer: block end " + std::to_string(last) +
                            " out of range (size " + std::to_string(slots_.size()) + ")");
  }
  size_t first = last + 1 >= b ? last + 1 - b : 0;
  Batch batch;
  batch.indices.reserve(last - first + 1);
  batch.transitions.reserve(last - first + 1);
  for (size_t i = first; i <= last; ++i) {
    batch.indices.push_back(i);
    batch.transitions.push_back(slots_[i]);
  }
  return batch;
}

Batch ReplayBuffer::gather(const std::vector<size_t>& indices,
                           std::vector<double> weights) const {
  if (!weights.empty() && weights.size() != indices.size()) {
    throw std::invalid_argument("ReplayBuffer: weights size mismatch");
  }
  Batch batch;
  batch.indices = indices;
  batch.weights = std::move(weights);
  batch.transitions.reserve(indices.size());
  for (size_t i : indices) batch.transitions.push_back((*this)[i]);
  return batch;
}

}  // namespace replay
