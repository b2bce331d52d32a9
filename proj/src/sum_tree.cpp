#include "replay/sum_tree.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace replay {

SumTree::SumTree(size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("SumTree: capacity must be positive");
  leaves_ = 1;
  while (leaves_ < capacity_) leaves_ <<= 1;
  nodes_.assign(2 * leaves_, 0.0);
}

void SumTree::set(size_t i, double priority) {
  if (i >= capacity_) {
    throw std::out_of_range("SumTree: leaf " + std::to_string(i) + " out of range");
  }
  if (!(priority >= 0.0) || !std::isfinite(priority)) {
    throw std::invalid_argument("SumTree: priority must be finite and non-negative");
  }
  size_t node = leaves_ + i;
  nodes_[node] = priority;
  for (node >>= 1; node >= 1; node >>= 1) {
    nodes_[node] = nodes_[2 * node] + nodes_[2 * node + 1];
  }
}

void SumTree::fill(std::span<const double> priorities) {
  if (priorities.size() > capacity_) {
    throw std::invalid_argument("SumTree: fill size exceeds capacity");
  }
  for (size_t i = 0; i < leaves_; ++i) {
    double p = i < priorities.size() ? priorities[i] : 0.0;
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("SumTree: priority must be finite and non-negative");
    }
    nodes_[leaves_ + i] = p;
  }
  for (size_t node = leaves_ - 1; node >= 1; --node) {
    nodes_[node] = nodes_[2 * node] + nodes_[2 * node + 1];
  }
}

double SumTree::leaf(size_t i) const {
  if (i >= capacity_) {
    throw std::out_of_range("SumTree: leaf " + std::to_string(i) + " out of range");
  }
  return nodes_[leaves_ + i];
}

size_t SumTree::find_prefix(double mass) const {
  if (!(mass >= 0.0) || mass >= total()) {
    throw std::invalid_argument("SumTree: mass outside [0, total)");
  }
  size_t node = 1;
  while (node < leaves_) {
    size_t left = 2 * node;
    if (mass < nodes_[left]) {
      node = left;
    } else {
      mass -= nodes_[left];
      node = left + 1;
    }
  }
  size_t i = node - leaves_;
  // In exact arithmetic the descent cannot land on a zero-priority leaf,
  // but the running subtraction can drift onto one; skip to the next leaf
  // that actually carries mass.
  while (nodes_[leaves_ + i] == 0.0 && i + 1 < capacity_) ++i;
  return i;
}

bool SumTree::check_sums(double rel_tol) const {
  for (size_t node = 1; node < leaves_; ++node) {
    double expected = nodes_[2 * node] + nodes_[2 * node + 1];
    double scale = std::max(1.0, std::fabs(expected));
    if (std::fabs(nodes_[node] - expected) > rel_tol * scale) return false;
  }
  return true;
}

}  // namespace replay
