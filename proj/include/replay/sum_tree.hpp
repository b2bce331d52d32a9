#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace replay {

// Binary sum tree over leaf priorities, used for proportional sampling.
// Leaf count is rounded up to a power of two; the padding leaves hold zero
// priority and are unreachable by prefix search as long as the caller never
// sets them.
class SumTree {
 public:
  explicit SumTree(size_t capacity);

  size_t capacity() const { return capacity_; }

  // Sets leaf i and recomputes every ancestor as the sum of its children
  // (no incremental deltas, so float error cannot accumulate over updates).
  void set(size_t i, double priority);

  // Rebuilds all leaves at once; cheaper than capacity() calls to set().
  void fill(std::span<const double> priorities);

  double leaf(size_t i) const;
  double total() const { return nodes_[1]; }

  // Largest-prefix descent: returns the leaf index l such that the prefix
  // sum of leaves [0, l) is <= mass < prefix sum of [0, l]. mass must lie
  // in [0, total()).
  size_t find_prefix(double mass) const;

  // True when every internal node equals the sum of its children to within
  // rel_tol. Exposed for tests.
  bool check_sums(double rel_tol = 1e-9) const;

 private:
  size_t capacity_;  // requested leaf count
  size_t leaves_;    // power-of-two storage width
  std::vector<double> nodes_;  // 1-based heap layout, nodes_[1] is the root
};

}  // namespace replay
