#pragma once

#include <cstdint>
#include <vector>

namespace replay {

using Obs = std::vector<double>;

struct Transition {
  Obs state;
  int action = 0;
  double reward = 0.0;
  Obs next_state;
  bool done = false;
  int64_t episode_id = 0;
  int64_t step_index = 0;  // position within its episode
};

// A materialized minibatch. weights is empty for unweighted samplers and
// holds one importance weight per row otherwise.
struct Batch {
  std::vector<size_t> indices;
  std::vector<Transition> transitions;
  std::vector<double> weights;

  size_t size() const { return transitions.size(); }
};

}  // namespace replay
