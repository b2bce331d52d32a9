#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "replay/rng.hpp"

namespace replay {

// Dense multilayer perceptron with rectified hidden layers and a linear
// output head. Parameters live in one flat vector, ordered layer by layer,
// each layer's weight matrix row-major (out x in) followed by its bias.
class MlpQNet {
 public:
  // sizes = {input, hidden..., output}; at least two entries, all positive.
  explicit MlpQNet(std::vector<int> sizes);

  // Weights ~ U(-1/sqrt(fan_in), +1/sqrt(fan_in)), biases zero. Consumes
  // one rng draw per weight in parameter order.
  void init_uniform_fanin(Rng& rng);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  size_t param_count() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  // Flat offsets of layer l's weight block and bias block, l in [1, depth).
  size_t weight_offset(size_t layer) const { return w_off_.at(layer - 1); }
  size_t bias_offset(size_t layer) const { return b_off_.at(layer - 1); }

  // Thread-safe on a const net (per-thread scratch).
  void forward(std::span<const double> input, std::span<double> output) const;

  // Flat dump, one value per line, in params() order.
  void save_params(std::ostream& os) const;

 private:
  std::vector<int> sizes_;
  std::vector<size_t> w_off_, b_off_;
  std::vector<double> params_;
  size_t max_width_ = 0;
};

// Action-value regression targets for one gradient step. states is row-major
// with one state_dim row per sample.
struct QBatch {
  std::vector<double> states;
  size_t state_dim = 0;
  std::vector<int> actions;
  std::vector<double> targets;
  std::vector<double> weights;  // empty means all-ones

  size_t size() const { return actions.size(); }
};

// loss = (1/n) sum_i w_i * (Q(s_i)[a_i] - y_i)^2
double q_regression_loss(const MlpQNet& net, const QBatch& batch);

// Same loss; also writes d(loss)/d(params) into grad (length param_count).
double q_regression_loss_grad(const MlpQNet& net, const QBatch& batch,
                              std::span<double> grad);

// Adaptive moment estimation over a flat parameter vector.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<double> m, v;
  int64_t t = 0;

  explicit AdamState(size_t n) : m(n, 0.0), v(n, 0.0) {}
  void apply(std::span<double> params, std::span<const double> grad, double lr);
};

}  // namespace replay
