#include "replay/mlp.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "replay/format.hpp"

namespace replay {

MlpQNet::MlpQNet(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("MlpQNet: need at least input and output layers");
  size_t off = 0;
  for (size_t l = 1; l < sizes_.size(); ++l) {
    if (sizes_[l - 1] < 1 || sizes_[l] < 1) {
      throw std::invalid_argument("MlpQNet: layer sizes must be positive");
    }
    auto in = static_cast<size_t>(sizes_[l - 1]);
    auto out = static_cast<size_t>(sizes_[l]);
    w_off_.push_back(off);
    off += in * out;
    b_off_.push_back(off);
    off += out;
  }
  params_.assign(off, 0.0);
  for (int s : sizes_) max_width_ = std::max(max_width_, static_cast<size_t>(s));
}

void MlpQNet::init_uniform_fanin(Rng& rng) {
  for (size_t l = 1; l < sizes_.size(); ++l) {
    auto in = static_cast<size_t>(sizes_[l - 1]);
    auto out = static_cast<size_t>(sizes_[l]);
    double bound = 1.0 / std::sqrt(static_cast<double>(in));
    double* w = params_.data() + w_off_[l - 1];
    for (size_t i = 0; i < in * out; ++i) w[i] = (rng.uniform01() * 2.0 - 1.0) * bound;
    double* b = params_.data() + b_off_[l - 1];
    for (size_t i = 0; i < out; ++i) b[i] = 0.0;
  }
}

void MlpQNet::forward(std::span<const double> input, std::span<double> output) const {
  if (input.size() != static_cast<size_t>(sizes_.front())) {
    throw std::invalid_argument("MlpQNet: input size mismatch");
  }
  if (output.size() != static_cast<size_t>(sizes_.back())) {
    throw std::invalid_argument("MlpQNet: output size mismatch");
  }
  thread_local std::vector<double> buf_a, buf_b;
  buf_a.resize(max_width_);
  buf_b.resize(max_width_);
  double* cur = buf_a.data();
  double* nxt = buf_b.data();
  for (size_t i = 0; i < input.size(); ++i) cur[i] = input[i];

  const size_t depth = sizes_.size();
  for (size_t l = 1; l < depth; ++l) {
    auto in = static_cast<size_t>(sizes_[l - 1]);
    auto out = static_cast<size_t>(sizes_[l]);
    const double* w = params_.data() + w_off_[l - 1];
    const double* b = params_.data() + b_off_[l - 1];
    const bool hidden = l + 1 < depth;
    for (size_t r = 0; r < out; ++r) {
      double acc = b[r];
      const double* row = w + r * in;
      for (size_t c = 0; c < in; ++c) acc += row[c] * cur[c];
      nxt[r] = hidden && acc < 0.0 ? 0.0 : acc;
    }
    std::swap(cur, nxt);
  }
  for (size_t i = 0; i < output.size(); ++i) output[i] = cur[i];
}

void MlpQNet::save_params(std::ostream& os) const {
  os << "# flat parameters: per layer, weight matrix row-major (out x in) then bias\n";
  for (double p : params_) os << format_double(p) << '\n';
}

namespace {

void check_batch(const MlpQNet& net, const QBatch& batch) {
  const size_t n = batch.size();
  if (n == 0) throw std::invalid_argument("q_regression: empty batch");
  if (batch.state_dim != static_cast<size_t>(net.input_size())) {
    throw std::invalid_argument("q_regression: state_dim mismatch");
  }
  if (batch.states.size() != n * batch.state_dim || batch.targets.size() != n) {
    throw std::invalid_argument("q_regression: ragged batch");
  }
  if (!batch.weights.empty() && batch.weights.size() != n) {
    throw std::invalid_argument("q_regression: weights size mismatch");
  }
  for (int a : batch.actions) {
    if (a < 0 || a >= net.output_size()) throw std::invalid_argument("q_regression: action out of range");
  }
}

}  // namespace

double q_regression_loss(const MlpQNet& net, const QBatch& batch) {
  check_batch(net, batch);
  const size_t n = batch.size();
  std::vector<double> out(static_cast<size_t>(net.output_size()));
  double loss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    net.forward(std::span<const double>(batch.states).subspan(i * batch.state_dim, batch.state_dim), out);
    double err = out[static_cast<size_t>(batch.actions[i])] - batch.targets[i];
    double w = batch.weights.empty() ? 1.0 : batch.weights[i];
    loss += w * err * err;
  }
  return loss / static_cast<double>(n);
}

double q_regression_loss_grad(const MlpQNet& net, const QBatch& batch,
                              std::span<double> grad) {
  check_batch(net, batch);
  if (grad.size() != net.param_count()) {
    throw std::invalid_argument("q_regression: grad size mismatch");
  }
  const auto& sizes = net.sizes();
  const size_t depth = sizes.size();
  const size_t n = batch.size();
  std::span<const double> params = net.params();

  // Per-layer activations (a[0] is the input) and pre-activation rectifier
  // masks for the backward sweep; reused across samples.
  std::vector<std::vector<double>> a(depth);
  std::vector<std::vector<char>> active(depth);
  for (size_t l = 0; l < depth; ++l) {
    a[l].assign(static_cast<size_t>(sizes[l]), 0.0);
    active[l].assign(static_cast<size_t>(sizes[l]), 1);
  }
  std::vector<double> delta, delta_prev;

  for (double& g : grad) g = 0.0;
  double loss = 0.0;

  for (size_t i = 0; i < n; ++i) {
    const double* x = batch.states.data() + i * batch.state_dim;
    for (size_t c = 0; c < batch.state_dim; ++c) a[0][c] = x[c];

    for (size_t l = 1; l < depth; ++l) {
      auto in = static_cast<size_t>(sizes[l - 1]);
      auto out = static_cast<size_t>(sizes[l]);
      const double* w = params.data() + net.weight_offset(l);
      const double* b = params.data() + net.bias_offset(l);
      const bool hidden = l + 1 < depth;
      for (size_t r = 0; r < out; ++r) {
        double acc = b[r];
        const double* row = w + r * in;
        for (size_t c = 0; c < in; ++c) acc += row[c] * a[l - 1][c];
        if (hidden) {
          active[l][r] = acc > 0.0 ? 1 : 0;
          a[l][r] = acc > 0.0 ? acc : 0.0;
        } else {
          a[l][r] = acc;
        }
      }
    }

    const auto action = static_cast<size_t>(batch.actions[i]);
    double err = a[depth - 1][action] - batch.targets[i];
    double w_i = batch.weights.empty() ? 1.0 : batch.weights[i];
    loss += w_i * err * err;

    // d(loss)/d(output): nonzero only at the taken action.
    delta.assign(static_cast<size_t>(sizes[depth - 1]), 0.0);
    delta[action] = 2.0 * w_i * err / static_cast<double>(n);

    for (size_t l = depth - 1; l >= 1; --l) {
      auto in = static_cast<size_t>(sizes[l - 1]);
      auto out = static_cast<size_t>(sizes[l]);
      const double* w = params.data() + net.weight_offset(l);
      double* gw = grad.data() + net.weight_offset(l);
      double* gb = grad.data() + net.bias_offset(l);
      for (size_t r = 0; r < out; ++r) {
        double d = delta[r];
        if (d == 0.0) continue;
        double* grow = gw + r * in;
        for (size_t c = 0; c < in; ++c) grow[c] += d * a[l - 1][c];
        gb[r] += d;
      }
      if (l == 1) break;
      delta_prev.assign(in, 0.0);
      for (size_t r = 0; r < out; ++r) {
        double d = delta[r];
        if (d == 0.0) continue;
        const double* row = w + r * in;
        for (size_t c = 0; c < in; ++c) delta_prev[c] += row[c] * d;
      }
      for (size_t c = 0; c < in; ++c) {
        if (!active[l - 1][c]) delta_prev[c] = 0.0;
      }
      std::swap(delta, delta_prev);
    }
  }
  return loss / static_cast<double>(n);
}

void AdamState::apply(std::span<double> params, std::span<const double> grad, double lr) {
  if (params.size() != m.size() || grad.size() != m.size()) {
    throw std::invalid_argument("AdamState: size mismatch");
  }
  ++t;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (size_t i = 0; i < params.size(); ++i) {
    double g = grad[i];
    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
    v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
    double m_hat = m[i] / c1;
    double v_hat = v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + epsilon);
  }
}

}  // namespace replay
