#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "justitia/predictor.hpp"

namespace justitia {

namespace {

void zero_like(const std::vector<DenseLayer>& layers, std::vector<DenseLayer>& grad) {
  grad.resize(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    grad[l].inputs = layers[l].inputs;
    grad[l].outputs = layers[l].outputs;
    grad[l].weights.assign(layers[l].weights.size(), 0.0);
    grad[l].bias.assign(layers[l].bias.size(), 0.0);
  }
}

}  // namespace

Mlp::Mlp(const std::vector<std::size_t>& widths, std::uint64_t seed, double init_range) {
  if (widths.size() < 2 || widths.back() != 1) {
    throw std::invalid_argument("MLP widths must end in a single output");
  }
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer;
    layer.inputs = widths[l];
    layer.outputs = widths[l + 1];
    if (layer.inputs == 0 || layer.outputs == 0) throw std::invalid_argument("empty MLP layer");
    const double range = init_range > 0.0
                             ? init_range
                             : std::sqrt(6.0 / static_cast<double>(layer.inputs + layer.outputs));
    std::uniform_real_distribution<double> init(-range, range);
    layer.weights.resize(layer.inputs * layer.outputs);
    for (double& w : layer.weights) w = init(rng);
    layer.bias.assign(layer.outputs, 0.0);
    layers_.push_back(std::move(layer));
  }
}

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty() || layers_.back().outputs != 1) {
    throw std::invalid_argument("MLP must end in a single output");
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.weights.size() != layer.inputs * layer.outputs || layer.bias.size() != layer.outputs ||
        (l > 0 && layer.inputs != layers_[l - 1].outputs)) {
      throw std::invalid_argument("inconsistent MLP layer shapes");
    }
  }
}

double Mlp::forward(std::span<const double> x) const {
  if (x.size() != input_dim()) throw std::invalid_argument("MLP input dimension mismatch");
  std::vector<double> a(x.begin(), x.end());
  std::vector<double> z;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    z.assign(layer.bias.begin(), layer.bias.end());
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      const double* row = &layer.weights[o * layer.inputs];
      double acc = z[o];
      for (std::size_t i = 0; i < layer.inputs; ++i) acc += row[i] * a[i];
      z[o] = acc;
    }
    if (l + 1 < layers_.size()) {
      for (double& v : z) v = std::max(0.0, v);
    }
    a.swap(z);
  }
  return a[0];
}

double Mlp::loss(std::span<const std::vector<double>> xs, std::span<const double> ys,
                 double l2) const {
  double total = 0.0;
  for (std::size_t s = 0; s < xs.size(); ++s) {
    const double e = forward(xs[s]) - ys[s];
    total += e * e;
  }
  double reg = 0.0;
  for (const auto& layer : layers_) {
    for (double w : layer.weights) reg += w * w;
  }
  return total / static_cast<double>(xs.size()) + l2 * reg;
}

double Mlp::loss_and_gradient(std::span<const std::vector<double>> xs, std::span<const double> ys,
                              double l2, std::vector<DenseLayer>& grad) const {
  if (xs.size() != ys.size() || xs.empty()) throw std::invalid_argument("bad training batch");
  zero_like(layers_, grad);
  const std::size_t depth = layers_.size();
  const double inv_n = 1.0 / static_cast<double>(xs.size());
  std::vector<std::vector<double>> acts(depth + 1);
  std::vector<std::vector<double>> pre(depth);
  double total = 0.0;

  for (std::size_t s = 0; s < xs.size(); ++s) {
    acts[0].assign(xs[s].begin(), xs[s].end());
    for (std::size_t l = 0; l < depth; ++l) {
      const DenseLayer& layer = layers_[l];
      pre[l].assign(layer.bias.begin(), layer.bias.end());
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        const double* row = &layer.weights[o * layer.inputs];
        double acc = pre[l][o];
        for (std::size_t i = 0; i < layer.inputs; ++i) acc += row[i] * acts[l][i];
        pre[l][o] = acc;
      }
      acts[l + 1] = pre[l];
      if (l + 1 < depth) {
        for (double& v : acts[l + 1]) v = std::max(0.0, v);
      }
    }
    const double err = acts[depth][0] - ys[s];
    total += err * err;

    std::vector<double> delta{2.0 * err * inv_n};
    for (std::size_t l = depth; l-- > 0;) {
      const DenseLayer& layer = layers_[l];
      DenseLayer& g = grad[l];
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        g.bias[o] += delta[o];
        double* grow = &g.weights[o * layer.inputs];
        for (std::size_t i = 0; i < layer.inputs; ++i) grow[i] += delta[o] * acts[l][i];
      }
      if (l == 0) break;
      std::vector<double> back(layer.inputs, 0.0);
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        const double* row = &layer.weights[o * layer.inputs];
        for (std::size_t i = 0; i < layer.inputs; ++i) back[i] += row[i] * delta[o];
      }
      for (std::size_t i = 0; i < layer.inputs; ++i) {
        if (pre[l - 1][i] <= 0.0) back[i] = 0.0;
      }
      delta.swap(back);
    }
  }

  double reg = 0.0;
  for (std::size_t l = 0; l < depth; ++l) {
    for (std::size_t k = 0; k < layers_[l].weights.size(); ++k) {
      const double w = layers_[l].weights[k];
      reg += w * w;
      grad[l].weights[k] += 2.0 * l2 * w;
    }
  }
  return total * inv_n + l2 * reg;
}

}  // namespace justitia
