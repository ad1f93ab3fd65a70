#include "relo/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "relo/errors.hpp"

namespace relo::nn {

namespace {

bool finite_range(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

void check_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw InvalidInput(std::string(what) + ": expected length " + std::to_string(want) +
                       ", got " + std::to_string(got));
  }
}

// out = activation(W^T x + b). Zero inputs are skipped, which makes one-hot
// observations and dead ReLUs cheap.
void layer_forward(const DenseLayer& layer, std::span<const double> x, std::vector<double>& out) {
  out.assign(layer.bias.begin(), layer.bias.end());
  const std::size_t n_out = layer.out;
  double* o = out.data();
  for (std::size_t i = 0; i < layer.in; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* w = layer.weights.data() + i * n_out;
    for (std::size_t k = 0; k < n_out; ++k) o[k] += w[k] * xi;
  }
  if (layer.activation == Activation::relu) {
    for (double& v : out) v = v > 0.0 ? v : 0.0;
  }
}

}  // namespace

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw InvalidInput("DenseNet: at least one layer required");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& l = layers_[k];
    if (l.in == 0 || l.out == 0) throw InvalidInput("DenseNet: zero-sized layer");
    if (l.weights.size() != l.in * l.out || l.bias.size() != l.out) {
      throw InvalidInput("DenseNet: parameter arrays do not match layer " + std::to_string(k));
    }
    if (k + 1 < layers_.size() && layers_[k + 1].in != l.out) {
      throw InvalidInput("DenseNet: layer " + std::to_string(k) + " output does not chain");
    }
  }
  if (layers_.back().activation != Activation::identity) {
    throw InvalidInput("DenseNet: final layer must be identity");
  }
  if (!all_finite()) throw InvalidInput("DenseNet: non-finite parameter");
}

DenseNet DenseNet::make(std::span<const std::size_t> sizes, Rng& rng) {
  if (sizes.size() < 2) throw InvalidInput("DenseNet::make: need input and output sizes");
  std::vector<DenseLayer> layers;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    DenseLayer l;
    l.in = sizes[k];
    l.out = sizes[k + 1];
    l.activation = (k + 2 == sizes.size()) ? Activation::identity : Activation::relu;
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
    l.weights.resize(l.in * l.out);
    l.bias.resize(l.out);
    for (double& w : l.weights) w = (2.0 * uniform01(rng) - 1.0) * bound;
    for (double& b : l.bias) b = (2.0 * uniform01(rng) - 1.0) * bound;
    layers.push_back(std::move(l));
  }
  return DenseNet(std::move(layers));
}

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<double> DenseNet::forward(std::span<const double> state) const {
  ForwardCache cache;
  forward(state, cache);
  return std::move(cache.values.back());
}

void DenseNet::forward(std::span<const double> state, ForwardCache& cache) const {
  check_dim(state.size(), input_dim(), "forward");
  cache.values.resize(layers_.size() + 1);
  cache.values[0].assign(state.begin(), state.end());
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    layer_forward(layers_[k], cache.values[k], cache.values[k + 1]);
  }
}

bool DenseNet::same_architecture(const DenseNet& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& a = layers_[k];
    const auto& b = other.layers_[k];
    if (a.in != b.in || a.out != b.out || a.activation != b.activation) return false;
  }
  return true;
}

bool DenseNet::all_finite() const {
  return std::all_of(layers_.begin(), layers_.end(), [](const DenseLayer& l) {
    return finite_range(l.weights) && finite_range(l.bias);
  });
}

GradientSet GradientSet::zeros_like(const DenseNet& net) {
  GradientSet g;
  for (const auto& l : net.layers()) {
    g.layers.push_back({std::vector<double>(l.weights.size(), 0.0),
                        std::vector<double>(l.bias.size(), 0.0)});
  }
  return g;
}

void GradientSet::set_zero() {
  for (auto& l : layers) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
}

void GradientSet::scale(double factor) {
  for (auto& l : layers) {
    for (double& w : l.weights) w *= factor;
    for (double& b : l.bias) b *= factor;
  }
}

double GradientSet::norm() const {
  double sq = 0.0;
  for (const auto& l : layers) {
    for (double w : l.weights) sq += w * w;
    for (double b : l.bias) sq += b * b;
  }
  return std::sqrt(sq);
}

bool GradientSet::all_finite() const {
  return std::all_of(layers.begin(), layers.end(), [](const LayerGradient& l) {
    return finite_range(l.weights) && finite_range(l.bias);
  });
}

bool GradientSet::congruent_with(const DenseNet& net) const {
  if (layers.size() != net.layers().size()) return false;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (layers[k].weights.size() != net.layers()[k].weights.size() ||
        layers[k].bias.size() != net.layers()[k].bias.size()) {
      return false;
    }
  }
  return true;
}

void accumulate_gradient(const DenseNet& net, const ForwardCache& cache,
                         std::span<const double> output_grad, GradientSet& acc) {
  check_dim(output_grad.size(), net.output_dim(), "backward");
  if (!acc.congruent_with(net)) throw InvalidInput("backward: gradient set shape mismatch");
  const auto& layers = net.layers();

  std::vector<double> delta(output_grad.begin(), output_grad.end());
  std::vector<double> prev;
  for (std::size_t k = layers.size(); k-- > 0;) {
    const DenseLayer& l = layers[k];
    const std::vector<double>& out = cache.values[k + 1];
    const std::vector<double>& x = cache.values[k];
    if (l.activation == Activation::relu) {
      for (std::size_t o = 0; o < l.out; ++o) {
        if (out[o] <= 0.0) delta[o] = 0.0;
      }
    }
    LayerGradient& g = acc.layers[k];
    for (std::size_t o = 0; o < l.out; ++o) g.bias[o] += delta[o];
    for (std::size_t i = 0; i < l.in; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      double* gw = g.weights.data() + i * l.out;
      for (std::size_t o = 0; o < l.out; ++o) gw[o] += delta[o] * xi;
    }
    if (k == 0) break;
    prev.assign(l.in, 0.0);
    for (std::size_t i = 0; i < l.in; ++i) {
      const double* w = l.weights.data() + i * l.out;
      double s = 0.0;
      for (std::size_t o = 0; o < l.out; ++o) s += w[o] * delta[o];
      prev[i] = s;
    }
    delta.swap(prev);
  }
}

GradientSet backward(const DenseNet& net, std::span<const double> state,
                     std::span<const double> output_grad) {
  check_dim(output_grad.size(), net.output_dim(), "backward");
  ForwardCache cache;
  net.forward(state, cache);
  GradientSet g = GradientSet::zeros_like(net);
  accumulate_gradient(net, cache, output_grad, g);
  return g;
}

AdamState AdamState::for_net(const DenseNet& net, AdamConfig config) {
  AdamState s;
  s.config = config;
  s.first_moment = GradientSet::zeros_like(net);
  s.second_moment = GradientSet::zeros_like(net);
  return s;
}

void adam_step(DenseNet& net, const GradientSet& grads, AdamState& state) {
  if (!grads.congruent_with(net) || !state.first_moment.congruent_with(net) ||
      !state.second_moment.congruent_with(net)) {
    throw InvalidInput("adam_step: shape mismatch");
  }
  if (!grads.all_finite()) throw TrainingDiverged("adam_step: non-finite gradient");

  const AdamConfig& c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);

  auto update = [&](std::vector<double>& params, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    for (std::size_t j = 0; j < params.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      params[j] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  };

  auto& layers = net.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    update(layers[k].weights, grads.layers[k].weights, state.first_moment.layers[k].weights,
           state.second_moment.layers[k].weights);
    update(layers[k].bias, grads.layers[k].bias, state.first_moment.layers[k].bias,
           state.second_moment.layers[k].bias);
  }
}

void polyak_copy(DenseNet& target, const DenseNet& online, double tau) {
  if (!target.same_architecture(online)) throw InvalidInput("polyak_copy: architecture mismatch");
  if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidInput("polyak_copy: tau must lie in [0, 1]");
  if (tau == 1.0) {
    target = online;
    return;
  }
  if (tau == 0.0) return;
  auto& t_layers = target.layers();
  const auto& o_layers = online.layers();
  for (std::size_t k = 0; k < t_layers.size(); ++k) {
    for (std::size_t j = 0; j < t_layers[k].weights.size(); ++j) {
      t_layers[k].weights[j] = (1.0 - tau) * t_layers[k].weights[j] + tau * o_layers[k].weights[j];
    }
    for (std::size_t j = 0; j < t_layers[k].bias.size(); ++j) {
      t_layers[k].bias[j] = (1.0 - tau) * t_layers[k].bias[j] + tau * o_layers[k].bias[j];
    }
  }
}

}  // namespace relo::nn
