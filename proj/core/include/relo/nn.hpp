#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "relo/rng.hpp"

namespace relo::nn {

enum class Activation { relu, identity };

// One fully connected layer. Weights are stored input-major:
// weights[i * out + o] connects input i to output o, so each input's fan-out
// is contiguous.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  Activation activation = Activation::identity;

  double& weight(std::size_t o, std::size_t i) { return weights[i * out + o]; }
  double weight(std::size_t o, std::size_t i) const { return weights[i * out + o]; }

  bool operator==(const DenseLayer&) const = default;
};

// Per-layer intermediate values kept by a forward pass for backprop.
// values[0] is the input; values[k + 1] is the post-activation output of
// layer k.
struct ForwardCache {
  std::vector<std::vector<double>> values;

  std::span<const double> output() const { return values.back(); }
};

// Dense feed-forward network with ReLU hidden layers and an identity head.
class DenseNet {
 public:
  DenseNet() = default;

  // Validates that layer dimensions chain, the last layer is identity and
  // every parameter is finite. Throws InvalidInput otherwise.
  explicit DenseNet(std::vector<DenseLayer> layers);

  // sizes = {input, hidden..., output}. Parameters are drawn uniformly from
  // [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static DenseNet make(std::span<const std::size_t> sizes, Rng& rng);

  std::size_t input_dim() const { return layers_.front().in; }
  std::size_t output_dim() const { return layers_.back().out; }
  std::size_t parameter_count() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  std::vector<double> forward(std::span<const double> state) const;
  void forward(std::span<const double> state, ForwardCache& cache) const;

  bool same_architecture(const DenseNet& other) const;
  bool all_finite() const;

  bool operator==(const DenseNet&) const = default;

 private:
  std::vector<DenseLayer> layers_;
};

struct LayerGradient {
  std::vector<double> weights;
  std::vector<double> bias;
};

// Gradient with the same shape as a DenseNet.
struct GradientSet {
  std::vector<LayerGradient> layers;

  static GradientSet zeros_like(const DenseNet& net);
  void set_zero();
  void scale(double factor);
  double norm() const;
  bool all_finite() const;
  bool congruent_with(const DenseNet& net) const;
};

// Gradient of dot(forward(state), output_grad) with respect to every
// parameter.
GradientSet backward(const DenseNet& net, std::span<const double> state,
                     std::span<const double> output_grad);

// Adds the gradient of dot(output, output_grad) for the sample recorded in
// `cache` into `acc`. Hot path for batch training.
void accumulate_gradient(const DenseNet& net, const ForwardCache& cache,
                         std::span<const double> output_grad, GradientSet& acc);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  GradientSet first_moment;
  GradientSet second_moment;
  std::int64_t step = 0;

  static AdamState for_net(const DenseNet& net, AdamConfig config = {});
};

// Bias-corrected Adam update applied in place. Throws TrainingDiverged on
// non-finite gradients and InvalidInput on shape mismatch.
void adam_step(DenseNet& net, const GradientSet& grads, AdamState& state);

// target <- (1 - tau) * target + tau * online. tau == 1 copies exactly.
void polyak_copy(DenseNet& target, const DenseNet& online, double tau);

}  // namespace relo::nn
