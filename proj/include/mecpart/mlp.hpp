#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mecpart/kernels.hpp"
#include "mecpart/system_model.hpp"

namespace mecpart {

struct TrainingSample {
  std::vector<double> input;
  std::vector<double> target;
};

/// Fully connected network: ReLU hidden layers, sigmoid output. Parameters
/// live in one flat array, per layer W (out x in, row-major) then b (out).
class Mlp {
 public:
  explicit Mlp(std::vector<std::size_t> layer_sizes);

  /// Weights ~ N(0, 1/fan_in), biases zero.
  static Mlp random(std::vector<std::size_t> layer_sizes, Rng& rng);

  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t num_params() const { return params_.size(); }
  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  void set_kernels(const kernels::DenseKernels& k) { kernels_ = &k; }
  const kernels::DenseKernels& dense_kernels() const { return *kernels_; }

  /// Output in (0,1)^out. Throws ParameterError on a size mismatch.
  std::vector<double> forward(std::span<const double> input) const;

  /// Mean over the batch of the summed squared error.
  double loss(std::span<const TrainingSample> batch) const;

  /// Loss and its gradient w.r.t. params (overwrites `grad`).
  double loss_and_gradient(std::span<const TrainingSample> batch, std::span<double> grad) const;

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const { return offsets_[layer] + sizes_[layer + 1] * sizes_[layer]; }

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
  const kernels::DenseKernels* kernels_;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;

  AdamState() = default;
  AdamState(std::size_t num_params, AdamConfig cfg) : config(cfg), m(num_params, 0.0), v(num_params, 0.0) {}

  void apply(std::span<double> params, std::span<const double> grad, const kernels::DenseKernels& k);
};

/// Largest relative deviation between the analytic gradient and central
/// differences with step `h`: |a - n| / max(|a|, |n|, floor).
double max_gradient_error(const Mlp& net, std::span<const TrainingSample> batch, double h = 1e-5,
                          double floor = 1e-6);

/// One Adam step on the batch loss; returns the loss before the update.
/// Throws NumericError on a non-finite loss or gradient.
double train_step(Mlp& net, AdamState& adam, std::span<const TrainingSample> batch);

}  // namespace mecpart
