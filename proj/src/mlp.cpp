#include "mecpart/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mecpart/error.hpp"

namespace mecpart {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Mlp::Mlp(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)), kernels_(&kernels::active_kernels()) {
  if (sizes_.size() < 2) throw ParameterError("network needs an input and an output layer");
  for (std::size_t s : sizes_)
    if (s == 0) throw ParameterError("layer sizes must be positive");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(total);
    total += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
  params_.assign(total, 0.0);
}

Mlp Mlp::random(std::vector<std::size_t> layer_sizes, Rng& rng) {
  Mlp net(std::move(layer_sizes));
  for (std::size_t l = 0; l + 1 < net.sizes_.size(); ++l) {
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(net.sizes_[l])));
    const std::size_t w = net.weight_offset(l);
    for (std::size_t i = 0; i < net.sizes_[l + 1] * net.sizes_[l]; ++i) net.params_[w + i] = normal(rng);
  }
  return net;
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  if (input.size() != input_size())
    throw ParameterError("network input has length " + std::to_string(input.size()) + ", expected " +
                         std::to_string(input_size()));
  std::vector<double> a(input.begin(), input.end());
  std::vector<double> z;
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    z.resize(sizes_[l + 1]);
    kernels_->gemv(params_.data() + weight_offset(l), a.data(), params_.data() + bias_offset(l), z.data(),
                   sizes_[l + 1], sizes_[l]);
    if (l + 1 < layers)
      for (double& v : z) v = std::max(v, 0.0);
    else
      for (double& v : z) v = sigmoid(v);
    a.swap(z);
  }
  return a;
}

double Mlp::loss(std::span<const TrainingSample> batch) const {
  if (batch.empty()) throw ParameterError("empty batch");
  double total = 0.0;
  for (const auto& s : batch) {
    const auto out = forward(s.input);
    for (std::size_t i = 0; i < out.size(); ++i) total += (out[i] - s.target[i]) * (out[i] - s.target[i]);
  }
  return total / static_cast<double>(batch.size());
}

double Mlp::loss_and_gradient(std::span<const TrainingSample> batch, std::span<double> grad) const {
  if (batch.empty()) throw ParameterError("empty batch");
  if (grad.size() != params_.size()) throw ParameterError("gradient buffer has the wrong size");
  std::fill(grad.begin(), grad.end(), 0.0);
  const std::size_t layers = sizes_.size() - 1;
  const double scale = 1.0 / static_cast<double>(batch.size());

  // acts[l] is the input to layer l; acts[layers] the network output.
  std::vector<std::vector<double>> acts(layers + 1);
  std::vector<double> delta, prev_delta;
  double total = 0.0;
  for (const auto& s : batch) {
    if (s.input.size() != input_size() || s.target.size() != output_size())
      throw ParameterError("training sample does not match the network shape");
    acts[0] = s.input;
    for (std::size_t l = 0; l < layers; ++l) {
      acts[l + 1].resize(sizes_[l + 1]);
      kernels_->gemv(params_.data() + weight_offset(l), acts[l].data(), params_.data() + bias_offset(l),
                     acts[l + 1].data(), sizes_[l + 1], sizes_[l]);
      if (l + 1 < layers)
        for (double& v : acts[l + 1]) v = std::max(v, 0.0);
      else
        for (double& v : acts[l + 1]) v = sigmoid(v);
    }
    const auto& out = acts[layers];
    delta.resize(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double err = out[i] - s.target[i];
      total += err * err;
      delta[i] = 2.0 * err * scale * out[i] * (1.0 - out[i]);
    }
    for (std::size_t l = layers; l-- > 0;) {
      kernels_->outer_accumulate(grad.data() + weight_offset(l), delta.data(), acts[l].data(), sizes_[l + 1],
                                 sizes_[l]);
      double* gb = grad.data() + bias_offset(l);
      for (std::size_t i = 0; i < sizes_[l + 1]; ++i) gb[i] += delta[i];
      if (l == 0) break;
      prev_delta.resize(sizes_[l]);
      kernels_->gemv_transposed(params_.data() + weight_offset(l), delta.data(), prev_delta.data(), sizes_[l + 1],
                                sizes_[l]);
      // ReLU derivative; acts[l] is the post-activation of layer l-1.
      for (std::size_t i = 0; i < sizes_[l]; ++i)
        if (!(acts[l][i] > 0.0)) prev_delta[i] = 0.0;
      delta.swap(prev_delta);
    }
  }
  return total * scale;
}

void AdamState::apply(std::span<double> params, std::span<const double> grad, const kernels::DenseKernels& k) {
  if (params.size() != m.size() || grad.size() != m.size()) throw ParameterError("Adam state does not match parameters");
  ++step;
  const double t = static_cast<double>(step);
  const kernels::AdamCoefficients c{config.learning_rate, config.beta1, config.beta2, config.eps,
                                    1.0 - std::pow(config.beta1, t), 1.0 - std::pow(config.beta2, t)};
  k.adam_update(params.data(), m.data(), v.data(), grad.data(), params.size(), c);
}

double max_gradient_error(const Mlp& net, std::span<const TrainingSample> batch, double h, double floor) {
  std::vector<double> grad(net.num_params());
  net.loss_and_gradient(batch, grad);
  Mlp probe = net;
  double worst = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double saved = probe.params()[i];
    probe.params()[i] = saved + h;
    const double up = probe.loss(batch);
    probe.params()[i] = saved - h;
    const double down = probe.loss(batch);
    probe.params()[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(grad[i]), std::abs(numeric), floor});
    worst = std::max(worst, std::abs(grad[i] - numeric) / denom);
  }
  return worst;
}

double train_step(Mlp& net, AdamState& adam, std::span<const TrainingSample> batch) {
  std::vector<double> grad(net.num_params());
  const double loss = net.loss_and_gradient(batch, grad);
  if (!std::isfinite(loss))
    throw NumericError("non-finite training loss (" + std::to_string(loss) + ") at Adam step " +
                       std::to_string(adam.step + 1) + ", batch size " + std::to_string(batch.size()));
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!std::isfinite(grad[i])) throw NumericError("non-finite gradient at parameter " + std::to_string(i));
  adam.apply(net.params(), grad, net.dense_kernels());
  return loss;
}

}  // namespace mecpart
