#include "ahtlab/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ahtlab/errors.hpp"

namespace ahtlab {

namespace {

std::vector<std::size_t> layer_offsets(const std::vector<std::size_t>& dims) {
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    offsets.push_back(off);
    off += dims[l + 1] * dims[l] + dims[l + 1];
  }
  offsets.push_back(off);
  return offsets;
}

}  // namespace

QNetwork::QNetwork(std::vector<std::size_t> layer_dims,
                   std::vector<double> params)
    : dims_(std::move(layer_dims)), params_(std::move(params)) {
  if (dims_.size() < 2)
    throw ValidationError("a network needs at least an input and output size");
  if (std::any_of(dims_.begin(), dims_.end(),
                  [](std::size_t d) { return d == 0; }))
    throw ValidationError("layer sizes must be positive");
  offsets_ = layer_offsets(dims_);
  if (params_.size() != offsets_.back())
    throw DimensionError("network has " + std::to_string(params_.size()) +
                         " parameters, layer sizes require " +
                         std::to_string(offsets_.back()));
  offsets_.pop_back();
}

QNetwork QNetwork::zeros(std::vector<std::size_t> layer_dims) {
  const std::size_t n = layer_dims.size() < 2 ? 0 : layer_offsets(layer_dims).back();
  return QNetwork(std::move(layer_dims), std::vector<double>(n, 0.0));
}

QNetwork QNetwork::random(std::vector<std::size_t> layer_dims, Rng& rng) {
  QNetwork net = zeros(std::move(layer_dims));
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const std::size_t fan_in = net.dims_[l];
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    const std::size_t begin = net.weight_offset(l);
    const std::size_t end = net.bias_offset(l);
    for (std::size_t k = begin; k < end; ++k)
      net.params_[k] = scale * (2.0 * uniform01(rng) - 1.0);
  }
  return net;
}

std::vector<std::vector<double>> QNetwork::forward_trace(
    std::span<const double> input) const {
  if (input.size() != input_size())
    throw DimensionError("network input has length " +
                         std::to_string(input.size()) + ", expected " +
                         std::to_string(input_size()));
  std::vector<std::vector<double>> pre(num_layers());
  std::vector<double> act(input.begin(), input.end());
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const std::size_t in = dims_[l];
    const std::size_t out = dims_[l + 1];
    const double* w = params_.data() + weight_offset(l);
    const double* b = params_.data() + bias_offset(l);
    auto& z = pre[l];
    z.resize(out);
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      const double* wr = w + o * in;
      for (std::size_t i = 0; i < in; ++i) s += wr[i] * act[i];
      z[o] = s;
    }
    if (l + 1 < num_layers()) {
      act.resize(out);
      for (std::size_t o = 0; o < out; ++o) act[o] = std::max(0.0, z[o]);
    }
  }
  return pre;
}

std::vector<double> QNetwork::forward(std::span<const double> input) const {
  auto trace = forward_trace(input);
  return std::move(trace.back());
}

std::vector<std::size_t> q_network_dims(std::size_t num_hypotheses,
                                        std::size_t num_queries,
                                        std::span<const std::size_t> hidden) {
  std::vector<std::size_t> dims{2 * num_hypotheses};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(num_queries);
  return dims;
}

std::vector<double> augment(const Belief& belief) {
  std::vector<double> x = belief.probabilities();
  const auto alt = normalized_alternate(belief);
  x.insert(x.end(), alt.begin(), alt.end());
  return x;
}

std::size_t argmax_with_ties(std::span<const double> values) {
  if (values.empty()) throw DimensionError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    const double tol = 1e-12 * std::max(1.0, std::abs(values[best]));
    if (values[k] > values[best] + tol) best = k;
  }
  return best;
}

}  // namespace ahtlab
