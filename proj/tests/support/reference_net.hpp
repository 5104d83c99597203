#pragma once

// Second implementation of the dense forward pass, written against explicit
// per-layer matrices rather than the library's flat parameter layout.

#include <algorithm>
#include <cstddef>
#include <vector>

#include "ahtlab/network.hpp"

namespace ahtlab::testing {

struct ReferenceLayer {
  std::vector<std::vector<double>> weights;  // [out][in]
  std::vector<double> biases;
};

inline std::vector<ReferenceLayer> unpack_layers(const QNetwork& net) {
  const auto dims = net.layer_dims();
  const auto p = net.params();
  std::vector<ReferenceLayer> layers;
  std::size_t k = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    ReferenceLayer layer;
    layer.weights.assign(dims[l + 1], std::vector<double>(dims[l]));
    for (auto& row : layer.weights)
      for (auto& w : row) w = p[k++];
    layer.biases.assign(dims[l + 1], 0.0);
    for (auto& b : layer.biases) b = p[k++];
    layers.push_back(std::move(layer));
  }
  return layers;
}

inline std::vector<double> reference_forward(const std::vector<ReferenceLayer>& layers,
                                             std::vector<double> x) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    std::vector<double> z(layer.biases);
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t o = 0; o < z.size(); ++o) z[o] += layer.weights[o][i] * x[i];
    if (l + 1 < layers.size())
      for (auto& v : z) v = std::max(v, 0.0);
    x = std::move(z);
  }
  return x;
}

}  // namespace ahtlab::testing
