#pragma once

// Feedforward action-value network over augmented beliefs.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "ahtlab/model.hpp"
#include "ahtlab/rng.hpp"

namespace ahtlab {

/// Dense network with rectifier hidden layers and a linear output layer.
///
/// Parameters live in one flat vector; layer l occupies a row-major weight
/// block of shape dims[l+1] x dims[l] followed by its dims[l+1] biases.
class QNetwork {
 public:
  QNetwork(std::vector<std::size_t> layer_dims, std::vector<double> params);

  static QNetwork zeros(std::vector<std::size_t> layer_dims);
  /// Weights uniform in +-1/sqrt(fan_in), biases zero.
  static QNetwork random(std::vector<std::size_t> layer_dims, Rng& rng);

  std::span<const std::size_t> layer_dims() const noexcept { return dims_; }
  std::size_t num_layers() const noexcept { return dims_.size() - 1; }
  std::size_t input_size() const noexcept { return dims_.front(); }
  std::size_t output_size() const noexcept { return dims_.back(); }

  std::span<const double> params() const noexcept { return params_; }
  std::span<double> mutable_params() noexcept { return params_; }

  std::size_t weight_offset(std::size_t layer) const { return offsets_.at(layer); }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_.at(layer) + dims_[layer + 1] * dims_[layer];
  }

  std::vector<double> forward(std::span<const double> input) const;

  /// Pre-activation values of every layer for one input; the last entry is
  /// the network output.
  std::vector<std::vector<double>> forward_trace(
      std::span<const double> input) const;

  bool operator==(const QNetwork& other) const = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

/// [input 2|H|, hidden..., output |U|].
std::vector<std::size_t> q_network_dims(std::size_t num_hypotheses,
                                        std::size_t num_queries,
                                        std::span<const std::size_t> hidden);

/// Network input: the belief followed by its normalized alternate belief.
std::vector<double> augment(const Belief& belief);

/// Index of the largest entry; ties within 1e-12 (relative) go to the
/// lowest index.
std::size_t argmax_with_ties(std::span<const double> values);

// Text persistence. The format is line oriented:
//
//   ahtlab-qnetwork 1
//   dims 6 64 64 2
//   layer 0
//   <dims[1] lines of dims[0] weights>
//   <one line of dims[1] biases>
//   layer 1
//   ...
//
// Numbers are written in shortest round-trip decimal form, so reading a file
// back reproduces the parameters bit for bit.
void save_network(const QNetwork& net, std::ostream& out);
QNetwork load_network(std::istream& in);
void save_network(const QNetwork& net, const std::filesystem::path& path);
QNetwork load_network(const std::filesystem::path& path);

}  // namespace ahtlab
