#pragma once

// Deep Q-learning over the belief MDP with experience replay.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ahtlab/model.hpp"
#include "ahtlab/network.hpp"
#include "ahtlab/rng.hpp"

namespace ahtlab {

/// (state, query, next state, reward); states are augmented beliefs.
struct ExperienceTuple {
  std::vector<double> state;
  std::size_t query = 0;
  std::vector<double> next_state;
  double reward = 0.0;
};

/// Fixed-capacity ring of experience tuples; the oldest entry is evicted
/// once the buffer is full.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(ExperienceTuple tuple);

  std::size_t size() const noexcept { return buffer_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return buffer_.empty(); }

  /// i-th tuple in insertion order, 0 = oldest retained.
  const ExperienceTuple& at(std::size_t i) const;

  /// count draws, uniform with replacement.
  std::vector<ExperienceTuple> sample(std::size_t count, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next slot to overwrite once full
  std::vector<ExperienceTuple> buffer_;
};

struct TrainConfig {
  double gamma = 0.9;           // discount
  double zeta = 0.5;            // relaxation of the Q-value update
  double epsilon = 0.8;         // exploration probability, held constant
  double learning_rate = 1e-3;
  std::size_t episodes = 2000;
  std::size_t horizon = 50;
  std::size_t minibatch_size = 32;
  std::size_t epochs = 5;
  std::size_t capacity = 10000;
  std::vector<std::size_t> hidden = {64, 64};
  std::uint64_t seed = 20180801;

  /// Throws ValidationError on out-of-range values.
  void validate() const;
};

/// Q(s,u) + zeta * (r + gamma * max_u' Q(s',u') - Q(s,u)) under `net`.
double q_target(const QNetwork& net, const ExperienceTuple& tuple, double gamma,
                double zeta);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // same layout as QNetwork::params()
};

/// L = sum_b (target_b - Q(state_b)[query_b])^2 and its gradient. Outputs
/// other than the taken query contribute nothing.
LossGradient loss_gradient(const QNetwork& net,
                           std::span<const ExperienceTuple> batch,
                           std::span<const double> targets);

/// One full-batch gradient-descent step; returns the loss before the step.
/// Throws TrainingDivergenceError (episode 0) when the loss is not finite.
double train_step(QNetwork& net, std::span<const ExperienceTuple> batch,
                  std::span<const double> targets, double learning_rate);

struct MinibatchFit {
  QNetwork network;             // the fitted copy
  std::vector<double> targets;  // computed once from the frozen network
  double mean_loss = 0.0;       // averaged over epochs
};

/// Duplicates `frozen`, computes targets from `frozen`, and runs `epochs`
/// gradient steps on the copy.
MinibatchFit fit_minibatch(const QNetwork& frozen,
                           std::span<const ExperienceTuple> batch,
                           const TrainConfig& config);

struct EpisodeStats {
  std::size_t episode = 0;
  std::size_t hypothesis = 0;
  double cumulative_reward = 0.0;
  double mean_loss = 0.0;
};

struct TrainResult {
  QNetwork network;
  std::vector<EpisodeStats> log;
};

using EpisodeCallback = std::function<void(const EpisodeStats&)>;

/// Runs the full training loop: per episode a hypothesis is drawn from the
/// prior, the agent acts epsilon-greedily for `horizon` steps, each
/// transition is stored, and after each step a minibatch is fitted against
/// targets from the pre-step network. Single threaded; identical seeds give
/// bitwise-identical networks.
TrainResult train(const ObservationModel& model, const Belief& prior,
                  const TrainConfig& config,
                  const EpisodeCallback& on_episode = {});

}  // namespace ahtlab
