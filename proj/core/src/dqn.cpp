#include "ahtlab/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ahtlab/errors.hpp"

namespace ahtlab {

// ---------------------------------------------------------------------------
// ReplayMemory

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ValidationError("replay capacity must be positive");
  buffer_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

void ReplayMemory::push(ExperienceTuple tuple) {
  if (buffer_.size() < capacity_) {
    buffer_.push_back(std::move(tuple));
    return;
  }
  buffer_[head_] = std::move(tuple);
  head_ = (head_ + 1) % capacity_;
}

const ExperienceTuple& ReplayMemory::at(std::size_t i) const {
  if (i >= buffer_.size()) throw DimensionError("replay index out of range");
  return buffer_[(head_ + i) % buffer_.size()];
}

std::vector<ExperienceTuple> ReplayMemory::sample(std::size_t count,
                                                  Rng& rng) const {
  if (buffer_.empty()) throw ValidationError("cannot sample an empty memory");
  std::vector<ExperienceTuple> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k)
    out.push_back(buffer_[uniform_index(buffer_.size(), rng)]);
  return out;
}

// ---------------------------------------------------------------------------
// Config

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("invalid training config: ") + what);
  };
  require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
  require(zeta > 0.0 && zeta < 1.0, "zeta must lie in (0, 1)");
  require(epsilon >= 0.0 && epsilon <= 1.0, "epsilon must lie in [0, 1]");
  require(learning_rate > 0.0 && std::isfinite(learning_rate),
          "learning rate must be positive");
  require(horizon > 0, "horizon must be positive");
  require(minibatch_size > 0, "minibatch size must be positive");
  require(epochs > 0, "epochs must be positive");
  require(capacity > 0, "capacity must be positive");
  require(std::none_of(hidden.begin(), hidden.end(),
                       [](std::size_t h) { return h == 0; }),
          "hidden layer sizes must be positive");
}

// ---------------------------------------------------------------------------
// Q-learning pieces

double q_target(const QNetwork& net, const ExperienceTuple& tuple, double gamma,
                double zeta) {
  const auto q = net.forward(tuple.state);
  if (tuple.query >= q.size()) throw DimensionError("query index out of range");
  const auto q_next = net.forward(tuple.next_state);
  const double best_next = *std::max_element(q_next.begin(), q_next.end());
  const double current = q[tuple.query];
  return current + zeta * (tuple.reward + gamma * best_next - current);
}

LossGradient loss_gradient(const QNetwork& net,
                           std::span<const ExperienceTuple> batch,
                           std::span<const double> targets) {
  if (batch.size() != targets.size())
    throw DimensionError("one target per tuple required");

  const auto dims = net.layer_dims();
  const std::size_t layers = net.num_layers();
  const auto params = net.params();

  LossGradient out;
  out.gradient.assign(params.size(), 0.0);
  std::vector<double> delta, delta_prev, act;

  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& tuple = batch[b];
    if (tuple.query >= net.output_size())
      throw DimensionError("query index out of range");
    const auto pre = net.forward_trace(tuple.state);
    const double err = pre.back()[tuple.query] - targets[b];
    out.loss += err * err;

    delta.assign(dims[layers], 0.0);
    delta[tuple.query] = 2.0 * err;

    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in = dims[l];
      const std::size_t outs = dims[l + 1];
      if (l == 0) {
        act.assign(tuple.state.begin(), tuple.state.end());
      } else {
        act.resize(in);
        for (std::size_t i = 0; i < in; ++i) act[i] = std::max(0.0, pre[l - 1][i]);
      }
      double* gw = out.gradient.data() + net.weight_offset(l);
      double* gb = out.gradient.data() + net.bias_offset(l);
      for (std::size_t o = 0; o < outs; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        gb[o] += d;
        double* row = gw + o * in;
        for (std::size_t i = 0; i < in; ++i) row[i] += d * act[i];
      }
      if (l == 0) break;

      const double* w = params.data() + net.weight_offset(l);
      delta_prev.assign(in, 0.0);
      for (std::size_t o = 0; o < outs; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        const double* row = w + o * in;
        for (std::size_t i = 0; i < in; ++i) delta_prev[i] += row[i] * d;
      }
      for (std::size_t i = 0; i < in; ++i)
        if (pre[l - 1][i] <= 0.0) delta_prev[i] = 0.0;
      delta.swap(delta_prev);
    }
  }
  return out;
}

double train_step(QNetwork& net, std::span<const ExperienceTuple> batch,
                  std::span<const double> targets, double learning_rate) {
  auto lg = loss_gradient(net, batch, targets);
  if (!std::isfinite(lg.loss))
    throw TrainingDivergenceError("Q-network loss is not finite", 0);
  auto params = net.mutable_params();
  for (std::size_t k = 0; k < params.size(); ++k)
    params[k] -= learning_rate * lg.gradient[k];
  return lg.loss;
}

MinibatchFit fit_minibatch(const QNetwork& frozen,
                           std::span<const ExperienceTuple> batch,
                           const TrainConfig& config) {
  MinibatchFit fit{frozen, {}, 0.0};
  fit.targets.reserve(batch.size());
  for (const auto& t : batch)
    fit.targets.push_back(q_target(frozen, t, config.gamma, config.zeta));
  double loss_sum = 0.0;
  for (std::size_t e = 0; e < config.epochs; ++e)
    loss_sum += train_step(fit.network, batch, fit.targets, config.learning_rate);
  fit.mean_loss = loss_sum / static_cast<double>(config.epochs);
  return fit;
}

// ---------------------------------------------------------------------------
// Training loop

TrainResult train(const ObservationModel& model, const Belief& prior,
                  const TrainConfig& config, const EpisodeCallback& on_episode) {
  config.validate();
  if (prior.size() != model.num_hypotheses())
    throw DimensionError("prior size does not match the model");

  Rng rng(config.seed);
  const auto dims =
      q_network_dims(model.num_hypotheses(), model.num_queries(), config.hidden);
  TrainResult result{QNetwork::random(dims, rng), {}};
  QNetwork& net = result.network;
  ReplayMemory memory(config.capacity);
  const auto prior_probs = prior.probabilities();

  for (std::size_t episode = 0; episode < config.episodes; ++episode) {
    const std::size_t truth = sample_categorical(prior_probs, rng);
    Belief belief = prior;
    auto state = augment(belief);
    EpisodeStats stats{episode, truth, 0.0, 0.0};

    for (std::size_t n = 0; n < config.horizon; ++n) {
      std::size_t query;
      if (uniform01(rng) < config.epsilon) {
        query = uniform_index(model.num_queries(), rng);
      } else {
        query = argmax_with_ties(net.forward(state));
      }
      const std::size_t y = sample_categorical(model.row(truth, query), rng);
      Belief next = bayes_update(belief, query, y, model);
      const double r = abllr(next) - abllr(belief);
      auto next_state = augment(next);

      memory.push({state, query, next_state, r});
      stats.cumulative_reward += r;
      belief = std::move(next);
      state = std::move(next_state);

      const auto batch = memory.sample(config.minibatch_size, rng);
      try {
        auto fit = fit_minibatch(net, batch, config);
        net = std::move(fit.network);
        stats.mean_loss += fit.mean_loss;
      } catch (const TrainingDivergenceError&) {
        throw TrainingDivergenceError(
            "Q-network loss became non-finite in episode " +
                std::to_string(episode),
            episode);
      }
    }
    stats.mean_loss /= static_cast<double>(config.horizon);
    result.log.push_back(stats);
    if (on_episode) on_episode(stats);
  }
  return result;
}

}  // namespace ahtlab
