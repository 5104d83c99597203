#include "ahtlab/sim.hpp"

#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "ahtlab/errors.hpp"

namespace ahtlab {

namespace {

std::size_t resolve_threads(std::size_t requested, std::size_t jobs) {
  std::size_t t = requested ? requested : std::thread::hardware_concurrency();
  if (t == 0) t = 1;
  return std::max<std::size_t>(1, std::min(t, jobs));
}

// Runs body(e) for e in [0, jobs) over a fixed striding of worker threads.
template <typename Body>
void parallel_for(std::size_t jobs, std::size_t threads, Body body) {
  threads = resolve_threads(threads, jobs);
  if (threads <= 1) {
    for (std::size_t e = 0; e < jobs; ++e) body(e);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t e = t; e < jobs; e += threads) body(e);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

void check_episode_args(const ObservationModel& model, std::size_t hypothesis,
                        const Belief& prior) {
  if (hypothesis >= model.num_hypotheses())
    throw DimensionError("hypothesis index out of range");
  if (prior.size() != model.num_hypotheses())
    throw DimensionError("prior size does not match the model");
}

// Steps an episode, calling visit(step, query, y, next_belief) after each
// transition.
template <typename Visit>
void rollout(const Policy& policy, const ObservationModel& model,
             std::size_t hypothesis, const Belief& prior, std::size_t horizon,
             Rng& rng, Visit visit) {
  Belief belief = prior;
  for (std::size_t n = 0; n < horizon; ++n) {
    const std::size_t u = policy.select(belief, rng).query;
    if (u >= model.num_queries())
      throw DimensionError("policy selected query " + std::to_string(u) +
                           " outside the model");
    const std::size_t y = sample_observation(model, hypothesis, u, rng);
    Belief next = bayes_update(belief, u, y, model);
    visit(n, u, y, belief, next);
    belief = std::move(next);
  }
}

}  // namespace

std::size_t sample_observation(const ObservationModel& model, std::size_t h,
                               std::size_t u, Rng& rng) {
  return sample_categorical(model.row(h, u), rng);
}

EpisodeTrace run_episode(const Policy& policy, const ObservationModel& model,
                         std::size_t hypothesis, const Belief& prior,
                         std::size_t horizon, Rng& rng) {
  check_episode_args(model, hypothesis, prior);
  EpisodeTrace trace;
  trace.hypothesis = hypothesis;
  trace.queries.reserve(horizon);
  trace.observations.reserve(horizon);
  trace.rewards.reserve(horizon);
  trace.beliefs.reserve(horizon + 1);
  trace.confidence_on_truth.reserve(horizon + 1);
  trace.beliefs.push_back(prior);
  trace.confidence_on_truth.push_back(bllr(prior, hypothesis));

  double c_prev = abllr(prior);
  rollout(policy, model, hypothesis, prior, horizon, rng,
          [&](std::size_t, std::size_t u, std::size_t y, const Belief&,
              const Belief& next) {
            const double c_next = abllr(next);
            trace.queries.push_back(u);
            trace.observations.push_back(y);
            trace.rewards.push_back(c_next - c_prev);
            trace.confidence_on_truth.push_back(bllr(next, hypothesis));
            trace.beliefs.push_back(next);
            c_prev = c_next;
          });
  return trace;
}

RateCurve evaluate_policy(const Policy& policy, const ObservationModel& model,
                          const Belief& prior, std::size_t hypothesis,
                          std::size_t horizon, std::size_t num_episodes,
                          std::uint64_t seed, const EvaluationOptions& options) {
  check_episode_args(model, hypothesis, prior);
  if (num_episodes == 0) throw ValidationError("need at least one episode");

  RateCurve curve;
  curve.hypothesis = hypothesis;
  curve.num_episodes = num_episodes;
  curve.bound = optimal_rate(model, hypothesis, options.game).value;

  const auto window = options.query_window;
  if (window && (window->first == 0 || window->first > window->last))
    throw ValidationError("query window must satisfy 1 <= first <= last");
  const std::size_t nq = model.num_queries();

  // gains[e * horizon + n] = C_h(rho(n + 2)) - C_h(rho(1)) in 1-based time.
  std::vector<double> gains(num_episodes * horizon);
  std::vector<std::uint32_t> counts(window ? num_episodes * nq : 0, 0);
  const double c0 = bllr(prior, hypothesis);
  parallel_for(num_episodes, options.threads, [&](std::size_t e) {
    Rng rng(derive_seed(seed, e));
    double* row = gains.data() + e * horizon;
    std::uint32_t* tally = window ? counts.data() + e * nq : nullptr;
    rollout(policy, model, hypothesis, prior, horizon, rng,
            [&](std::size_t n, std::size_t u, std::size_t, const Belief&,
                const Belief& next) {
              row[n] = bllr(next, hypothesis) - c0;
              if (tally && n + 1 >= window->first && n + 1 <= window->last) ++tally[u];
            });
  });

  if (window) {
    curve.query_frequency.assign(nq, 0.0);
    double total = 0.0;
    for (std::size_t e = 0; e < num_episodes; ++e)
      for (std::size_t u = 0; u < nq; ++u) {
        curve.query_frequency[u] += counts[e * nq + u];
        total += counts[e * nq + u];
      }
    if (total > 0.0)
      for (double& f : curve.query_frequency) f /= total;
  }

  const double count = static_cast<double>(num_episodes);
  curve.horizon.resize(horizon);
  curve.mean_rate.resize(horizon);
  curve.std_error.resize(horizon);
  for (std::size_t n = 0; n < horizon; ++n) {
    const double steps = static_cast<double>(n + 1);
    double sum = 0.0;
    for (std::size_t e = 0; e < num_episodes; ++e) sum += gains[e * horizon + n] / steps;
    const double mean = sum / count;
    double ss = 0.0;
    for (std::size_t e = 0; e < num_episodes; ++e) {
      const double d = gains[e * horizon + n] / steps - mean;
      ss += d * d;
    }
    curve.horizon[n] = n + 1;
    curve.mean_rate[n] = mean;
    curve.std_error[n] =
        num_episodes > 1 ? std::sqrt(ss / (count - 1.0) / count) : 0.0;
  }
  return curve;
}

std::vector<EpisodeTrace> simulate_episodes(
    const Policy& policy, const ObservationModel& model, const Belief& prior,
    std::size_t hypothesis, std::size_t horizon, std::size_t num_episodes,
    std::uint64_t seed, std::size_t threads) {
  check_episode_args(model, hypothesis, prior);
  std::vector<EpisodeTrace> traces(num_episodes);
  parallel_for(num_episodes, threads, [&](std::size_t e) {
    Rng rng(derive_seed(seed, e));
    traces[e] = run_episode(policy, model, hypothesis, prior, horizon, rng);
  });
  return traces;
}

std::vector<double> query_frequency(std::span<const EpisodeTrace> traces,
                                    std::size_t num_queries, std::size_t first,
                                    std::size_t last) {
  if (first == 0 || first > last)
    throw ValidationError("query window must satisfy 1 <= first <= last");
  std::vector<double> freq(num_queries, 0.0);
  double total = 0.0;
  for (const auto& t : traces) {
    for (std::size_t n = first; n <= last && n <= t.queries.size(); ++n) {
      const std::size_t u = t.queries[n - 1];
      if (u >= num_queries) throw DimensionError("query index out of range");
      freq[u] += 1.0;
      total += 1.0;
    }
  }
  if (total > 0.0)
    for (double& f : freq) f /= total;
  return freq;
}

}  // namespace ahtlab
