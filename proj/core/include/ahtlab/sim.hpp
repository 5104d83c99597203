#pragma once

// Episode simulation and Monte-Carlo estimation of confidence-rate curves.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ahtlab/game.hpp"
#include "ahtlab/model.hpp"
#include "ahtlab/policies.hpp"
#include "ahtlab/rng.hpp"

namespace ahtlab {

/// One episode with the true hypothesis fixed. Step n (0-based) issues
/// queries[n], observes observations[n] and moves beliefs[n] to
/// beliefs[n + 1].
struct EpisodeTrace {
  std::size_t hypothesis = 0;
  std::vector<std::size_t> queries;
  std::vector<std::size_t> observations;
  std::vector<Belief> beliefs;                // length N + 1
  std::vector<double> rewards;                // abllr increments
  std::vector<double> confidence_on_truth;    // C_h(beliefs[n]), length N + 1
};

/// Estimated R_n = (1/n) E[C_h(rho(n+1)) - C_h(rho(1)) | H = h] for n = 1..N.
struct RateCurve {
  std::size_t hypothesis = 0;
  std::size_t num_episodes = 0;
  std::vector<std::size_t> horizon;  // 1..N
  std::vector<double> mean_rate;     // nats per sample
  std::vector<double> std_error;     // standard error of mean_rate
  double bound = 0.0;                // R*_h
  std::vector<double> query_frequency;  // filled when a window is requested
};

struct QueryWindow {
  std::size_t first = 1;  // 1-based, inclusive
  std::size_t last = 1;
};

struct EvaluationOptions {
  std::size_t threads = 0;  // 0 = hardware concurrency
  SolverOptions game;       // used for the bound
  std::optional<QueryWindow> query_window;  // tally queries over these steps
};

/// Draws y ~ p_h^u by inverse CDF on one uniform variate.
std::size_t sample_observation(const ObservationModel& model, std::size_t h,
                               std::size_t u, Rng& rng);

EpisodeTrace run_episode(const Policy& policy, const ObservationModel& model,
                         std::size_t hypothesis, const Belief& prior,
                         std::size_t horizon, Rng& rng);

/// Episode e uses an RNG seeded with derive_seed(seed, e), so results do not
/// depend on the number of worker threads. With a query window set, the
/// curve also carries the pooled query distribution over that window, equal
/// to query_frequency() on the same episodes.
RateCurve evaluate_policy(const Policy& policy, const ObservationModel& model,
                          const Belief& prior, std::size_t hypothesis,
                          std::size_t horizon, std::size_t num_episodes,
                          std::uint64_t seed,
                          const EvaluationOptions& options = {});

/// Same episodes as evaluate_policy, returned as full traces.
std::vector<EpisodeTrace> simulate_episodes(
    const Policy& policy, const ObservationModel& model, const Belief& prior,
    std::size_t hypothesis, std::size_t horizon, std::size_t num_episodes,
    std::uint64_t seed, std::size_t threads = 0);

/// Empirical query distribution over time steps first..last (1-based,
/// inclusive) pooled across traces.
std::vector<double> query_frequency(std::span<const EpisodeTrace> traces,
                                    std::size_t num_queries, std::size_t first,
                                    std::size_t last);

}  // namespace ahtlab
