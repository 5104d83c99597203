#pragma once

// Observation models, beliefs and the confidence measures built on them.
//
// All logarithms are natural; confidences and rates are in nats.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace ahtlab {

/// Conditional observation tables p_h^u(y) for a finite testing problem.
///
/// Probabilities are stored flat in [h][u][y] order. Construction validates
/// that every entry lies in [0, 1], every (h, u) row sums to one within 1e-9,
/// and that there are at least two hypotheses, one query and two outcomes.
class ObservationModel {
 public:
  static constexpr double kRowSumTolerance = 1e-9;

  ObservationModel(std::size_t num_hypotheses, std::size_t num_queries,
                   std::size_t num_observations, std::vector<double> probs);

  /// tables[h][u] is the outcome distribution of query u under hypothesis h.
  explicit ObservationModel(
      const std::vector<std::vector<std::vector<double>>>& tables);

  std::size_t num_hypotheses() const noexcept { return num_hypotheses_; }
  std::size_t num_queries() const noexcept { return num_queries_; }
  std::size_t num_observations() const noexcept { return num_observations_; }

  double probability(std::size_t h, std::size_t u, std::size_t y) const;
  double log_probability(std::size_t h, std::size_t u, std::size_t y) const;
  std::span<const double> row(std::size_t h, std::size_t u) const;

  std::span<const double> flat() const noexcept { return probs_; }

  bool operator==(const ObservationModel& other) const = default;

 private:
  std::size_t offset(std::size_t h, std::size_t u) const;
  void check_indices(std::size_t h, std::size_t u, std::size_t y) const;

  std::size_t num_hypotheses_;
  std::size_t num_queries_;
  std::size_t num_observations_;
  std::vector<double> probs_;
  std::vector<double> log_probs_;
};

/// Posterior over hypotheses.
///
/// The belief is held as normalized log-probabilities so that alternates
/// driven far below double-precision range by long trajectories keep exact
/// log-odds. Probabilities are reported by exponentiating on demand.
class Belief {
 public:
  static constexpr double kSumTolerance = 1e-9;

  static Belief uniform(std::size_t num_hypotheses);
  static Belief point_mass(std::size_t num_hypotheses, std::size_t h);
  /// Validates non-negativity and unit sum (within kSumTolerance), then
  /// renormalizes.
  static Belief from_probabilities(std::span<const double> probs);
  /// Normalizes arbitrary log-weights; at least one must be finite.
  static Belief from_log_weights(std::vector<double> log_weights);

  std::size_t size() const noexcept { return log_probs_.size(); }

  double probability(std::size_t h) const;
  double log_probability(std::size_t h) const;
  std::vector<double> probabilities() const;
  std::span<const double> log_probabilities() const noexcept {
    return log_probs_;
  }

  /// log(1 - rho_h), evaluated from the other entries without cancellation.
  double log_complement(std::size_t h) const;

  /// Most likely hypothesis; ties go to the lowest index.
  std::size_t leader() const noexcept;

  bool operator==(const Belief& other) const = default;

 private:
  explicit Belief(std::vector<double> log_probs)
      : log_probs_(std::move(log_probs)) {}

  std::vector<double> log_probs_;
};

/// Smallest probability (and smallest complement) admitted when forming
/// log-odds. Bounds every confidence by kMaxConfidence in magnitude.
inline constexpr double kMinBeliefProbability = 1e-300;
inline constexpr double kMaxConfidence = 690.7755278982137;  // -log(1e-300)

/// Returned by kl_divergence when p puts mass where q has none.
inline constexpr double kInfiniteDivergence =
    std::numeric_limits<double>::infinity();

/// D(p || q) in nats. Throws DimensionError on a length mismatch.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// Bayesian log-likelihood ratio C_h(rho) = log(rho_h / (1 - rho_h)), with
/// both rho_h and its complement floored at kMinBeliefProbability.
double bllr(const Belief& belief, std::size_t h);

/// Belief-weighted average of the per-hypothesis log-likelihood ratios.
double abllr(const Belief& belief);

/// Bayes' rule after observing y in response to query u.
/// Throws DegenerateObservationError when y has zero marginal probability.
Belief bayes_update(const Belief& belief, std::size_t u, std::size_t y,
                    const ObservationModel& model);

/// Predictive distribution of the outcome of query u.
std::vector<double> observation_marginal(const Belief& belief, std::size_t u,
                                         const ObservationModel& model);

/// Instantaneous reward: change in abllr caused by the update (u, y).
double reward(const Belief& belief, std::size_t u, std::size_t y,
              const ObservationModel& model);

/// Belief over the non-leading hypotheses renormalized to sum to one, with
/// a zero at the leader. A point-mass belief yields the uniform distribution
/// over the alternates.
std::vector<double> normalized_alternate(const Belief& belief);

}  // namespace ahtlab
