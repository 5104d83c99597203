#pragma once

// Query-selection policies.
//
// Every policy maps the current belief (plus an explicit RNG for the
// randomized ones) to a query index. Score ties always resolve to the lowest
// query index.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ahtlab/game.hpp"
#include "ahtlab/model.hpp"
#include "ahtlab/network.hpp"
#include "ahtlab/rng.hpp"

namespace ahtlab {

enum class PolicyKind { random, ejs, ope, heu, dqn_greedy };

std::string_view to_string(PolicyKind kind);
/// Accepts random, ejs, ope, heu, dqn and dqn-greedy.
PolicyKind parse_policy_kind(std::string_view name);

struct PolicyDecision {
  std::size_t query = 0;
  std::vector<double> scores;  // per-query diagnostics, may be empty
};

struct PolicyConfig {
  PolicyKind kind = PolicyKind::ejs;
  double verification_threshold = 0.7;  // rho-bar, used by ope and heu
  SolverOptions game;                   // ope
  std::shared_ptr<const QNetwork> network;  // dqn_greedy
  std::uint64_t seed = 0;

  /// Requires rho-bar in (1/|H|, 1) and a network for dqn_greedy.
  void validate(std::size_t num_hypotheses) const;
};

/// Expected one-step abllr gain of query u (extrinsic Jensen-Shannon).
double ejs_score(const Belief& belief, std::size_t u,
                 const ObservationModel& model);

PolicyDecision ejs_select(const Belief& belief, const ObservationModel& model);

/// sum_{j != i} rho~_j D(p_i^u || p_j^u) with i = payoffs.hypothesis.
double heu_score(const Belief& belief, std::size_t u,
                 const KlPayoffMatrix& payoffs);

/// Verification phase (leader above threshold): best response to the
/// normalized alternate belief. Otherwise EJS.
PolicyDecision heu_select(const Belief& belief, const ObservationModel& model,
                          double verification_threshold);

PolicyDecision random_select(const ObservationModel& model, Rng& rng);

PolicyDecision dqn_greedy_select(const Belief& belief, const QNetwork& network);

/// True when the most likely hypothesis has probability above threshold.
bool in_verification_phase(const Belief& belief, double threshold);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyDecision select(const Belief& belief, Rng& rng) const = 0;
  virtual std::string name() const = 0;
};

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(ObservationModel model) : model_(std::move(model)) {}
  PolicyDecision select(const Belief&, Rng& rng) const override {
    return random_select(model_, rng);
  }
  std::string name() const override { return "random"; }

 private:
  ObservationModel model_;
};

class EjsPolicy final : public Policy {
 public:
  explicit EjsPolicy(ObservationModel model) : model_(std::move(model)) {}
  PolicyDecision select(const Belief& belief, Rng&) const override {
    return ejs_select(belief, model_);
  }
  std::string name() const override { return "ejs"; }

 private:
  ObservationModel model_;
};

/// Open-loop verification: EJS until some rho_i exceeds the threshold, then
/// i.i.d. queries from the equilibrium mixture alpha*_i. Each alpha*_i is
/// solved on first use and cached; the cache fill is thread-safe.
class OpePolicy final : public Policy {
 public:
  OpePolicy(ObservationModel model, double verification_threshold,
            SolverOptions game = {});

  PolicyDecision select(const Belief& belief, Rng& rng) const override;
  std::string name() const override { return "ope"; }

  /// alpha*_i, solving the game if not yet cached.
  const GameSolution& verification_mixture(std::size_t hypothesis) const;

 private:
  ObservationModel model_;
  double threshold_;
  SolverOptions game_;
  std::unique_ptr<std::once_flag[]> once_;
  mutable std::vector<std::optional<GameSolution>> cache_;
};

/// KL zero-sum game heuristic with EJS exploration.
class HeuPolicy final : public Policy {
 public:
  HeuPolicy(ObservationModel model, double verification_threshold);

  PolicyDecision select(const Belief& belief, Rng& rng) const override;
  std::string name() const override { return "heu"; }

 private:
  ObservationModel model_;
  double threshold_;
  std::vector<KlPayoffMatrix> payoffs_;  // one per verified hypothesis
};

class DqnGreedyPolicy final : public Policy {
 public:
  explicit DqnGreedyPolicy(std::shared_ptr<const QNetwork> network);
  PolicyDecision select(const Belief& belief, Rng&) const override {
    return dqn_greedy_select(belief, *network_);
  }
  std::string name() const override { return "dqn"; }

 private:
  std::shared_ptr<const QNetwork> network_;
};

std::unique_ptr<Policy> make_policy(const ObservationModel& model,
                                    const PolicyConfig& config);

}  // namespace ahtlab
