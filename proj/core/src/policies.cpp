#include "ahtlab/policies.hpp"

#include <cmath>

#include "ahtlab/errors.hpp"

namespace ahtlab {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::random: return "random";
    case PolicyKind::ejs: return "ejs";
    case PolicyKind::ope: return "ope";
    case PolicyKind::heu: return "heu";
    case PolicyKind::dqn_greedy: return "dqn";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
  if (name == "random") return PolicyKind::random;
  if (name == "ejs") return PolicyKind::ejs;
  if (name == "ope") return PolicyKind::ope;
  if (name == "heu") return PolicyKind::heu;
  if (name == "dqn" || name == "dqn-greedy") return PolicyKind::dqn_greedy;
  throw ValidationError("unknown policy '" + std::string(name) + "'");
}

void PolicyConfig::validate(std::size_t num_hypotheses) const {
  const double lo = 1.0 / static_cast<double>(num_hypotheses);
  if (!(verification_threshold > lo && verification_threshold < 1.0))
    throw ValidationError("verification threshold must lie in (1/|H|, 1)");
  if (kind == PolicyKind::dqn_greedy && !network)
    throw ValidationError("dqn policy requires a trained network");
}

bool in_verification_phase(const Belief& belief, double threshold) {
  return belief.log_probability(belief.leader()) > std::log(threshold);
}

double ejs_score(const Belief& belief, std::size_t u,
                 const ObservationModel& model) {
  const auto m = observation_marginal(belief, u, model);
  const double base = abllr(belief);
  double score = 0.0;
  for (std::size_t y = 0; y < m.size(); ++y) {
    if (m[y] <= 0.0) continue;
    score += m[y] * (abllr(bayes_update(belief, u, y, model)) - base);
  }
  return score;
}

PolicyDecision ejs_select(const Belief& belief, const ObservationModel& model) {
  PolicyDecision d;
  d.scores.resize(model.num_queries());
  for (std::size_t u = 0; u < model.num_queries(); ++u)
    d.scores[u] = ejs_score(belief, u, model);
  d.query = argmax_with_ties(d.scores);
  return d;
}

double heu_score(const Belief& belief, std::size_t u,
                 const KlPayoffMatrix& payoffs) {
  if (u >= payoffs.payoffs.rows) throw DimensionError("query index out of range");
  const auto alt = normalized_alternate(belief);
  double score = 0.0;
  for (std::size_t c = 0; c < payoffs.alternates.size(); ++c) {
    const double w = alt.at(payoffs.alternates[c]);
    if (w > 0.0) score += w * payoffs.payoffs(u, c);
  }
  return score;
}

namespace {

PolicyDecision heu_verify(const Belief& belief, const KlPayoffMatrix& payoffs) {
  PolicyDecision d;
  d.scores.resize(payoffs.payoffs.rows);
  for (std::size_t u = 0; u < d.scores.size(); ++u)
    d.scores[u] = heu_score(belief, u, payoffs);
  d.query = argmax_with_ties(d.scores);
  return d;
}

}  // namespace

PolicyDecision heu_select(const Belief& belief, const ObservationModel& model,
                          double verification_threshold) {
  if (!in_verification_phase(belief, verification_threshold))
    return ejs_select(belief, model);
  return heu_verify(belief, kl_payoff_matrix(model, belief.leader()));
}

PolicyDecision random_select(const ObservationModel& model, Rng& rng) {
  return {uniform_index(model.num_queries(), rng), {}};
}

PolicyDecision dqn_greedy_select(const Belief& belief, const QNetwork& network) {
  PolicyDecision d;
  d.scores = network.forward(augment(belief));
  d.query = argmax_with_ties(d.scores);
  return d;
}

// ---------------------------------------------------------------------------

OpePolicy::OpePolicy(ObservationModel model, double verification_threshold,
                     SolverOptions game)
    : model_(std::move(model)),
      threshold_(verification_threshold),
      game_(game),
      once_(std::make_unique<std::once_flag[]>(model_.num_hypotheses())),
      cache_(model_.num_hypotheses()) {}

const GameSolution& OpePolicy::verification_mixture(std::size_t hypothesis) const {
  if (hypothesis >= cache_.size()) throw DimensionError("hypothesis index out of range");
  std::call_once(once_[hypothesis], [&] {
    cache_[hypothesis] = optimal_rate(model_, hypothesis, game_);
  });
  return *cache_[hypothesis];
}

PolicyDecision OpePolicy::select(const Belief& belief, Rng& rng) const {
  if (!in_verification_phase(belief, threshold_))
    return ejs_select(belief, model_);
  const auto& sol = verification_mixture(belief.leader());
  return {sample_categorical(sol.alpha, rng), sol.alpha};
}

HeuPolicy::HeuPolicy(ObservationModel model, double verification_threshold)
    : model_(std::move(model)), threshold_(verification_threshold) {
  for (std::size_t i = 0; i < model_.num_hypotheses(); ++i)
    payoffs_.push_back(kl_payoff_matrix(model_, i));
}

PolicyDecision HeuPolicy::select(const Belief& belief, Rng&) const {
  if (!in_verification_phase(belief, threshold_))
    return ejs_select(belief, model_);
  return heu_verify(belief, payoffs_[belief.leader()]);
}

DqnGreedyPolicy::DqnGreedyPolicy(std::shared_ptr<const QNetwork> network)
    : network_(std::move(network)) {
  if (!network_) throw ValidationError("dqn policy requires a network");
}

std::unique_ptr<Policy> make_policy(const ObservationModel& model,
                                    const PolicyConfig& config) {
  config.validate(model.num_hypotheses());
  switch (config.kind) {
    case PolicyKind::random:
      return std::make_unique<RandomPolicy>(model);
    case PolicyKind::ejs:
      return std::make_unique<EjsPolicy>(model);
    case PolicyKind::ope:
      return std::make_unique<OpePolicy>(model, config.verification_threshold,
                                         config.game);
    case PolicyKind::heu:
      return std::make_unique<HeuPolicy>(model, config.verification_threshold);
    case PolicyKind::dqn_greedy:
      if (config.network->input_size() != 2 * model.num_hypotheses() ||
          config.network->output_size() != model.num_queries())
        throw DimensionError("network shape does not match the model");
      return std::make_unique<DqnGreedyPolicy>(config.network);
  }
  throw ValidationError("unknown policy kind");
}

}  // namespace ahtlab
