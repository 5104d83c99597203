#include "ahtlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ahtlab/errors.hpp"

namespace ahtlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

// log(sum(exp(x_k))) over the entries selected by `keep`.
template <typename Keep>
double log_sum_exp(std::span<const double> xs, Keep keep) {
  double m = kNegInf;
  for (std::size_t k = 0; k < xs.size(); ++k)
    if (keep(k)) m = std::max(m, xs[k]);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k)
    if (keep(k)) s += std::exp(xs[k] - m);
  return m + std::log(s);
}

std::string row_name(std::size_t h, std::size_t u) {
  return "(h=" + std::to_string(h) + ", u=" + std::to_string(u) + ")";
}

}  // namespace

// ---------------------------------------------------------------------------
// ObservationModel

ObservationModel::ObservationModel(std::size_t num_hypotheses,
                                   std::size_t num_queries,
                                   std::size_t num_observations,
                                   std::vector<double> probs)
    : num_hypotheses_(num_hypotheses),
      num_queries_(num_queries),
      num_observations_(num_observations),
      probs_(std::move(probs)) {
  if (num_hypotheses_ < 2)
    throw ValidationError("observation model needs at least 2 hypotheses");
  if (num_queries_ < 1)
    throw ValidationError("observation model needs at least 1 query");
  if (num_observations_ < 2)
    throw ValidationError("observation model needs at least 2 outcomes");
  if (probs_.size() != num_hypotheses_ * num_queries_ * num_observations_)
    throw DimensionError("observation table has " +
                         std::to_string(probs_.size()) + " entries, expected " +
                         std::to_string(num_hypotheses_ * num_queries_ *
                                        num_observations_));

  for (std::size_t h = 0; h < num_hypotheses_; ++h) {
    for (std::size_t u = 0; u < num_queries_; ++u) {
      double sum = 0.0;
      for (double p : row(h, u)) {
        if (!(p >= 0.0 && p <= 1.0))
          throw ValidationError("probability outside [0, 1] in row " +
                                row_name(h, u));
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance)
        throw ValidationError("row " + row_name(h, u) + " sums to " +
                              std::to_string(sum) + ", expected 1");
    }
  }

  log_probs_.resize(probs_.size());
  std::transform(probs_.begin(), probs_.end(), log_probs_.begin(), safe_log);
}

namespace {

std::vector<double> flatten(
    const std::vector<std::vector<std::vector<double>>>& tables) {
  if (tables.empty() || tables.front().empty() ||
      tables.front().front().empty())
    throw ValidationError("observation tables must be non-empty");
  const std::size_t nq = tables.front().size();
  const std::size_t ny = tables.front().front().size();
  std::vector<double> flat;
  for (std::size_t h = 0; h < tables.size(); ++h) {
    if (tables[h].size() != nq)
      throw DimensionError("hypothesis " + std::to_string(h) + " has " +
                           std::to_string(tables[h].size()) +
                           " query rows, expected " + std::to_string(nq));
    for (std::size_t u = 0; u < nq; ++u) {
      if (tables[h][u].size() != ny)
        throw DimensionError("row " + row_name(h, u) + " has " +
                             std::to_string(tables[h][u].size()) +
                             " outcomes, expected " + std::to_string(ny));
      flat.insert(flat.end(), tables[h][u].begin(), tables[h][u].end());
    }
  }
  return flat;
}

}  // namespace

ObservationModel::ObservationModel(
    const std::vector<std::vector<std::vector<double>>>& tables)
    : ObservationModel(tables.size(),
                       tables.empty() ? 0 : tables.front().size(),
                       tables.empty() || tables.front().empty()
                           ? 0
                           : tables.front().front().size(),
                       flatten(tables)) {}

std::size_t ObservationModel::offset(std::size_t h, std::size_t u) const {
  return (h * num_queries_ + u) * num_observations_;
}

void ObservationModel::check_indices(std::size_t h, std::size_t u,
                                     std::size_t y) const {
  if (h >= num_hypotheses_ || u >= num_queries_ || y >= num_observations_)
    throw DimensionError("observation model index out of range");
}

double ObservationModel::probability(std::size_t h, std::size_t u,
                                     std::size_t y) const {
  check_indices(h, u, y);
  return probs_[offset(h, u) + y];
}

double ObservationModel::log_probability(std::size_t h, std::size_t u,
                                         std::size_t y) const {
  check_indices(h, u, y);
  return log_probs_[offset(h, u) + y];
}

std::span<const double> ObservationModel::row(std::size_t h,
                                              std::size_t u) const {
  check_indices(h, u, 0);
  return std::span<const double>(probs_).subspan(offset(h, u),
                                                 num_observations_);
}

// ---------------------------------------------------------------------------
// Belief

Belief Belief::uniform(std::size_t num_hypotheses) {
  if (num_hypotheses == 0) throw DimensionError("belief must be non-empty");
  return Belief(std::vector<double>(
      num_hypotheses, -std::log(static_cast<double>(num_hypotheses))));
}

Belief Belief::point_mass(std::size_t num_hypotheses, std::size_t h) {
  if (h >= num_hypotheses) throw DimensionError("hypothesis index out of range");
  std::vector<double> lp(num_hypotheses, kNegInf);
  lp[h] = 0.0;
  return Belief(std::move(lp));
}

Belief Belief::from_probabilities(std::span<const double> probs) {
  if (probs.empty()) throw DimensionError("belief must be non-empty");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw ValidationError("belief entries must be finite and non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance)
    throw ValidationError("belief sums to " + std::to_string(sum) +
                          ", expected 1");
  std::vector<double> lp(probs.size());
  for (std::size_t h = 0; h < probs.size(); ++h) lp[h] = safe_log(probs[h] / sum);
  return Belief(std::move(lp));
}

Belief Belief::from_log_weights(std::vector<double> log_weights) {
  if (log_weights.empty()) throw DimensionError("belief must be non-empty");
  for (double w : log_weights)
    if (std::isnan(w) || w == std::numeric_limits<double>::infinity())
      throw ValidationError("log-weights must be finite or -inf");
  const double z =
      log_sum_exp(log_weights, [](std::size_t) { return true; });
  if (z == kNegInf) throw ValidationError("log-weights carry no mass");
  for (double& w : log_weights) w -= z;
  return Belief(std::move(log_weights));
}

double Belief::probability(std::size_t h) const {
  return std::exp(log_probability(h));
}

double Belief::log_probability(std::size_t h) const {
  if (h >= log_probs_.size()) throw DimensionError("hypothesis index out of range");
  return log_probs_[h];
}

std::vector<double> Belief::probabilities() const {
  std::vector<double> p(log_probs_.size());
  std::transform(log_probs_.begin(), log_probs_.end(), p.begin(),
                 [](double l) { return std::exp(l); });
  return p;
}

double Belief::log_complement(std::size_t h) const {
  if (h >= log_probs_.size()) throw DimensionError("hypothesis index out of range");
  return log_sum_exp(log_probs_, [h](std::size_t k) { return k != h; });
}

std::size_t Belief::leader() const noexcept {
  return static_cast<std::size_t>(
      std::max_element(log_probs_.begin(), log_probs_.end()) -
      log_probs_.begin());
}

// ---------------------------------------------------------------------------
// Information measures

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw DimensionError("kl_divergence: distributions differ in length");
  double d = 0.0;
  for (std::size_t y = 0; y < p.size(); ++y) {
    if (p[y] <= 0.0) continue;
    if (q[y] <= 0.0) return kInfiniteDivergence;
    d += p[y] * std::log(p[y] / q[y]);
  }
  return d;
}

double bllr(const Belief& belief, std::size_t h) {
  static const double kLogMin = std::log(kMinBeliefProbability);
  static const double kLogMax = std::log1p(-kMinBeliefProbability);
  const double lp = std::clamp(belief.log_probability(h), kLogMin, kLogMax);
  const double lc = std::clamp(belief.log_complement(h), kLogMin, kLogMax);
  return lp - lc;
}

double abllr(const Belief& belief) {
  double c = 0.0;
  for (std::size_t i = 0; i < belief.size(); ++i) {
    const double p = belief.probability(i);
    if (p > 0.0) c += p * bllr(belief, i);
  }
  return c;
}

Belief bayes_update(const Belief& belief, std::size_t u, std::size_t y,
                    const ObservationModel& model) {
  if (belief.size() != model.num_hypotheses())
    throw DimensionError("belief size does not match the model");
  std::vector<double> w(belief.size());
  for (std::size_t h = 0; h < w.size(); ++h) {
    const double lp = belief.log_probability(h);
    const double ll = model.log_probability(h, u, y);
    w[h] = (lp == kNegInf || ll == kNegInf) ? kNegInf : lp + ll;
  }
  if (std::all_of(w.begin(), w.end(), [](double x) { return x == kNegInf; }))
    throw DegenerateObservationError(
        "observation " + std::to_string(y) + " of query " + std::to_string(u) +
        " is impossible under the current belief");
  return Belief::from_log_weights(std::move(w));
}

std::vector<double> observation_marginal(const Belief& belief, std::size_t u,
                                         const ObservationModel& model) {
  if (belief.size() != model.num_hypotheses())
    throw DimensionError("belief size does not match the model");
  std::vector<double> m(model.num_observations(), 0.0);
  for (std::size_t h = 0; h < belief.size(); ++h) {
    const double rho = belief.probability(h);
    if (rho == 0.0) continue;
    const auto row = model.row(h, u);
    for (std::size_t y = 0; y < m.size(); ++y) m[y] += rho * row[y];
  }
  return m;
}

double reward(const Belief& belief, std::size_t u, std::size_t y,
              const ObservationModel& model) {
  return abllr(bayes_update(belief, u, y, model)) - abllr(belief);
}

std::vector<double> normalized_alternate(const Belief& belief) {
  const std::size_t n = belief.size();
  const std::size_t leader = belief.leader();
  std::vector<double> alt(n, 0.0);
  if (n < 2) return alt;
  const double lc = belief.log_complement(leader);
  if (lc == kNegInf) {
    for (std::size_t j = 0; j < n; ++j)
      if (j != leader) alt[j] = 1.0 / static_cast<double>(n - 1);
    return alt;
  }
  for (std::size_t j = 0; j < n; ++j)
    if (j != leader) alt[j] = std::exp(belief.log_probability(j) - lc);
  return alt;
}

}  // namespace ahtlab
