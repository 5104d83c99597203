#include "ahtlab/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ahtlab/errors.hpp"

namespace ahtlab {

PayoffMatrix::PayoffMatrix(std::size_t rows, std::size_t cols,
                           std::vector<double> entries)
    : rows(rows), cols(cols), entries(std::move(entries)) {
  if (this->entries.size() != rows * cols)
    throw DimensionError("payoff matrix entry count does not match its shape");
}

PayoffMatrix::PayoffMatrix(const std::vector<std::vector<double>>& nested) {
  rows = nested.size();
  cols = rows == 0 ? 0 : nested.front().size();
  for (const auto& r : nested) {
    if (r.size() != cols) throw DimensionError("ragged payoff matrix");
    entries.insert(entries.end(), r.begin(), r.end());
  }
}

KlPayoffMatrix kl_payoff_matrix(const ObservationModel& model,
                                std::size_t hypothesis) {
  if (hypothesis >= model.num_hypotheses())
    throw DimensionError("hypothesis index out of range");
  KlPayoffMatrix m;
  m.hypothesis = hypothesis;
  for (std::size_t j = 0; j < model.num_hypotheses(); ++j)
    if (j != hypothesis) m.alternates.push_back(j);

  std::vector<double> entries;
  entries.reserve(model.num_queries() * m.alternates.size());
  for (std::size_t u = 0; u < model.num_queries(); ++u)
    for (std::size_t j : m.alternates)
      entries.push_back(kl_divergence(model.row(hypothesis, u), model.row(j, u)));
  m.payoffs = PayoffMatrix(model.num_queries(), m.alternates.size(),
                           std::move(entries));
  return m;
}

namespace {

std::size_t argmax_lowest(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) -
                                  v.begin());
}

std::size_t argmin_lowest(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) -
                                  v.begin());
}

struct CappedGame {
  std::size_t rows;
  std::size_t cols;
  std::vector<double> m;  // row-major, entries in [0, kPayoffCap]

  double at(std::size_t r, std::size_t c) const { return m[r * cols + c]; }
};

CappedGame cap_payoffs(const PayoffMatrix& payoffs) {
  if (payoffs.rows == 0 || payoffs.cols == 0)
    throw DimensionError("payoff matrix must be non-empty");
  CappedGame g{payoffs.rows, payoffs.cols, payoffs.entries};
  for (double& x : g.m) {
    if (std::isnan(x) || x < 0.0)
      throw ValidationError("payoffs must be non-negative numbers");
    x = std::min(x, kPayoffCap);
  }
  return g;
}

// Value guaranteed by alpha, and the duality gap against sigma.
void certify(const CappedGame& g, const std::vector<double>& alpha,
             const std::vector<double>& sigma, GameSolution& sol) {
  double lower = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < g.cols; ++j) {
    double s = 0.0;
    for (std::size_t u = 0; u < g.rows; ++u) s += alpha[u] * g.at(u, j);
    lower = std::min(lower, s);
  }
  double upper = -std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < g.rows; ++u) {
    double s = 0.0;
    for (std::size_t j = 0; j < g.cols; ++j) s += sigma[j] * g.at(u, j);
    upper = std::max(upper, s);
  }
  sol.alpha = alpha;
  sol.value = lower;
  sol.gap = std::max(0.0, upper - lower);
}

[[noreturn]] void fail(const char* method, const SolverOptions& options,
                       double gap, std::size_t iterations) {
  throw ConvergenceError(std::string(method) + " did not reach duality gap " +
                             std::to_string(options.tolerance) + " within " +
                             std::to_string(iterations) +
                             " iterations (gap " + std::to_string(gap) + ")",
                         gap, iterations);
}

GameSolution fictitious_play(const CappedGame& g, const SolverOptions& options) {
  const std::size_t nr = g.rows;
  const std::size_t nc = g.cols;

  // row_total[u] = sum over past column plays of M[u][j];
  // col_total[j] = sum over past row plays of M[u][j].
  std::vector<double> row_total(nr, 0.0);
  std::vector<double> col_total(nc, 0.0);
  std::vector<std::size_t> row_count(nr, 0);
  std::vector<std::size_t> col_count(nc, 0);

  // Opening move: best responses to the uniform mixtures.
  std::vector<double> vs_uniform_col(nr, 0.0);
  std::vector<double> vs_uniform_row(nc, 0.0);
  for (std::size_t u = 0; u < nr; ++u)
    for (std::size_t j = 0; j < nc; ++j) {
      vs_uniform_col[u] += g.at(u, j);
      vs_uniform_row[j] += g.at(u, j);
    }
  std::size_t row_play = argmax_lowest(vs_uniform_col);
  std::size_t col_play = argmin_lowest(vs_uniform_row);

  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t <= options.max_iterations; ++t) {
    ++row_count[row_play];
    ++col_count[col_play];
    for (std::size_t u = 0; u < nr; ++u) row_total[u] += g.at(u, col_play);
    for (std::size_t j = 0; j < nc; ++j) col_total[j] += g.at(row_play, j);

    const std::size_t best_row = argmax_lowest(row_total);
    const std::size_t best_col = argmin_lowest(col_total);
    gap = (row_total[best_row] - col_total[best_col]) / static_cast<double>(t);

    if (gap <= options.tolerance) {
      const double inv_t = 1.0 / static_cast<double>(t);
      std::vector<double> alpha(nr), sigma(nc);
      for (std::size_t u = 0; u < nr; ++u)
        alpha[u] = static_cast<double>(row_count[u]) * inv_t;
      for (std::size_t j = 0; j < nc; ++j)
        sigma[j] = static_cast<double>(col_count[j]) * inv_t;
      GameSolution sol;
      certify(g, alpha, sigma, sol);
      sol.iterations = t;
      return sol;
    }
    row_play = best_row;
    col_play = best_col;
  }
  fail("fictitious play", options, gap, options.max_iterations);
}

// The shifted game M' = M + shift has strictly positive entries, so its
// value is positive and the minimizer's program
//   max sum(y)  s.t.  M' y <= 1,  y >= 0
// starts feasible at y = 0 with the slack basis. At the optimum sigma is
// y / sum(y), and the reduced costs of the slacks give the maximizer's x
// with alpha = x / sum(x).
GameSolution simplex(const CappedGame& g, const SolverOptions& options) {
  const std::size_t nr = g.rows;
  const std::size_t nc = g.cols;
  const double shift = 1.0 - *std::min_element(g.m.begin(), g.m.end());

  // Tableau rows 0..nr-1 are constraints, row nr is the objective.
  // Columns 0..nc-1 are y, nc..nc+nr-1 are slacks, the last is the RHS.
  const std::size_t width = nc + nr + 1;
  std::vector<double> t((nr + 1) * width, 0.0);
  auto at = [&](std::size_t r, std::size_t c) -> double& { return t[r * width + c]; };
  for (std::size_t u = 0; u < nr; ++u) {
    for (std::size_t j = 0; j < nc; ++j) at(u, j) = g.at(u, j) + shift;
    at(u, nc + u) = 1.0;
    at(u, width - 1) = 1.0;
  }
  for (std::size_t j = 0; j < nc; ++j) at(nr, j) = -1.0;

  std::vector<std::size_t> basis(nr);
  for (std::size_t u = 0; u < nr; ++u) basis[u] = nc + u;

  const double eps = 1e-12;
  std::size_t pivots = 0;
  for (;; ++pivots) {
    // Bland's rule: lowest-index improving column.
    std::size_t enter = width;
    for (std::size_t c = 0; c + 1 < width; ++c)
      if (at(nr, c) < -eps) {
        enter = c;
        break;
      }
    if (enter == width) break;
    if (pivots >= options.max_iterations)
      fail("simplex", options, std::numeric_limits<double>::infinity(), pivots);

    std::size_t leave = nr;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < nr; ++r) {
      const double a = at(r, enter);
      if (a <= eps) continue;
      const double ratio = at(r, width - 1) / a;
      if (ratio < best_ratio - eps ||
          (ratio <= best_ratio + eps && leave < nr && basis[r] < basis[leave])) {
        best_ratio = std::min(best_ratio, ratio);
        leave = r;
      }
    }
    // Bounded: every entry of M' is at least 1.
    if (leave == nr) throw Error("simplex: unbounded program");

    const double p = at(leave, enter);
    for (std::size_t c = 0; c < width; ++c) at(leave, c) /= p;
    for (std::size_t r = 0; r <= nr; ++r) {
      if (r == leave) continue;
      const double f = at(r, enter);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < width; ++c) at(r, c) -= f * at(leave, c);
    }
    basis[leave] = enter;
  }

  std::vector<double> y(nc, 0.0), x(nr, 0.0);
  for (std::size_t r = 0; r < nr; ++r)
    if (basis[r] < nc) y[basis[r]] = std::max(0.0, at(r, width - 1));
  for (std::size_t u = 0; u < nr; ++u) x[u] = std::max(0.0, at(nr, nc + u));
  const double sy = std::accumulate(y.begin(), y.end(), 0.0);
  const double sx = std::accumulate(x.begin(), x.end(), 0.0);
  if (!(sy > 0.0) || !(sx > 0.0)) throw Error("simplex: degenerate optimum");
  for (double& v : y) v /= sy;
  for (double& v : x) v /= sx;

  GameSolution sol;
  certify(g, x, y, sol);
  sol.iterations = pivots;
  if (sol.gap > options.tolerance) fail("simplex", options, sol.gap, pivots);
  return sol;
}

}  // namespace

GameSolution solve_zero_sum(const PayoffMatrix& payoffs,
                            const SolverOptions& options) {
  if (!(options.tolerance > 0.0))
    throw ValidationError("solver tolerance must be positive");
  const CappedGame g = cap_payoffs(payoffs);
  switch (options.method) {
    case SolverMethod::simplex:
      return simplex(g, options);
    case SolverMethod::fictitious_play:
      return fictitious_play(g, options);
  }
  throw ValidationError("unknown solver method");
}

GameSolution optimal_rate(const ObservationModel& model, std::size_t hypothesis,
                          const SolverOptions& options) {
  return solve_zero_sum(kl_payoff_matrix(model, hypothesis), options);
}

}  // namespace ahtlab
