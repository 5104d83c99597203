#pragma once

// Max-min KL rate for verifying one hypothesis against its alternates.
//
// The maximizing player picks a query, the minimizing player picks an
// alternate hypothesis, and the payoff is D(p_i^u || p_j^u). The game value
// is the best achievable asymptotic confidence rate under hypothesis i and
// the maximizer's equilibrium mixture is the open-loop verification
// distribution.

#include <cstddef>
#include <vector>

#include "ahtlab/model.hpp"

namespace ahtlab {

/// Dense payoff matrix, rows = maximizer actions, columns = minimizer actions.
struct PayoffMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> entries;  // row-major

  PayoffMatrix() = default;
  PayoffMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  explicit PayoffMatrix(const std::vector<std::vector<double>>& nested);

  double operator()(std::size_t r, std::size_t c) const {
    return entries[r * cols + c];
  }
};

/// KL payoffs for verifying `hypothesis`: rows are queries, columns are the
/// alternates in ascending hypothesis order. Entries may be
/// kInfiniteDivergence.
struct KlPayoffMatrix {
  std::size_t hypothesis = 0;
  std::vector<std::size_t> alternates;
  PayoffMatrix payoffs;
};

KlPayoffMatrix kl_payoff_matrix(const ObservationModel& model,
                                std::size_t hypothesis);

struct GameSolution {
  std::vector<double> alpha;  // maximizer mixture over queries
  double value = 0.0;         // min_j sum_u alpha_u M[u][j], nats
  std::size_t iterations = 0;
  double gap = 0.0;           // duality gap at termination
};

enum class SolverMethod {
  simplex,          // exact LP on the shifted game, Bland's pivoting rule
  fictitious_play,  // averaged simultaneous best responses
};

struct SolverOptions {
  SolverMethod method = SolverMethod::simplex;
  double tolerance = 1e-4;
  std::size_t max_iterations = 200000;  // pivots or play rounds
};

/// Payoffs above this are treated as this value by the solver.
inline constexpr double kPayoffCap = 1e6;

/// Solves max_alpha min_j sum_u alpha_u M[u][j].
///
/// Either method returns the maximizer mixture alpha, the value it
/// guarantees, and the duality gap
///   max_u (M sigma)_u - min_j (alpha^T M)_j
/// against the minimizer mixture sigma the method produced. The simplex
/// method is exact up to rounding. Fictitious play starts both players with
/// best responses to the uniform mixture, breaks ties toward the lowest
/// index, and stops once the gap of the empirical mixtures is within
/// tolerance; it converges slowly (roughly 1/sqrt(t)) on games with mixed
/// equilibria. Throws ConvergenceError with the last gap when
/// max_iterations is exhausted or the gap stays above tolerance.
GameSolution solve_zero_sum(const PayoffMatrix& payoffs,
                            const SolverOptions& options = {});

inline GameSolution solve_zero_sum(const KlPayoffMatrix& m,
                                   const SolverOptions& options = {}) {
  return solve_zero_sum(m.payoffs, options);
}

/// R*_i and alpha*_i for the given model.
GameSolution optimal_rate(const ObservationModel& model, std::size_t hypothesis,
                          const SolverOptions& options = {});

}  // namespace ahtlab
