#pragma once

// Subcommand implementations behind the ahtlab executable. Each returns a
// process exit code and writes human-readable output to `out`.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ahtlab/dqn.hpp"
#include "ahtlab/errors.hpp"

namespace ahtlab::cli {

inline constexpr std::uint64_t kDefaultSeed = 20180801;
inline constexpr std::size_t kDefaultEpisodes = 10000;
inline constexpr std::size_t kQuickEpisodes = 1000;
inline constexpr std::size_t kDefaultHorizon = 200;

/// Bad command-line usage (exit code 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

struct SolveGameOptions {
  std::string model = "setup1";
  std::optional<std::size_t> hypothesis;  // unset = every hypothesis
  std::string method = "simplex";         // or fictitious-play
  double tolerance = 1e-4;
  std::size_t max_iterations = 200000;
  std::string out;  // CSV path, optional
};

struct TrainOptions {
  std::string model = "setup1";
  TrainConfig config;
  std::string out;  // network path, required
  std::string log;  // default: <out>.log.csv
  bool quiet = false;
};

struct EvaluateOptions {
  std::string model = "setup1";
  std::vector<std::string> policies;  // evaluate defaults to ejs
  std::string network;                // required for dqn
  double rho_bar = 0.7;
  std::optional<std::size_t> hypothesis;  // unset = every hypothesis
  std::size_t horizon = kDefaultHorizon;
  std::size_t episodes = kDefaultEpisodes;
  bool quick = false;  // 1000 episodes
  std::uint64_t seed = kDefaultSeed;
  std::size_t threads = 0;
  std::string out;       // rate-curve CSV; stdout when empty
  std::string svg;       // optional chart
  std::string freq_out;  // optional query-frequency CSV
  std::size_t freq_first = 0;  // 0 = second half of the horizon
  std::size_t freq_last = 0;
};

int run_solve_game(const SolveGameOptions& opt, std::ostream& out);
int run_train(const TrainOptions& opt, std::ostream& out);
/// Every policy sees the same episode seeds.
int run_evaluate(const EvaluateOptions& opt, std::ostream& out);
/// Policy k (0-based, flag order) is evaluated with seed + k; prints a
/// summary of the terminal rate against the bound.
int run_compare(const EvaluateOptions& opt, std::ostream& out);
int run_dump_preset(const std::string& name, const std::string& out_path, std::ostream& out);

}  // namespace ahtlab::cli
