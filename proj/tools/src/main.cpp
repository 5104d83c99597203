#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ahtlab_cli/commands.hpp"
#include "ahtlab_cli/model_file.hpp"

namespace {

using namespace ahtlab::cli;

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stoul(tok));
  return out;
}

void add_model_option(CLI::App* cmd, std::string& model) {
  cmd->add_option("-m,--model", model, "Preset name (" + join(preset_names()) + ") or model file")
      ->capture_default_str();
}

void add_evaluation_options(CLI::App* cmd, EvaluateOptions& o, bool single_hypothesis) {
  add_model_option(cmd, o.model);
  cmd->add_option("-p,--policy", o.policies,
                  "Policies in order: random, ejs, ope, heu, dqn (repeat or comma-separate)");
  cmd->add_option("--network", o.network, "Trained network file for the dqn policy");
  cmd->add_option("--rho-bar", o.rho_bar, "Verification threshold for ope and heu")
      ->capture_default_str();
  auto* h = cmd->add_option_function<std::size_t>(
      "--hypothesis", [&o](std::size_t v) { o.hypothesis = v; }, "True hypothesis index");
  if (!single_hypothesis) {
    auto* all = cmd->add_flag_callback(
        "--all", [&o] { o.hypothesis.reset(); }, "Every hypothesis (default)");
    all->excludes(h);
  } else {
    h->default_str("0");
  }
  cmd->add_option("-N,--horizon", o.horizon, "Samples per episode")->capture_default_str();
  cmd->add_option("-e,--episodes", o.episodes, "Monte-Carlo episodes")->capture_default_str();
  cmd->add_flag("--quick", o.quick, "Use 1000 episodes");
  cmd->add_option("-s,--seed", o.seed, "Master seed")->capture_default_str();
  cmd->add_option("-j,--threads", o.threads, "Worker threads, 0 = all cores")
      ->capture_default_str();
  cmd->add_option("-o,--out", o.out, "Rate-curve CSV path (stdout when omitted)");
  cmd->add_option("--svg", o.svg, "Also write an SVG chart");
  cmd->add_option("--freq-out", o.freq_out, "Also write query frequencies as CSV");
  cmd->add_option("--freq-first", o.freq_first, "First step of the frequency window (1-based)");
  cmd->add_option("--freq-last", o.freq_last, "Last step of the frequency window");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active sequential hypothesis testing laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ahtlab 0.1.0");

  SolveGameOptions game;
  auto* solve = app.add_subcommand("solve-game", "Max-min KL rate and verification mixture");
  add_model_option(solve, game.model);
  auto* gh = solve->add_option_function<std::size_t>(
      "--hypothesis", [&](std::size_t v) { game.hypothesis = v; }, "Hypothesis index");
  solve->add_flag_callback("--all", [&] { game.hypothesis.reset(); }, "Every hypothesis (default)")
      ->excludes(gh);
  solve->add_option("--method", game.method, "simplex or fictitious-play")->capture_default_str();
  solve->add_option("--tol", game.tolerance, "Duality-gap tolerance")->capture_default_str();
  solve->add_option("--max-iters", game.max_iterations, "Pivot or round limit")
      ->capture_default_str();
  solve->add_option("-o,--out", game.out, "CSV path");

  TrainOptions tr;
  std::string hidden = "64,64";
  auto* train = app.add_subcommand("train", "Deep Q-learning over the belief MDP");
  add_model_option(train, tr.model);
  train->add_option("--gamma", tr.config.gamma, "Discount")->capture_default_str();
  train->add_option("--zeta", tr.config.zeta, "Q-update relaxation")->capture_default_str();
  train->add_option("--epsilon", tr.config.epsilon, "Exploration probability")
      ->capture_default_str();
  train->add_option("--lr", tr.config.learning_rate, "Gradient step size")->capture_default_str();
  train->add_option("-e,--episodes", tr.config.episodes, "Training episodes")
      ->capture_default_str();
  train->add_option("-N,--horizon", tr.config.horizon, "Steps per episode")->capture_default_str();
  train->add_option("--minibatch", tr.config.minibatch_size, "Replay minibatch size")
      ->capture_default_str();
  train->add_option("--epochs", tr.config.epochs, "Fitting epochs per step")
      ->capture_default_str();
  train->add_option("--capacity", tr.config.capacity, "Replay capacity")->capture_default_str();
  train->add_option("--hidden", hidden, "Hidden layer widths, comma separated")
      ->capture_default_str();
  train->add_option("-s,--seed", tr.config.seed, "Seed")->capture_default_str();
  train->add_option("-o,--out", tr.out, "Network file")->required();
  train->add_option("--log", tr.log, "Training log CSV (default <out>.log.csv)");
  train->add_flag("-q,--quiet", tr.quiet, "No progress output");

  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "Monte-Carlo confidence-rate curves");
  add_evaluation_options(evaluate, ev, false);

  EvaluateOptions cmp;
  auto* compare = app.add_subcommand("compare", "Evaluate several policies on one hypothesis");
  add_evaluation_options(compare, cmp, true);

  std::string preset_name, preset_out;
  auto* dump = app.add_subcommand("dump-preset", "Print a built-in model as a model file");
  dump->add_option("name", preset_name, "Preset name")->required();
  dump->add_option("-o,--out", preset_out, "Write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*solve) return run_solve_game(game, std::cout);
    if (*train) {
      tr.config.hidden = parse_sizes(hidden);
      return run_train(tr, std::cout);
    }
    if (*evaluate) return run_evaluate(ev, std::cout);
    if (*compare) return run_compare(cmp, std::cout);
    if (*dump) return run_dump_preset(preset_name, preset_out, std::cout);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ahtlab::TrainingDivergenceError& e) {
    std::cerr << "error: " << e.what() << " (episode " << e.episode() << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
