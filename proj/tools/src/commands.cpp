#include "ahtlab_cli/commands.hpp"

#include <cstdio>
#include <memory>
#include <ostream>

#include "ahtlab/game.hpp"
#include "ahtlab/network.hpp"
#include "ahtlab/policies.hpp"
#include "ahtlab/sim.hpp"
#include "ahtlab_cli/artifacts.hpp"
#include "ahtlab_cli/model_file.hpp"

namespace ahtlab::cli {

namespace {

using ojson = nlohmann::ordered_json;

SolverMethod parse_method(const std::string& name) {
  if (name == "simplex") return SolverMethod::simplex;
  if (name == "fictitious-play") return SolverMethod::fictitious_play;
  throw UsageError("unknown solver method '" + name + "'");
}

std::vector<std::size_t> hypotheses_of(const ModelSpec& spec,
                                       const std::optional<std::size_t>& h) {
  const std::size_t nh = spec.model.num_hypotheses();
  if (h) {
    if (*h >= nh)
      throw UsageError("hypothesis " + std::to_string(*h) + " out of range (model has " +
                       std::to_string(nh) + ")");
    return {*h};
  }
  std::vector<std::size_t> all(nh);
  for (std::size_t k = 0; k < nh; ++k) all[k] = k;
  return all;
}

Manifest base_manifest(const std::string& command, const LoadedModel& m, std::uint64_t seed) {
  Manifest man;
  man.command = command;
  man.seed = seed;
  man.model_source = m.source;
  man.model_sha256 = sha256_hex(m.text);
  return man;
}

void write_with_manifest(const std::string& path, const std::string& text, Manifest man) {
  write_text(path, text);
  man.artifacts.insert(man.artifacts.begin(), path);
  write_text(manifest_path_for(path), manifest_json(man));
}

std::string fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::string> split_policies(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& item : raw) {
    std::size_t start = 0;
    while (start <= item.size()) {
      const std::size_t comma = item.find(',', start);
      const std::string tok =
          item.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!tok.empty()) out.push_back(tok);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

struct PreparedEvaluation {
  LoadedModel model;
  Belief prior;
  std::vector<std::string> policy_names;
  std::vector<std::unique_ptr<Policy>> policies;
  std::vector<std::size_t> hypotheses;
  std::size_t episodes;
  QueryWindow window;
};

PreparedEvaluation prepare(const EvaluateOptions& opt, std::vector<std::string> names) {
  if (names.empty()) throw UsageError("at least one policy is required");
  if (opt.horizon == 0) throw UsageError("horizon must be positive");
  const std::size_t episodes = opt.quick ? kQuickEpisodes : opt.episodes;
  if (episodes == 0) throw UsageError("episode count must be positive");

  auto model = load_model(opt.model);
  auto prior = model.spec.prior_belief();
  PreparedEvaluation p{std::move(model), std::move(prior), {}, {}, {}, episodes, {}};
  p.hypotheses = hypotheses_of(p.model.spec, opt.hypothesis);

  std::shared_ptr<const QNetwork> network;
  for (const auto& name : names) {
    PolicyConfig cfg;
    try {
      cfg.kind = parse_policy_kind(name);
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
    cfg.verification_threshold = opt.rho_bar;
    if (cfg.kind == PolicyKind::dqn_greedy) {
      if (opt.network.empty()) throw UsageError("policy dqn needs --network");
      if (!network) network = std::make_shared<QNetwork>(load_network(opt.network));
      cfg.network = network;
    }
    try {
      cfg.validate(p.model.spec.model.num_hypotheses());
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
    p.policies.push_back(make_policy(p.model.spec.model, cfg));
    p.policy_names.push_back(std::string(to_string(cfg.kind)));
  }

  p.window.first = opt.freq_first ? opt.freq_first : opt.horizon / 2 + 1;
  p.window.last = opt.freq_last ? opt.freq_last : opt.horizon;
  if (p.window.first == 0 || p.window.first > p.window.last || p.window.last > opt.horizon)
    throw UsageError("query-frequency window must satisfy 1 <= first <= last <= horizon");
  return p;
}

ojson evaluation_config(const EvaluateOptions& opt, const PreparedEvaluation& p,
                        bool per_policy_offset) {
  ojson c;
  c["policies"] = p.policy_names;
  c["hypotheses"] = p.hypotheses;
  c["horizon"] = opt.horizon;
  c["episodes"] = p.episodes;
  c["rho_bar"] = opt.rho_bar;
  c["network"] = opt.network;
  c["prior"] = p.prior.probabilities();
  c["seed_offset_per_policy"] = per_policy_offset;
  c["query_window"] = {p.window.first, p.window.last};
  c["solver"] = "simplex";
  return c;
}

std::vector<LabelledCurve> evaluate_all(const EvaluateOptions& opt, const PreparedEvaluation& p,
                                        bool per_policy_offset) {
  EvaluationOptions eo;
  eo.threads = opt.threads;
  eo.query_window = p.window;
  std::vector<LabelledCurve> curves;
  for (std::size_t k = 0; k < p.policies.size(); ++k) {
    const std::uint64_t seed = per_policy_offset ? opt.seed + k : opt.seed;
    for (std::size_t h : p.hypotheses)
      curves.push_back({p.policy_names[k],
                        evaluate_policy(*p.policies[k], p.model.spec.model, p.prior, h,
                                        opt.horizon, p.episodes, seed, eo)});
  }
  return curves;
}

void emit_evaluation(const std::string& command, const EvaluateOptions& opt,
                     const PreparedEvaluation& p, const std::vector<LabelledCurve>& curves,
                     bool per_policy_offset, std::ostream& out) {
  const std::string csv = rate_curves_csv(curves);
  Manifest man = base_manifest(command, p.model, opt.seed);
  man.config = evaluation_config(opt, p, per_policy_offset);
  if (!opt.svg.empty()) {
    write_text(opt.svg, rate_chart_svg(curves, p.model.spec.name.empty()
                                                   ? std::string("confidence rate")
                                                   : p.model.spec.name + ": confidence rate"));
    man.artifacts.push_back(opt.svg);
  }
  if (!opt.freq_out.empty()) {
    write_text(opt.freq_out, query_frequency_csv(curves));
    man.artifacts.push_back(opt.freq_out);
  }
  if (opt.out.empty())
    out << csv;
  else
    write_with_manifest(opt.out, csv, man);
}

}  // namespace

int run_solve_game(const SolveGameOptions& opt, std::ostream& out) {
  const auto loaded = load_model(opt.model);
  SolverOptions so;
  so.method = parse_method(opt.method);
  so.tolerance = opt.tolerance;
  so.max_iterations = opt.max_iterations;

  std::vector<GameRow> rows;
  for (std::size_t h : hypotheses_of(loaded.spec, opt.hypothesis)) {
    rows.push_back({h, optimal_rate(loaded.spec.model, h, so)});
    const auto& s = rows.back().solution;
    out << loaded.spec.hypotheses[h] << ": R* = " << format_number(s.value) << " nats, alpha = (";
    for (std::size_t u = 0; u < s.alpha.size(); ++u)
      out << (u ? ", " : "") << loaded.spec.queries[u] << '=' << format_number(s.alpha[u]);
    out << "), gap " << format_number(s.gap) << '\n';
  }
  if (!opt.out.empty()) {
    Manifest man = base_manifest("solve-game", loaded, 0);
    man.config["hypotheses"] = ojson::array();
    for (const auto& r : rows) man.config["hypotheses"].push_back(r.hypothesis);
    man.config["method"] = opt.method;
    man.config["tolerance"] = opt.tolerance;
    man.config["max_iterations"] = opt.max_iterations;
    write_with_manifest(opt.out, game_solutions_csv(rows), man);
  }
  return 0;
}

int run_train(const TrainOptions& opt, std::ostream& out) {
  if (opt.out.empty()) throw UsageError("train needs --out for the network file");
  const auto loaded = load_model(opt.model);
  try {
    opt.config.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  const auto& c = opt.config;
  const std::size_t report_every = std::max<std::size_t>(1, c.episodes / 10);
  const auto result = train(loaded.spec.model, loaded.spec.prior_belief(), c,
                            [&](const EpisodeStats& s) {
                              if (!opt.quiet && (s.episode + 1) % report_every == 0)
                                out << "episode " << s.episode + 1 << '/' << c.episodes
                                    << "  cumulative reward " << fixed(s.cumulative_reward, 4)
                                    << "  mean loss " << fixed(s.mean_loss, 6) << '\n';
                            });

  const std::string log_path = opt.log.empty() ? opt.out + ".log.csv" : opt.log;
  std::string log = "episode,hypothesis,cumulative_reward,mean_loss\n";
  for (const auto& s : result.log)
    log += std::to_string(s.episode) + ',' + std::to_string(s.hypothesis) + ',' +
           format_number(s.cumulative_reward) + ',' + format_number(s.mean_loss) + '\n';

  if (std::filesystem::path(opt.out).has_parent_path())
    std::filesystem::create_directories(std::filesystem::path(opt.out).parent_path());
  save_network(result.network, std::filesystem::path(opt.out));
  write_text(log_path, log);

  Manifest man = base_manifest("train", loaded, c.seed);
  man.config["gamma"] = c.gamma;
  man.config["zeta"] = c.zeta;
  man.config["epsilon"] = c.epsilon;
  man.config["learning_rate"] = c.learning_rate;
  man.config["episodes"] = c.episodes;
  man.config["horizon"] = c.horizon;
  man.config["minibatch_size"] = c.minibatch_size;
  man.config["epochs"] = c.epochs;
  man.config["capacity"] = c.capacity;
  man.config["hidden"] = c.hidden;
  man.config["prior"] = loaded.spec.prior_belief().probabilities();
  man.artifacts = {opt.out, log_path};
  write_text(manifest_path_for(opt.out), manifest_json(man));
  out << "wrote " << opt.out << " and " << log_path << '\n';
  return 0;
}

int run_evaluate(const EvaluateOptions& opt, std::ostream& out) {
  auto names = split_policies(opt.policies);
  if (names.empty()) names = {"ejs"};
  const auto p = prepare(opt, names);
  const auto curves = evaluate_all(opt, p, false);
  emit_evaluation("evaluate", opt, p, curves, false, out);
  return 0;
}

int run_compare(const EvaluateOptions& opt, std::ostream& out) {
  const auto names = split_policies(opt.policies);
  if (names.empty()) throw UsageError("compare needs at least one --policy");
  EvaluateOptions o = opt;
  if (!o.hypothesis) o.hypothesis = 0;
  const auto p = prepare(o, names);
  const auto curves = evaluate_all(o, p, true);
  if (!o.out.empty()) emit_evaluation("compare", o, p, curves, true, out);

  out << "policy      h   R_N        bound      ratio\n";
  for (const auto& [name, c] : curves) {
    const double last = c.mean_rate.back();
    char line[128];
    std::snprintf(line, sizeof line, "%-10s  %-2zu  %-9s  %-9s  %s\n", name.c_str(), c.hypothesis,
                  fixed(last, 6).c_str(), fixed(c.bound, 6).c_str(),
                  c.bound > 0 ? fixed(last / c.bound, 4).c_str() : "n/a");
    out << line;
  }
  return 0;
}

int run_dump_preset(const std::string& name, const std::string& out_path, std::ostream& out) {
  std::string text;
  try {
    text = dump_model(preset(name));
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  if (out_path.empty())
    out << text;
  else
    write_text(out_path, text);
  return 0;
}

}  // namespace ahtlab::cli
