#include "ahtlab_cli/model_file.hpp"

#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace ahtlab::cli {

using nlohmann::json;

namespace {

constexpr double kPresetDelta = 1e-7;

std::pair<std::size_t, std::size_t> line_column(std::string_view text,
                                                std::size_t offset) {
  std::size_t line = 1, column = 1;
  for (std::size_t k = 0; k < offset && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

[[noreturn]] void invalid(const std::string& source, const std::string& what) {
  throw ValidationError(source + ": " + what);
}

std::vector<std::string> labels(const json& doc, const char* key,
                                const std::string& source) {
  if (!doc.contains(key) || !doc[key].is_array() || doc[key].empty())
    invalid(source, std::string("'") + key + "' must be a non-empty array of labels");
  std::vector<std::string> out;
  for (const auto& v : doc[key]) {
    if (!v.is_string()) invalid(source, std::string("'") + key + "' entries must be strings");
    out.push_back(v.get<std::string>());
  }
  std::vector<std::string> sorted = out;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    invalid(source, std::string("duplicate label in '") + key + "'");
  return out;
}

std::vector<double> number_array(const json& v, const std::string& where,
                                  const std::string& source) {
  if (!v.is_array()) invalid(source, where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) invalid(source, where + " must contain only numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

ModelSpec make_spec(std::string name, std::vector<std::vector<std::vector<double>>> table) {
  ModelSpec s{std::move(name), {}, {}, {"y0", "y1"}, ObservationModel(table), std::nullopt};
  for (std::size_t h = 0; h < table.size(); ++h) s.hypotheses.push_back("h" + std::to_string(h));
  for (std::size_t u = 0; u < table.front().size(); ++u)
    s.queries.push_back("u" + std::to_string(u + 1));
  return s;
}

}  // namespace

Belief ModelSpec::prior_belief() const {
  if (prior) return Belief::from_probabilities(*prior);
  return Belief::uniform(model.num_hypotheses());
}

ModelSpec parse_model(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, column] = line_column(text, offset);
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                         ": syntax error",
                     line, column);
  }
  if (!doc.is_object()) invalid(source, "top level must be an object");
  if (!doc.contains("format") || doc["format"] != kModelFormat)
    invalid(source, "'format' must be \"" + std::string(kModelFormat) + "\"");

  ModelSpec spec{doc.value("name", std::string()), labels(doc, "hypotheses", source),
                 labels(doc, "queries", source), labels(doc, "observations", source),
                 ObservationModel(2, 1, 2, {0.5, 0.5, 0.5, 0.5}), std::nullopt};

  if (!doc.contains("probabilities") || !doc["probabilities"].is_object())
    invalid(source, "'probabilities' must be an object keyed by hypothesis");
  const auto& probs = doc["probabilities"];
  const std::size_t nh = spec.hypotheses.size();
  const std::size_t nu = spec.queries.size();
  const std::size_t ny = spec.observations.size();

  for (const auto& [key, _] : probs.items())
    if (std::find(spec.hypotheses.begin(), spec.hypotheses.end(), key) == spec.hypotheses.end())
      invalid(source, "probabilities for undeclared hypothesis '" + key + "'");

  std::vector<double> flat;
  flat.reserve(nh * nu * ny);
  for (std::size_t h = 0; h < nh; ++h) {
    const auto& hl = spec.hypotheses[h];
    if (!probs.contains(hl) || !probs[hl].is_object())
      invalid(source, "missing probability rows for hypothesis '" + hl + "'");
    const auto& rows = probs[hl];
    for (const auto& [key, _] : rows.items())
      if (std::find(spec.queries.begin(), spec.queries.end(), key) == spec.queries.end())
        invalid(source, "hypothesis '" + hl + "' has a row for undeclared query '" + key + "'");
    for (std::size_t u = 0; u < nu; ++u) {
      const auto& ql = spec.queries[u];
      const std::string where = "row (h=" + hl + ", u=" + ql + ")";
      if (!rows.contains(ql)) invalid(source, "missing " + where);
      const auto row = number_array(rows[ql], where, source);
      if (row.size() != ny)
        invalid(source, where + " has " + std::to_string(row.size()) + " entries, expected " +
                            std::to_string(ny));
      flat.insert(flat.end(), row.begin(), row.end());
    }
  }
  try {
    spec.model = ObservationModel(nh, nu, ny, std::move(flat));
  } catch (const Error& e) {
    invalid(source, e.what());
  }

  if (doc.contains("prior")) {
    auto prior = number_array(doc["prior"], "'prior'", source);
    if (prior.size() != nh) invalid(source, "'prior' must have one entry per hypothesis");
    try {
      (void)Belief::from_probabilities(prior);
    } catch (const Error& e) {
      invalid(source, std::string("'prior': ") + e.what());
    }
    spec.prior = std::move(prior);
  }
  return spec;
}

std::string dump_model(const ModelSpec& spec) {
  // ordered_json keeps the documented key order in the output.
  nlohmann::ordered_json doc;
  doc["format"] = kModelFormat;
  doc["name"] = spec.name;
  doc["hypotheses"] = spec.hypotheses;
  doc["queries"] = spec.queries;
  doc["observations"] = spec.observations;
  nlohmann::ordered_json probs = nlohmann::ordered_json::object();
  for (std::size_t h = 0; h < spec.hypotheses.size(); ++h) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::object();
    for (std::size_t u = 0; u < spec.queries.size(); ++u) {
      const auto r = spec.model.row(h, u);
      rows[spec.queries[u]] = std::vector<double>(r.begin(), r.end());
    }
    probs[spec.hypotheses[h]] = rows;
  }
  doc["probabilities"] = probs;
  if (spec.prior) doc["prior"] = *spec.prior;
  return doc.dump(2) + "\n";
}

std::vector<std::string> preset_names() { return {"setup1", "setup2"}; }

ModelSpec preset(std::string_view name) {
  const std::vector<double> lo{0.8, 0.2}, hi{0.2, 0.8};
  if (name == "setup1")
    return make_spec("setup1", {{lo, lo}, {hi, lo}, {lo, hi}});
  if (name == "setup2") {
    const std::vector<double> sharp{1 - kPresetDelta, kPresetDelta};
    return make_spec("setup2", {{lo, lo, lo, lo}, {hi, lo, sharp, lo}, {lo, hi, lo, sharp}});
  }
  throw ValidationError("unknown preset '" + std::string(name) + "'");
}

LoadedModel load_model(const std::string& ref) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), ref) != names.end()) {
    auto spec = preset(ref);
    auto text = dump_model(spec);
    return {std::move(spec), ref, std::move(text)};
  }
  std::ifstream in(ref, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + ref + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  auto spec = parse_model(text, ref);
  return {std::move(spec), ref, std::move(text)};
}

}  // namespace ahtlab::cli
