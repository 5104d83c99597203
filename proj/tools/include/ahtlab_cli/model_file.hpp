#pragma once

// Model files: a JSON document with labelled probability rows.
//
//   {
//     "format": "ahtlab-model/1",
//     "name": "setup1",
//     "hypotheses": ["h0", "h1", "h2"],
//     "queries": ["u1", "u2"],
//     "observations": ["y0", "y1"],
//     "probabilities": {
//       "h0": {"u1": [0.8, 0.2], "u2": [0.8, 0.2]},
//       ...
//     },
//     "prior": [0.3333, 0.3333, 0.3334]      (optional, default uniform)
//   }

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ahtlab/errors.hpp"
#include "ahtlab/model.hpp"

namespace ahtlab::cli {

inline constexpr std::string_view kModelFormat = "ahtlab-model/1";

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what), line_(line), column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct ModelSpec {
  std::string name;
  std::vector<std::string> hypotheses;
  std::vector<std::string> queries;
  std::vector<std::string> observations;
  ObservationModel model;
  std::optional<std::vector<double>> prior;

  /// The declared prior, or uniform.
  Belief prior_belief() const;
};

/// Parses model text; `source` names the input in diagnostics.
ModelSpec parse_model(std::string_view text, const std::string& source = "<model>");

/// Canonical text of a model; parse_model(dump_model(m)) reproduces m.
std::string dump_model(const ModelSpec& spec);

std::vector<std::string> preset_names();
/// Built-in models; throws ValidationError for unknown names.
ModelSpec preset(std::string_view name);

/// A loaded model together with the exact bytes it came from.
struct LoadedModel {
  ModelSpec spec;
  std::string source;  // preset name or file path
  std::string text;    // bytes hashed into run manifests
};

/// `ref` is a preset name or a path to a model file.
LoadedModel load_model(const std::string& ref);

}  // namespace ahtlab::cli
