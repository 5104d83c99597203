#pragma once

// CSV, SVG and manifest writers for command outputs.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ahtlab/game.hpp"
#include "ahtlab/sim.hpp"
#include "json.hpp"

namespace ahtlab::cli {

/// Decimal with 9 significant digits, "inf"/"-inf"/"nan" for non-finite.
std::string format_number(double x);

/// Writes text to a file, creating parent directories.
void write_text(const std::filesystem::path& path, std::string_view text);

struct LabelledCurve {
  std::string policy;
  RateCurve curve;
};

/// policy,hypothesis,n,mean_rate,stderr,bound
std::string rate_curves_csv(const std::vector<LabelledCurve>& curves);

/// policy,hypothesis,query,frequency; curves without a tally are skipped.
std::string query_frequency_csv(const std::vector<LabelledCurve>& curves);

struct GameRow {
  std::size_t hypothesis = 0;
  GameSolution solution;
};

/// hypothesis,query,alpha,value
std::string game_solutions_csv(const std::vector<GameRow>& rows);

/// Line chart of mean_rate per curve with a dashed line at each distinct
/// bound. Series keep their input order in the legend.
std::string rate_chart_svg(const std::vector<LabelledCurve>& curves,
                           const std::string& title);

/// Hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

/// Run manifest: everything needed to repeat a command.
struct Manifest {
  std::string command;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  std::string model_source;
  std::string model_sha256;
  std::vector<std::string> artifacts;
};

std::string manifest_json(const Manifest& m);

/// `<artifact>.manifest.json`
std::filesystem::path manifest_path_for(const std::filesystem::path& artifact);

}  // namespace ahtlab::cli
