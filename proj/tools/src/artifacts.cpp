#include "ahtlab_cli/artifacts.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ahtlab/errors.hpp"

namespace ahtlab::cli {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::string rate_curves_csv(const std::vector<LabelledCurve>& curves) {
  std::string out = "policy,hypothesis,n,mean_rate,stderr,bound\n";
  for (const auto& [policy, c] : curves)
    for (std::size_t k = 0; k < c.horizon.size(); ++k) {
      out += policy + ',' + std::to_string(c.hypothesis) + ',' + std::to_string(c.horizon[k]) +
             ',' + format_number(c.mean_rate[k]) + ',' + format_number(c.std_error[k]) + ',' +
             format_number(c.bound) + '\n';
    }
  return out;
}

std::string query_frequency_csv(const std::vector<LabelledCurve>& curves) {
  std::string out = "policy,hypothesis,query,frequency\n";
  for (const auto& [policy, c] : curves)
    for (std::size_t u = 0; u < c.query_frequency.size(); ++u)
      out += policy + ',' + std::to_string(c.hypothesis) + ',' + std::to_string(u) + ',' +
             format_number(c.query_frequency[u]) + '\n';
  return out;
}

std::string game_solutions_csv(const std::vector<GameRow>& rows) {
  std::string out = "hypothesis,query,alpha,value\n";
  for (const auto& r : rows)
    for (std::size_t u = 0; u < r.solution.alpha.size(); ++u)
      out += std::to_string(r.hypothesis) + ',' + std::to_string(u) + ',' +
             format_number(r.solution.alpha[u]) + ',' + format_number(r.solution.value) + '\n';
  return out;
}

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string rate_chart_svg(const std::vector<LabelledCurve>& curves,
                           const std::string& title) {
  const double width = 720, height = 440;
  const double left = 70, right = 170, top = 40, bottom = 50;
  const double plot_w = width - left - right, plot_h = height - top - bottom;

  std::size_t max_n = 1;
  double y_lo = 0.0, y_hi = 0.0;
  std::vector<double> bounds;
  for (const auto& [_, c] : curves) {
    if (!c.horizon.empty()) max_n = std::max(max_n, c.horizon.back());
    for (double v : c.mean_rate)
      if (std::isfinite(v)) {
        y_lo = std::min(y_lo, v);
        y_hi = std::max(y_hi, v);
      }
    if (std::find(bounds.begin(), bounds.end(), c.bound) == bounds.end())
      bounds.push_back(c.bound);
  }
  for (double b : bounds) y_hi = std::max(y_hi, b);
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  y_hi += 0.05 * (y_hi - y_lo);

  auto sx = [&](double n) { return left + plot_w * (n - 1.0) / std::max<double>(1.0, max_n - 1.0); };
  auto sy = [&](double v) { return top + plot_h * (y_hi - v) / (y_hi - y_lo); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << px(left + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
    << escape_xml(title) << "</text>\n";

  // Axes and ticks.
  o << "<g stroke=\"black\" fill=\"none\">\n";
  o << "<line x1=\"" << px(left) << "\" y1=\"" << px(top + plot_h) << "\" x2=\"" << px(left + plot_w)
    << "\" y2=\"" << px(top + plot_h) << "\"/>\n";
  o << "<line x1=\"" << px(left) << "\" y1=\"" << px(top) << "\" x2=\"" << px(left) << "\" y2=\""
    << px(top + plot_h) << "\"/>\n";
  o << "</g>\n<g fill=\"black\">\n";
  for (int k = 0; k <= 5; ++k) {
    const double v = y_lo + (y_hi - y_lo) * k / 5.0;
    o << "<text x=\"" << px(left - 6) << "\" y=\"" << px(sy(v) + 4) << "\" text-anchor=\"end\">"
      << format_number(std::round(v * 1000) / 1000) << "</text>\n";
    const double n = 1.0 + (max_n - 1.0) * k / 5.0;
    o << "<text x=\"" << px(sx(n)) << "\" y=\"" << px(top + plot_h + 18)
      << "\" text-anchor=\"middle\">" << static_cast<long>(std::lround(n)) << "</text>\n";
  }
  o << "<text x=\"" << px(left + plot_w / 2) << "\" y=\"" << px(height - 12)
    << "\" text-anchor=\"middle\">n (samples)</text>\n";
  o << "<text transform=\"translate(18," << px(top + plot_h / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">expected confidence rate (nats)</text>\n";
  o << "</g>\n";

  for (double b : bounds)
    o << "<line x1=\"" << px(left) << "\" y1=\"" << px(sy(b)) << "\" x2=\"" << px(left + plot_w)
      << "\" y2=\"" << px(sy(b)) << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";

  for (std::size_t s = 0; s < curves.size(); ++s) {
    const auto& c = curves[s].curve;
    const char* color = kPalette[s % std::size(kPalette)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < c.horizon.size(); ++k) {
      if (!std::isfinite(c.mean_rate[k])) continue;
      o << px(sx(static_cast<double>(c.horizon[k]))) << ',' << px(sy(c.mean_rate[k])) << ' ';
    }
    o << "\"/>\n";
    const double ly = top + 16 + 18.0 * s;
    o << "<line x1=\"" << px(left + plot_w + 12) << "\" y1=\"" << px(ly) << "\" x2=\""
      << px(left + plot_w + 36) << "\" y2=\"" << px(ly) << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << px(left + plot_w + 42) << "\" y=\"" << px(ly + 4) << "\">"
      << escape_xml(curves[s].policy) << " (h" << c.hypothesis << ")</text>\n";
  }
  const double ly = top + 16 + 18.0 * curves.size();
  o << "<line x1=\"" << px(left + plot_w + 12) << "\" y1=\"" << px(ly) << "\" x2=\""
    << px(left + plot_w + 36) << "\" y2=\"" << px(ly)
    << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  o << "<text x=\"" << px(left + plot_w + 42) << "\" y=\"" << px(ly + 4) << "\">bound</text>\n";
  o << "</svg>\n";
  return o.str();
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 0xf];
  }
  return out;
}

std::string manifest_json(const Manifest& m) {
  nlohmann::ordered_json doc;
  doc["tool"] = "ahtlab";
  doc["command"] = m.command;
  doc["seed"] = m.seed;
  doc["model"] = {{"source", m.model_source}, {"sha256", m.model_sha256}};
  doc["config"] = m.config;
  doc["artifacts"] = m.artifacts;
  return doc.dump(2) + "\n";
}

std::filesystem::path manifest_path_for(const std::filesystem::path& artifact) {
  return std::filesystem::path(artifact.string() + ".manifest.json");
}

}  // namespace ahtlab::cli
