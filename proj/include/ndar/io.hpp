#pragma once

// File-format plumbing: key-value config files, CSV assembly, JSON documents
// (manifest, traces, solver results), and minimal self-contained SVG plots.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ndar/common.hpp"
#include "ndar/ising.hpp"
#include "ndar/ndar.hpp"
#include "ndar/solvers.hpp"

namespace ndar {

inline constexpr const char* kToolVersion = "ndar 0.1.0";

// ---------------------------------------------------------------------------
// Key-value config text: `key value` or `key = value`, '#' comments.
// ---------------------------------------------------------------------------

using KeyValueConfig = std::map<std::string, std::string>;

inline KeyValueConfig parse_key_value(std::istream& in) {
  KeyValueConfig kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq != std::string::npos) line[eq] = ' ';
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::string value, token;
    while (ls >> token) {
      if (!value.empty()) value += ' ';
      value += token;
    }
    if (value.empty()) throw ParseError("config key '" + key + "' has no value", line_no);
    kv[key] = value;
  }
  return kv;
}

inline KeyValueConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_key_value(in);
}

inline std::string canonical_config_text(const KeyValueConfig& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " " + v + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& body) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? "."
                                          : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << body;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// CSV assembly. Rows are assembled in memory so bodies can be hashed and
// compared for the reproducibility contract.
// ---------------------------------------------------------------------------

class CsvBuilder {
 public:
  explicit CsvBuilder(const std::vector<std::string>& header) {
    append_row_of_strings(header);
  }

  void append_row_of_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) body_ += ',';
      body_ += cells[i];
    }
    body_ += '\n';
  }

  std::string& cell(std::string s) {
    scratch_.push_back(std::move(s));
    return scratch_.back();
  }

  void flush_row() {
    append_row_of_strings(scratch_);
    scratch_.clear();
  }

  const std::string& body() const { return body_; }

 private:
  std::string body_;
  std::vector<std::string> scratch_;
};

// ---------------------------------------------------------------------------
// JSON documents
// ---------------------------------------------------------------------------

inline nlohmann::json ground_state_to_json(const GroundStateResult& gs) {
  nlohmann::json j;
  j["energy"] = gs.energy;
  j["exact"] = gs.exact;
  j["num_minimizers"] = gs.minimizers.size();
  if (!gs.minimizers.empty()) j["minimizer"] = gs.minimizers.front().str();
  return j;
}

inline nlohmann::json trace_to_json(const NdarTrace& trace,
                                    bool include_samples = false) {
  nlohmann::json j;
  j["total_samples"] = trace.total_samples;
  j["terminated_by_rule"] = trace.terminated_by_rule;
  j["final_gauge"] = trace.final_gauge.mask.str();
  j["final_best"] = {{"bitstring", trace.final_best.bitstring.str()},
                     {"energy", trace.final_best.energy}};
  if (trace.final_best.has_ar)
    j["final_best"]["approximation_ratio"] = trace.final_best.approximation_ratio;
  j["iterations"] = nlohmann::json::array();
  for (const auto& it : trace.iterations) {
    nlohmann::json ji;
    ji["iteration"] = it.iteration;
    ji["gauge_applied"] = it.gauge_applied.str();
    ji["frame_gauge"] = it.frame_gauge.mask.str();
    ji["cumulative_gauge"] = it.cumulative_gauge.mask.str();
    ji["attractor_energy"] = it.attractor_energy;
    ji["best_energy"] = it.best_energy;
    ji["mean_energy"] = it.mean_energy;
    ji["best_bitstring"] = it.best_bitstring.str();
    if (include_samples && !it.samples.empty()) {
      nlohmann::json js = nlohmann::json::array();
      for (const auto& s : it.samples) js.push_back(s.str());
      ji["samples"] = js;
    }
    j["iterations"].push_back(ji);
  }
  return j;
}

struct RunManifest {
  std::string config_hash;
  std::vector<std::string> instance_hashes;
  std::uint64_t seed = 0;
  std::vector<std::string> output_files;
  std::string tool_version = kToolVersion;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["config_hash"] = config_hash;
    j["instance_hashes"] = instance_hashes;
    j["seed"] = seed;
    j["output_files"] = output_files;
    j["tool_version"] = tool_version;
    return j;
  }
};

// ---------------------------------------------------------------------------
// Minimal SVG renderings (optional outputs; line series and histograms).
// ---------------------------------------------------------------------------

struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<std::pair<double, double>> points;
};

inline std::string svg_line_plot(const std::vector<SvgSeries>& series,
                                 const std::string& title) {
  const double w = 640, h = 400, m = 50;
  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  if (!(xhi > xlo)) xhi = xlo + 1;
  if (!(yhi > ylo)) yhi = ylo + 1;
  auto px = [&](double x) { return m + (x - xlo) / (xhi - xlo) * (w - 2 * m); };
  auto py = [&](double y) { return h - m - (y - ylo) / (yhi - ylo) * (h - 2 * m); };
  std::ostringstream out;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
      << h << "'>\n<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='" << w / 2 << "' y='20' text-anchor='middle'>" << title
      << "</text>\n";
  int legend_y = 40;
  for (const auto& s : series) {
    out << "<polyline fill='none' stroke='" << s.color << "' points='";
    for (const auto& [x, y] : s.points)
      out << format_double(px(x)) << "," << format_double(py(y)) << " ";
    out << "'/>\n<text x='" << w - m << "' y='" << legend_y
        << "' text-anchor='end' fill='" << s.color << "'>" << s.label
        << "</text>\n";
    legend_y += 16;
  }
  out << "</svg>\n";
  return out.str();
}

inline std::string svg_histogram(const std::vector<double>& edges,
                                 const std::vector<double>& counts,
                                 const std::string& title) {
  const double w = 640, h = 400, m = 50;
  double chi = 0.0;
  for (double c : counts) chi = std::max(chi, c);
  if (chi <= 0) chi = 1;
  std::ostringstream out;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
      << h << "'>\n<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='" << w / 2 << "' y='20' text-anchor='middle'>" << title
      << "</text>\n";
  const double xlo = edges.front(), xhi = edges.back();
  for (std::size_t b = 0; b < counts.size(); ++b) {
    const double x0 = m + (edges[b] - xlo) / (xhi - xlo) * (w - 2 * m);
    const double x1 = m + (edges[b + 1] - xlo) / (xhi - xlo) * (w - 2 * m);
    const double bh = counts[b] / chi * (h - 2 * m);
    out << "<rect x='" << format_double(x0) << "' y='" << format_double(h - m - bh)
        << "' width='" << format_double(std::max(1.0, x1 - x0 - 1)) << "' height='"
        << format_double(bh) << "' fill='steelblue'/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace ndar
