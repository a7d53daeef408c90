#pragma once

#include <hocp/alm.hpp>

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace hocp {

namespace fs = std::filesystem;

/// Contents of solution.json; chains runs together (warm starts, check).
struct SolutionRecord {
  std::string status;
  std::string problem;
  nlohmann::json config;
  Vec x, y, s;
  double psi = kInf;
  double psi_delta = 1.0;
  double viol_norm = kInf;
  double objective = kInf;
  double mu_final = 0.0;
  nlohmann::json counters;
  std::string layout_ref;
};

nlohmann::json to_json(const SolutionRecord& r);
SolutionRecord solution_from_json(const nlohmann::json& j);

SolutionRecord read_solution(const fs::path& path);
void write_solution(const fs::path& path, const SolutionRecord& r);

nlohmann::json counters_json(const AlmReport& r);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const fs::path& path, const std::string& content);

struct RunManifest {
  std::string command;
  std::string config_path;
  unsigned long long seed = 0;
  nlohmann::json solver;
  std::string git_describe;
  nlohmann::json timings_ms = nlohmann::json::object();
  std::vector<std::string> outputs;  // relative to the output directory
};

/// Throws if a listed output is missing.
void write_manifest(const fs::path& dir, const RunManifest& m);

/// `git describe --always --dirty` of the source tree, or "unknown".
std::string git_describe();

struct PlotSeries {
  std::string name;
  std::vector<double> x, y;
  bool step = false;  // piecewise constant rendering
};

/// Minimal line chart, one polyline per series.
std::string svg_plot(const std::string& title, const std::string& xlabel, const std::vector<PlotSeries>& series);

nlohmann::json alm_config_json(const AlmConfig& cfg);

}  // namespace hocp
