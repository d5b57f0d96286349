#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "corsched/metrics.hpp"
#include "corsched/rollout.hpp"

namespace corsched {

// Canonical float text. Everything written to CSV/JSONL goes through these
// so reruns are byte-identical.
std::string fmt_g12(double v);
std::string fmt_g17(double v);  // exact round-trip, used in surface files

std::uint64_t fnv1a(std::string_view data);

nlohmann::json trace_to_json(const RolloutTrace& trace);
RolloutTrace trace_from_json(const nlohmann::json& j);

nlohmann::json cell_metrics_to_json(const CellMetrics& m);
CellMetrics cell_metrics_from_json(const nlohmann::json& j);

void write_cells_jsonl(const std::filesystem::path& path,
                       const std::vector<CellMetrics>& cells);
std::vector<CellMetrics> read_cells_jsonl(const std::filesystem::path& path);

// Minimal line-plot SVG: polylines with markers over auto-scaled axes.
struct PlotSeries {
  std::string label;
  std::string color;
  std::vector<double> x, y;
};

std::string render_line_plot(const std::string& title, const std::string& x_label,
                             const std::string& y_label,
                             const std::vector<PlotSeries>& series);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);  // throws MissingArtifactError

}  // namespace corsched
