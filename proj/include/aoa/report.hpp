#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "aoa/arena.hpp"
#include "aoa/probe.hpp"
#include "aoa/reward.hpp"

namespace aoa::report {

enum class Format { Table, Csv, Plot };

std::optional<Format> format_from_string(std::string_view name);

/// Category-count table in the V-AOA / R-AOA / Int. / Ext. / Flip shape,
/// with a fraction row when n_total > 0.
std::string probe_markdown_table(const MetricsSummary& summary);
std::string probe_csv(const MetricsSummary& summary);

/// Bar chart of the category distribution, as a standalone SVG.
std::string bias_bars_svg(const MetricsSummary& summary);

std::string reward_markdown_table(const std::vector<RewardBreakdown>& breakdowns);
std::string reward_csv(const std::vector<RewardBreakdown>& breakdowns);

std::string arena_markdown_table(const arena::ArenaMetrics& metrics);
std::string arena_csv(const arena::ArenaMetrics& metrics);

/// Turn-by-turn average offer price over closed items, as CSV and as an SVG
/// line chart.
std::string turn_series_csv(const std::vector<std::pair<int, double>>& series);
std::string line_chart_svg(const std::vector<std::pair<int, double>>& series,
                           const std::string& title, const std::string& x_label,
                           const std::string& y_label);

struct ReportArtifacts {
  std::vector<std::filesystem::path> files;
};

/// Reads a results file, aggregates every payload kind it contains, and emits
/// the requested artifacts into out_dir. Reports never hit the network; an
/// empty results file yields an empty-but-valid report. Throws SchemaError on
/// malformed records.
ReportArtifacts render_report(const std::filesystem::path& results_path, Format format,
                              const std::filesystem::path& out_dir);

}  // namespace aoa::report
