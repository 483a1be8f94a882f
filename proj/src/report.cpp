#include "aoa/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "aoa/run_config.hpp"
#include "aoa/trace_model.hpp"

namespace aoa::report {

namespace {

std::string fmt(double value, int precision = 4) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(precision);
  out << value;
  return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
}

}  // namespace

std::optional<Format> format_from_string(std::string_view name) {
  if (name == "table") return Format::Table;
  if (name == "csv") return Format::Csv;
  if (name == "plot") return Format::Plot;
  return std::nullopt;
}

std::string probe_markdown_table(const MetricsSummary& summary) {
  std::string out;
  out += "| Metric | V-AOA | R-AOA | Int. | Ext. | Invalid | Flip | N |\n";
  out += "|---|---|---|---|---|---|---|---|\n";
  out += "| count | " + std::to_string(summary.n_vaoa) + " | " + std::to_string(summary.n_raoa) +
         " | " + std::to_string(summary.n_internal) + " | " + std::to_string(summary.n_external) +
         " | " + std::to_string(summary.n_invalid) + " | " + std::to_string(summary.flip) + " | " +
         std::to_string(summary.n_total) + " |\n";
  if (summary.n_total > 0) {
    double n = static_cast<double>(summary.n_total);
    out += "| fraction | " + fmt(summary.n_vaoa / n) + " | " + fmt(summary.n_raoa / n) + " | " +
           fmt(summary.n_internal / n) + " | " + fmt(summary.n_external / n) + " | " +
           fmt(summary.n_invalid / n) + " | " + fmt(summary.flip / n) + " | 1.0000 |\n";
  }
  if (summary.acc) out += "\nAcc: " + fmt(*summary.acc) + "\n";
  if (summary.acc_actor) out += "Acc (actor framing): " + fmt(*summary.acc_actor) + "\n";
  if (summary.acc_observer) out += "Acc (observer framing): " + fmt(*summary.acc_observer) + "\n";
  if (summary.f1) out += "Answer F1: " + fmt(*summary.f1) + "\n";
  return out;
}

std::string probe_csv(const MetricsSummary& summary) {
  std::string out = "metric,v_aoa,r_aoa,internal,external,invalid,flip,n_total\n";
  out += "count," + std::to_string(summary.n_vaoa) + "," + std::to_string(summary.n_raoa) + "," +
         std::to_string(summary.n_internal) + "," + std::to_string(summary.n_external) + "," +
         std::to_string(summary.n_invalid) + "," + std::to_string(summary.flip) + "," +
         std::to_string(summary.n_total) + "\n";
  if (summary.n_total > 0) {
    double n = static_cast<double>(summary.n_total);
    out += "fraction," + fmt(summary.n_vaoa / n) + "," + fmt(summary.n_raoa / n) + "," +
           fmt(summary.n_internal / n) + "," + fmt(summary.n_external / n) + "," +
           fmt(summary.n_invalid / n) + "," + fmt(summary.flip / n) + ",1\n";
  }
  return out;
}

std::string bias_bars_svg(const MetricsSummary& summary) {
  struct Bar {
    const char* label;
    std::size_t value;
  };
  const Bar bars[] = {
      {"V-AOA", summary.n_vaoa},   {"R-AOA", summary.n_raoa},     {"Int.", summary.n_internal},
      {"Ext.", summary.n_external}, {"Invalid", summary.n_invalid},
  };
  std::size_t peak = 1;
  for (const auto& bar : bars) peak = std::max(peak, bar.value);

  const int width = 420, height = 260, base = 220, left = 40, bar_width = 56, gap = 20;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << "Attribution category counts</text>\n";
  int x = left;
  for (const auto& bar : bars) {
    int h = static_cast<int>(std::lround(170.0 * static_cast<double>(bar.value) /
                                         static_cast<double>(peak)));
    svg << "<rect x=\"" << x << "\" y=\"" << base - h << "\" width=\"" << bar_width
        << "\" height=\"" << h << "\" fill=\"#4878a8\"/>\n";
    svg << "<text x=\"" << x + bar_width / 2 << "\" y=\"" << base + 16
        << "\" text-anchor=\"middle\" font-size=\"11\">" << bar.label << "</text>\n";
    svg << "<text x=\"" << x + bar_width / 2 << "\" y=\"" << base - h - 4
        << "\" text-anchor=\"middle\" font-size=\"11\">" << bar.value << "</text>\n";
    x += bar_width + gap;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string reward_markdown_table(const std::vector<RewardBreakdown>& breakdowns) {
  double r1 = 0, r2 = 0, r3 = 0, total = 0;
  for (const auto& b : breakdowns) {
    r1 += b.r1_format;
    r2 += b.r2_attribution;
    r3 += b.r3_answer;
    total += b.total;
  }
  double n = breakdowns.empty() ? 1.0 : static_cast<double>(breakdowns.size());
  std::string out;
  out += "| Rollouts | mean r1 (format) | mean r2 (attribution) | mean r3 (answer) | mean total |\n";
  out += "|---|---|---|---|---|\n";
  out += "| " + std::to_string(breakdowns.size()) + " | " + fmt(r1 / n) + " | " + fmt(r2 / n) +
         " | " + fmt(r3 / n) + " | " + fmt(total / n) + " |\n";
  return out;
}

std::string reward_csv(const std::vector<RewardBreakdown>& breakdowns) {
  std::string out = "case_id,r1_format,r2_attribution,r3_answer,total\n";
  for (const auto& b : breakdowns) {
    out += (b.case_id ? *b.case_id : "") + "," + fmt(b.r1_format, 1) + "," +
           fmt(b.r2_attribution, 1) + "," + fmt(b.r3_answer, 1) + "," + fmt(b.total, 3) + "\n";
  }
  return out;
}

std::string arena_markdown_table(const arena::ArenaMetrics& metrics) {
  std::string out;
  out += "| Sessions | Items | Total Profit | Avg Profit/Item | Avg Profit/Deal | "
         "Avg Turns | Success Rate |\n";
  out += "|---|---|---|---|---|---|---|\n";
  out += "| " + std::to_string(metrics.sessions) + " | " + std::to_string(metrics.items_attempted) +
         " | " + fmt(metrics.total_profit, 2) + " | " + fmt(metrics.avg_profit_per_item, 2) +
         " | " + fmt(metrics.avg_profit_per_deal, 2) + " | " + fmt(metrics.avg_turns, 2) + " | " +
         fmt(metrics.success_rate, 3) + " |\n";
  return out;
}

std::string arena_csv(const arena::ArenaMetrics& metrics) {
  std::string out =
      "sessions,items_attempted,items_closed,total_profit,avg_profit_per_item,"
      "avg_profit_per_deal,avg_profit_per_turn,avg_turns,success_rate\n";
  out += std::to_string(metrics.sessions) + "," + std::to_string(metrics.items_attempted) + "," +
         std::to_string(metrics.items_closed) + "," + fmt(metrics.total_profit, 2) + "," +
         fmt(metrics.avg_profit_per_item, 4) + "," + fmt(metrics.avg_profit_per_deal, 4) + "," +
         fmt(metrics.avg_profit_per_turn, 4) + "," + fmt(metrics.avg_turns, 4) + "," +
         fmt(metrics.success_rate, 4) + "\n";
  return out;
}

std::string turn_series_csv(const std::vector<std::pair<int, double>>& series) {
  std::string out = "turn,avg_offer\n";
  for (const auto& [turn, price] : series) {
    out += std::to_string(turn) + "," + fmt(price, 4) + "\n";
  }
  return out;
}

std::string line_chart_svg(const std::vector<std::pair<int, double>>& series,
                           const std::string& title, const std::string& x_label,
                           const std::string& y_label) {
  const int width = 480, height = 300, left = 50, right = 20, top = 40, bottom = 40;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right
      << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 8
      << "\" text-anchor=\"middle\" font-size=\"11\">" << x_label << "</text>\n";
  svg << "<text x=\"14\" y=\"" << height / 2 << "\" text-anchor=\"middle\" font-size=\"11\" "
      << "transform=\"rotate(-90 14 " << height / 2 << ")\">" << y_label << "</text>\n";

  if (!series.empty()) {
    double min_y = series.front().second, max_y = series.front().second;
    int min_x = series.front().first, max_x = series.front().first;
    for (const auto& [x, y] : series) {
      min_y = std::min(min_y, y);
      max_y = std::max(max_y, y);
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
    }
    if (max_y - min_y < 1e-9) {
      max_y += 1.0;
      min_y -= 1.0;
    }
    if (max_x == min_x) max_x = min_x + 1;
    auto sx = [&](int x) {
      return left + (width - left - right) * (x - min_x) / static_cast<double>(max_x - min_x);
    };
    auto sy = [&](double y) {
      return height - bottom - (height - top - bottom) * (y - min_y) / (max_y - min_y);
    };
    svg << "<polyline fill=\"none\" stroke=\"#b04a48\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : series) svg << sx(x) << "," << sy(y) << " ";
    svg << "\"/>\n";
    for (const auto& [x, y] : series) {
      svg << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3\" fill=\"#b04a48\"/>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

ReportArtifacts render_report(const std::filesystem::path& results_path, Format format,
                              const std::filesystem::path& out_dir) {
  std::vector<ResultEnvelope> envelopes = ResultStore::load(results_path);
  std::filesystem::create_directories(out_dir);

  std::vector<PairedOutcome> outcomes;
  std::vector<RewardBreakdown> breakdowns;
  std::vector<arena::NegotiationSession> sessions;
  std::string hash;
  for (const auto& env : envelopes) {
    if (env.kind == kPairedOutcomeKind) {
      outcomes.push_back(env.payload.get<PairedOutcome>());
    } else if (env.kind == kRewardBreakdownKind) {
      breakdowns.push_back(env.payload.get<RewardBreakdown>());
    } else if (env.kind == kNegotiationSessionKind) {
      sessions.push_back(env.payload.get<arena::NegotiationSession>());
    } else if (env.kind == kRunConfigKind) {
      hash = config_hash(env.payload.get<RunConfig>());
    }
  }

  ReportArtifacts artifacts;
  auto emit = [&](const std::string& name, const std::string& content) {
    std::filesystem::path path = out_dir / name;
    write_file(path, content);
    artifacts.files.push_back(path);
  };

  std::string header = "# Run report\n\nSource: " + results_path.filename().string() +
                       "\nRecords: " + std::to_string(envelopes.size()) + "\n" +
                       (hash.empty() ? std::string{} : "Config hash: " + hash + "\n") + "\n";

  if (format == Format::Table) {
    std::string body = header;
    if (!outcomes.empty()) {
      body += "## Paired-probe outcomes\n\n" + probe_markdown_table(aggregate_metrics(outcomes)) +
              "\n";
    }
    if (!breakdowns.empty()) body += "## Reward breakdowns\n\n" + reward_markdown_table(breakdowns) + "\n";
    if (!sessions.empty()) {
      body += "## Negotiation sessions\n\n" + arena_markdown_table(arena_metrics(sessions)) + "\n";
    }
    if (outcomes.empty() && breakdowns.empty() && sessions.empty()) {
      body += "No reportable records.\n";
    }
    emit("report.md", body);
  } else if (format == Format::Csv) {
    if (!outcomes.empty()) emit("probe_summary.csv", probe_csv(aggregate_metrics(outcomes)));
    if (!breakdowns.empty()) emit("reward_breakdowns.csv", reward_csv(breakdowns));
    if (!sessions.empty()) {
      emit("arena_metrics.csv", arena_csv(arena_metrics(sessions)));
      emit("arena_turn_series.csv", turn_series_csv(arena::turn_offer_series(sessions)));
    }
    if (artifacts.files.empty()) emit("report.csv", "no_records\n");
  } else {
    if (!outcomes.empty()) emit("probe_bias.svg", bias_bars_svg(aggregate_metrics(outcomes)));
    if (!sessions.empty()) {
      emit("arena_turn_series.svg",
           line_chart_svg(arena::turn_offer_series(sessions), "Average offer price by turn",
                          "turn", "offer ($)"));
      emit("arena_turn_series.csv", turn_series_csv(arena::turn_offer_series(sessions)));
    }
    if (artifacts.files.empty()) {
      emit("report.svg", line_chart_svg({}, "No plottable records", "", ""));
    }
  }
  return artifacts;
}

}  // namespace aoa::report
