#pragma once

#include <set>
#include <string>
#include <vector>

#include "umm/scoring.hpp"

namespace umm {

enum class ReportFormat { structured, per_sample, table, text };

std::set<ReportFormat> all_report_formats();
ReportFormat parse_report_format(std::string_view name);

/// Writes into `dir`:
///   report.json       always; full precision, parse_report() restores it exactly
///   per_sample.jsonl  header record, then one SampleScores per line
///   table.csv         "#" header comment, category columns + overall
///   table.txt         aligned plain text
/// Output is a pure function of the report.
std::vector<fs::path> render_report(const ScoreReport& report, const fs::path& dir,
                                    const std::set<ReportFormat>& formats = all_report_formats());

ScoreReport parse_report(const fs::path& report_json);

/// Column names and rounded cells of the one-row table (categories, then overall).
std::vector<std::string> table_columns(const ScoreReport& report);
std::vector<std::string> table_cells(const ScoreReport& report);

struct LeaderboardRow {
  std::string model;
  std::size_t rank = 0;
  double value = 0.0;
  std::vector<double> cells;  // aligned with Leaderboard::columns; NaN if absent
  std::vector<bool> best;     // per column
};

struct Leaderboard {
  std::string benchmark;
  std::string metric;
  bool lower_is_better = false;
  int decimals = 2;
  std::vector<std::string> columns;
  std::vector<LeaderboardRow> rows;
};

/// `metric` is "overall", the overall metric name, a category, or a summary key.
/// `labels` overrides the row names (default: each report's adapter).
/// Ranks are competition ranks; ties share a rank and are all flagged best.
Leaderboard assemble_leaderboard(const std::vector<ScoreReport>& reports, const std::string& metric,
                                 const std::vector<std::string>& labels = {});

std::string render_leaderboard_text(const Leaderboard& board);
std::string render_leaderboard_csv(const Leaderboard& board);

}  // namespace umm
