#include "umm/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "umm/error.hpp"

namespace umm {

std::set<ReportFormat> all_report_formats() {
  return {ReportFormat::structured, ReportFormat::per_sample, ReportFormat::table, ReportFormat::text};
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json" || name == "structured") return ReportFormat::structured;
  if (name == "jsonl" || name == "per_sample") return ReportFormat::per_sample;
  if (name == "csv" || name == "table") return ReportFormat::table;
  if (name == "txt" || name == "text") return ReportFormat::text;
  throw Error(ErrorCode::ConfigError, "unknown report format '" + std::string(name) + "'");
}

namespace {

std::string header_line(const ScoreReport& r) {
  return fmt::format("# umm report benchmark={} adapter={} config={}", r.benchmark, r.adapter, r.config_fingerprint);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string aligned(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += "  ";
      // first column left-aligned, numbers right-aligned
      line += i == 0 ? fmt::format("{:<{}}", row[i], width[i]) : fmt::format("{:>{}}", row[i], width[i]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

}  // namespace

std::vector<std::string> table_columns(const ScoreReport& report) {
  std::vector<std::string> cols;
  for (const auto& c : report.categories) cols.push_back(c.category);
  cols.push_back("overall");
  return cols;
}

std::vector<std::string> table_cells(const ScoreReport& report) {
  std::vector<std::string> cells;
  for (const auto& c : report.categories) cells.push_back(format_fixed(c.value, report.decimals));
  cells.push_back(format_fixed(report.overall.value, report.decimals));
  return cells;
}

std::vector<fs::path> render_report(const ScoreReport& report, const fs::path& dir,
                                    const std::set<ReportFormat>& formats) {
  if (report.categories.empty()) throw Error(ErrorCode::EmptyInput, "report has no categories");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  std::vector<fs::path> written;
  auto emit = [&](const char* name, const std::string& body) {
    write_file_atomic(dir / name, body);
    written.push_back(dir / name);
  };

  // The structured file is emitted regardless of the requested set.
  emit("report.json", json(report).dump(2) + "\n");

  if (formats.count(ReportFormat::per_sample)) {
    std::string body = json{{"_header", {{"benchmark", report.benchmark},
                                         {"adapter", report.adapter},
                                         {"config_fingerprint", report.config_fingerprint}}}}
                           .dump() +
                       "\n";
    for (const auto& s : report.per_sample) body += json(s).dump() + "\n";
    emit("per_sample.jsonl", body);
  }
  if (formats.count(ReportFormat::table)) {
    std::string body = header_line(report) + "\n";
    std::vector<std::string> cols;
    for (const auto& c : table_columns(report)) cols.push_back(csv_escape(c));
    body += fmt::format("{}\n{}\n", fmt::join(cols, ","), fmt::join(table_cells(report), ","));
    emit("table.csv", body);
  }
  if (formats.count(ReportFormat::text)) {
    std::vector<std::vector<std::string>> rows;
    auto cols = table_columns(report);
    cols.insert(cols.begin(), "model");
    auto cells = table_cells(report);
    cells.insert(cells.begin(), report.adapter);
    rows.push_back(cols);
    rows.push_back(cells);
    std::string body = header_line(report) + "\n" + aligned(rows);
    for (const auto& [name, table] : report.breakdowns) {
      std::vector<std::vector<std::string>> b{{name}, {""}};
      for (const auto& c : table) {
        b[0].push_back(c.category);
        b[1].push_back(format_fixed(c.value, report.decimals));
      }
      body += "\n" + aligned(b);
    }
    if (!report.summary.empty()) {
      std::vector<std::vector<std::string>> s;
      for (const auto& [k, v] : report.summary) s.push_back({k, format_fixed(v, report.decimals)});
      body += "\n" + aligned(s);
    }
    if (!report.failures.empty()) body += fmt::format("\nfailures: {}\n", report.failures.size());
    emit("table.txt", body);
  }
  return written;
}

ScoreReport parse_report(const fs::path& report_json) {
  if (!fs::exists(report_json)) throw Error(ErrorCode::IoError, "no report at " + report_json.string());
  return json::parse(read_file(report_json)).get<ScoreReport>();
}

// ---- leaderboard ----

namespace {

std::optional<double> metric_value(const ScoreReport& r, const std::string& metric) {
  if (metric == "overall" || metric == r.overall.metric_name) return r.overall.value;
  for (const auto& c : r.categories) {
    if (c.category == metric) return c.value;
  }
  if (auto it = r.summary.find(metric); it != r.summary.end()) return it->second;
  return std::nullopt;
}

}  // namespace

Leaderboard assemble_leaderboard(const std::vector<ScoreReport>& reports, const std::string& metric,
                                 const std::vector<std::string>& labels) {
  if (reports.empty()) throw Error(ErrorCode::EmptyInput, "leaderboard over no reports");
  if (!labels.empty() && labels.size() != reports.size()) {
    throw Error(ErrorCode::InvalidRequest, "one label per report required");
  }
  Leaderboard board;
  board.benchmark = reports.front().benchmark;
  board.metric = metric;
  board.lower_is_better = reports.front().lower_is_better;
  board.decimals = reports.front().decimals;
  for (const auto& r : reports) {
    if (r.benchmark != board.benchmark) {
      throw Error(ErrorCode::MixedBenchmarks, "'" + r.benchmark + "' vs '" + board.benchmark + "'");
    }
    if (!metric_value(r, metric)) {
      throw Error(ErrorCode::InvalidRequest, "report for '" + r.adapter + "' has no metric '" + metric + "'");
    }
    for (const auto& c : table_columns(r)) {
      if (std::find(board.columns.begin(), board.columns.end(), c) == board.columns.end()) board.columns.push_back(c);
    }
  }
  // keep "overall" last
  std::stable_partition(board.columns.begin(), board.columns.end(), [](const auto& c) { return c != "overall"; });

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    LeaderboardRow row;
    row.model = labels.empty() ? r.adapter : labels[i];
    row.value = *metric_value(r, metric);
    for (const auto& c : board.columns) row.cells.push_back(metric_value(r, c).value_or(nan));
    board.rows.push_back(std::move(row));
  }
  const bool asc = board.lower_is_better;
  auto better = [asc](double a, double b) { return asc ? a < b : a > b; };
  std::sort(board.rows.begin(), board.rows.end(), [&](const LeaderboardRow& a, const LeaderboardRow& b) {
    if (a.value != b.value) return better(a.value, b.value);
    return a.model < b.model;
  });
  for (std::size_t i = 0; i < board.rows.size(); ++i) {
    board.rows[i].rank = (i > 0 && board.rows[i].value == board.rows[i - 1].value) ? board.rows[i - 1].rank : i + 1;
  }
  for (std::size_t c = 0; c < board.columns.size(); ++c) {
    std::optional<double> top;
    for (const auto& row : board.rows) {
      const double v = row.cells[c];
      if (!std::isnan(v) && (!top || better(v, *top))) top = v;
    }
    for (auto& row : board.rows) row.best.push_back(top && row.cells[c] == *top);
  }
  return board;
}

std::string render_leaderboard_text(const Leaderboard& board) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{"rank", "model"};
  head.insert(head.end(), board.columns.begin(), board.columns.end());
  rows.push_back(head);
  for (const auto& r : board.rows) {
    std::vector<std::string> line{std::to_string(r.rank), r.model};
    for (std::size_t c = 0; c < r.cells.size(); ++c) {
      const std::string cell = std::isnan(r.cells[c]) ? "-" : format_fixed(r.cells[c], board.decimals);
      line.push_back(r.best[c] ? "*" + cell : cell);
    }
    rows.push_back(line);
  }
  return fmt::format("# {} by {} ({}; * = best)\n", board.benchmark, board.metric,
                     board.lower_is_better ? "ascending" : "descending") +
         aligned(rows);
}

std::string render_leaderboard_csv(const Leaderboard& board) {
  std::string out = fmt::format("# {} by {}\nrank,model", board.benchmark, board.metric);
  for (const auto& c : board.columns) out += "," + csv_escape(c);
  out += "\n";
  for (const auto& r : board.rows) {
    out += std::to_string(r.rank) + "," + csv_escape(r.model);
    for (double v : r.cells) out += "," + (std::isnan(v) ? std::string() : format_fixed(v, board.decimals));
    out += "\n";
  }
  return out;
}

}  // namespace umm
