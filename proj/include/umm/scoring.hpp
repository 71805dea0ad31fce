#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "umm/core.hpp"
#include "umm/pipeline.hpp"

namespace umm {

class JudgeClient;

struct CategoryAggregate {
  std::string category;
  std::size_t n = 0;
  double value = 0.0;

  bool operator==(const CategoryAggregate&) const = default;
};

struct SampleScores {
  std::string sample_id;
  std::string category;
  std::vector<ScoreValue> scores;
  json detail = json::object();  // extracted answer, judge rationale, ...

  bool operator==(const SampleScores&) const = default;
};

/// How `overall` is derived from `categories`.
enum class Aggregation { mean, weighted, count_weighted, sum };
std::string_view to_string(Aggregation a);
Aggregation parse_aggregation(std::string_view name);

struct ScoreReport {
  std::string benchmark;
  std::string adapter;
  std::vector<SampleScores> per_sample;  // sorted by sample_id
  std::vector<CategoryAggregate> categories;
  ScoreValue overall;
  Aggregation aggregation = Aggregation::mean;
  std::map<std::string, double> weights;  // only for `weighted`
  int decimals = 2;                       // rendering precision
  bool lower_is_better = false;
  /// Secondary tables, e.g. "SC", "PQ", "intersection/O", "subtasks".
  std::map<std::string, std::vector<CategoryAggregate>> breakdowns;
  /// Secondary scalars, e.g. "perception", "SC", "intersection/O".
  std::map<std::string, double> summary;
  std::vector<RunFailure> failures;
  json resolved_config = json::object();
  std::string config_fingerprint;

  bool operator==(const ScoreReport&) const = default;
};

void to_json(json& j, const CategoryAggregate& c);
void from_json(const json& j, CategoryAggregate& c);
void to_json(json& j, const SampleScores& s);
void from_json(const json& j, SampleScores& s);
void to_json(json& j, const ScoreReport& r);
void from_json(const json& j, ScoreReport& r);

// ---- answer extraction ----

struct ChoiceOption {
  std::string label;
  std::string text;
};

/// Reads `meta.options`: either {"A": "text", ...} or ["text", ...] (labelled A, B, ...).
std::vector<ChoiceOption> options_from_meta(const json& meta);

/// Rule cascade: exact label, "answer is X", unique option-text containment.
/// nullopt means abstain.
std::optional<std::string> extract_choice(std::string_view response, const std::vector<ChoiceOption>& options);

/// Free-form match: normalized text equality, or numeric equality with the last
/// number in the response when the ground truth is numeric.
bool free_form_match(std::string_view response, std::string_view ground_truth);

// ---- aggregation ----

double aggregate_mean(std::span<const CategoryAggregate> categories);
double aggregate_weighted(std::span<const CategoryAggregate> categories,
                          const std::map<std::string, double>& weights);
double aggregate_count_weighted(std::span<const CategoryAggregate> categories);
double aggregate_sum(std::span<const CategoryAggregate> categories);
double aggregate(Aggregation rule, std::span<const CategoryAggregate> categories,
                 const std::map<std::string, double>& weights = {});
std::map<std::string, double> count_weights(std::span<const CategoryAggregate> categories);

/// Means of per-sample values grouped by category, sorted by category name.
std::vector<CategoryAggregate> category_means(
    const std::vector<std::pair<std::string, double>>& category_values, double factor = 1.0);

// ---- multiple choice ----

struct McOutcome {
  double accuracy = 0.0;
  std::vector<CategoryAggregate> categories;
  std::vector<SampleScores> per_sample;
};

/// Pairs records and results by sample_id. Options come from record.meta; records
/// without options are scored free-form.
McOutcome score_multiple_choice(std::span<const SampleRecord> records,
                                std::span<const InferenceResult> results);

// ---- editing ----

struct EditScore {
  double sc = 0.0;
  double pq = 0.0;
  double o = 0.0;

  bool operator==(const EditScore&) const = default;
};

EditScore make_edit_score(double sc, double pq);

struct EditTable {
  std::vector<CategoryAggregate> sc;
  std::vector<CategoryAggregate> pq;
  std::vector<CategoryAggregate> o;
  double avg_sc = 0.0;
  double avg_pq = 0.0;
  double avg_o = 0.0;
};

/// Category means of SC, PQ and O, and their unweighted Avg over categories.
EditTable edit_table(const std::vector<std::pair<std::string, EditScore>>& samples);

struct EditOptions {
  std::vector<std::string> categories;  // declared set; empty accepts any
  std::string subset_key = "intersection";
};

/// Judges every sample. Multi-turn samples (meta.turns) score each turn against
/// the running image and average turn scores per sample. Judge failures are
/// recorded and excluded from aggregates.
ScoreReport score_edit_benchmark(std::span<const SampleRecord> records,
                                 std::span<const InferenceResult> results, JudgeClient& judge,
                                 const EditOptions& options = {});

// ---- MME ----

struct MmeComposition {
  std::vector<std::string> perception;
  std::vector<std::string> cognition;
  static MmeComposition standard();
  static MmeComposition from_json(const json& j);
};

struct MmeScore {
  double perception = 0.0;
  double cognition = 0.0;
  std::vector<CategoryAggregate> per_subtask;
};

/// Yes/no answer read from the start of a response; nullopt if neither.
std::optional<bool> parse_yes_no(std::string_view response);

/// Per subtask: 100 * question accuracy + 100 * fraction of images with every
/// question correct. Questions group by meta.image_id (else the first image).
MmeScore score_mme(std::span<const SampleRecord> records, std::span<const InferenceResult> results,
                   const MmeComposition& composition = MmeComposition::standard());

// ---- WISE ----

/// Category value = mean WiScore; overall weighted (default: prompt counts).
ScoreReport score_wise(std::span<const SampleRecord> records, const std::map<std::string, double>& wiscores,
                       const std::optional<std::map<std::string, double>>& weights = std::nullopt);

}  // namespace umm
