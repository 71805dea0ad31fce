#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "umm/backbone.hpp"
#include "umm/config.hpp"
#include "umm/judge.hpp"
#include "umm/pipeline.hpp"
#include "umm/reporting.hpp"
#include "umm/scoring.hpp"

namespace umm {

struct BenchmarkDescriptor {
  std::string name;
  TaskKind task = TaskKind::understanding;
  std::string metric;
  Scale scale;  // of category values and of overall, except for `sum`
  int decimals = 2;
  Aggregation aggregation = Aggregation::mean;
  std::map<std::string, double> default_weights;  // `weighted` only; empty means prompt counts
  std::vector<std::string> categories;           // declared set; empty accepts any
  bool needs_judge = false;
  bool external_scores = false;  // per-sample scores come from a stage-2 script
  bool lower_is_better = false;
  std::string summary;
};

struct BenchmarkInput {
  const BenchmarkDescriptor& desc;
  std::span<const SampleRecord> records;
  std::span<const InferenceResult> results;  // one per record; failed samples have no outputs
  JudgeClient* judge = nullptr;
  const std::map<std::string, json>* external = nullptr;  // per-sample scorer records
  json params = json::object();
};

using BenchmarkScorer = std::function<ScoreReport(const BenchmarkInput&)>;

class BenchmarkRegistry {
 public:
  void register_benchmark(BenchmarkDescriptor desc, BenchmarkScorer scorer);
  /// Throws UnknownBenchmark.
  const BenchmarkDescriptor& resolve(const std::string& name) const;
  const BenchmarkScorer& scorer(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, std::pair<BenchmarkDescriptor, BenchmarkScorer>> entries_;
};

/// toy-mc, mmmu, mmbench, mathvista, mme, geneval, wise, gedit, imgedit.
void register_builtin_benchmarks(BenchmarkRegistry& registry);

/// Line-oriented dataset: a .jsonl file, or a directory holding samples.jsonl.
/// Each line: sample_id|id, prompt|question, images (paths relative to the file,
/// or {mime, data}), ground_truth|answer, category, meta. Any other key (options,
/// turns, image_id, intersection, ...) is folded into meta.
std::vector<SampleRecord> load_dataset(const fs::path& path);
SampleRecord parse_dataset_line(const json& line, const fs::path& base_dir);

/// Category values from per-sample values, then overall by the descriptor's rule.
ScoreReport report_from_values(const BenchmarkDescriptor& desc, std::span<const SampleRecord> records,
                               const std::map<std::string, double>& values, double factor,
                               const json& params);

/// Weights for a `weighted` benchmark: params.weights (map or "counts"), else the
/// descriptor default restricted to the present categories, else prompt counts.
std::map<std::string, double> resolve_weights(const BenchmarkDescriptor& desc,
                                              std::span<const CategoryAggregate> categories,
                                              const json& params);

/// Sets aggregation, weights, decimals and overall from `categories`.
void finish_report(ScoreReport& report, const BenchmarkDescriptor& desc, const json& params);

struct EvalOptions {
  int workers = 1;
  std::optional<std::string> run_id;
  std::size_t limit = 0;
  std::shared_ptr<JudgeTransport> judge_transport;  // overrides judge.endpoint
};

struct EvalOutcome {
  ScoreReport report;
  RunManifest manifest;
  fs::path run_dir;
  fs::path report_dir;
};

/// single_stage: inference then in-process scoring. two_stage: inference, export
/// of stage-1 outputs to <run>/stage1/predictions.jsonl, then the external
/// scorer if configured, else the internal scorer over the persisted outputs.
/// The report is written to <run>/report/.
EvalOutcome run_benchmark(const EvalConfig& cfg, const BackboneRegistry& backbones,
                          const BenchmarkRegistry& benchmarks, const EvalOptions& options = {});

/// Completes an interrupted run, then scores it.
EvalOutcome resume_benchmark(const fs::path& run_dir, const EvalConfig& cfg, const BackboneRegistry& backbones,
                             const BenchmarkRegistry& benchmarks, const EvalOptions& options = {});

/// Stage 2 only, over an existing run directory.
EvalOutcome score_run(const fs::path& run_dir, const EvalConfig& cfg, const BenchmarkRegistry& benchmarks,
                      const EvalOptions& options = {});

/// Substitutes {run_dir} {results} {images_dir} {output_file} {dataset}.
std::string expand_scorer_command(const std::string& tmpl, const std::map<std::string, std::string>& vars);

}  // namespace umm
