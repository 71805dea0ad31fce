#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "umm/backbone.hpp"
#include "umm/config.hpp"
#include "umm/core.hpp"

namespace umm {

struct RunFailure {
  std::string sample_id;
  std::string error;

  bool operator==(const RunFailure&) const = default;
};

/// Written to `<output_dir>/<run_id>/manifest.json`.
struct RunManifest {
  std::string run_id;
  json resolved_config;
  std::string config_fingerprint;
  AdapterDescriptor adapter;
  TaskKind task = TaskKind::understanding;
  std::string preprocessing_fingerprint;
  std::string started;
  std::string finished;
  std::size_t planned_count = 0;
  std::size_t sample_count = 0;  // successes + failures
  std::size_t success_count = 0;
  std::vector<RunFailure> failures;
  bool complete = false;
  bool aborted = false;
};

void to_json(json& j, const RunManifest& m);
void from_json(const json& j, RunManifest& m);

struct PipelineOptions {
  fs::path output_dir = "runs";
  int workers = 1;
  double failure_threshold = 0.2;
  /// Pin the run id instead of generating `<timestamp>-<random>`.
  std::optional<std::string> run_id;
  /// Dispatch at most this many pending samples (0 = all). Leaves a partial run.
  std::size_t limit = 0;
  /// Config tree embedded in the manifest; defaults to the inference config.
  std::optional<json> embed_config;
};

/// Request for one sample: task routing, input images, gen params, and seed.
InferenceRequest make_request(const SampleRecord& record, TaskKind task, const InferenceConfig& cfg);

/// Stage 1: runs every sample through a freshly loaded adapter and persists
///   <run>/manifest.json, <run>/samples.jsonl, <run>/results/results.jsonl,
///   <run>/images/<sample_id>_<k><ext>, <run>/timings.jsonl
/// Results on disk are sorted by sample_id. Per-sample adapter errors are
/// recorded; the run stops dispatching once failures exceed the threshold.
RunManifest run_inference(const InferenceConfig& cfg, std::span<const SampleRecord> samples,
                          TaskKind task, const BackboneRegistry& registry,
                          const PipelineOptions& options);

/// Re-executes only samples without a persisted result. Throws ManifestMismatch
/// if `cfg` differs from the configuration recorded in the run.
RunManifest resume_run(const fs::path& run_dir, const InferenceConfig& cfg,
                       const BackboneRegistry& registry, const PipelineOptions& options);

RunManifest load_manifest(const fs::path& run_dir);
/// Persisted results sorted by sample_id, with image bytes re-read from disk.
std::vector<InferenceResult> load_results(const fs::path& run_dir);
std::vector<SampleRecord> load_run_samples(const fs::path& run_dir);

std::string safe_file_stem(std::string_view sample_id);

}  // namespace umm
