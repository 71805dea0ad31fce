#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "umm/backbone.hpp"
#include "umm/config.hpp"
#include "umm/judge.hpp"
#include "umm/pipeline.hpp"

namespace umm {

/// Original question plus two rephrasings, sharing the sample's images.
struct VariantSet {
  std::string sample_id;
  std::array<std::string, 3> variants;
  std::vector<Image> images;

  bool operator==(const VariantSet&) const = default;
};

struct LayerValue {
  int layer_index = 0;
  double value = 0.0;

  bool operator==(const LayerValue&) const = default;
};

struct ConsistencyTrace {
  std::string sample_id;
  std::array<std::string, 3> variants;
  std::array<std::string, 3> responses;
  std::vector<std::vector<double>> query_embeddings;     // persisted, not aggregated
  std::vector<std::vector<double>> response_embeddings;  // empty entries for empty responses
  /// Pairs (1,2), (1,3), (2,3); nullopt when either response is empty.
  std::array<std::optional<double>, 3> pairwise_cosines;
  std::vector<std::vector<LayerSummary>> layer_summaries;  // per variant
  std::vector<LayerValue> layer_consistency;
  int stride = 5;
  bool include_final_layer = false;
  bool flagged = false;
  std::string note;
};

void to_json(json& j, const ConsistencyTrace& t);
void from_json(const json& j, ConsistencyTrace& t);

/// Cosines of (1,2), (1,3), (2,3).
std::array<double, 3> pairwise_cosines(const std::vector<double>& a, const std::vector<double>& b,
                                       const std::vector<double>& c);

/// One VariantSet per sample. Samples whose rephrasing repeats the original are
/// dropped and listed in `dropped`.
std::vector<VariantSet> build_variants(std::span<const SampleRecord> samples, JudgeClient& rephraser,
                                       std::vector<RunFailure>* dropped = nullptr);

/// Pairwise cosines of the embedded responses; nullopt for pairs touching an
/// empty response.
std::array<std::optional<double>, 3> response_consistency(const std::array<std::string, 3>& responses,
                                                          JudgeClient& embedder);

/// Per-layer summaries of each variant's response span, re-fed through the model.
std::vector<std::vector<LayerSummary>> variant_layer_summaries(BackboneAdapter& adapter, const VariantSet& set,
                                                               const std::array<std::string, 3>& responses,
                                                               int stride, bool include_final_layer);

/// Mean pairwise cosine of the three summaries at each sampled layer.
std::vector<LayerValue> layer_consistency(const std::vector<std::vector<LayerSummary>>& summaries);
std::vector<LayerValue> layer_consistency(BackboneAdapter& adapter, const VariantSet& set,
                                          const std::array<std::string, 3>& responses, int stride = 5,
                                          bool include_final_layer = false);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;
  std::size_t total = 0;
};

/// 50 bins over [0, 1]; widened to 100 bins over [-1, 1] if any value is negative.
Histogram cosine_histogram(std::span<const double> values);

struct CurvePoint {
  int layer_index = 0;
  double mean = 0.0;
  std::size_t n = 0;
};

std::vector<CurvePoint> mean_layer_curve(std::span<const ConsistencyTrace> traces);

struct AnalysisOptions {
  int workers = 1;
  std::optional<std::string> run_id;
  std::shared_ptr<JudgeTransport> rephraser_transport;
  std::shared_ptr<JudgeTransport> embedder_transport;
  bool plots = true;
};

struct AnalysisOutcome {
  std::string run_id;
  fs::path run_dir;
  std::vector<ConsistencyTrace> traces;  // sorted by sample_id
  std::vector<RunFailure> dropped;
  std::vector<RunFailure> failures;
  Histogram histogram;
  std::vector<CurvePoint> curve;
  std::vector<double> cosines;  // every defined pairwise response cosine
};

/// Writes under <output_dir>/<run_id>/: traces.jsonl, histogram.json,
/// layer_curve.json, summary.json, manifest.json and, with plots on,
/// response_cosines.svg and layer_consistency.svg. Everything except
/// manifest.json is a pure function of config and inputs.
AnalysisOutcome analyze(const AnalysisConfig& cfg, std::span<const SampleRecord> samples,
                        const BackboneRegistry& registry, const AnalysisOptions& options = {});

std::string svg_histogram(const Histogram& h, const std::string& title);
std::string svg_curve(const std::vector<CurvePoint>& curve, const std::string& title);

}  // namespace umm
