#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace umm {

using json = nlohmann::json;
/// Free-form key/value parameters. Always a JSON object; keys iterate sorted.
using ParamMap = nlohmann::json;

enum class TaskKind { understanding, generation, editing };

inline constexpr TaskKind kAllTasks[] = {TaskKind::understanding, TaskKind::generation,
                                         TaskKind::editing};

std::string_view to_string(TaskKind task);
TaskKind parse_task(std::string_view name);

/// Value types used by adapter config schemas and config-layer schemas.
enum class ValueType { integer, number, string, boolean, map, list };

std::string_view to_string(ValueType type);
ValueType parse_value_type(std::string_view name);
bool value_matches(ValueType type, const json& value);

struct CapabilitySet {
  bool understand = false;
  bool generate = false;
  bool edit = false;

  bool supports(TaskKind task) const;
  bool any() const { return understand || generate || edit; }
  bool operator==(const CapabilitySet&) const = default;
};

/// Raw image bytes plus MIME tag; decoding is left to whoever consumes it.
/// `uri` is set when the bytes were externalized to a file (run layouts).
struct Image {
  std::string mime;
  std::string bytes;
  std::optional<std::string> uri;

  bool operator==(const Image&) const = default;
};

struct InferenceRequest {
  std::string prompt;
  std::vector<Image> images;
  TaskKind task = TaskKind::understanding;
  ParamMap params = ParamMap::object();
  std::string sample_id;
  std::int64_t seed = 0;

  bool operator==(const InferenceRequest&) const = default;
};

struct LayerSummary {
  int layer_index = 0;
  std::vector<double> summary;

  bool operator==(const LayerSummary&) const = default;
};

struct InferenceResult {
  std::string sample_id;
  std::optional<std::string> text;
  std::vector<Image> images;
  std::optional<std::vector<LayerSummary>> latents;
  /// Wall-clock seconds. Absent in persisted result records so reruns compare
  /// byte-for-byte; runs keep timings in a side file.
  std::optional<double> timing;
  std::string adapter_name;
  std::int64_t seed = 0;

  bool operator==(const InferenceResult&) const = default;
};

struct Scale {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  bool operator==(const Scale&) const = default;
};

struct ScoreValue {
  std::string metric_name;
  double value = 0.0;
  Scale scale;

  bool operator==(const ScoreValue&) const = default;
};

/// Throws InvalidRequest unless the metric is named and the value lies on its scale.
ScoreValue make_score(std::string metric_name, double value, Scale scale);

/// One benchmark sample and its ground truth.
struct SampleRecord {
  std::string sample_id;
  std::string prompt;
  std::vector<Image> images;
  std::string ground_truth;
  std::string category;
  ParamMap meta = ParamMap::object();

  bool operator==(const SampleRecord&) const = default;
};

/// Returns the request unchanged iff every request invariant holds; throws
/// InvalidRequest naming the violated one otherwise.
const InferenceRequest& validate_request(const InferenceRequest& req);

// ---- canonical serialization (one JSON object per line) ----------------------

void to_json(json& j, const TaskKind& t);
void from_json(const json& j, TaskKind& t);
void to_json(json& j, const CapabilitySet& c);
void from_json(const json& j, CapabilitySet& c);
void to_json(json& j, const Image& img);
void from_json(const json& j, Image& img);
void to_json(json& j, const InferenceRequest& r);
void from_json(const json& j, InferenceRequest& r);
void to_json(json& j, const LayerSummary& l);
void from_json(const json& j, LayerSummary& l);
void to_json(json& j, const InferenceResult& r);
void from_json(const json& j, InferenceResult& r);
void to_json(json& j, const Scale& s);
void from_json(const json& j, Scale& s);
void to_json(json& j, const ScoreValue& s);
void from_json(const json& j, ScoreValue& s);
void to_json(json& j, const SampleRecord& r);
void from_json(const json& j, SampleRecord& r);

/// Single-line canonical record.
template <typename T>
std::string to_record(const T& value) {
  return json(value).dump();
}

template <typename T>
T from_record(std::string_view line) {
  return json::parse(line).get<T>();
}

std::string guess_mime(std::string_view path);
std::string extension_for_mime(std::string_view mime);

}  // namespace umm
