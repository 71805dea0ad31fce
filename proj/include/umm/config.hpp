#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "umm/core.hpp"
#include "umm/util.hpp"

namespace umm {

/// Environment variable naming the global cache root (judge verdict cache).
inline constexpr const char* kCacheDirEnv = "UMM_CACHE_DIR";

enum class ConfigKind { inference, eval, train, analysis };
std::string_view to_string(ConfigKind kind);

struct InferenceConfig {
  std::string backbone;
  ParamMap backbone_cfg = ParamMap::object();
  ParamMap gen_params = ParamMap::object();
  std::int64_t seed = 0;

  bool operator==(const InferenceConfig&) const = default;
};

struct JudgeConfig {
  std::string endpoint;  // http(s)://... or mock:<name>[:<arg>]
  std::string model_name;
  std::string template_id;
  int max_retries = 2;
  double rate_limit = 10.0;  // requests per second
  std::string cache_dir;

  bool operator==(const JudgeConfig&) const = default;
};

/// Stage-2 wrapper around an official scoring script.
/// `command` may reference {run_dir}, {results}, {images_dir}, {output_file}, {dataset}.
struct ExternalScorerConfig {
  std::string command;
  std::string output_file;
  std::string parse_rule;  // per_sample_jsonl | summary_json

  bool operator==(const ExternalScorerConfig&) const = default;
};

enum class EvalMode { single_stage, two_stage };

struct EvalConfig {
  std::string benchmark;
  std::string dataset_path;
  std::string output_dir;
  EvalMode mode = EvalMode::single_stage;
  std::optional<JudgeConfig> judge;
  std::optional<ExternalScorerConfig> external_scorer;
  ParamMap params = ParamMap::object();
  double failure_threshold = 0.2;
  InferenceConfig inference;

  bool operator==(const EvalConfig&) const = default;
};

struct OptimizerConfig {
  double learning_rate = 1e-2;
  int steps = 50;
  int batch_size = 8;

  bool operator==(const OptimizerConfig&) const = default;
};

struct TrainConfig {
  std::string method;
  OptimizerConfig optimizer;
  int checkpoint_interval = 10;
  ParamMap distributed = ParamMap::object();
  ParamMap hyperparams = ParamMap::object();
  std::string dataset_path;
  std::string output_dir;
  std::string resume_from;
  InferenceConfig inference;

  bool operator==(const TrainConfig&) const = default;
};

struct AnalysisConfig {
  std::string dataset_path;
  std::string output_dir;
  int stride = 5;
  bool include_final_layer = false;
  int max_samples = 0;  // 0 = all
  JudgeConfig rephraser;
  JudgeConfig embedder;
  InferenceConfig inference;

  bool operator==(const AnalysisConfig&) const = default;
};

using AnyConfig = std::variant<InferenceConfig, EvalConfig, TrainConfig, AnalysisConfig>;

ConfigKind kind_of(const AnyConfig& cfg);

/// Loads a YAML config file. Precedence: built-in defaults < file < overrides.
/// Overrides are `dotted.key=value` with YAML scalar values. The kind is taken
/// from the top-level section (eval/train/analysis, otherwise inference) unless
/// `expected` is given, in which case a different kind is a KindMismatch.
AnyConfig load_config(const fs::path& path, const std::vector<std::string>& overrides = {},
                      std::optional<ConfigKind> expected = std::nullopt);
AnyConfig load_config_text(std::string_view yaml, const std::vector<std::string>& overrides = {},
                           std::optional<ConfigKind> expected = std::nullopt);
/// Builds a typed config from an already-resolved tree (e.g. embedded in a report).
AnyConfig config_from_tree(const json& tree, std::optional<ConfigKind> expected = std::nullopt);

template <typename T>
T load_config_as(const fs::path& path, const std::vector<std::string>& overrides = {});

/// Canonical, fully-resolved tree form.
json to_tree(const AnyConfig& cfg);
std::string config_fingerprint(const AnyConfig& cfg);
/// Canonical YAML rendering; loading it back yields an equal config.
std::string to_yaml(const AnyConfig& cfg);

struct ConfigDiff {
  std::string key;
  json a;
  json b;

  bool operator==(const ConfigDiff&) const = default;
};

/// Differences in dotted-path form, sorted by key; empty iff equal.
std::vector<ConfigDiff> diff_configs(const AnyConfig& a, const AnyConfig& b);

/// Markdown reference of every config layer's keys, types, and defaults.
std::string schema_reference();

json yaml_to_json(std::string_view yaml);

}  // namespace umm
