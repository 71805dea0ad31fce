#include "umm/config.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "umm/error.hpp"

namespace umm {

std::string_view to_string(ConfigKind kind) {
  switch (kind) {
    case ConfigKind::inference: return "inference";
    case ConfigKind::eval: return "eval";
    case ConfigKind::train: return "train";
    case ConfigKind::analysis: return "analysis";
  }
  return "?";
}

ConfigKind kind_of(const AnyConfig& cfg) {
  return static_cast<ConfigKind>(cfg.index());
}

// ---- YAML <-> JSON ---------------------------------------------------------------

namespace {

json scalar_to_json(const YAML::Node& node) {
  const std::string& s = node.Scalar();
  // Quoted scalars carry the non-specific "!" tag and stay strings.
  if (node.Tag() == "!") return s;
  static const std::regex kInt(R"(^[-+]?[0-9]+$)");
  static const std::regex kFloat(R"(^[-+]?(\.[0-9]+|[0-9]+(\.[0-9]*)?)([eE][-+]?[0-9]+)?$)");
  if (s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  if (std::regex_match(s, kInt)) {
    try {
      return std::stoll(s);
    } catch (const std::out_of_range&) {
      return s;
    }
  }
  if (std::regex_match(s, kFloat)) return std::stod(s);
  return s;
}

json node_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(node_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = node_to_json(kv.second);
      return obj;
    }
  }
  return nullptr;
}

void emit_json(YAML::Emitter& out, const json& j) {
  if (j.is_object()) {
    out << YAML::BeginMap;
    for (const auto& [k, v] : j.items()) {
      out << YAML::Key << k << YAML::Value;
      emit_json(out, v);
    }
    out << YAML::EndMap;
  } else if (j.is_array()) {
    out << YAML::Flow << YAML::BeginSeq;
    for (const auto& v : j) emit_json(out, v);
    out << YAML::EndSeq;
  } else if (j.is_string()) {
    out << YAML::DoubleQuoted << j.get<std::string>();
  } else if (j.is_null()) {
    out << YAML::Null;
  } else {
    out << j.dump();
  }
}

}  // namespace

json yaml_to_json(std::string_view yaml) {
  try {
    return node_to_json(YAML::Load(std::string(yaml)));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

// ---- schema ------------------------------------------------------------------------

namespace {

struct FieldSpec {
  std::string path;
  ValueType type;
  json default_value;  // null: no default
  bool required;
  std::string doc;
};

struct LayerSchema {
  ConfigKind kind;
  std::vector<FieldSpec> fields;
  /// Sections that may be omitted entirely; their defaults and required keys
  /// only apply once the section is present.
  std::vector<std::string> optional_sections;
};

void add_inference_fields(std::vector<FieldSpec>& f) {
  f.push_back({"inference.backbone", ValueType::string, nullptr, true, "registered backbone name"});
  f.push_back({"inference.backbone_cfg", ValueType::map, json::object(), false,
               "backbone settings (weights path, device allocation); checked against the adapter schema"});
  f.push_back({"inference.gen_params", ValueType::map, json::object(), false,
               "generation parameters (steps, guidance, batch_size, max_new_tokens, ...)"});
  f.push_back({"inference.seed", ValueType::integer, 0, false, "global seed, >= 0"});
}

void add_judge_fields(std::vector<FieldSpec>& f, const std::string& prefix, json endpoint,
                      const std::string& template_id) {
  const bool required = endpoint.is_null();
  f.push_back({prefix + ".endpoint", ValueType::string, endpoint, required,
               "http(s) URL of the scorer, or mock:<name>"});
  f.push_back({prefix + ".model_name", ValueType::string, "", false, "scorer model identifier"});
  f.push_back({prefix + ".template_id", ValueType::string, template_id, false,
               "versioned prompt template"});
  f.push_back({prefix + ".max_retries", ValueType::integer, 2, false, ">= 0"});
  f.push_back({prefix + ".rate_limit", ValueType::number, 10.0, false, "requests per second, > 0"});
  f.push_back({prefix + ".cache_dir", ValueType::string, "", false,
               std::string("verdict cache directory; empty means $") + kCacheDirEnv +
                   "/judge, or memory only when that is unset"});
}

const std::vector<LayerSchema>& schemas() {
  static const std::vector<LayerSchema> all = [] {
    std::vector<LayerSchema> out;
    {
      LayerSchema s{ConfigKind::inference, {}, {}};
      add_inference_fields(s.fields);
      out.push_back(std::move(s));
    }
    {
      LayerSchema s{ConfigKind::eval, {}, {"eval.judge", "eval.external_scorer"}};
      auto& f = s.fields;
      f.push_back({"eval.benchmark", ValueType::string, nullptr, true, "registered benchmark name"});
      f.push_back({"eval.dataset_path", ValueType::string, nullptr, true, "samples.jsonl or a directory containing it"});
      f.push_back({"eval.output_dir", ValueType::string, "runs", false, "run directories are created here"});
      f.push_back({"eval.mode", ValueType::string, "single_stage", false, "single_stage | two_stage"});
      add_judge_fields(f, "eval.judge", nullptr, "viescore-edit/v1");
      f.push_back({"eval.external_scorer.command", ValueType::string, nullptr, true,
                   "shell command; placeholders {run_dir} {results} {images_dir} {output_file} {dataset}"});
      f.push_back({"eval.external_scorer.output_file", ValueType::string, nullptr, true,
                   "file the command writes, relative to the run directory"});
      f.push_back({"eval.external_scorer.parse_rule", ValueType::string, "per_sample_jsonl", false,
                   "per_sample_jsonl | summary_json"});
      f.push_back({"eval.params", ValueType::map, json::object(), false, "benchmark-specific options"});
      f.push_back({"eval.failure_threshold", ValueType::number, 0.2, false,
                   "abort when failures exceed this fraction of samples"});
      add_inference_fields(f);
      out.push_back(std::move(s));
    }
    {
      LayerSchema s{ConfigKind::train, {}, {}};
      auto& f = s.fields;
      f.push_back({"train.method", ValueType::string, nullptr, true, "registered trainer"});
      f.push_back({"train.optimizer.learning_rate", ValueType::number, 1e-2, false, "> 0"});
      f.push_back({"train.optimizer.steps", ValueType::integer, 50, false, "optimizer steps"});
      f.push_back({"train.optimizer.batch_size", ValueType::integer, 8, false, "examples per step"});
      f.push_back({"train.checkpoint_interval", ValueType::integer, 10, false, "steps between checkpoints, >= 1"});
      f.push_back({"train.distributed", ValueType::map, json::object(), false, "recorded, not acted on"});
      f.push_back({"train.hyperparams", ValueType::map, json::object(), false, "method-specific settings"});
      f.push_back({"train.dataset_path", ValueType::string, nullptr, true,
                   "JSONL of {input, target}, or synthetic:<n>"});
      f.push_back({"train.output_dir", ValueType::string, "runs", false, "run directories are created here"});
      f.push_back({"train.resume_from", ValueType::string, "", false, "checkpoint directory to continue from"});
      add_inference_fields(f);
      out.push_back(std::move(s));
    }
    {
      LayerSchema s{ConfigKind::analysis, {}, {}};
      auto& f = s.fields;
      f.push_back({"analysis.dataset_path", ValueType::string, nullptr, true, "samples.jsonl or directory"});
      f.push_back({"analysis.output_dir", ValueType::string, "runs", false, "run directories are created here"});
      f.push_back({"analysis.stride", ValueType::integer, 5, false, "hidden-state layer stride, >= 1"});
      f.push_back({"analysis.include_final_layer", ValueType::boolean, false, false,
                   "also sample the last layer when the stride skips it"});
      f.push_back({"analysis.max_samples", ValueType::integer, 0, false, "0 = all samples"});
      add_judge_fields(f, "analysis.rephraser", "mock:rephrase", "rephrase/v1");
      add_judge_fields(f, "analysis.embedder", "mock:hash-embed", "embed/v1");
      add_inference_fields(f);
      out.push_back(std::move(s));
    }
    return out;
  }();
  return all;
}

const LayerSchema& schema_for(ConfigKind kind) { return schemas()[static_cast<std::size_t>(kind)]; }

json* lookup(json& tree, const std::string& dotted, bool create) {
  json* node = &tree;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (!node->is_object()) {
      if (!create) return nullptr;
      *node = json::object();
    }
    auto it = node->find(part);
    if (it == node->end()) {
      if (!create) return nullptr;
      node = &(*node)[part];
    } else {
      node = &*it;
    }
  }
  return node;
}

const json* lookup(const json& tree, const std::string& dotted) {
  return lookup(const_cast<json&>(tree), dotted, false);
}

void deep_merge(json& base, const json& over) {
  if (!base.is_object() || !over.is_object()) {
    base = over;
    return;
  }
  for (const auto& [k, v] : over.items()) {
    if (v.is_object() && base.contains(k) && base[k].is_object()) deep_merge(base[k], v);
    else base[k] = v;
  }
}

bool starts_with_section(const std::string& path, const std::string& section) {
  return path.size() > section.size() && path.compare(0, section.size(), section) == 0 &&
         path[section.size()] == '.';
}

ConfigKind detect_kind(const json& tree) {
  if (tree.is_object()) {
    if (tree.contains("eval")) return ConfigKind::eval;
    if (tree.contains("train")) return ConfigKind::train;
    if (tree.contains("analysis")) return ConfigKind::analysis;
  }
  return ConfigKind::inference;
}

/// Validates the merged tree, applies defaults, and returns the resolved tree.
json resolve(const json& merged, const LayerSchema& schema) {
  if (!merged.is_object()) throw Error(ErrorCode::ParseError, "config root must be a mapping");

  std::set<std::string> sections;
  std::map<std::string, const FieldSpec*> fields;
  for (const auto& f : schema.fields) {
    fields[f.path] = &f;
    for (auto pos = f.path.find('.'); pos != std::string::npos; pos = f.path.find('.', pos + 1)) {
      sections.insert(f.path.substr(0, pos));
    }
  }

  std::vector<std::string> unknown;
  std::vector<std::string> mismatched;
  std::function<void(const json&, const std::string&)> walk = [&](const json& node, const std::string& prefix) {
    for (const auto& [k, v] : node.items()) {
      const std::string path = prefix.empty() ? k : prefix + "." + k;
      if (auto it = fields.find(path); it != fields.end()) {
        if (!value_matches(it->second->type, v)) {
          mismatched.push_back(path + " (expected " + std::string(to_string(it->second->type)) +
                               ", got " + v.type_name() + ")");
        }
      } else if (sections.count(path)) {
        if (!v.is_object()) mismatched.push_back(path + " (expected section, got " + v.type_name() + ")");
        else walk(v, path);
      } else {
        unknown.push_back(path);
      }
    }
  };
  walk(merged, "");
  if (!unknown.empty()) {
    std::string msg;
    for (const auto& u : unknown) msg += (msg.empty() ? "" : ", ") + u;
    throw Error(ErrorCode::UnknownKey, msg);
  }
  if (!mismatched.empty()) {
    std::string msg;
    for (const auto& m : mismatched) msg += (msg.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::TypeMismatch, msg);
  }

  json out = merged;
  std::vector<std::string> missing;
  for (const auto& f : schema.fields) {
    bool active = true;
    for (const auto& sec : schema.optional_sections) {
      if (starts_with_section(f.path, sec) && lookup(out, sec) == nullptr) active = false;
    }
    if (!active) continue;
    json* slot = lookup(out, f.path, false);
    if (slot == nullptr || slot->is_null()) {
      if (f.required) {
        missing.push_back(f.path);
      } else if (!f.default_value.is_null()) {
        *lookup(out, f.path, true) = f.default_value;
      }
    } else if (f.type == ValueType::number && slot->is_number_integer()) {
      *slot = slot->get<double>();
    }
  }
  if (!missing.empty()) {
    std::string msg = "missing required key";
    for (const auto& m : missing) msg += " " + m;
    throw Error(ErrorCode::ConfigError, msg);
  }
  return out;
}

void apply_override(json& tree, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::ParseError, "override '" + spec + "' is not key=value");
  }
  const std::string key = trim(spec.substr(0, eq));
  const std::string value = spec.substr(eq + 1);
  json parsed = value.empty() ? json("") : yaml_to_json(value);
  *lookup(tree, key, true) = parsed;
}

JudgeConfig judge_from(const json& j) {
  JudgeConfig c;
  c.endpoint = j.at("endpoint").get<std::string>();
  c.model_name = j.at("model_name").get<std::string>();
  c.template_id = j.at("template_id").get<std::string>();
  c.max_retries = j.at("max_retries").get<int>();
  c.rate_limit = j.at("rate_limit").get<double>();
  c.cache_dir = j.at("cache_dir").get<std::string>();
  if (c.max_retries < 0) throw Error(ErrorCode::ConfigError, "judge max_retries must be >= 0");
  if (!(c.rate_limit > 0)) throw Error(ErrorCode::ConfigError, "judge rate_limit must be > 0");
  return c;
}

json judge_to(const JudgeConfig& c) {
  return json{{"endpoint", c.endpoint},       {"model_name", c.model_name},
              {"template_id", c.template_id}, {"max_retries", c.max_retries},
              {"rate_limit", c.rate_limit},   {"cache_dir", c.cache_dir}};
}

InferenceConfig inference_from(const json& j) {
  InferenceConfig c;
  c.backbone = j.at("backbone").get<std::string>();
  c.backbone_cfg = j.at("backbone_cfg");
  c.gen_params = j.at("gen_params");
  c.seed = j.at("seed").get<std::int64_t>();
  if (c.backbone.empty()) throw Error(ErrorCode::ConfigError, "inference.backbone is empty");
  if (c.seed < 0) throw Error(ErrorCode::ConfigError, "inference.seed must be >= 0");
  return c;
}

json inference_to(const InferenceConfig& c) {
  return json{{"backbone", c.backbone},
              {"backbone_cfg", c.backbone_cfg},
              {"gen_params", c.gen_params},
              {"seed", c.seed}};
}

AnyConfig typed_from(const json& t, ConfigKind kind) {
  switch (kind) {
    case ConfigKind::inference:
      return inference_from(t.at("inference"));
    case ConfigKind::eval: {
      const auto& e = t.at("eval");
      EvalConfig c;
      c.benchmark = e.at("benchmark").get<std::string>();
      c.dataset_path = e.at("dataset_path").get<std::string>();
      c.output_dir = e.at("output_dir").get<std::string>();
      const auto mode = e.at("mode").get<std::string>();
      if (mode == "single_stage") c.mode = EvalMode::single_stage;
      else if (mode == "two_stage") c.mode = EvalMode::two_stage;
      else throw Error(ErrorCode::ConfigError, "eval.mode must be single_stage or two_stage, got " + mode);
      if (e.contains("judge")) c.judge = judge_from(e.at("judge"));
      if (e.contains("external_scorer")) {
        const auto& x = e.at("external_scorer");
        c.external_scorer = ExternalScorerConfig{x.at("command").get<std::string>(),
                                                 x.at("output_file").get<std::string>(),
                                                 x.at("parse_rule").get<std::string>()};
        const auto& rule = c.external_scorer->parse_rule;
        if (rule != "per_sample_jsonl" && rule != "summary_json") {
          throw Error(ErrorCode::ConfigError, "eval.external_scorer.parse_rule unknown: " + rule);
        }
      }
      if (c.mode == EvalMode::two_stage && !c.judge && !c.external_scorer) {
        throw Error(ErrorCode::ConfigError,
                    "eval.mode=two_stage requires eval.judge or eval.external_scorer");
      }
      c.params = e.at("params");
      c.failure_threshold = e.at("failure_threshold").get<double>();
      if (c.failure_threshold < 0 || c.failure_threshold > 1) {
        throw Error(ErrorCode::ConfigError, "eval.failure_threshold must be in [0, 1]");
      }
      c.inference = inference_from(t.at("inference"));
      return c;
    }
    case ConfigKind::train: {
      const auto& tr = t.at("train");
      TrainConfig c;
      c.method = tr.at("method").get<std::string>();
      c.optimizer.learning_rate = tr.at("optimizer").at("learning_rate").get<double>();
      c.optimizer.steps = tr.at("optimizer").at("steps").get<int>();
      c.optimizer.batch_size = tr.at("optimizer").at("batch_size").get<int>();
      c.checkpoint_interval = tr.at("checkpoint_interval").get<int>();
      c.distributed = tr.at("distributed");
      c.hyperparams = tr.at("hyperparams");
      c.dataset_path = tr.at("dataset_path").get<std::string>();
      c.output_dir = tr.at("output_dir").get<std::string>();
      c.resume_from = tr.at("resume_from").get<std::string>();
      if (c.checkpoint_interval < 1) throw Error(ErrorCode::ConfigError, "train.checkpoint_interval must be >= 1");
      if (!(c.optimizer.learning_rate > 0)) {
        throw Error(ErrorCode::ConfigError, "train.optimizer.learning_rate must be > 0");
      }
      if (c.optimizer.steps < 0) throw Error(ErrorCode::ConfigError, "train.optimizer.steps must be >= 0");
      if (c.optimizer.batch_size < 1) throw Error(ErrorCode::ConfigError, "train.optimizer.batch_size must be >= 1");
      c.inference = inference_from(t.at("inference"));
      return c;
    }
    case ConfigKind::analysis: {
      const auto& a = t.at("analysis");
      AnalysisConfig c;
      c.dataset_path = a.at("dataset_path").get<std::string>();
      c.output_dir = a.at("output_dir").get<std::string>();
      c.stride = a.at("stride").get<int>();
      c.include_final_layer = a.at("include_final_layer").get<bool>();
      c.max_samples = a.at("max_samples").get<int>();
      c.rephraser = judge_from(a.at("rephraser"));
      c.embedder = judge_from(a.at("embedder"));
      if (c.stride < 1) throw Error(ErrorCode::ConfigError, "analysis.stride must be >= 1");
      c.inference = inference_from(t.at("inference"));
      return c;
    }
  }
  throw Error(ErrorCode::KindMismatch, "unknown config kind");
}

AnyConfig load_tree(json file_tree, const std::vector<std::string>& overrides,
                    std::optional<ConfigKind> expected) {
  if (file_tree.is_null()) file_tree = json::object();
  if (!file_tree.is_object()) throw Error(ErrorCode::ParseError, "config root must be a mapping");
  const ConfigKind kind = detect_kind(file_tree);
  if (expected && *expected != kind) {
    throw Error(ErrorCode::KindMismatch, "expected a " + std::string(to_string(*expected)) +
                                             " config, found " + std::string(to_string(kind)));
  }
  json merged = file_tree;
  for (const auto& o : overrides) apply_override(merged, o);
  return typed_from(resolve(merged, schema_for(kind)), kind);
}

}  // namespace

AnyConfig load_config_text(std::string_view yaml, const std::vector<std::string>& overrides,
                           std::optional<ConfigKind> expected) {
  return load_tree(yaml_to_json(yaml), overrides, expected);
}

AnyConfig load_config(const fs::path& path, const std::vector<std::string>& overrides,
                      std::optional<ConfigKind> expected) {
  if (!fs::exists(path)) throw Error(ErrorCode::ParseError, "config file not found: " + path.string());
  return load_config_text(read_file(path), overrides, expected);
}

AnyConfig config_from_tree(const json& tree, std::optional<ConfigKind> expected) {
  return load_tree(tree, {}, expected);
}

template <typename T>
T load_config_as(const fs::path& path, const std::vector<std::string>& overrides) {
  const auto kind = static_cast<ConfigKind>(AnyConfig(T{}).index());
  return std::get<T>(load_config(path, overrides, kind));
}

template InferenceConfig load_config_as<InferenceConfig>(const fs::path&, const std::vector<std::string>&);
template EvalConfig load_config_as<EvalConfig>(const fs::path&, const std::vector<std::string>&);
template TrainConfig load_config_as<TrainConfig>(const fs::path&, const std::vector<std::string>&);
template AnalysisConfig load_config_as<AnalysisConfig>(const fs::path&, const std::vector<std::string>&);

json to_tree(const AnyConfig& cfg) {
  return std::visit(
      [](const auto& c) -> json {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, InferenceConfig>) {
          return json{{"inference", inference_to(c)}};
        } else if constexpr (std::is_same_v<T, EvalConfig>) {
          json e{{"benchmark", c.benchmark},
                 {"dataset_path", c.dataset_path},
                 {"output_dir", c.output_dir},
                 {"mode", c.mode == EvalMode::single_stage ? "single_stage" : "two_stage"},
                 {"params", c.params},
                 {"failure_threshold", c.failure_threshold}};
          if (c.judge) e["judge"] = judge_to(*c.judge);
          if (c.external_scorer) {
            e["external_scorer"] = {{"command", c.external_scorer->command},
                                    {"output_file", c.external_scorer->output_file},
                                    {"parse_rule", c.external_scorer->parse_rule}};
          }
          return json{{"eval", e}, {"inference", inference_to(c.inference)}};
        } else if constexpr (std::is_same_v<T, TrainConfig>) {
          json t{{"method", c.method},
                 {"optimizer",
                  {{"learning_rate", c.optimizer.learning_rate},
                   {"steps", c.optimizer.steps},
                   {"batch_size", c.optimizer.batch_size}}},
                 {"checkpoint_interval", c.checkpoint_interval},
                 {"distributed", c.distributed},
                 {"hyperparams", c.hyperparams},
                 {"dataset_path", c.dataset_path},
                 {"output_dir", c.output_dir},
                 {"resume_from", c.resume_from}};
          return json{{"train", t}, {"inference", inference_to(c.inference)}};
        } else {
          json a{{"dataset_path", c.dataset_path},
                 {"output_dir", c.output_dir},
                 {"stride", c.stride},
                 {"include_final_layer", c.include_final_layer},
                 {"max_samples", c.max_samples},
                 {"rephraser", judge_to(c.rephraser)},
                 {"embedder", judge_to(c.embedder)}};
          return json{{"analysis", a}, {"inference", inference_to(c.inference)}};
        }
      },
      cfg);
}

std::string config_fingerprint(const AnyConfig& cfg) { return sha256_hex(to_tree(cfg).dump()); }

std::string to_yaml(const AnyConfig& cfg) {
  YAML::Emitter out;
  emit_json(out, to_tree(cfg));
  return std::string(out.c_str()) + "\n";
}

namespace {

void flatten(const json& node, const std::string& prefix, std::map<std::string, json>& out) {
  if (node.is_object() && !node.empty()) {
    for (const auto& [k, v] : node.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else {
    out[prefix] = node;
  }
}

}  // namespace

std::vector<ConfigDiff> diff_configs(const AnyConfig& a, const AnyConfig& b) {
  if (a.index() != b.index()) {
    throw Error(ErrorCode::KindMismatch, "cannot diff " + std::string(to_string(kind_of(a))) +
                                             " against " + std::string(to_string(kind_of(b))));
  }
  std::map<std::string, json> fa, fb;
  flatten(to_tree(a), "", fa);
  flatten(to_tree(b), "", fb);
  std::set<std::string> keys;
  for (const auto& [k, v] : fa) keys.insert(k);
  for (const auto& [k, v] : fb) keys.insert(k);
  std::vector<ConfigDiff> out;
  for (const auto& k : keys) {
    json va = fa.count(k) ? fa[k] : json(nullptr);
    json vb = fb.count(k) ? fb[k] : json(nullptr);
    if (va != vb) out.push_back(ConfigDiff{k, va, vb});
  }
  return out;
}

std::string schema_reference() {
  std::ostringstream os;
  os << "# Config schema reference\n\n"
     << "Generated by `umm schema`. Unknown keys are rejected. Precedence: defaults < file < `--set`.\n";
  for (const auto& s : schemas()) {
    os << "\n## " << to_string(s.kind) << " config\n\n";
    if (!s.optional_sections.empty()) {
      os << "Optional sections:";
      for (const auto& sec : s.optional_sections) os << " `" << sec << "`";
      os << "\n\n";
    }
    os << "| key | type | default | notes |\n|---|---|---|---|\n";
    for (const auto& f : s.fields) {
      std::string def = f.required ? "**required**" : (f.default_value.is_null() ? "-" : f.default_value.dump());
      os << "| `" << f.path << "` | " << to_string(f.type) << " | " << def << " | " << f.doc << " |\n";
    }
  }
  return os.str();
}

}  // namespace umm
