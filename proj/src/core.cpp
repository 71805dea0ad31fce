#include "umm/core.hpp"

#include "umm/error.hpp"
#include "umm/util.hpp"

namespace umm {

std::string_view to_string(TaskKind task) {
  switch (task) {
    case TaskKind::understanding: return "understanding";
    case TaskKind::generation: return "generation";
    case TaskKind::editing: return "editing";
  }
  return "?";
}

TaskKind parse_task(std::string_view name) {
  for (TaskKind t : kAllTasks) {
    if (to_string(t) == name) return t;
  }
  throw Error(ErrorCode::ParseError, "unknown task kind '" + std::string(name) + "'");
}

std::string_view to_string(ValueType type) {
  switch (type) {
    case ValueType::integer: return "integer";
    case ValueType::number: return "number";
    case ValueType::string: return "string";
    case ValueType::boolean: return "boolean";
    case ValueType::map: return "map";
    case ValueType::list: return "list";
  }
  return "?";
}

ValueType parse_value_type(std::string_view s) {
  for (ValueType t : {ValueType::integer, ValueType::number, ValueType::string, ValueType::boolean,
                      ValueType::map, ValueType::list}) {
    if (to_string(t) == s) return t;
  }
  throw Error(ErrorCode::ParseError, "unknown value type '" + std::string(s) + "'");
}

bool value_matches(ValueType type, const json& value) {
  switch (type) {
    case ValueType::integer: return value.is_number_integer();
    case ValueType::number: return value.is_number();
    case ValueType::string: return value.is_string();
    case ValueType::boolean: return value.is_boolean();
    case ValueType::map: return value.is_object();
    case ValueType::list: return value.is_array();
  }
  return false;
}

bool CapabilitySet::supports(TaskKind task) const {
  switch (task) {
    case TaskKind::understanding: return understand;
    case TaskKind::generation: return generate;
    case TaskKind::editing: return edit;
  }
  return false;
}

ScoreValue make_score(std::string metric_name, double value, Scale scale) {
  if (metric_name.empty()) throw Error(ErrorCode::InvalidRequest, "score metric_name is empty");
  if (!scale.contains(value)) {
    throw Error(ErrorCode::InvalidRequest,
                metric_name + "=" + std::to_string(value) + " outside [" +
                    std::to_string(scale.lo) + ", " + std::to_string(scale.hi) + "]");
  }
  return ScoreValue{std::move(metric_name), value, scale};
}

const InferenceRequest& validate_request(const InferenceRequest& req) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::InvalidRequest,
                "sample '" + req.sample_id + "' (" + std::string(to_string(req.task)) + "): " + what);
  };
  if (req.sample_id.empty()) fail("sample_id is empty");
  switch (req.task) {
    case TaskKind::editing:
      if (req.images.empty()) fail("editing requires at least one input image");
      break;
    case TaskKind::understanding:
      if (req.images.empty()) fail("understanding requires at least one input image");
      break;
    case TaskKind::generation:
      if (!req.images.empty()) fail("generation takes no input images");
      break;
  }
  if (!req.params.is_object()) fail("params must be a key/value map");
  return req;
}

// ---- serialization -----------------------------------------------------------

void to_json(json& j, const TaskKind& t) { j = std::string(to_string(t)); }
void from_json(const json& j, TaskKind& t) { t = parse_task(j.get<std::string>()); }

void to_json(json& j, const CapabilitySet& c) {
  j = json{{"understand", c.understand}, {"generate", c.generate}, {"edit", c.edit}};
}
void from_json(const json& j, CapabilitySet& c) {
  j.at("understand").get_to(c.understand);
  j.at("generate").get_to(c.generate);
  j.at("edit").get_to(c.edit);
}

void to_json(json& j, const Image& img) {
  j = json{{"mime", img.mime}};
  if (img.uri) {
    j["uri"] = *img.uri;
    j["sha256"] = sha256_hex(img.bytes);
  } else {
    j["data"] = base64_encode(img.bytes);
  }
}
void from_json(const json& j, Image& img) {
  j.at("mime").get_to(img.mime);
  img.bytes.clear();
  img.uri.reset();
  if (j.contains("uri")) img.uri = j.at("uri").get<std::string>();
  if (j.contains("data")) img.bytes = base64_decode(j.at("data").get<std::string>());
}

void to_json(json& j, const InferenceRequest& r) {
  j = json{{"prompt", r.prompt}, {"images", r.images}, {"task", r.task},
           {"params", r.params}, {"sample_id", r.sample_id}, {"seed", r.seed}};
}
void from_json(const json& j, InferenceRequest& r) {
  j.at("prompt").get_to(r.prompt);
  r.images = j.value("images", std::vector<Image>{});
  j.at("task").get_to(r.task);
  r.params = j.value("params", ParamMap::object());
  j.at("sample_id").get_to(r.sample_id);
  r.seed = j.value("seed", std::int64_t{0});
}

void to_json(json& j, const LayerSummary& l) {
  j = json{{"layer_index", l.layer_index}, {"summary", l.summary}};
}
void from_json(const json& j, LayerSummary& l) {
  j.at("layer_index").get_to(l.layer_index);
  j.at("summary").get_to(l.summary);
}

void to_json(json& j, const InferenceResult& r) {
  j = json{{"sample_id", r.sample_id}, {"images", r.images}, {"adapter_name", r.adapter_name},
           {"seed", r.seed}};
  j["text"] = r.text ? json(*r.text) : json(nullptr);
  j["latents"] = r.latents ? json(*r.latents) : json(nullptr);
  if (r.timing) j["timing"] = *r.timing;
}
void from_json(const json& j, InferenceResult& r) {
  j.at("sample_id").get_to(r.sample_id);
  r.text.reset();
  if (j.contains("text") && !j.at("text").is_null()) r.text = j.at("text").get<std::string>();
  r.images = j.value("images", std::vector<Image>{});
  r.latents.reset();
  if (j.contains("latents") && !j.at("latents").is_null())
    r.latents = j.at("latents").get<std::vector<LayerSummary>>();
  r.timing.reset();
  if (j.contains("timing") && !j.at("timing").is_null()) r.timing = j.at("timing").get<double>();
  j.at("adapter_name").get_to(r.adapter_name);
  r.seed = j.value("seed", std::int64_t{0});
}

void to_json(json& j, const Scale& s) { j = json::array({s.lo, s.hi}); }
void from_json(const json& j, Scale& s) {
  s.lo = j.at(0).get<double>();
  s.hi = j.at(1).get<double>();
}

void to_json(json& j, const ScoreValue& s) {
  j = json{{"metric_name", s.metric_name}, {"value", s.value}, {"scale", s.scale}};
}
void from_json(const json& j, ScoreValue& s) {
  j.at("metric_name").get_to(s.metric_name);
  j.at("value").get_to(s.value);
  j.at("scale").get_to(s.scale);
}

void to_json(json& j, const SampleRecord& r) {
  j = json{{"sample_id", r.sample_id}, {"prompt", r.prompt},     {"images", r.images},
           {"ground_truth", r.ground_truth}, {"category", r.category}, {"meta", r.meta}};
}
void from_json(const json& j, SampleRecord& r) {
  j.at("sample_id").get_to(r.sample_id);
  r.prompt = j.value("prompt", std::string{});
  r.images = j.value("images", std::vector<Image>{});
  r.ground_truth = j.value("ground_truth", std::string{});
  r.category = j.value("category", std::string{});
  r.meta = j.value("meta", ParamMap::object());
}

std::string guess_mime(std::string_view path) {
  const std::string lower = to_lower(path);
  auto ends = [&](std::string_view ext) {
    return lower.size() >= ext.size() && lower.compare(lower.size() - ext.size(), ext.size(), ext) == 0;
  };
  if (ends(".png")) return "image/png";
  if (ends(".jpg") || ends(".jpeg")) return "image/jpeg";
  if (ends(".ppm")) return "image/x-portable-pixmap";
  if (ends(".webp")) return "image/webp";
  return "application/octet-stream";
}

std::string extension_for_mime(std::string_view mime) {
  if (mime == "image/png") return ".png";
  if (mime == "image/jpeg") return ".jpg";
  if (mime == "image/x-portable-pixmap") return ".ppm";
  if (mime == "image/webp") return ".webp";
  return ".bin";
}

}  // namespace umm
