#include "umm/backbone.hpp"

#include <algorithm>
#include <set>

#include "umm/error.hpp"

namespace umm {

void to_json(json& j, const AdapterDescriptor& d) {
  json schema = json::array();
  for (const auto& f : d.config_schema) {
    schema.push_back({{"key", f.key}, {"type", to_string(f.type)}, {"required", f.required}});
  }
  j = json{{"name", d.name},
           {"capabilities", d.capabilities},
           {"config_schema", schema},
           {"supports_latents", d.supports_latents}};
}

void from_json(const json& j, AdapterDescriptor& d) {
  j.at("name").get_to(d.name);
  j.at("capabilities").get_to(d.capabilities);
  d.config_schema.clear();
  for (const auto& f : j.at("config_schema")) {
    d.config_schema.push_back(ConfigField{f.at("key").get<std::string>(),
                                          parse_value_type(f.at("type").get<std::string>()),
                                          f.at("required").get<bool>()});
  }
  d.supports_latents = j.value("supports_latents", false);
}

void check_config_schema(const std::vector<ConfigField>& schema, const ParamMap& cfg,
                         std::string_view context) {
  if (!cfg.is_object()) {
    throw Error(ErrorCode::ConfigError, std::string(context) + ": config must be a key/value map");
  }
  std::vector<std::string> problems;
  for (const auto& field : schema) {
    auto it = cfg.find(field.key);
    if (it == cfg.end()) {
      if (field.required) problems.push_back("missing required key '" + field.key + "'");
      continue;
    }
    if (!value_matches(field.type, *it)) {
      problems.push_back("key '" + field.key + "' must be " + std::string(to_string(field.type)) +
                         ", got " + it->type_name());
    }
  }
  if (!problems.empty()) {
    std::string msg(context);
    msg += ":";
    for (const auto& p : problems) msg += " " + p + ";";
    msg.pop_back();
    throw Error(ErrorCode::ConfigError, msg);
  }
}

std::vector<int> sampled_layers(int num_layers, int stride, bool include_final) {
  if (stride < 1) throw Error(ErrorCode::PreconditionFailed, "layer stride must be >= 1");
  std::vector<int> out;
  for (int l = 0; l < num_layers; l += stride) out.push_back(l);
  if (include_final && num_layers > 0 && out.back() != num_layers - 1) out.push_back(num_layers - 1);
  return out;
}

std::vector<LayerSummary> summarize_response_span(const HiddenTrace& trace,
                                                  const std::vector<int>& layers) {
  if (trace.response_length == 0) throw Error(ErrorCode::SpanEmpty, "response span is empty");
  std::vector<LayerSummary> out;
  out.reserve(layers.size());
  const std::size_t begin = trace.prompt_length;
  const std::size_t end = trace.prompt_length + trace.response_length;
  for (int layer : layers) {
    if (layer < 0 || static_cast<std::size_t>(layer) >= trace.states.size()) {
      throw Error(ErrorCode::PreconditionFailed, "layer " + std::to_string(layer) + " not in trace");
    }
    const auto& tokens = trace.states[static_cast<std::size_t>(layer)];
    if (tokens.size() < end) throw Error(ErrorCode::PreconditionFailed, "trace shorter than span");
    std::vector<double> mean(tokens[begin].size(), 0.0);
    for (std::size_t t = begin; t < end; ++t) {
      for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += tokens[t][d];
    }
    for (double& v : mean) v /= static_cast<double>(trace.response_length);
    out.push_back(LayerSummary{layer, std::move(mean)});
  }
  return out;
}

void BackboneAdapter::load(const ParamMap& cfg) {
  loaded_ = false;
  check_config_schema(descriptor().config_schema, cfg, "backbone '" + name() + "'");
  try {
    do_load(cfg);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::LoadError, "backbone '" + name() + "': " + e.what());
  }
  loaded_ = true;
}

std::vector<InferenceResult> BackboneAdapter::generate(std::span<const InferenceRequest> batch,
                                                       const ParamMap& gen_cfg) {
  if (!loaded_) throw Error(ErrorCode::NotLoaded, "backbone '" + name() + "' used before load");
  const auto& desc = descriptor();
  for (const auto& req : batch) {
    validate_request(req);
    if (!desc.capabilities.supports(req.task)) {
      throw Error(ErrorCode::CapabilityError,
                  "backbone '" + name() + "' does not support " + std::string(to_string(req.task)));
    }
  }
  auto results = do_generate(batch, gen_cfg);
  if (results.size() != batch.size()) {
    throw Error(ErrorCode::AdapterFailure, "backbone '" + name() + "' returned " +
                                               std::to_string(results.size()) + " results for " +
                                               std::to_string(batch.size()) + " requests");
  }
  const bool want_latents = gen_cfg.is_object() && gen_cfg.value("latents", false);
  const int stride = gen_cfg.is_object() ? gen_cfg.value("latent_stride", 5) : 5;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto& res = results[i];
    const auto& req = batch[i];
    res.sample_id = req.sample_id;
    res.seed = req.seed;
    res.adapter_name = name();
    if (req.task == TaskKind::understanding && !res.text) {
      throw Error(ErrorCode::AdapterFailure, "understanding result without text for " + req.sample_id);
    }
    if (req.task != TaskKind::understanding && res.images.empty()) {
      throw Error(ErrorCode::AdapterFailure, "image task result without images for " + req.sample_id);
    }
    res.latents.reset();
    if (want_latents && desc.supports_latents && res.text) {
      HiddenTrace tr = trace(req, *res.text);
      res.latents = tr.response_length == 0
                        ? std::vector<LayerSummary>{}
                        : summarize_response_span(tr, sampled_layers(num_layers(), stride, false));
    }
  }
  return results;
}

HiddenTrace BackboneAdapter::trace(const InferenceRequest&, std::string_view) {
  throw Error(ErrorCode::NoLatentSupport, "backbone '" + name() + "' exposes no hidden states");
}

void BackboneRegistry::register_adapter(AdapterDescriptor descriptor, AdapterFactory factory) {
  if (descriptor.name.empty()) throw Error(ErrorCode::ConfigError, "adapter name is empty");
  if (!descriptor.capabilities.any()) {
    throw Error(ErrorCode::ConfigError, "adapter '" + descriptor.name + "' declares no capability");
  }
  std::set<std::string> keys;
  for (const auto& f : descriptor.config_schema) {
    if (!keys.insert(f.key).second) {
      throw Error(ErrorCode::ConfigError,
                  "adapter '" + descriptor.name + "' repeats schema key '" + f.key + "'");
    }
  }
  if (entries_.count(descriptor.name)) {
    throw Error(ErrorCode::DuplicateAdapter, "adapter '" + descriptor.name + "' already registered");
  }
  std::string name = descriptor.name;
  entries_.emplace(std::move(name), Entry{std::move(descriptor), std::move(factory)});
}

const AdapterDescriptor& BackboneRegistry::resolve(std::string_view name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw Error(ErrorCode::NotRegistered, "no backbone named '" + std::string(name) + "'");
  }
  return it->second.descriptor;
}

bool BackboneRegistry::contains(std::string_view name) const { return entries_.count(name) != 0; }

std::unique_ptr<BackboneAdapter> BackboneRegistry::instantiate(std::string_view name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw Error(ErrorCode::NotRegistered, "no backbone named '" + std::string(name) + "'");
  }
  auto adapter = it->second.factory();
  if (!adapter || adapter->name() != it->first) {
    throw Error(ErrorCode::LoadError, "factory for '" + it->first + "' produced a mismatched adapter");
  }
  return adapter;
}

std::vector<std::string> BackboneRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, entry] : entries_) out.push_back(name);
  return out;
}

}  // namespace umm
