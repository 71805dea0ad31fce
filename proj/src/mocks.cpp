#include "umm/mocks.hpp"

#include <chrono>
#include <thread>

#include <fmt/core.h>

#include "umm/error.hpp"
#include "umm/toy_model.hpp"

namespace umm {

Image pattern_image(std::uint64_t seed, int width, int height) {
  Rng rng(seed);
  unsigned char colors[2][3];
  for (auto& c : colors) {
    for (auto& ch : c) ch = static_cast<unsigned char>(rng.below(256));
  }
  const int cell = 1 + static_cast<int>(rng.below(4));
  std::string bytes = fmt::format("P6\n{} {}\n255\n", width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const auto& c = colors[((x / cell) + (y / cell)) % 2];
      bytes.append(reinterpret_cast<const char*>(c), 3);
    }
  }
  return Image{"image/x-portable-pixmap", std::move(bytes), std::nullopt};
}

// ---- echo-mock -----------------------------------------------------------------

const AdapterDescriptor& EchoMock::static_descriptor() {
  static const AdapterDescriptor d{
      "echo-mock", CapabilitySet{true, false, false}, {{"delay_ms", ValueType::integer, true}}, false};
  return d;
}

void EchoMock::do_load(const ParamMap& cfg) {
  delay_ms_ = cfg.at("delay_ms").get<int>();
  if (delay_ms_ < 0) throw Error(ErrorCode::ConfigError, "echo-mock: delay_ms must be >= 0");
}

std::vector<InferenceResult> EchoMock::do_generate(std::span<const InferenceRequest> batch,
                                                   const ParamMap&) {
  std::vector<InferenceResult> out;
  for (const auto& req : batch) {
    if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
    InferenceResult r;
    r.text = "ECHO: " + req.prompt;
    out.push_back(std::move(r));
  }
  return out;
}

// ---- scripted-mock -------------------------------------------------------------

const AdapterDescriptor& ScriptedMock::static_descriptor() {
  static const AdapterDescriptor d{"scripted-mock",
                                   CapabilitySet{true, true, true},
                                   {{"table", ValueType::map, false},
                                    {"table_path", ValueType::string, false},
                                    {"weights", ValueType::string, false}},
                                   false};
  return d;
}

void ScriptedMock::do_load(const ParamMap& cfg) {
  table_.clear();
  if (auto it = cfg.find("table"); it != cfg.end()) {
    for (const auto& [k, v] : it->items()) table_[k] = v;
  }
  if (auto it = cfg.find("table_path"); it != cfg.end()) {
    const fs::path path = it->get<std::string>();
    const std::string text = read_file(path);
    json parsed = json::parse(text, nullptr, false);
    if (!parsed.is_discarded() && parsed.is_object()) {
      for (const auto& [k, v] : parsed.items()) table_[k] = v;
    } else {
      for (const auto& line : read_lines(path)) {
        if (trim(line).empty()) continue;
        json rec = json::parse(line);
        json entry = rec;
        entry.erase("sample_id");
        table_[rec.at("sample_id").get<std::string>()] = entry;
      }
    }
  }
  if (!cfg.contains("table") && !cfg.contains("table_path")) {
    throw Error(ErrorCode::ConfigError, "scripted-mock: one of 'table' or 'table_path' is required");
  }
}

std::vector<InferenceResult> ScriptedMock::do_generate(std::span<const InferenceRequest> batch,
                                                       const ParamMap&) {
  std::vector<InferenceResult> out;
  for (const auto& req : batch) {
    auto it = table_.find(req.sample_id);
    if (it == table_.end()) {
      throw Error(ErrorCode::AdapterFailure, "scripted-mock has no entry for '" + req.sample_id + "'");
    }
    const json& entry = it->second;
    InferenceResult r;
    std::string text = entry.is_string() ? entry.get<std::string>() : entry.value("text", std::string{});
    if (req.task == TaskKind::understanding) {
      r.text = text;
    } else if (entry.is_object() && entry.contains("image_b64")) {
      r.images.push_back(Image{entry.value("mime", std::string("application/octet-stream")),
                               base64_decode(entry.at("image_b64").get<std::string>()), std::nullopt});
    } else {
      const int turn = req.params.value("turn", 0);
      r.images.push_back(pattern_image(
          mix_seed(static_cast<std::uint64_t>(req.seed), text + "#" + std::to_string(turn)), 8, 8));
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---- noise-image-mock ------------------------------------------------------------

const AdapterDescriptor& NoiseImageMock::static_descriptor() {
  static const AdapterDescriptor d{"noise-image-mock",
                                   CapabilitySet{false, true, true},
                                   {{"width", ValueType::integer, false},
                                    {"height", ValueType::integer, false}},
                                   false};
  return d;
}

void NoiseImageMock::do_load(const ParamMap& cfg) {
  width_ = cfg.value("width", 16);
  height_ = cfg.value("height", 16);
  if (width_ < 1 || height_ < 1) throw Error(ErrorCode::ConfigError, "noise-image-mock: size must be >= 1");
}

std::vector<InferenceResult> NoiseImageMock::do_generate(std::span<const InferenceRequest> batch,
                                                         const ParamMap&) {
  std::vector<InferenceResult> out;
  for (const auto& req : batch) {
    FieldHasher h;
    h.add(req.sample_id).add(req.prompt);
    for (const auto& img : req.images) h.add(img.bytes);
    InferenceResult r;
    r.images.push_back(pattern_image(mix_seed(static_cast<std::uint64_t>(req.seed), h.hex()), width_, height_));
    out.push_back(std::move(r));
  }
  return out;
}

void register_builtin_backbones(BackboneRegistry& registry) {
  registry.register_adapter(EchoMock::static_descriptor(), [] { return std::make_unique<EchoMock>(); });
  registry.register_adapter(ScriptedMock::static_descriptor(),
                            [] { return std::make_unique<ScriptedMock>(); });
  registry.register_adapter(NoiseImageMock::static_descriptor(),
                            [] { return std::make_unique<NoiseImageMock>(); });
  registry.register_adapter(ToyTrainable::static_descriptor(),
                            [] { return std::make_unique<ToyTrainable>(); });
}

}  // namespace umm
