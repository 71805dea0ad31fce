#pragma once

#include <map>
#include <string>

#include "umm/backbone.hpp"

namespace umm {

/// Understanding-only mock answering "ECHO: <prompt>".
class EchoMock final : public BackboneAdapter {
 public:
  static const AdapterDescriptor& static_descriptor();
  const AdapterDescriptor& descriptor() const override { return static_descriptor(); }

 protected:
  void do_load(const ParamMap& cfg) override;
  std::vector<InferenceResult> do_generate(std::span<const InferenceRequest> batch,
                                           const ParamMap& gen_cfg) override;

 private:
  int delay_ms_ = 0;
};

/// Answers from a lookup table keyed by sample_id; all capabilities.
///
/// Table entries are either a string (text answer; image tasks get an image
/// derived from it) or an object with optional `text`, `image_b64`, `mime`.
/// The table comes from cfg `table` (inline map) or `table_path` (a JSON object
/// file, or JSONL records with `sample_id`). A missing entry fails that sample.
class ScriptedMock final : public BackboneAdapter {
 public:
  static const AdapterDescriptor& static_descriptor();
  const AdapterDescriptor& descriptor() const override { return static_descriptor(); }

 protected:
  void do_load(const ParamMap& cfg) override;
  std::vector<InferenceResult> do_generate(std::span<const InferenceRequest> batch,
                                           const ParamMap& gen_cfg) override;

 private:
  std::map<std::string, json> table_;
};

/// Seeded two-colour checkerboard images (binary PPM); generation + editing.
class NoiseImageMock final : public BackboneAdapter {
 public:
  static const AdapterDescriptor& static_descriptor();
  const AdapterDescriptor& descriptor() const override { return static_descriptor(); }

 protected:
  void do_load(const ParamMap& cfg) override;
  std::vector<InferenceResult> do_generate(std::span<const InferenceRequest> batch,
                                           const ParamMap& gen_cfg) override;

 private:
  int width_ = 16;
  int height_ = 16;
};

/// Binary PPM of a checkerboard in two colours drawn from `seed`.
Image pattern_image(std::uint64_t seed, int width, int height);

}  // namespace umm
