#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "umm/core.hpp"
#include "umm/util.hpp"

namespace umm {

struct ConfigField {
  std::string key;
  ValueType type = ValueType::string;
  bool required = false;
};

struct AdapterDescriptor {
  std::string name;
  CapabilitySet capabilities;
  std::vector<ConfigField> config_schema;
  bool supports_latents = false;
};

void to_json(json& j, const AdapterDescriptor& d);
void from_json(const json& j, AdapterDescriptor& d);

/// Throws ConfigError listing every missing or ill-typed key of `cfg`.
void check_config_schema(const std::vector<ConfigField>& schema, const ParamMap& cfg,
                         std::string_view context);

/// Per-layer hidden states for one prompt+response trace.
struct HiddenTrace {
  std::size_t prompt_length = 0;    // tokens before the response span
  std::size_t response_length = 0;  // response tokens, end marker excluded
  /// states[layer][token] is the hidden vector at that position.
  std::vector<std::vector<std::vector<double>>> states;
};

/// Layer indices sampled from an `num_layers` stack: 0, stride, 2*stride, ...
/// and, when `include_final`, the last layer if the stride skipped it.
std::vector<int> sampled_layers(int num_layers, int stride, bool include_final);

/// Mean hidden vector over the response span at each sampled layer.
std::vector<LayerSummary> summarize_response_span(const HiddenTrace& trace,
                                                  const std::vector<int>& layers);

/// The uniform load/generate contract every backbone implements.
///
/// Instances are single-owner: one worker drives an adapter at a time. `load`
/// may be called again to replace state; `generate` requires a successful load.
class BackboneAdapter {
 public:
  virtual ~BackboneAdapter() = default;

  virtual const AdapterDescriptor& descriptor() const = 0;
  const std::string& name() const { return descriptor().name; }

  void load(const ParamMap& cfg);
  bool loaded() const { return loaded_; }

  /// One result per request, order-aligned. Recognized gen_cfg keys handled here:
  /// `latents` (bool) and `latent_stride` (int) request layer summaries.
  std::vector<InferenceResult> generate(std::span<const InferenceRequest> batch,
                                        const ParamMap& gen_cfg);

  /// Identifies the image/text preprocessing this adapter applies.
  virtual std::string preprocessing_fingerprint() const { return "identity"; }

  virtual int num_layers() const { return 0; }
  /// Re-feeds prompt + response and returns every layer's hidden states.
  virtual HiddenTrace trace(const InferenceRequest& req, std::string_view response);

 protected:
  virtual void do_load(const ParamMap& cfg) = 0;
  virtual std::vector<InferenceResult> do_generate(std::span<const InferenceRequest> batch,
                                                   const ParamMap& gen_cfg) = 0;

 private:
  bool loaded_ = false;
};

struct TrainExample {
  std::string input;
  std::string target;
  std::vector<Image> images;  // fed ahead of the input, as at inference
};

/// Extra surface exposed by backbones that post-training can drive.
class TrainableBackbone {
 public:
  virtual ~TrainableBackbone() = default;

  virtual double loss(std::span<const TrainExample> batch) const = 0;
  /// One plain gradient-descent step; returns the pre-step batch loss.
  virtual double train_step(std::span<const TrainExample> batch, double learning_rate) = 0;
  virtual void save_checkpoint(const fs::path& file, const json& meta) const = 0;
  /// Restores parameters and returns the metadata stored alongside them.
  virtual json restore_checkpoint(const fs::path& file) = 0;
  virtual std::size_t parameter_count() const = 0;
  /// SHA-256 over the raw parameter bytes.
  virtual std::string parameter_digest() const = 0;
};

using AdapterFactory = std::function<std::unique_ptr<BackboneAdapter>()>;

/// Name-keyed adapter registry. Read-only use after startup is thread-safe.
class BackboneRegistry {
 public:
  void register_adapter(AdapterDescriptor descriptor, AdapterFactory factory);
  const AdapterDescriptor& resolve(std::string_view name) const;
  bool contains(std::string_view name) const;
  /// Invokes the factory; nothing is constructed at registration time.
  std::unique_ptr<BackboneAdapter> instantiate(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  struct Entry {
    AdapterDescriptor descriptor;
    AdapterFactory factory;
  };
  std::map<std::string, Entry, std::less<>> entries_;
};

void register_builtin_backbones(BackboneRegistry& registry);

}  // namespace umm
