#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "umm/backbone.hpp"
#include "umm/config.hpp"

namespace umm {

struct HyperParam {
  std::string key;
  ValueType type = ValueType::number;
  json default_value;
};

struct TrainerDescriptor {
  std::string method_name;
  CapabilitySet required_capabilities;
  std::vector<HyperParam> hyperparam_schema;
  std::string reference;  // source of the method
};

struct Checkpoint {
  int step = 0;
  fs::path path;
  double loss = 0.0;
  std::string config_fingerprint;

  bool operator==(const Checkpoint&) const = default;
};

void to_json(json& j, const Checkpoint& c);
void from_json(const json& j, Checkpoint& c);

struct LossPoint {
  int step = 0;
  double loss = 0.0;

  bool operator==(const LossPoint&) const = default;
};

struct TrainOutcome {
  std::string run_id;
  fs::path run_dir;
  std::vector<Checkpoint> checkpoints;
  std::vector<LossPoint> loss_curve;  // pre-step batch loss per step
  double initial_loss = 0.0;          // full training set, before the first step
  double final_loss = 0.0;            // full training set, after the last step
  int start_step = 0;
  std::string parameter_digest;
};

class Trainer {
 public:
  virtual ~Trainer() = default;
  /// One optimizer step on `batch`; returns the pre-step batch loss.
  virtual double step(TrainableBackbone& model, std::span<const TrainExample> batch, double learning_rate,
                      const json& hyperparams) = 0;
};

using TrainerFactory = std::function<std::unique_ptr<Trainer>()>;

class TrainerRegistry {
 public:
  /// Throws DuplicateAdapter on a name collision, ConfigError on an empty name.
  void register_trainer(TrainerDescriptor desc, TrainerFactory factory);
  /// Throws MethodNotRegistered.
  const TrainerDescriptor& resolve(const std::string& method) const;
  std::unique_ptr<Trainer> instantiate(const std::string& method) const;
  bool contains(const std::string& method) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, std::pair<TrainerDescriptor, TrainerFactory>> entries_;
};

/// sft, plus reca / irg / unicot / unigame stubs that throw NotImplemented.
void register_builtin_trainers(TrainerRegistry& registry);

/// Keyword questions with four lettered options; the answer is the option
/// holding the keyword's class. Deterministic in (n, seed).
std::vector<SampleRecord> synthetic_mc_records(std::size_t n, std::uint64_t seed);
std::vector<TrainExample> to_train_examples(const std::vector<SampleRecord>& records);

/// "synthetic:<n>[:<seed>]", or a .jsonl of {input, target} / dataset records.
std::vector<TrainExample> load_train_dataset(const std::string& path);
/// Same source as records, for scoring a trained model on its training set.
std::vector<SampleRecord> load_train_records(const std::string& path);

/// Indices of the batch used at `step`: a pure function of (seed, step).
std::vector<std::size_t> batch_indices(std::uint64_t seed, int step, std::size_t dataset_size,
                                       std::size_t batch_size);

struct TrainOptions {
  std::optional<std::string> run_id;
  /// Continue an existing run directory from its latest checkpoint.
  std::optional<fs::path> resume_dir;
};

/// Runs cfg.optimizer.steps steps of cfg.method on cfg.inference.backbone.
/// Layout: <output_dir>/<run_id>/{loss.jsonl, train_manifest.json, ckpt/step_<k>/model.ckpt}.
/// cfg.resume_from names a checkpoint (file or step dir) to start from.
TrainOutcome train(const TrainConfig& cfg, const BackboneRegistry& backbones, const TrainerRegistry& trainers,
                   const TrainOptions& options = {});

/// Checkpoint file for a checkpoint path that may be a step directory.
fs::path checkpoint_file(const fs::path& path);
/// Checkpoints under <run_dir>/ckpt, ordered by step.
std::vector<Checkpoint> list_checkpoints(const fs::path& run_dir);

/// Points inference.backbone_cfg.weights at the checkpoint. Nothing else changes.
EvalConfig handoff_to_eval(const Checkpoint& checkpoint, const EvalConfig& eval_cfg);
EvalConfig handoff_to_eval(const fs::path& checkpoint, const EvalConfig& eval_cfg);

}  // namespace umm
