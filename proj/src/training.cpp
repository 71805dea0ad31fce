#include "umm/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>

#include <fmt/format.h>

#include "umm/benchmarks.hpp"
#include "umm/error.hpp"
#include "umm/mocks.hpp"

namespace umm {

void to_json(json& j, const Checkpoint& c) {
  j = json{{"step", c.step}, {"path", c.path.string()}, {"loss", c.loss}, {"config_fingerprint", c.config_fingerprint}};
}

void from_json(const json& j, Checkpoint& c) {
  j.at("step").get_to(c.step);
  c.path = j.at("path").get<std::string>();
  j.at("loss").get_to(c.loss);
  j.at("config_fingerprint").get_to(c.config_fingerprint);
}

// ---- registry ----

void TrainerRegistry::register_trainer(TrainerDescriptor desc, TrainerFactory factory) {
  if (desc.method_name.empty()) throw Error(ErrorCode::ConfigError, "trainer method name is empty");
  if (!factory) throw Error(ErrorCode::ConfigError, "trainer '" + desc.method_name + "' has no factory");
  if (entries_.count(desc.method_name)) {
    throw Error(ErrorCode::DuplicateAdapter, "trainer '" + desc.method_name + "' already registered");
  }
  const std::string name = desc.method_name;
  entries_.emplace(name, std::make_pair(std::move(desc), std::move(factory)));
}

const TrainerDescriptor& TrainerRegistry::resolve(const std::string& method) const {
  auto it = entries_.find(method);
  if (it == entries_.end()) {
    throw Error(ErrorCode::MethodNotRegistered,
                "'" + method + "' (registered: " + fmt::format("{}", fmt::join(names(), ", ")) + ")");
  }
  return it->second.first;
}

std::unique_ptr<Trainer> TrainerRegistry::instantiate(const std::string& method) const {
  resolve(method);
  return entries_.at(method).second();
}

bool TrainerRegistry::contains(const std::string& method) const { return entries_.count(method) != 0; }

std::vector<std::string> TrainerRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, e] : entries_) out.push_back(name);
  return out;
}

namespace {

class SftTrainer final : public Trainer {
 public:
  double step(TrainableBackbone& model, std::span<const TrainExample> batch, double learning_rate,
              const json&) override {
    return model.train_step(batch, learning_rate);
  }
};

/// Named in the literature but without a published algorithm we could follow.
class StubTrainer final : public Trainer {
 public:
  StubTrainer(std::string method, std::string reference) : method_(std::move(method)), reference_(std::move(reference)) {}

  double step(TrainableBackbone&, std::span<const TrainExample>, double, const json&) override {
    throw Error(ErrorCode::NotImplemented,
                method_ + " is a registered contract only; its training step is not implemented. See " + reference_);
  }

 private:
  std::string method_;
  std::string reference_;
};

}  // namespace

void register_builtin_trainers(TrainerRegistry& registry) {
  const CapabilitySet any_cap{true, false, false};
  registry.register_trainer({"sft", any_cap, {}, "supervised fine-tuning, token-level cross-entropy"},
                            [] { return std::make_unique<SftTrainer>(); });
  const std::vector<std::pair<std::string, std::string>> stubs = {
      {"reca", "Xie et al. 2025, \"Reconstruction Alignment Improves Unified Multimodal Models\" (RecA)"},
      {"irg", "Huang et al. 2025, \"Interleaving Reasoning for Better Text-to-Image Generation\" (IRG)"},
      {"unicot", "Qin et al. 2025, \"Uni-CoT: Towards Unified Chain-of-Thought Reasoning Across Text and Vision\""},
      {"unigame", "Su et al. 2025, \"UniGame: Turning a Unified Multimodal Model Into Its Own Adversary\""},
  };
  for (const auto& [name, ref] : stubs) {
    registry.register_trainer({name, any_cap, {}, ref},
                              [name, ref] { return std::make_unique<StubTrainer>(name, ref); });
  }
}

// ---- datasets ----

std::vector<SampleRecord> synthetic_mc_records(std::size_t n, std::uint64_t seed) {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> kClasses = {
      {"fruit", {"apple", "pear", "plum", "fig"}},
      {"animal", {"cat", "dog", "cow", "owl"}},
      {"color", {"red", "blue", "pink", "gray"}},
      {"tool", {"saw", "axe", "drill", "hammer"}},
  };
  Rng rng(mix_seed(seed, "synthetic-mc"));
  std::vector<SampleRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto cls = rng.below(kClasses.size());
    const auto& words = kClasses[cls].second;
    const std::string& kw = words[rng.below(words.size())];
    SampleRecord r;
    r.sample_id = fmt::format("syn-{:04}", i);
    r.prompt = kw + "? A) fruit B) animal C) color D) tool";
    r.ground_truth = std::string(1, static_cast<char>('A' + cls));
    r.category = kClasses[cls].first;
    r.meta["options"] = {{"A", "fruit"}, {"B", "animal"}, {"C", "color"}, {"D", "tool"}};
    // Understanding requests need an image; every question shares one blank frame.
    r.images.push_back(pattern_image(0, 2, 2));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TrainExample> to_train_examples(const std::vector<SampleRecord>& records) {
  std::vector<TrainExample> out;
  for (const auto& r : records) out.push_back(TrainExample{r.prompt, r.ground_truth, r.images});
  return out;
}

namespace {

std::optional<std::pair<std::size_t, std::uint64_t>> parse_synthetic(const std::string& path) {
  static const std::regex kSyn(R"(^synthetic:(\d+)(?::(\d+))?$)");
  std::smatch m;
  if (!std::regex_match(path, m, kSyn)) return std::nullopt;
  return std::make_pair(static_cast<std::size_t>(std::stoull(m[1].str())),
                        m[2].matched ? static_cast<std::uint64_t>(std::stoull(m[2].str())) : std::uint64_t{0});
}

}  // namespace

std::vector<TrainExample> load_train_dataset(const std::string& path) {
  if (auto syn = parse_synthetic(path)) return to_train_examples(synthetic_mc_records(syn->first, syn->second));
  fs::path file = path;
  if (fs::is_directory(file)) file /= "samples.jsonl";
  if (!fs::exists(file)) throw Error(ErrorCode::IoError, "training data not found: " + file.string());
  std::vector<TrainExample> out;
  for (const auto& line : read_lines(file)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::ParseError, "invalid training line: " + line);
    if (j.contains("input")) {
      out.push_back(TrainExample{j.at("input").get<std::string>(), j.at("target").get<std::string>()});
    } else {
      out.push_back(TrainExample{j.value("prompt", j.value("question", "")), j.value("ground_truth", j.value("answer", ""))});
    }
  }
  if (out.empty()) throw Error(ErrorCode::EmptyInput, "training data is empty: " + file.string());
  return out;
}

std::vector<SampleRecord> load_train_records(const std::string& path) {
  if (auto syn = parse_synthetic(path)) return synthetic_mc_records(syn->first, syn->second);
  return load_dataset(path);
}

std::vector<std::size_t> batch_indices(std::uint64_t seed, int step, std::size_t dataset_size,
                                       std::size_t batch_size) {
  if (dataset_size == 0) throw Error(ErrorCode::EmptyInput, "empty training set");
  Rng rng(mix_seed(seed, "batch/" + std::to_string(step)));
  std::vector<std::size_t> out(batch_size);
  for (auto& i : out) i = rng.below(dataset_size);
  return out;
}

// ---- checkpoints ----

fs::path checkpoint_file(const fs::path& path) {
  return fs::is_directory(path) ? path / "model.ckpt" : path;
}

std::vector<Checkpoint> list_checkpoints(const fs::path& run_dir) {
  std::vector<Checkpoint> out;
  const fs::path root = run_dir / "ckpt";
  if (!fs::exists(root)) return out;
  static const std::regex kStep(R"(^step_(\d+)$)");
  for (const auto& entry : fs::directory_iterator(root)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (!entry.is_directory() || !std::regex_match(name, m, kStep)) continue;
    const fs::path file = entry.path() / "model.ckpt";
    if (!fs::exists(file)) continue;
    // The header line carries the metadata.
    const std::string body = read_file(file);
    const std::string head = body.substr(0, body.find('\n'));
    const json meta = json::parse(head, nullptr, false).value("meta", json::object());
    out.push_back(Checkpoint{std::stoi(m[1].str()), entry.path(), meta.value("loss", 0.0),
                             meta.value("config_fingerprint", "")});
  }
  std::sort(out.begin(), out.end(), [](const Checkpoint& a, const Checkpoint& b) { return a.step < b.step; });
  return out;
}

EvalConfig handoff_to_eval(const fs::path& checkpoint, const EvalConfig& eval_cfg) {
  if (!fs::exists(checkpoint_file(checkpoint))) {
    throw Error(ErrorCode::MissingCheckpoint, "no checkpoint at " + checkpoint.string());
  }
  EvalConfig out = eval_cfg;
  out.inference.backbone_cfg["weights"] = checkpoint.string();
  return out;
}

EvalConfig handoff_to_eval(const Checkpoint& checkpoint, const EvalConfig& eval_cfg) {
  return handoff_to_eval(checkpoint.path, eval_cfg);
}

// ---- training loop ----

namespace {

json resolve_hyperparams(const TrainerDescriptor& desc, const json& given) {
  json out = json::object();
  std::set<std::string> known;
  for (const auto& h : desc.hyperparam_schema) {
    known.insert(h.key);
    const json& v = given.contains(h.key) ? given.at(h.key) : h.default_value;
    if (!value_matches(h.type, v)) {
      throw Error(ErrorCode::TypeMismatch, fmt::format("train.hyperparams.{} must be {}", h.key, to_string(h.type)));
    }
    out[h.key] = v;
  }
  std::vector<std::string> unknown;
  for (const auto& [k, v] : given.items()) {
    if (!known.count(k)) unknown.push_back("train.hyperparams." + k);
  }
  if (!unknown.empty()) {
    throw Error(ErrorCode::UnknownKey, fmt::format("{} (method '{}')", fmt::join(unknown, ", "), desc.method_name));
  }
  return out;
}

void write_manifest(const fs::path& run_dir, const TrainConfig& cfg, const TrainOutcome& o, const std::string& status) {
  json m{{"run_id", o.run_id},
         {"method", cfg.method},
         {"resolved_config", to_tree(AnyConfig(cfg))},
         {"config_fingerprint", config_fingerprint(AnyConfig(cfg))},
         {"start_step", o.start_step},
         {"steps", cfg.optimizer.steps},
         {"checkpoints", o.checkpoints},
         {"initial_loss", o.initial_loss},
         {"final_loss", o.final_loss},
         {"parameter_digest", o.parameter_digest},
         {"status", status}};
  write_file_atomic(run_dir / "train_manifest.json", m.dump(2) + "\n");
}

}  // namespace

TrainOutcome train(const TrainConfig& cfg, const BackboneRegistry& backbones, const TrainerRegistry& trainers,
                   const TrainOptions& options) {
  const TrainerDescriptor& tdesc = trainers.resolve(cfg.method);
  const AdapterDescriptor& bdesc = backbones.resolve(cfg.inference.backbone);
  for (TaskKind t : kAllTasks) {
    if (tdesc.required_capabilities.supports(t) && !bdesc.capabilities.supports(t)) {
      throw Error(ErrorCode::CapabilityError,
                  fmt::format("{} needs {} support from {}", cfg.method, to_string(t), bdesc.name));
    }
  }
  const json hyper = resolve_hyperparams(tdesc, cfg.hyperparams);

  std::unique_ptr<BackboneAdapter> adapter = backbones.instantiate(cfg.inference.backbone);
  auto* model = dynamic_cast<TrainableBackbone*>(adapter.get());
  if (!model) throw Error(ErrorCode::NotTrainable, "backbone '" + bdesc.name + "' exposes no loss/step interface");
  adapter->load(cfg.inference.backbone_cfg);
  auto trainer = trainers.instantiate(cfg.method);

  const auto data = load_train_dataset(cfg.dataset_path);
  const std::string fingerprint = config_fingerprint(AnyConfig(cfg));

  TrainOutcome out;
  std::vector<LossPoint> previous_curve;
  if (options.resume_dir) {
    out.run_dir = *options.resume_dir;
    out.run_id = out.run_dir.filename().string();
    const json m = json::parse(read_file(out.run_dir / "train_manifest.json"));
    if (m.at("config_fingerprint") != fingerprint) {
      throw Error(ErrorCode::ManifestMismatch, "run " + out.run_id + " was trained with a different config");
    }
    out.checkpoints = list_checkpoints(out.run_dir);
    if (!out.checkpoints.empty()) {
      const json meta = model->restore_checkpoint(checkpoint_file(out.checkpoints.back().path));
      out.start_step = meta.at("step").get<int>();
    }
    if (fs::exists(out.run_dir / "loss.jsonl")) {
      for (const auto& line : read_lines(out.run_dir / "loss.jsonl")) {
        if (trim(line).empty()) continue;
        const json j = json::parse(line);
        if (j.at("step").get<int>() <= out.start_step) {
          previous_curve.push_back(LossPoint{j.at("step").get<int>(), j.at("loss").get<double>()});
        }
      }
    }
  } else {
    out.run_id = options.run_id.value_or(make_run_id());
    out.run_dir = fs::path(cfg.output_dir) / out.run_id;
    if (fs::exists(out.run_dir / "train_manifest.json")) {
      throw Error(ErrorCode::IoError, "training run already exists: " + out.run_dir.string());
    }
    if (!cfg.resume_from.empty()) {
      const fs::path src = checkpoint_file(cfg.resume_from);
      if (!fs::exists(src)) throw Error(ErrorCode::MissingCheckpoint, "resume_from: no checkpoint at " + cfg.resume_from);
      const json meta = model->restore_checkpoint(src);
      out.start_step = meta.value("step", 0);
    }
  }
  fs::create_directories(out.run_dir);
  out.initial_loss = model->loss(data);
  out.loss_curve = previous_curve;

  std::string loss_lines;
  for (const auto& p : previous_curve) loss_lines += json{{"step", p.step}, {"loss", p.loss}}.dump() + "\n";
  write_file_atomic(out.run_dir / "loss.jsonl", loss_lines);
  std::ofstream loss_log(out.run_dir / "loss.jsonl", std::ios::app | std::ios::binary);

  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.inference.seed);
  const auto bs = static_cast<std::size_t>(cfg.optimizer.batch_size);
  for (int step = out.start_step + 1; step <= cfg.optimizer.steps; ++step) {
    std::vector<TrainExample> batch;
    for (auto i : batch_indices(seed, step, data.size(), bs)) batch.push_back(data[i]);
    const double loss = trainer->step(*model, batch, cfg.optimizer.learning_rate, hyper);
    if (!std::isfinite(loss)) {
      out.final_loss = loss;
      out.parameter_digest = model->parameter_digest();
      write_manifest(out.run_dir, cfg, out, "diverged");
      const std::string kept = out.checkpoints.empty() ? "none" : out.checkpoints.back().path.string();
      throw Error(ErrorCode::TrainingDiverged,
                  fmt::format("loss became {} at step {}; last good checkpoint: {}", loss, step, kept));
    }
    out.loss_curve.push_back(LossPoint{step, loss});
    loss_log << json{{"step", step}, {"loss", loss}}.dump() << '\n';
    loss_log.flush();
    if (step % cfg.checkpoint_interval == 0 || step == cfg.optimizer.steps) {
      const fs::path dir = out.run_dir / "ckpt" / fmt::format("step_{}", step);
      json meta{{"step", step}, {"loss", loss}, {"config_fingerprint", fingerprint}, {"method", cfg.method},
                {"run_id", out.run_id}};
      model->save_checkpoint(dir / "model.ckpt", meta);
      std::erase_if(out.checkpoints, [&](const Checkpoint& c) { return c.step == step; });
      out.checkpoints.push_back(Checkpoint{step, dir, loss, fingerprint});
    }
  }
  out.final_loss = model->loss(data);
  if (!std::isfinite(out.final_loss)) {
    write_manifest(out.run_dir, cfg, out, "diverged");
    throw Error(ErrorCode::TrainingDiverged, "final loss is not finite");
  }
  out.parameter_digest = model->parameter_digest();
  write_manifest(out.run_dir, cfg, out, "complete");
  return out;
}

}  // namespace umm
