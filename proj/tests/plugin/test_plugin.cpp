// Registers one extra backbone, benchmark and trainer, to exercise plugin loading.

#include "umm/registries.hpp"

namespace {

class ShoutMock final : public umm::BackboneAdapter {
 public:
  static const umm::AdapterDescriptor& static_descriptor() {
    static const umm::AdapterDescriptor d{"shout-mock", umm::CapabilitySet{true, false, false}, {}, false};
    return d;
  }
  const umm::AdapterDescriptor& descriptor() const override { return static_descriptor(); }

 protected:
  void do_load(const umm::ParamMap&) override {}
  std::vector<umm::InferenceResult> do_generate(std::span<const umm::InferenceRequest> batch,
                                                const umm::ParamMap&) override {
    std::vector<umm::InferenceResult> out;
    for (const auto& req : batch) {
      umm::InferenceResult r;
      r.text = umm::to_lower(req.prompt) + "!";
      out.push_back(std::move(r));
    }
    return out;
  }
};

class NoopTrainer final : public umm::Trainer {
 public:
  double step(umm::TrainableBackbone& model, std::span<const umm::TrainExample> batch, double,
              const umm::json&) override {
    return model.loss(batch);
  }
};

}  // namespace

extern "C" void umm_register_plugin(umm::Registries& r) {
  r.backbones.register_adapter(ShoutMock::static_descriptor(), [] { return std::make_unique<ShoutMock>(); });
  umm::BenchmarkDescriptor desc;
  desc.name = "plugin-mc";
  desc.metric = "accuracy";
  desc.scale = umm::Scale{0, 1};
  desc.aggregation = umm::Aggregation::count_weighted;
  desc.summary = "multiple choice, registered by a plugin";
  r.benchmarks.register_benchmark(desc, r.benchmarks.scorer("toy-mc"));
  r.trainers.register_trainer(umm::TrainerDescriptor{"noop", umm::CapabilitySet{true, false, false}, {}, "test"},
                              [] { return std::make_unique<NoopTrainer>(); });
}
