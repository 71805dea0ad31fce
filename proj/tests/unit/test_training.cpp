#include <doctest.h>

#include <cmath>
#include <limits>

#include "umm/error.hpp"
#include "umm/registries.hpp"
#include "umm/training.hpp"
#include "test_support.hpp"

using namespace umm;

namespace {

ErrorCode code_of(auto&& fn, std::string* message = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::IoError;
}

TrainConfig sft_cfg(const fs::path& out) {
  TrainConfig c;
  c.method = "sft";
  c.dataset_path = "synthetic:100";
  c.output_dir = out.string();
  c.optimizer = {1e-2, 50, 8};
  c.checkpoint_interval = 10;
  c.inference.backbone = "toy-trainable";
  c.inference.backbone_cfg = ParamMap{{"hidden_dim", 16}, {"vocab", 48}, {"seed", 1}, {"layers", 4}, {"init_scale", 0.1}};
  return c;
}

TrainOptions pinned(const std::string& id) {
  TrainOptions o;
  o.run_id = id;
  return o;
}

/// Plain steps for a while, then a NaN loss.
class BlowUp : public Trainer {
 public:
  double step(TrainableBackbone& model, std::span<const TrainExample> batch, double lr, const json&) override {
    if (++calls_ > 15) return std::numeric_limits<double>::quiet_NaN();
    return model.train_step(batch, lr);
  }

 private:
  int calls_ = 0;
};

}  // namespace

TEST_SUITE("training") {
  TEST_CASE("trainer registry") {
    auto reg = make_default_registries();
    CHECK(reg.trainers.contains("sft"));
    CHECK(reg.trainers.resolve("sft").method_name == "sft");
    CHECK(code_of([&] { reg.trainers.register_trainer({"sft", {}, {}, ""}, [] { return std::unique_ptr<Trainer>(); }); }) ==
          ErrorCode::DuplicateAdapter);
    CHECK(code_of([&] { reg.trainers.resolve("dpo"); }) == ErrorCode::MethodNotRegistered);
  }

  TEST_CASE("contract stubs fail loudly") {
    const auto reg = make_default_registries();
    for (const char* m : {"reca", "irg", "unicot", "unigame"}) {
      CAPTURE(m);
      REQUIRE(reg.trainers.contains(m));
      CHECK_FALSE(reg.trainers.resolve(m).reference.empty());
      const auto dir = test::scratch(std::string("stub-") + m);
      auto cfg = sft_cfg(dir);
      cfg.method = m;
      std::string msg;
      CHECK(code_of([&] { train(cfg, reg.backbones, reg.trainers, pinned("r")); }, &msg) == ErrorCode::NotImplemented);
      CHECK(msg.find(reg.trainers.resolve(m).reference) != std::string::npos);
      fs::remove_all(dir);
    }
  }

  TEST_CASE("non-trainable backbones are refused") {
    const auto dir = test::scratch("not-trainable");
    const auto reg = make_default_registries();
    auto cfg = sft_cfg(dir);
    cfg.inference.backbone = "echo-mock";
    cfg.inference.backbone_cfg = ParamMap{{"delay_ms", 0}};
    CHECK(code_of([&] { train(cfg, reg.backbones, reg.trainers, pinned("r")); }) == ErrorCode::NotTrainable);
    cfg = sft_cfg(dir);
    cfg.method = "dpo";
    CHECK(code_of([&] { train(cfg, reg.backbones, reg.trainers, pinned("r")); }) == ErrorCode::MethodNotRegistered);
    fs::remove_all(dir);
  }

  TEST_CASE("sft lowers the loss and checkpoints on the interval") {
    const auto dir = test::scratch("sft");
    const auto reg = make_default_registries();
    const auto out = train(sft_cfg(dir), reg.backbones, reg.trainers, pinned("a"));
    CHECK(out.final_loss < out.initial_loss);
    std::vector<int> steps;
    for (const auto& c : out.checkpoints) steps.push_back(c.step);
    CHECK(steps == std::vector<int>{10, 20, 30, 40, 50});
    for (const auto& c : out.checkpoints) CHECK(fs::exists(checkpoint_file(c.path)));
    CHECK(list_checkpoints(out.run_dir) == out.checkpoints);
    CHECK(read_lines(out.run_dir / "loss.jsonl").size() == 50);

    const auto again = train(sft_cfg(dir), reg.backbones, reg.trainers, pinned("b"));
    CHECK(again.loss_curve == out.loss_curve);
    CHECK(again.parameter_digest == out.parameter_digest);

    auto odd = sft_cfg(dir);
    odd.optimizer.steps = 25;
    steps.clear();
    for (const auto& c : train(odd, reg.backbones, reg.trainers, pinned("c")).checkpoints) steps.push_back(c.step);
    CHECK(steps == std::vector<int>{10, 20, 25});
    fs::remove_all(dir);
  }

  TEST_CASE("restore then continue equals an uninterrupted run") {
    const auto dir = test::scratch("restore");
    const auto reg = make_default_registries();
    auto cfg = sft_cfg(dir);
    cfg.optimizer.steps = 20;
    const auto full = train(cfg, reg.backbones, reg.trainers, pinned("full"));

    auto resumed_cfg = cfg;
    resumed_cfg.resume_from = (full.run_dir / "ckpt" / "step_10").string();
    const auto resumed = train(resumed_cfg, reg.backbones, reg.trainers, pinned("resumed"));
    CHECK(resumed.start_step == 10);
    CHECK(resumed.parameter_digest == full.parameter_digest);
    REQUIRE(resumed.loss_curve.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(resumed.loss_curve[i] == full.loss_curve[10 + i]);

    auto missing = cfg;
    missing.resume_from = (dir / "nowhere").string();
    CHECK(code_of([&] { train(missing, reg.backbones, reg.trainers, pinned("m")); }) == ErrorCode::MissingCheckpoint);
    fs::remove_all(dir);
  }

  TEST_CASE("divergence keeps the last good checkpoint") {
    const auto dir = test::scratch("diverge");
    auto reg = make_default_registries();
    reg.trainers.register_trainer({"blow-up", {true, false, false}, {}, "test"}, [] { return std::make_unique<BlowUp>(); });
    auto cfg = sft_cfg(dir);
    cfg.method = "blow-up";
    std::string msg;
    CHECK(code_of([&] { train(cfg, reg.backbones, reg.trainers, pinned("r")); }, &msg) == ErrorCode::TrainingDiverged);
    CHECK(msg.find("step 16") != std::string::npos);
    CHECK(msg.find("step_10") != std::string::npos);
    const auto kept = list_checkpoints(dir / "r");
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].step == 10);
    fs::remove_all(dir);
  }

  TEST_CASE("batch indices are a pure function of seed and step") {
    const auto a = batch_indices(3, 7, 100, 8);
    CHECK(a.size() == 8);
    CHECK(a == batch_indices(3, 7, 100, 8));
    CHECK(a != batch_indices(3, 8, 100, 8));
    CHECK(a != batch_indices(4, 7, 100, 8));
    for (auto i : a) CHECK(i < 100);
    (void)batch_indices(3, 1, 100, 8);
    CHECK(a == batch_indices(3, 7, 100, 8));
  }

  TEST_CASE("synthetic data is deterministic") {
    CHECK(synthetic_mc_records(10, 1) == synthetic_mc_records(10, 1));
    CHECK(synthetic_mc_records(10, 1) != synthetic_mc_records(10, 2));
    const auto ex = load_train_dataset("synthetic:10");
    CHECK(ex.size() == 10);
    CHECK_FALSE(ex[0].images.empty());
  }

  TEST_CASE("handoff changes exactly the weights key") {
    const auto dir = test::scratch("handoff");
    const auto reg = make_default_registries();
    auto cfg = sft_cfg(dir);
    cfg.optimizer.steps = 10;
    const auto out = train(cfg, reg.backbones, reg.trainers, pinned("r"));

    EvalConfig eval;
    eval.benchmark = "toy-mc";
    eval.dataset_path = (test::source_dir() / "data" / "toy_mc").string();
    eval.output_dir = (dir / "eval").string();
    eval.inference = cfg.inference;
    eval.inference.backbone_cfg["weights"] = "initial";
    const auto handed = handoff_to_eval(out.checkpoints.back(), eval);
    const auto d = diff_configs(eval, handed);
    REQUIRE(d.size() == 1);
    CHECK(d[0].key == "inference.backbone_cfg.weights");
    CHECK(d[0].a == "initial");
    CHECK(d[0].b == out.checkpoints.back().path.string());

    CHECK(code_of([&] { handoff_to_eval(dir / "missing", eval); }) == ErrorCode::MissingCheckpoint);
    fs::remove_all(dir);
  }

  TEST_CASE("training leaves the dataset directory alone") {
    const auto dir = test::scratch("untouched");
    const auto data = dir / "data";
    fs::create_directories(data);
    std::string lines;
    for (const auto& r : synthetic_mc_records(12, 5)) lines += json(r).dump() + "\n";
    write_file(data / "samples.jsonl", lines);
    const auto before = read_file(data / "samples.jsonl");
    const auto reg = make_default_registries();
    auto cfg = sft_cfg(dir / "runs");
    cfg.dataset_path = (data / "samples.jsonl").string();
    cfg.optimizer.steps = 5;
    train(cfg, reg.backbones, reg.trainers, pinned("r"));
    CHECK(read_file(data / "samples.jsonl") == before);
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(data)) ++n;
    CHECK(n == 1);
    fs::remove_all(dir);
  }
}
