#include <doctest.h>

#include "umm/config.hpp"
#include "umm/error.hpp"
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

constexpr const char* kEcho = R"(
inference:
  backbone: echo-mock
  backbone_cfg:
    delay_ms: 0
  gen_params:
    steps: 10
)";

constexpr const char* kEval = R"(
eval:
  benchmark: toy-mc
  dataset_path: data/toy_mc
  output_dir: runs
inference:
  backbone: scripted-mock
  backbone_cfg:
    table_path: data/toy_mc/answers.json
)";

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("overrides beat the file, the file beats defaults") {
    const auto base = std::get<InferenceConfig>(load_config_text(kEcho));
    CHECK(base.backbone == "echo-mock");
    CHECK(base.seed == 0);
    const auto cfg = std::get<InferenceConfig>(load_config_text(kEcho, {"inference.seed=42"}));
    CHECK(cfg.seed == 42);
    CHECK(cfg.backbone == "echo-mock");
    const auto nested = std::get<InferenceConfig>(load_config_text(kEcho, {"inference.gen_params.steps=20"}));
    CHECK(nested.gen_params.at("steps") == 20);
  }

  TEST_CASE("unknown keys are named") {
    std::string msg;
    CHECK(code_of([&] { load_config_text("inference:\n  backbne: echo-mock\n"); }, &msg) == ErrorCode::UnknownKey);
    CHECK(msg.find("backbne") != std::string::npos);
    CHECK(code_of([&] { load_config_text(kEcho, {"inference.sead=1"}); }, &msg) == ErrorCode::UnknownKey);
    CHECK(msg.find("sead") != std::string::npos);
  }

  TEST_CASE("type mismatches and parse errors") {
    std::string msg;
    CHECK(code_of([&] { load_config_text(kEcho, {"inference.seed=abc"}); }, &msg) == ErrorCode::TypeMismatch);
    CHECK(msg.find("inference.seed") != std::string::npos);
    CHECK(code_of([&] { load_config_text("inference: [unclosed\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([&] { load_config_text(kEcho, {"no-equals-sign"}); }) == ErrorCode::ParseError);
  }

  TEST_CASE("kind is checked when expected") {
    CHECK(kind_of(load_config_text(kEval)) == ConfigKind::eval);
    CHECK(code_of([&] { load_config_text(kEval, {}, ConfigKind::train); }) == ErrorCode::KindMismatch);
    const auto a = load_config_text(kEcho);
    const auto b = load_config_text(kEval);
    CHECK(code_of([&] { diff_configs(a, b); }) == ErrorCode::KindMismatch);
  }

  TEST_CASE("diff_configs reports dotted paths") {
    const auto a = load_config_text(kEcho);
    CHECK(diff_configs(a, a).empty());

    const auto seeded = load_config_text(kEcho, {"inference.seed=42"});
    const auto d = diff_configs(a, seeded);
    REQUIRE(d.size() == 1);
    CHECK(d[0] == ConfigDiff{"inference.seed", 0, 42});

    const auto steps = load_config_text(kEcho, {"inference.gen_params.steps=20"});
    const auto d2 = diff_configs(a, steps);
    REQUIRE(d2.size() == 1);
    CHECK(d2[0].key == "inference.gen_params.steps");
    CHECK(d2[0].a == 10);
    CHECK(d2[0].b == 20);
  }

  TEST_CASE("swapping the backbone changes only backbone keys") {
    const auto a = load_config_text(kEval);
    const auto b = load_config_text(kEval, {"inference.backbone=echo-mock", "inference.backbone_cfg={delay_ms: 0}"});
    std::vector<std::string> keys;
    for (const auto& d : diff_configs(a, b)) keys.push_back(d.key);
    for (const auto& k : keys) CHECK(k.rfind("inference.backbone", 0) == 0);
    CHECK(std::find(keys.begin(), keys.end(), "inference.backbone") != keys.end());
  }

  TEST_CASE("yaml rendering round-trips and fingerprints are stable") {
    for (const char* text : {kEcho, kEval}) {
      const auto cfg = load_config_text(text);
      const auto back = load_config_text(to_yaml(cfg));
      CHECK(diff_configs(cfg, back).empty());
      CHECK(config_fingerprint(cfg) == config_fingerprint(back));
    }
    CHECK(config_fingerprint(load_config_text(kEcho)) !=
          config_fingerprint(load_config_text(kEcho, {"inference.seed=1"})));
  }

  TEST_CASE("defaults are filled in") {
    const auto cfg = std::get<EvalConfig>(load_config_text(kEval));
    CHECK(cfg.mode == EvalMode::single_stage);
    CHECK(cfg.failure_threshold == doctest::Approx(0.2));
    CHECK_FALSE(cfg.judge.has_value());
    const auto tr = std::get<TrainConfig>(load_config_text("train:\n  method: sft\n  dataset_path: synthetic:10\n  output_dir: runs\ninference:\n  backbone: toy-trainable\n"));
    CHECK(tr.optimizer.steps == 50);
    CHECK(tr.checkpoint_interval == 10);
  }

  TEST_CASE("repository configs load") {
    for (const auto& entry : fs::directory_iterator(test::source_dir() / "configs")) {
      if (entry.path().extension() != ".yaml") continue;
      CAPTURE(entry.path().string());
      CHECK_NOTHROW(load_config(entry.path()));
    }
  }

  TEST_CASE("schema reference covers every layer") {
    const auto ref = schema_reference();
    for (const char* key : {"inference.backbone", "eval.benchmark", "train.optimizer.learning_rate", "analysis.stride",
                            "eval.judge.endpoint"}) {
      CAPTURE(key);
      CHECK(ref.find(key) != std::string::npos);
    }
  }
}
