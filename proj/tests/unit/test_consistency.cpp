#include <doctest.h>

#include <cmath>

#include "umm/consistency.hpp"
#include "umm/error.hpp"
#include "umm/mocks.hpp"
#include "umm/toy_model.hpp"
#include "test_support.hpp"

using namespace umm;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::IoError;
}

JudgeConfig judge(const std::string& endpoint, const std::string& tmpl) {
  JudgeConfig c;
  c.endpoint = endpoint;
  c.model_name = "mock";
  c.template_id = tmpl;
  return c;
}

/// Rephrases by returning the question itself for ids containing "same".
class ParrotTransport : public JudgeTransport {
 public:
  std::string send(const json& req) override {
    const std::string q = req.at("question");
    if (q.find("same") != std::string::npos) return json::array({q, q + "?"}).dump();
    return json::array({"first: " + q, "second: " + q}).dump();
  }
  bool local() const override { return true; }
};

/// One-hot embedding by first character, so distinct letters are orthogonal.
class OneHotTransport : public JudgeTransport {
 public:
  std::string send(const json& req) override {
    json out = json::array();
    for (const auto& t : req.at("texts")) {
      std::vector<double> v(26, 0.0);
      v[static_cast<std::size_t>(t.get<std::string>()[0] - 'a') % 26] = 1.0;
      out.push_back(v);
    }
    return out.dump();
  }
  bool local() const override { return true; }
};

std::vector<SampleRecord> synthetic(std::size_t n) {
  std::vector<SampleRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "m%03zu", i);
    out.push_back({id, "What is " + std::to_string(i) + " plus two?", {pattern_image(i, 2, 2)}, "", "math", {}});
  }
  return out;
}

BackboneRegistry builtin() {
  BackboneRegistry r;
  register_builtin_backbones(r);
  return r;
}

std::unique_ptr<BackboneAdapter> toy(int layers) {
  auto a = builtin().instantiate("toy-trainable");
  a->load(ParamMap{{"hidden_dim", 8}, {"vocab", 40}, {"seed", 2}, {"layers", layers}});
  return a;
}

}  // namespace

TEST_SUITE("consistency") {
  TEST_CASE("variants for every sample") {
    JudgeClient r(judge("mock:rephrase", "rephrase/v1"));
    const auto samples = synthetic(200);
    const auto sets = build_variants(samples, r);
    REQUIRE(sets.size() == 200);
    for (const auto& s : sets) {
      CHECK(s.variants[0] != s.variants[1]);
      CHECK(s.variants[0] != s.variants[2]);
      CHECK(s.variants[1] != s.variants[2]);
    }
    CHECK(sets[5].variants[0] == samples[5].prompt);
    CHECK(sets[5].images == samples[5].images);
    JudgeClient again(judge("mock:rephrase", "rephrase/v1"));
    CHECK(build_variants(samples, again) == sets);
  }

  TEST_CASE("degenerate rephrasings drop the sample") {
    JudgeClient r(judge("mock:hash", "rephrase/v1"), std::make_shared<ParrotTransport>());
    std::vector<SampleRecord> samples{{"a", "keep me", {}, "", "", {}}, {"b", "the same words", {}, "", "", {}}};
    std::vector<RunFailure> dropped;
    const auto sets = build_variants(samples, r, &dropped);
    REQUIRE(sets.size() == 1);
    CHECK(sets[0].sample_id == "a");
    REQUIRE(dropped.size() == 1);
    CHECK(dropped[0].sample_id == "b");
  }

  TEST_CASE("response consistency") {
    JudgeClient hash(judge("mock:hash-embed", "embed/v1"));
    const auto same = response_consistency({"the cat sat", "the cat sat", "the cat sat"}, hash);
    for (const auto& c : same) CHECK(*c == doctest::Approx(1.0));

    JudgeClient onehot(judge("mock:hash", "embed/v1"), std::make_shared<OneHotTransport>());
    const auto orth = response_consistency({"alpha", "beta", "gamma"}, onehot);
    for (const auto& c : orth) CHECK(*c == doctest::Approx(0.0));

    const auto partial = response_consistency({"alpha", "", "gamma"}, hash);
    CHECK_FALSE(partial[0].has_value());
    CHECK(partial[1].has_value());
    CHECK_FALSE(partial[2].has_value());
  }

  TEST_CASE("pairwise cosines match a brute-force mean") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<std::vector<double>> v(3, std::vector<double>(5));
      for (auto& x : v)
        for (auto& d : x) d = rng.uniform(-1, 1);
      const auto c = pairwise_cosines(v[0], v[1], v[2]);
      auto unit = [](std::vector<double> x) {
        double n = 0;
        for (double d : x) n += d * d;
        for (double& d : x) d /= std::sqrt(n);
        return x;
      };
      double brute = 0;
      for (auto [i, j] : {std::pair{0, 1}, {0, 2}, {1, 2}}) {
        const auto a = unit(v[i]), b = unit(v[j]);
        for (std::size_t k = 0; k < a.size(); ++k) brute += a[k] * b[k];
      }
      CHECK((c[0] + c[1] + c[2]) / 3 == doctest::Approx(brute / 3).epsilon(1e-12));
      for (double x : c) CHECK(Scale{-1, 1}.contains(x));
    }
  }

  TEST_CASE("identical variants are fully consistent at every layer") {
    auto a = toy(12);
    VariantSet set{"s", {"what color is it", "what color is it", "what color is it"}, {pattern_image(1, 2, 2)}};
    const auto lc = layer_consistency(*a, set, {"red", "red", "red"}, 5, false);
    REQUIRE(lc.size() == 3);
    for (const auto& p : lc) CHECK(p.value == doctest::Approx(1.0));
  }

  TEST_CASE("stride arithmetic on an 8-layer model") {
    auto a = toy(8);
    VariantSet set{"s", {"q one", "q two", "q three"}, {pattern_image(1, 2, 2)}};
    const auto lc = layer_consistency(*a, set, {"ab", "cd", "ef"}, 5, false);
    REQUIRE(lc.size() == 2);
    CHECK(lc[0].layer_index == 0);
    CHECK(lc[1].layer_index == 5);
    for (const auto& p : lc) CHECK(Scale{-1, 1}.contains(p.value));
  }

  TEST_CASE("no latent support") {
    auto echo = builtin().instantiate("echo-mock");
    echo->load(ParamMap{{"delay_ms", 0}});
    VariantSet set{"s", {"a", "b", "c"}, {pattern_image(1, 2, 2)}};
    CHECK(code_of([&] { layer_consistency(*echo, set, {"x", "y", "z"}); }) == ErrorCode::NoLatentSupport);
  }

  TEST_CASE("histogram binning") {
    const std::vector<double> pos{0.0, 0.5, 0.99, 1.0};
    const auto h = cosine_histogram(pos);
    CHECK(h.counts.size() == 50);
    CHECK(h.lo == 0.0);
    CHECK(h.total == 4);
    CHECK(h.counts.back() == 2);
    const std::vector<double> neg{-0.5, 0.5};
    const auto w = cosine_histogram(neg);
    CHECK(w.counts.size() == 100);
    CHECK(w.lo == -1.0);
    std::size_t sum = 0;
    for (auto c : w.counts) sum += c;
    CHECK(sum == 2);
  }

  TEST_CASE("analysis over echo-mock") {
    const auto dir = test::scratch("analyze");
    AnalysisConfig cfg;
    cfg.output_dir = dir.string();
    cfg.rephraser = judge("mock:rephrase", "rephrase/v1");
    cfg.embedder = judge("mock:hash-embed", "embed/v1");
    cfg.inference.backbone = "echo-mock";
    cfg.inference.backbone_cfg = ParamMap{{"delay_ms", 0}};
    const auto samples = synthetic(12);
    AnalysisOptions o;
    o.run_id = "a";
    o.workers = 3;
    const auto a = analyze(cfg, samples, builtin(), o);
    CHECK(a.traces.size() == 12);
    CHECK(a.cosines.size() == 36);
    CHECK(a.curve.empty());
    CHECK(a.histogram.total == 36);
    for (const char* f : {"traces.jsonl", "histogram.json", "layer_curve.json", "summary.json", "manifest.json",
                          "response_cosines.svg", "layer_consistency.svg"}) {
      CAPTURE(f);
      CHECK(fs::exists(a.run_dir / f));
    }
    o.run_id = "b";
    o.workers = 1;
    const auto b = analyze(cfg, samples, builtin(), o);
    for (const char* f : {"traces.jsonl", "histogram.json", "summary.json", "response_cosines.svg"}) {
      CAPTURE(f);
      CHECK(read_file(a.run_dir / f) == read_file(b.run_dir / f));
    }
    fs::remove_all(dir);
  }

  TEST_CASE("an empty response flags the sample") {
    const auto dir = test::scratch("analyze-empty");
    const auto samples = synthetic(2);
    json table = json::object();
    for (const auto& s : samples)
      for (int k = 0; k < 3; ++k) table[s.sample_id + "#v" + std::to_string(k)] = "answer " + std::to_string(k);
    table["m001#v1"] = "";
    AnalysisConfig cfg;
    cfg.output_dir = dir.string();
    cfg.rephraser = judge("mock:rephrase", "rephrase/v1");
    cfg.embedder = judge("mock:hash-embed", "embed/v1");
    cfg.inference.backbone = "scripted-mock";
    cfg.inference.backbone_cfg = ParamMap{{"table", table}};
    AnalysisOptions o;
    o.run_id = "r";
    const auto out = analyze(cfg, samples, builtin(), o);
    REQUIRE(out.traces.size() == 2);
    CHECK_FALSE(out.traces[0].flagged);
    CHECK(out.traces[1].flagged);
    CHECK(out.cosines.size() == 4);
    fs::remove_all(dir);
  }

  TEST_CASE("curve length on a 12-layer toy") {
    const auto dir = test::scratch("analyze-toy");
    AnalysisConfig cfg;
    cfg.output_dir = dir.string();
    cfg.rephraser = judge("mock:rephrase", "rephrase/v1");
    cfg.embedder = judge("mock:hash-embed", "embed/v1");
    cfg.inference.backbone = "toy-trainable";
    cfg.inference.backbone_cfg = ParamMap{{"hidden_dim", 8}, {"vocab", 40}, {"seed", 2}, {"layers", 12}};
    cfg.inference.gen_params = ParamMap{{"max_new_tokens", 4}, {"min_new_tokens", 1}};
    AnalysisOptions o;
    o.run_id = "r";
    const auto out = analyze(cfg, synthetic(4), builtin(), o);
    CHECK(out.curve.size() == static_cast<std::size_t>((12 - 1) / 5 + 1));
    for (const auto& t : out.traces) {
      CHECK(t.stride == 5);
      for (std::size_t i = 1; i < t.layer_consistency.size(); ++i) {
        CHECK(t.layer_consistency[i].layer_index - t.layer_consistency[i - 1].layer_index == 5);
      }
    }
    fs::remove_all(dir);
  }
}
