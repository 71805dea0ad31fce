// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// the number of failing criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "test_support.hpp"
#include "umm/benchmarks.hpp"
#include "umm/config.hpp"
#include "umm/consistency.hpp"
#include "umm/registries.hpp"
#include "umm/scoring.hpp"
#include "umm/training.hpp"

using namespace umm;
namespace t = umm::test;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void fail(std::string why) {
    pass = false;
    notes.push_back(std::move(why));
  }
  void check(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<CategoryAggregate> as_categories(const std::vector<std::string>& names, const std::vector<double>& v) {
  std::vector<CategoryAggregate> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(CategoryAggregate{names[i], 1, v[i]});
  return out;
}

// 1. GenEval overall = mean of the six categories.
Outcome geneval_fixture() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto tab = t::read_csv(t::fixture("geneval_subscores.csv"));
  o.check(tab.rows.size() == 23, fmt::format("expected 23 rows, got {}", tab.rows.size()));
  const std::vector<std::string> names(tab.header.begin() + 1, tab.header.begin() + 7);
  for (std::size_t r = 0; r < tab.rows.size(); ++r) {
    const double mean = aggregate_mean(as_categories(names, tab.numbers(r, 1, 7)));
    const double overall = std::stod(tab.rows[r][7]);
    o.check(std::abs(mean - overall) <= 0.01, fmt::format("{}: mean {:.4f} vs {}", tab.rows[r][0], mean, overall));
  }
  const double secs = seconds_since(t0);
  o.check(secs < 1.0, fmt::format("took {:.3f}s", secs));
  return o;
}

// 2. GEdit Avg = unweighted mean of the 11 categories, SC/PQ/O rows of both tables.
Outcome gedit_fixture() {
  Outcome o;
  const auto t0 = Clock::now();
  std::size_t rows = 0;
  for (const char* name : {"gedit_en_overall.csv", "gedit_en_intersection.csv"}) {
    const auto tab = t::read_csv(t::fixture(name));
    const std::vector<std::string> names(tab.header.begin() + 1, tab.header.begin() + 12);
    for (std::size_t r = 0; r < tab.rows.size(); ++r, ++rows) {
      const double mean = aggregate_mean(as_categories(names, tab.numbers(r, 1, 12)));
      const double avg = std::stod(tab.rows[r][12]);
      o.check(std::abs(mean - avg) <= 0.005,
              fmt::format("{} {}: mean {:.4f} vs {}", name, tab.rows[r][0], mean, avg));
    }
  }
  o.check(rows == 60, fmt::format("expected 60 rows, got {}", rows));
  const double secs = seconds_since(t0);
  o.check(secs < 1.0, fmt::format("took {:.3f}s", secs));
  return o;
}

// 3. MathVista overall = 0.54 * multi-choice + 0.46 * free-form.
Outcome mathvista_fixture() {
  Outcome o;
  const auto tab = t::read_csv(t::fixture("mathvista_subscores.csv"));
  const std::map<std::string, double> weights{{"multi_choice", 0.54}, {"free_form", 0.46}};
  for (std::size_t r = 0; r < tab.rows.size(); ++r) {
    const auto v = tab.numbers(r, 1, 4);
    const std::vector<CategoryAggregate> cats{{"multi_choice", 1, v[1]}, {"free_form", 1, v[2]}};
    const double w = aggregate_weighted(cats, weights);
    o.check(std::abs(w - v[0]) <= 0.05, fmt::format("{}: weighted {:.3f} vs {}", tab.rows[r][0], w, v[0]));
  }
  return o;
}

// 4. Every overall lies inside its row's category range.
Outcome hull_property() {
  Outcome o;
  std::size_t checked = 0;
  auto hull = [&](const char* name, std::size_t first, std::size_t last, std::size_t overall_col) {
    const auto tab = t::read_csv(t::fixture(name));
    for (std::size_t r = 0; r < tab.rows.size(); ++r, ++checked) {
      const auto v = tab.numbers(r, first, last);
      const double overall = std::stod(tab.rows[r][overall_col]);
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      o.check(overall >= *lo && overall <= *hi,
              fmt::format("{} {}: {} outside [{}, {}]", name, tab.rows[r][0], overall, *lo, *hi));
    }
  };
  hull("mmmu_subscores.csv", 1, 7, 7);
  hull("wise_subscores.csv", 1, 7, 7);
  hull("mathvista_subscores.csv", 2, 4, 1);
  o.check(checked == 12 + 25 + 15, fmt::format("checked {} rows", checked));
  return o;
}

// 5. O^2 = SC * PQ per sample; category mean of O <= sqrt(mean SC * mean PQ).
Outcome viescore_identity() {
  Outcome o;
  Rng rng(20260415);
  std::vector<std::pair<std::string, EditScore>> samples;
  const std::vector<std::string> cats{"bg_change", "color", "material", "motion", "ps_human", "style",
                                      "subj-add", "subj-rm", "subj-repl", "text", "tone"};
  for (int i = 0; i < 10000; ++i) {
    const double sc = rng.uniform(0.0, 10.0);
    const double pq = rng.uniform(0.0, 10.0);
    const EditScore s = make_edit_score(sc, pq);
    if (std::abs(s.o * s.o - sc * pq) > 1e-9) {
      o.fail(fmt::format("pair {}: o^2 {} vs sc*pq {}", i, s.o * s.o, sc * pq));
      break;
    }
    samples.emplace_back(cats[rng.below(cats.size())], s);
  }
  const EditTable table = edit_table(samples);
  for (std::size_t c = 0; c < table.o.size(); ++c) {
    const double bound = std::sqrt(table.sc[c].value * table.pq[c].value);
    o.check(table.o[c].value <= bound + 1e-12,
            fmt::format("{}: mean O {} > {}", table.o[c].category, table.o[c].value, bound));
  }
  o.check(table.o.size() == cats.size(), "not every category was populated");
  return o;
}

SampleRecord mme_record(const std::string& subtask, const std::string& image, int q, bool truth) {
  SampleRecord r;
  r.sample_id = fmt::format("{}-{}-{}", subtask, image, q);
  r.prompt = "Is there a thing? Please answer yes or no.";
  r.images.push_back(Image{"image/png", "\x89PNG" + image, std::nullopt});
  r.ground_truth = truth ? "Yes" : "No";
  r.category = subtask;
  r.meta["image_id"] = image;
  return r;
}

InferenceResult answer(const SampleRecord& r, const std::string& text) {
  InferenceResult res;
  res.sample_id = r.sample_id;
  res.text = text;
  return res;
}

// 6. MME against a brute-force oracle, and P/C bounds on random inputs.
Outcome mme_bounds() {
  Outcome o;
  Rng rng(6);
  // Oracle: every answer pattern for 4 images x 2 questions.
  for (int mask = 0; mask < 256; ++mask) {
    std::vector<SampleRecord> recs;
    std::vector<InferenceResult> res;
    int correct = 0;
    int images_all_correct = 0;
    for (int img = 0; img < 4; ++img) {
      bool both = true;
      for (int q = 0; q < 2; ++q) {
        const bool truth = q == 0;
        const bool right = (mask >> (img * 2 + q)) & 1;
        recs.push_back(mme_record("existence", "img" + std::to_string(img), q, truth));
        res.push_back(answer(recs.back(), (truth == right) ? "Yes, it is." : "No."));
        correct += right ? 1 : 0;
        both = both && right;
      }
      images_all_correct += both ? 1 : 0;
    }
    const double oracle = 100.0 * correct / 8.0 + 100.0 * images_all_correct / 4.0;
    const MmeScore s = score_mme(recs, res);
    const double got = s.per_subtask.empty() ? -1.0 : s.per_subtask.front().value;
    if (got != oracle) {
      o.fail(fmt::format("mask {}: score_mme {} vs oracle {}", mask, got, oracle));
      break;
    }
  }
  const auto comp = MmeComposition::standard();
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SampleRecord> recs;
    std::vector<InferenceResult> res;
    auto add_subtask = [&](const std::string& sub) {
      const int images = 1 + static_cast<int>(rng.below(6));
      for (int img = 0; img < images; ++img) {
        for (int q = 0; q < 2; ++q) {
          recs.push_back(mme_record(sub, "i" + std::to_string(img), q, q == 0));
          const auto pick = rng.below(3);
          res.push_back(answer(recs.back(), pick == 0 ? "yes" : pick == 1 ? "no" : "unsure"));
        }
      }
    };
    for (const auto& s : comp.perception) add_subtask(s);
    for (const auto& s : comp.cognition) add_subtask(s);
    const MmeScore s = score_mme(recs, res);
    if (s.perception < 0 || s.perception > 2000 || s.cognition < 0 || s.cognition > 800) {
      o.fail(fmt::format("trial {}: P={} C={}", trial, s.perception, s.cognition));
      break;
    }
  }
  return o;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

int run_cli(const std::string& args) {
  const std::string cmd = "cd " + shell_quote(t::source_dir().string()) + " && " +
                          shell_quote(UMM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 7. `umm eval` twice gives byte-identical reports; 13/20 correct gives 0.65.
Outcome eval_determinism() {
  Outcome o;
  const fs::path out = t::scratch("accept7");
  const std::string base = "eval -c configs/eval_toy_mc.yaml --set eval.output_dir=" + shell_quote(out.string());
  o.check(run_cli(base + " --run-id first") == 0, "first run failed");
  o.check(run_cli(base + " --run-id second") == 0, "second run failed");
  if (!o.pass) return o;
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(out / "first" / "report")) names.insert(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(out / "second" / "report")) names.insert(e.path().filename().string());
  o.check(names.size() >= 4, "expected at least four report files");
  for (const auto& n : names) {
    const fs::path a = out / "first" / "report" / n;
    const fs::path b = out / "second" / "report" / n;
    o.check(fs::exists(a) && fs::exists(b) && read_file(a) == read_file(b), n + " differs between runs");
  }
  const auto report = parse_report(out / "first" / "report" / "report.json");
  o.check(report.overall.value == 0.65, fmt::format("overall {:.17g}, expected exactly 0.65", report.overall.value));
  o.check(report.per_sample.size() == 20, "expected 20 scored samples");
  fs::remove_all(out);
  return o;
}

// 8. Swapping inference.backbone alone changes the adapter and nothing else.
Outcome config_isolation() {
  Outcome o;
  const fs::path out = t::scratch("accept8");
  const fs::path cfg_file = t::source_dir() / "configs" / "eval_toy_mc.yaml";
  const std::vector<std::string> common{"eval.output_dir=" + out.string(),
                                        "eval.dataset_path=" + (t::source_dir() / "data/toy_mc").string(),
                                        "inference.backbone_cfg.table_path=" +
                                            (t::source_dir() / "data/toy_mc/answers.json").string()};
  auto with = [&](const std::string& backbone) {
    auto ov = common;
    ov.push_back("inference.backbone=" + backbone);
    return load_config_as<EvalConfig>(cfg_file, ov);
  };
  const EvalConfig a = with("scripted-mock");
  const EvalConfig b = with("echo-mock");
  const auto diffs = diff_configs(a, b);
  o.check(diffs.size() == 1 && diffs.front().key == "inference.backbone",
          fmt::format("expected one difference at inference.backbone, got {}", diffs.size()));
  const Registries reg = make_default_registries();
  EvalOptions opts;
  opts.run_id = "a";
  const auto ra = run_benchmark(a, reg.backbones, reg.benchmarks, opts);
  opts.run_id = "b";
  const auto rb = run_benchmark(b, reg.backbones, reg.benchmarks, opts);
  o.check(ra.manifest.adapter.name == "scripted-mock", "run a loaded " + ra.manifest.adapter.name);
  o.check(rb.manifest.adapter.name == "echo-mock", "run b loaded " + rb.manifest.adapter.name);
  o.check(ra.report.adapter != rb.report.adapter, "reports name the same adapter");
  json ta = ra.manifest.resolved_config;
  json tb = rb.manifest.resolved_config;
  tb["inference"]["backbone"] = ta["inference"]["backbone"];
  o.check(ta == tb, "recorded configs differ beyond the backbone");
  fs::remove_all(out);
  return o;
}

TrainConfig toy_train_config(const fs::path& out) {
  TrainConfig cfg = load_config_as<TrainConfig>(t::source_dir() / "configs" / "train_sft.yaml",
                                                {"train.output_dir=" + out.string()});
  return cfg;
}

double toy_accuracy(const EvalConfig& cfg, const Registries& reg, const std::string& run_id) {
  EvalOptions opts;
  opts.run_id = run_id;
  return run_benchmark(cfg, reg.backbones, reg.benchmarks, opts).report.overall.value;
}

// 9. Toy SFT: loss falls, checkpoints every 10 steps, bitwise resume, handoff.
Outcome toy_sft() {
  Outcome o;
  const auto t0 = Clock::now();
  const fs::path out = t::scratch("accept9");
  const Registries reg = make_default_registries();
  TrainConfig cfg = toy_train_config(out);
  o.check(cfg.dataset_path == "synthetic:100" && cfg.optimizer.steps == 50, "unexpected toy config");

  TrainOptions full_opts;
  full_opts.run_id = "full";
  const TrainOutcome full = train(cfg, reg.backbones, reg.trainers, full_opts);
  o.check(full.final_loss < full.initial_loss,
          fmt::format("final loss {} not below initial {}", full.final_loss, full.initial_loss));
  std::vector<int> steps;
  for (const auto& c : full.checkpoints) steps.push_back(c.step);
  o.check(steps == std::vector<int>{10, 20, 30, 40, 50}, "checkpoints are not at steps 10..50");

  TrainConfig resumed_cfg = cfg;
  resumed_cfg.resume_from = (out / "full" / "ckpt" / "step_30").string();
  TrainOptions resumed_opts;
  resumed_opts.run_id = "resumed";
  const TrainOutcome resumed = train(resumed_cfg, reg.backbones, reg.trainers, resumed_opts);
  o.check(resumed.start_step == 30, fmt::format("resumed at step {}", resumed.start_step));
  o.check(resumed.parameter_digest == full.parameter_digest, "resumed parameters differ from uninterrupted run");
  // Checkpoint headers carry the run's config fingerprint, which names
  // resume_from; the tensor payload after the header must match exactly.
  auto payload = [](const Checkpoint& c) {
    const std::string blob = read_file(checkpoint_file(c.path));
    return blob.substr(blob.find('\n') + 1);
  };
  o.check(payload(resumed.checkpoints.back()) == payload(full.checkpoints.back()), "step-50 tensors differ");
  bool same_losses = resumed.loss_curve.size() == 20;
  for (std::size_t i = 0; same_losses && i < resumed.loss_curve.size(); ++i) {
    same_losses = resumed.loss_curve[i] == full.loss_curve[30 + i];
  }
  o.check(same_losses, "losses for steps 31..50 differ");

  // Score on the training questions before and after.
  const fs::path data = out / "train_questions.jsonl";
  std::string lines;
  for (const auto& r : load_train_records(cfg.dataset_path)) lines += json(r).dump() + "\n";
  write_file(data, lines);
  EvalConfig ev;
  ev.benchmark = "toy-mc";
  ev.dataset_path = data.string();
  ev.output_dir = (out / "eval").string();
  ev.inference = cfg.inference;
  ev.inference.gen_params = {{"max_new_tokens", 4}};
  const double baseline = toy_accuracy(ev, reg, "untrained");
  const double trained = toy_accuracy(handoff_to_eval(full.checkpoints.back(), ev), reg, "trained");
  o.check(trained >= baseline, fmt::format("trained accuracy {} below untrained {}", trained, baseline));
  o.notes.push_back(fmt::format("loss {:.3f} -> {:.3f}, accuracy {:.3f} -> {:.3f}", full.initial_loss,
                                full.final_loss, baseline, trained));

  const double secs = seconds_since(t0);
  o.check(secs < 30.0, fmt::format("took {:.1f}s", secs));
  fs::remove_all(out);
  return o;
}

// 10. Identical variants give cosine 1; 200 samples give 600 cosines.
Outcome consistency_probe() {
  Outcome o;
  const Registries reg = make_default_registries();
  const ParamMap toy_cfg{{"hidden_dim", 16}, {"vocab", 48}, {"seed", 1}, {"layers", 12}, {"init_scale", 0.1}};
  auto adapter = reg.backbones.instantiate("toy-trainable");
  adapter->load(toy_cfg);

  const auto recs = synthetic_mc_records(200, 10);
  VariantSet same{recs[0].sample_id, {recs[0].prompt, recs[0].prompt, recs[0].prompt}, recs[0].images};
  std::array<std::string, 3> responses;
  for (std::size_t v = 0; v < 3; ++v) {
    InferenceRequest req;
    req.prompt = same.variants[v];
    req.images = same.images;
    req.sample_id = same.sample_id;
    const ParamMap gen{{"temperature", 0.0}, {"max_new_tokens", 8}};
    responses[v] = adapter->generate(std::span(&req, 1), gen).front().text.value_or("");
  }
  JudgeConfig emb_cfg;
  emb_cfg.endpoint = "mock:hash-embed";
  emb_cfg.template_id = "embed/v1";
  JudgeClient embedder(emb_cfg);
  const auto cos = response_consistency(responses, embedder);
  for (const auto& c : cos) o.check(c && std::abs(*c - 1.0) <= 1e-12, "response cosine for identical variants != 1");
  const auto layers = layer_consistency(*adapter, same, responses, 5, false);
  o.check(!layers.empty(), "no layer values");
  for (const auto& l : layers) {
    o.check(std::abs(l.value - 1.0) <= 1e-12, fmt::format("layer {} consistency {}", l.layer_index, l.value));
  }

  const fs::path out = t::scratch("accept10");
  AnalysisConfig acfg;
  acfg.dataset_path = "synthetic";
  acfg.output_dir = out.string();
  acfg.stride = 5;
  acfg.rephraser = JudgeConfig{"mock:rephrase", "", "rephrase/v1", 2, 10.0, ""};
  acfg.embedder = emb_cfg;
  acfg.inference.backbone = "toy-trainable";
  acfg.inference.backbone_cfg = toy_cfg;
  acfg.inference.gen_params = {{"max_new_tokens", 8}};
  AnalysisOptions opts;
  opts.run_id = "probe";
  opts.workers = 4;
  const auto res = analyze(acfg, recs, reg.backbones, opts);
  o.check(res.cosines.size() == 600, fmt::format("{} pairwise cosines, expected 600", res.cosines.size()));
  const std::size_t expected_len = sampled_layers(12, 5, false).size();
  o.check(res.curve.size() == expected_len,
          fmt::format("layer curve has {} points, expected {}", res.curve.size(), expected_len));
  for (const char* f : {"traces.jsonl", "histogram.json", "layer_curve.json", "response_cosines.svg",
                        "layer_consistency.svg"}) {
    o.check(fs::exists(res.run_dir / f), std::string("missing ") + f);
  }
  fs::remove_all(out);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"geneval aggregation fixture", geneval_fixture},
      {"gedit aggregation fixture", gedit_fixture},
      {"mathvista weighted rollup", mathvista_fixture},
      {"hull property", hull_property},
      {"viescore identity", viescore_identity},
      {"mme bounds and formula", mme_bounds},
      {"end-to-end determinism", eval_determinism},
      {"config isolation", config_isolation},
      {"toy sft", toy_sft},
      {"consistency probe", consistency_probe},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out.fail(std::string("exception: ") + e.what());
    }
    std::printf("%s %2d %s\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first);
    for (const auto& n : out.notes) std::printf("        %s\n", n.c_str());
    std::fflush(stdout);
    failed += out.pass ? 0 : 1;
  }
  return failed;
}
