#include "umm/benchmarks.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include <sys/wait.h>

#include <fmt/format.h>

#include "umm/error.hpp"

namespace umm {

// ---- registry ----

void BenchmarkRegistry::register_benchmark(BenchmarkDescriptor desc, BenchmarkScorer scorer) {
  if (desc.name.empty()) throw Error(ErrorCode::ConfigError, "benchmark name is empty");
  if (!scorer) throw Error(ErrorCode::ConfigError, "benchmark '" + desc.name + "' has no scorer");
  if (entries_.count(desc.name)) throw Error(ErrorCode::DuplicateAdapter, "benchmark '" + desc.name + "' already registered");
  const std::string name = desc.name;
  entries_.emplace(name, std::make_pair(std::move(desc), std::move(scorer)));
}

const BenchmarkDescriptor& BenchmarkRegistry::resolve(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw Error(ErrorCode::UnknownBenchmark,
                "'" + name + "' (registered: " + fmt::format("{}", fmt::join(names(), ", ")) + ")");
  }
  return it->second.first;
}

const BenchmarkScorer& BenchmarkRegistry::scorer(const std::string& name) const {
  resolve(name);
  return entries_.at(name).second;
}

bool BenchmarkRegistry::contains(const std::string& name) const { return entries_.count(name) != 0; }

std::vector<std::string> BenchmarkRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, e] : entries_) out.push_back(name);
  return out;
}

// ---- datasets ----

SampleRecord parse_dataset_line(const json& line, const fs::path& base_dir) {
  if (!line.is_object()) throw Error(ErrorCode::ParseError, "dataset line is not an object");
  auto pick = [&](std::initializer_list<const char*> keys) -> std::string {
    for (const char* k : keys) {
      if (line.contains(k) && !line.at(k).is_null()) {
        const json& v = line.at(k);
        return v.is_string() ? v.get<std::string>() : v.dump();
      }
    }
    return "";
  };
  SampleRecord r;
  r.sample_id = pick({"sample_id", "id"});
  if (r.sample_id.empty()) throw Error(ErrorCode::ParseError, "dataset line without sample_id: " + line.dump());
  r.prompt = pick({"prompt", "question"});
  r.ground_truth = pick({"ground_truth", "answer"});
  r.category = pick({"category"});
  r.meta = line.value("meta", json::object());
  static const std::set<std::string> kCore = {"sample_id", "id",     "prompt",   "question", "ground_truth",
                                              "answer",    "images", "category", "meta"};
  for (const auto& [k, v] : line.items()) {
    if (!kCore.count(k)) r.meta[k] = v;
  }
  if (line.contains("images")) {
    for (const auto& img : line.at("images")) {
      if (img.is_string()) {
        const fs::path p = base_dir / img.get<std::string>();
        if (!fs::exists(p)) throw Error(ErrorCode::IoError, "image not found: " + p.string());
        r.images.push_back(Image{guess_mime(p.string()), read_file(p), std::nullopt});
      } else if (img.contains("path")) {
        const fs::path p = base_dir / img.at("path").get<std::string>();
        if (!fs::exists(p)) throw Error(ErrorCode::IoError, "image not found: " + p.string());
        r.images.push_back(Image{img.value("mime", guess_mime(p.string())), read_file(p), std::nullopt});
      } else {
        r.images.push_back(img.get<Image>());
      }
    }
  }
  return r;
}

std::vector<SampleRecord> load_dataset(const fs::path& path) {
  fs::path file = path;
  if (fs::is_directory(path)) file = path / "samples.jsonl";
  if (!fs::exists(file)) throw Error(ErrorCode::IoError, "dataset not found: " + file.string());
  std::vector<SampleRecord> out;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(file)) {
    ++lineno;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::ParseError, fmt::format("{}:{}: invalid JSON", file.string(), lineno));
    out.push_back(parse_dataset_line(j, file.parent_path()));
  }
  if (out.empty()) throw Error(ErrorCode::EmptyInput, "dataset is empty: " + file.string());
  return out;
}

// ---- aggregation helpers ----

std::map<std::string, double> resolve_weights(const BenchmarkDescriptor& desc,
                                              std::span<const CategoryAggregate> categories, const json& params) {
  if (params.contains("weights")) {
    const json& w = params.at("weights");
    if (w.is_string() && w.get<std::string>() == "counts") return count_weights(categories);
    if (!w.is_object()) throw Error(ErrorCode::ConfigError, "eval.params.weights must be a map or \"counts\"");
    return w.get<std::map<std::string, double>>();
  }
  if (desc.default_weights.empty()) return count_weights(categories);
  std::map<std::string, double> w;
  double total = 0.0;
  for (const auto& c : categories) {
    auto it = desc.default_weights.find(c.category);
    if (it == desc.default_weights.end()) {
      throw Error(ErrorCode::WeightMismatch, "no default weight for category '" + c.category + "'");
    }
    w[c.category] = it->second;
    total += it->second;
  }
  if (!(total > 0)) throw Error(ErrorCode::WeightMismatch, "default weights vanish on the present categories");
  for (auto& [k, v] : w) v /= total;
  return w;
}

void finish_report(ScoreReport& report, const BenchmarkDescriptor& desc, const json& params) {
  if (report.categories.empty()) throw Error(ErrorCode::EmptyInput, desc.name + ": no scored categories");
  for (const auto& c : report.categories) {
    if (c.n < 1) throw Error(ErrorCode::InvalidRequest, "category '" + c.category + "' has no samples");
    if (!desc.scale.contains(c.value)) {
      throw Error(ErrorCode::InvalidRequest, fmt::format("category '{}' value {} outside [{}, {}]", c.category,
                                                         c.value, desc.scale.lo, desc.scale.hi));
    }
  }
  report.benchmark = desc.name;
  report.aggregation = desc.aggregation;
  report.decimals = desc.decimals;
  report.lower_is_better = desc.lower_is_better;
  report.weights.clear();
  if (desc.aggregation == Aggregation::weighted) report.weights = resolve_weights(desc, report.categories, params);
  Scale scale = desc.scale;
  if (desc.aggregation == Aggregation::sum) scale.hi *= static_cast<double>(report.categories.size());
  report.overall = make_score(desc.metric, aggregate(desc.aggregation, report.categories, report.weights), scale);
}

namespace {

std::string category_of(const SampleRecord& r) { return r.category.empty() ? "default" : r.category; }

double external_value(const json& e) {
  if (e.contains("correct")) {
    const json& c = e.at("correct");
    if (c.is_boolean()) return c.get<bool>() ? 1.0 : 0.0;
    if (c.is_number()) return c.get<double>();
  }
  if (e.contains("score") && e.at("score").is_number()) return e.at("score").get<double>();
  throw Error(ErrorCode::ParseFailure, "scorer record has neither 'correct' nor 'score': " + e.dump());
}

std::map<std::string, double> external_values(const BenchmarkInput& in) {
  std::map<std::string, double> out;
  for (const auto& [id, e] : *in.external) out[id] = external_value(e);
  return out;
}

}  // namespace

ScoreReport report_from_values(const BenchmarkDescriptor& desc, std::span<const SampleRecord> records,
                               const std::map<std::string, double>& values, double factor, const json& params) {
  ScoreReport report;
  std::vector<std::pair<std::string, double>> cat_values;
  std::vector<const SampleRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->sample_id < b->sample_id; });
  const Scale per_sample{desc.scale.lo / factor, desc.scale.hi / factor};
  for (const auto* rec : sorted) {
    auto it = values.find(rec->sample_id);
    if (it == values.end()) {
      report.failures.push_back(RunFailure{rec->sample_id, "no score from scorer"});
      continue;
    }
    cat_values.emplace_back(category_of(*rec), it->second);
    report.per_sample.push_back(
        SampleScores{rec->sample_id, category_of(*rec), {make_score("score", it->second, per_sample)}});
  }
  report.categories = category_means(cat_values, factor);
  finish_report(report, desc, params);
  return report;
}

// ---- built-in scorers ----

namespace {

ScoreReport multiple_choice_scorer(const BenchmarkInput& in, double factor) {
  if (in.external) return report_from_values(in.desc, in.records, external_values(in), factor, in.params);
  McOutcome mc = score_multiple_choice(in.records, in.results);
  ScoreReport report;
  report.per_sample = std::move(mc.per_sample);
  report.categories = std::move(mc.categories);
  for (auto& c : report.categories) c.value *= factor;
  finish_report(report, in.desc, in.params);
  return report;
}

ScoreReport mathvista_scorer(const BenchmarkInput& in) {
  // Split by question type when the dataset does not say.
  std::vector<SampleRecord> records(in.records.begin(), in.records.end());
  for (auto& r : records) {
    if (r.category.empty()) r.category = options_from_meta(r.meta).size() >= 2 ? "multi_choice" : "free_form";
  }
  BenchmarkInput typed{in.desc, records, in.results, in.judge, in.external, in.params};
  return multiple_choice_scorer(typed, 100.0);
}

ScoreReport external_scorer_only(const BenchmarkInput& in, double factor) {
  if (!in.external) {
    throw Error(ErrorCode::ConfigError, in.desc.name + " needs per-sample scores from eval.external_scorer");
  }
  return report_from_values(in.desc, in.records, external_values(in), factor, in.params);
}

ScoreReport wise_scorer(const BenchmarkInput& in) {
  if (!in.external) throw Error(ErrorCode::ConfigError, "wise needs WiScores from eval.external_scorer");
  ScoreReport report = score_wise(in.records, external_values(in), std::nullopt);
  finish_report(report, in.desc, in.params);
  return report;
}

ScoreReport edit_scorer(const BenchmarkInput& in) {
  const std::string subset_key = in.params.value("subset_key", std::string("intersection"));
  ScoreReport report;
  if (in.external) {
    // Verdicts produced by an official script: {"sample_id", "sc", "pq"} per line.
    std::vector<std::pair<std::string, EditScore>> full, subset;
    const Scale ten{0, 10};
    for (const auto& rec : in.records) {
      auto it = in.external->find(rec.sample_id);
      if (it == in.external->end()) {
        report.failures.push_back(RunFailure{rec.sample_id, "no verdict from scorer"});
        continue;
      }
      const EditScore e = make_edit_score(it->second.at("sc").get<double>(), it->second.at("pq").get<double>());
      full.emplace_back(category_of(rec), e);
      if (rec.meta.value(subset_key, false)) subset.emplace_back(category_of(rec), e);
      report.per_sample.push_back(SampleScores{
          rec.sample_id,
          category_of(rec),
          {make_score("SC", e.sc, ten), make_score("PQ", e.pq, ten), make_score("O", e.o, ten)}});
    }
    std::sort(report.per_sample.begin(), report.per_sample.end(),
              [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; });
    const EditTable t = edit_table(full);
    report.categories = t.o;
    report.breakdowns = {{"SC", t.sc}, {"PQ", t.pq}, {"O", t.o}};
    report.summary = {{"SC", t.avg_sc}, {"PQ", t.avg_pq}, {"O", t.avg_o}};
    if (!subset.empty()) {
      const EditTable s = edit_table(subset);
      report.breakdowns[subset_key + "/SC"] = s.sc;
      report.breakdowns[subset_key + "/PQ"] = s.pq;
      report.breakdowns[subset_key + "/O"] = s.o;
      report.summary[subset_key + "/SC"] = s.avg_sc;
      report.summary[subset_key + "/PQ"] = s.avg_pq;
      report.summary[subset_key + "/O"] = s.avg_o;
    }
  } else {
    if (!in.judge) throw Error(ErrorCode::ConfigError, in.desc.name + " needs eval.judge");
    report = score_edit_benchmark(in.records, in.results, *in.judge, EditOptions{in.desc.categories, subset_key});
  }
  finish_report(report, in.desc, in.params);
  return report;
}

ScoreReport mme_scorer(const BenchmarkInput& in) {
  const MmeComposition comp = in.params.contains("mme_composition")
                                  ? MmeComposition::from_json(in.params.at("mme_composition"))
                                  : MmeComposition::standard();
  const MmeScore s = score_mme(in.records, in.results, comp);
  ScoreReport report;
  report.categories = s.per_subtask;
  std::set<std::string> perception(comp.perception.begin(), comp.perception.end());
  for (const auto& c : s.per_subtask) {
    report.breakdowns[perception.count(c.category) ? "perception" : "cognition"].push_back(c);
  }
  report.summary = {{"perception", s.perception}, {"cognition", s.cognition}};
  // per-sample correctness
  std::map<std::string, const InferenceResult*> by_id;
  for (const auto& r : in.results) by_id[r.sample_id] = &r;
  for (const auto& rec : in.records) {
    const auto truth = parse_yes_no(rec.ground_truth);
    const auto answer = parse_yes_no(by_id.at(rec.sample_id)->text.value_or(""));
    const bool ok = truth && answer && *truth == *answer;
    report.per_sample.push_back(
        SampleScores{rec.sample_id, rec.category, {make_score("correct", ok ? 1.0 : 0.0, Scale{0, 1})}});
  }
  std::sort(report.per_sample.begin(), report.per_sample.end(),
            [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; });
  finish_report(report, in.desc, in.params);
  return report;
}

}  // namespace

void register_builtin_benchmarks(BenchmarkRegistry& registry) {
  using A = Aggregation;
  auto mc = [](double factor) { return [factor](const BenchmarkInput& in) { return multiple_choice_scorer(in, factor); }; };

  registry.register_benchmark({"toy-mc", TaskKind::understanding, "accuracy", Scale{0, 1}, 3, A::count_weighted, {}, {},
                               false, false, false, "toy multiple-choice set, accuracy"},
                              mc(1.0));
  registry.register_benchmark({"mmmu", TaskKind::understanding, "accuracy", Scale{0, 1}, 3, A::count_weighted, {},
                               {"Art & Design", "Business", "Science", "Health & Medicine", "Humanities & Social Sci",
                                "Tech & Engineering"},
                               false, false, false, "MMMU discipline accuracy"},
                              mc(1.0));
  registry.register_benchmark({"mmbench", TaskKind::understanding, "accuracy", Scale{0, 1}, 3, A::count_weighted, {},
                               {}, false, false, false, "MMBench multiple-choice accuracy"},
                              mc(1.0));
  registry.register_benchmark({"mathvista", TaskKind::understanding, "accuracy", Scale{0, 100}, 2, A::weighted,
                               {{"multi_choice", 0.54}, {"free_form", 0.46}}, {"multi_choice", "free_form"}, false,
                               false, false, "MathVista accuracy (%), multi-choice/free-form rollup"},
                              mathvista_scorer);
  registry.register_benchmark({"mme", TaskKind::understanding, "P+C", Scale{0, 200}, 2, A::sum, {}, {}, false, false,
                               false, "MME perception and cognition subtask scores"},
                              mme_scorer);
  registry.register_benchmark({"geneval", TaskKind::generation, "overall", Scale{0, 100}, 2, A::mean, {},
                               {"single_object", "two_object", "counting", "colors", "position", "color_attr"}, false,
                               true, false, "GenEval category accuracy (%) from the official detector script"},
                              [](const BenchmarkInput& in) { return external_scorer_only(in, 100.0); });
  registry.register_benchmark({"wise", TaskKind::generation, "WiScore", Scale{0, 1}, 4, A::weighted, {},
                               {"culture", "time", "space", "biology", "physics", "chemistry"}, false, true, false,
                               "WISE WiScore from an external judge script"},
                              wise_scorer);
  registry.register_benchmark(
      {"gedit", TaskKind::editing, "O", Scale{0, 10}, 3, A::mean, {},
       {"bg_change", "color", "material", "motion", "ps_human", "style", "subj-add", "subj-rm", "subj-repl", "text",
        "tone"},
       true, false, false, "GEdit VIEScore SC/PQ/O"},
      edit_scorer);
  registry.register_benchmark(
      {"imgedit", TaskKind::editing, "O", Scale{0, 10}, 3, A::mean, {},
       {"add", "adjust", "extract", "replace", "remove", "background", "style", "hybrid", "action", "content_memory",
        "content_understanding", "version_backtracking"},
       true, false, false, "ImgEdit single- and multi-turn VIEScore"},
      edit_scorer);
}

// ---- evaluation runs ----

std::string expand_scorer_command(const std::string& tmpl, const std::map<std::string, std::string>& vars) {
  std::string out = tmpl;
  for (const auto& [k, v] : vars) {
    const std::string needle = "{" + k + "}";
    for (std::size_t pos = out.find(needle); pos != std::string::npos; pos = out.find(needle, pos + v.size())) {
      out.replace(pos, needle.size(), v);
    }
  }
  return out;
}

namespace {

void check_declared(const BenchmarkDescriptor& desc, std::span<const SampleRecord> records) {
  if (desc.categories.empty()) return;
  const std::set<std::string> declared(desc.categories.begin(), desc.categories.end());
  for (const auto& r : records) {
    if (!r.category.empty() && !declared.count(r.category)) {
      throw Error(ErrorCode::InvalidRequest,
                  fmt::format("sample '{}': category '{}' is not declared by {}", r.sample_id, r.category, desc.name));
    }
  }
}

void export_stage1(const fs::path& run_dir, std::span<const SampleRecord> records,
                   std::span<const InferenceResult> results) {
  std::map<std::string, const InferenceResult*> by_id;
  for (const auto& r : results) by_id[r.sample_id] = &r;
  std::string body;
  for (const auto& rec : records) {
    json line{{"sample_id", rec.sample_id},
              {"category", rec.category},
              {"prompt", rec.prompt},
              {"ground_truth", rec.ground_truth},
              {"response", nullptr},
              {"images", json::array()}};
    if (auto it = by_id.find(rec.sample_id); it != by_id.end()) {
      if (it->second->text) line["response"] = *it->second->text;
      for (const auto& img : it->second->images) line["images"].push_back(img.uri.value_or(""));
    }
    body += line.dump() + "\n";
  }
  write_file_atomic(run_dir / "stage1" / "predictions.jsonl", body);
}

struct ExternalOutput {
  std::map<std::string, json> per_sample;
  std::optional<json> summary;
};

ExternalOutput run_external(const ExternalScorerConfig& sc, const fs::path& run_dir, const EvalConfig& cfg) {
  const fs::path abs_run = fs::absolute(run_dir);
  const fs::path out_file = abs_run / expand_scorer_command(sc.output_file, {{"run_dir", abs_run.string()}});
  std::error_code ec;
  fs::remove(out_file, ec);
  fs::create_directories(out_file.parent_path());
  const std::string cmd = expand_scorer_command(sc.command, {{"run_dir", abs_run.string()},
                                                             {"results", (abs_run / "stage1/predictions.jsonl").string()},
                                                             {"images_dir", (abs_run / "images").string()},
                                                             {"output_file", out_file.string()},
                                                             {"dataset", cfg.dataset_path}});
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw Error(ErrorCode::ExternalScorerFailed, fmt::format("`{}` exited with status {}", cmd,
                                                             WIFEXITED(status) ? WEXITSTATUS(status) : status));
  }
  if (!fs::exists(out_file)) {
    throw Error(ErrorCode::ExternalScorerFailed, "scorer did not write " + out_file.string());
  }
  ExternalOutput out;
  if (sc.parse_rule == "per_sample_jsonl") {
    for (const auto& line : read_lines(out_file)) {
      if (trim(line).empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("sample_id")) {
        throw Error(ErrorCode::ExternalScorerFailed, "bad scorer line: " + line);
      }
      out.per_sample[j.at("sample_id").get<std::string>()] = j;
    }
  } else {
    json j = json::parse(read_file(out_file), nullptr, false);
    if (j.is_discarded() || !j.contains("categories")) {
      throw Error(ErrorCode::ExternalScorerFailed, "summary file lacks 'categories'");
    }
    out.summary = j;
  }
  return out;
}

ScoreReport report_from_summary(const BenchmarkDescriptor& desc, std::span<const SampleRecord> records,
                                const json& summary, const json& params) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : records) ++counts[category_of(r)];
  ScoreReport report;
  const json& cats = summary.at("categories");
  if (cats.is_object()) {
    for (const auto& [name, v] : cats.items()) {
      report.categories.push_back(CategoryAggregate{name, counts.count(name) ? counts[name] : 1, v.get<double>()});
    }
  } else {
    report.categories = cats.get<std::vector<CategoryAggregate>>();
  }
  finish_report(report, desc, params);
  if (summary.contains("overall") && summary.at("overall").is_number()) {
    report.summary["scorer_overall"] = summary.at("overall").get<double>();
  }
  return report;
}

std::set<ReportFormat> formats_from(const json& params) {
  if (!params.contains("formats")) return all_report_formats();
  std::set<ReportFormat> out;
  for (const auto& f : params.at("formats")) out.insert(parse_report_format(f.get<std::string>()));
  return out;
}

}  // namespace

EvalOutcome score_run(const fs::path& run_dir, const EvalConfig& cfg, const BenchmarkRegistry& benchmarks,
                      const EvalOptions& options) {
  const BenchmarkDescriptor& desc = benchmarks.resolve(cfg.benchmark);
  EvalOutcome out;
  out.run_dir = run_dir;
  out.manifest = load_manifest(run_dir);
  const auto records = load_run_samples(run_dir);
  auto results = load_results(run_dir);
  {
    std::set<std::string> have;
    for (const auto& r : results) have.insert(r.sample_id);
    for (const auto& rec : records) {
      if (!have.count(rec.sample_id)) {
        InferenceResult empty;
        empty.sample_id = rec.sample_id;
        empty.adapter_name = cfg.inference.backbone;
        results.push_back(std::move(empty));
      }
    }
  }

  std::optional<ExternalOutput> external;
  if (cfg.mode == EvalMode::two_stage || desc.external_scores) export_stage1(run_dir, records, results);
  if (cfg.external_scorer) external = run_external(*cfg.external_scorer, run_dir, cfg);

  std::unique_ptr<JudgeClient> judge;
  if (cfg.judge && !external) judge = std::make_unique<JudgeClient>(*cfg.judge, options.judge_transport);

  ScoreReport report;
  if (external && external->summary) {
    report = report_from_summary(desc, records, *external->summary, cfg.params);
  } else {
    BenchmarkInput in{desc, records, results, judge.get(), external ? &external->per_sample : nullptr, cfg.params};
    report = benchmarks.scorer(cfg.benchmark)(in);
  }
  report.benchmark = desc.name;
  report.adapter = cfg.inference.backbone;
  report.resolved_config = to_tree(AnyConfig(cfg));
  report.config_fingerprint = config_fingerprint(AnyConfig(cfg));
  for (const auto& f : out.manifest.failures) report.failures.push_back(f);
  std::sort(report.failures.begin(), report.failures.end(), [](const RunFailure& a, const RunFailure& b) {
    return std::tie(a.sample_id, a.error) < std::tie(b.sample_id, b.error);
  });
  report.failures.erase(std::unique(report.failures.begin(), report.failures.end()), report.failures.end());

  out.report_dir = run_dir / "report";
  render_report(report, out.report_dir, formats_from(cfg.params));
  out.report = std::move(report);
  return out;
}

EvalOutcome run_benchmark(const EvalConfig& cfg, const BackboneRegistry& backbones,
                          const BenchmarkRegistry& benchmarks, const EvalOptions& options) {
  const BenchmarkDescriptor& desc = benchmarks.resolve(cfg.benchmark);
  if (desc.external_scores && !cfg.external_scorer) {
    throw Error(ErrorCode::ConfigError, cfg.benchmark + " is scored by an official script; set eval.external_scorer");
  }
  if (desc.needs_judge && !cfg.judge && !cfg.external_scorer) {
    throw Error(ErrorCode::ConfigError, cfg.benchmark + " needs eval.judge or eval.external_scorer");
  }
  const auto records = load_dataset(cfg.dataset_path);
  check_declared(desc, records);

  PipelineOptions popts;
  popts.output_dir = cfg.output_dir;
  popts.workers = options.workers;
  popts.failure_threshold = cfg.failure_threshold;
  popts.run_id = options.run_id;
  popts.limit = options.limit;
  popts.embed_config = to_tree(AnyConfig(cfg));
  const RunManifest manifest = run_inference(cfg.inference, records, desc.task, backbones, popts);
  const fs::path run_dir = fs::path(cfg.output_dir) / manifest.run_id;
  if (manifest.aborted) {
    throw Error(ErrorCode::PipelineAborted, fmt::format("{} of {} samples failed; run left at {}",
                                                        manifest.failures.size(), manifest.planned_count,
                                                        run_dir.string()));
  }
  if (!manifest.complete) {
    throw Error(ErrorCode::PipelineAborted, "run incomplete; resume with --resume " + run_dir.string());
  }
  return score_run(run_dir, cfg, benchmarks, options);
}

EvalOutcome resume_benchmark(const fs::path& run_dir, const EvalConfig& cfg, const BackboneRegistry& backbones,
                             const BenchmarkRegistry& benchmarks, const EvalOptions& options) {
  benchmarks.resolve(cfg.benchmark);
  PipelineOptions popts;
  popts.workers = options.workers;
  popts.failure_threshold = cfg.failure_threshold;
  popts.limit = options.limit;
  const RunManifest manifest = resume_run(run_dir, cfg.inference, backbones, popts);
  if (manifest.aborted || !manifest.complete) {
    throw Error(ErrorCode::PipelineAborted, fmt::format("{} of {} samples still failing in {}",
                                                        manifest.failures.size(), manifest.planned_count,
                                                        run_dir.string()));
  }
  return score_run(run_dir, cfg, benchmarks, options);
}

}  // namespace umm
