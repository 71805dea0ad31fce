// umm: infer / eval / train / analyze / report over config files.

#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "umm/benchmarks.hpp"
#include "umm/config.hpp"
#include "umm/consistency.hpp"
#include "umm/error.hpp"
#include "umm/pipeline.hpp"
#include "umm/registries.hpp"
#include "umm/reporting.hpp"
#include "umm/training.hpp"

namespace {

using namespace umm;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitPartial = 3;

template <typename... Args>
void log(fmt::format_string<Args...> f, Args&&... args) {
  fmt::print(stderr, "umm: {}\n", fmt::format(f, std::forward<Args>(args)...));
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::UnknownKey:
    case ErrorCode::TypeMismatch:
    case ErrorCode::KindMismatch:
    case ErrorCode::ParseError:
    case ErrorCode::NotRegistered:
    case ErrorCode::UnknownBenchmark:
    case ErrorCode::MethodNotRegistered:
    case ErrorCode::CapabilityError:
    case ErrorCode::ManifestMismatch:
      return kExitConfig;
    case ErrorCode::PipelineAborted:
      return kExitPartial;
    default:
      return kExitRuntime;
  }
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

std::string registry_listing(const Registries& r) {
  return "\nRegistered backbones: " + join(r.backbones.names()) +
         "\nRegistered benchmarks: " + join(r.benchmarks.names()) +
         "\nRegistered trainers: " + join(r.trainers.names()) + "\n";
}

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  int workers = 1;
  std::string run_id;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "YAML config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--set", c.overrides, "Override a config key: dotted.key=value (repeatable)");
  cmd->add_option("-w,--workers", c.workers, "Parallel workers")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--run-id", c.run_id, "Pin the run id");
}

std::optional<std::string> opt(const std::string& s) {
  return s.empty() ? std::nullopt : std::optional<std::string>(s);
}

int summarize_manifest(const RunManifest& m, const fs::path& dir) {
  log("run {}: {}/{} samples ok, {} failed", m.run_id, m.success_count, m.planned_count, m.failures.size());
  for (const auto& f : m.failures) log("  {}: {}", f.sample_id, f.error);
  std::printf("%s\n", dir.string().c_str());
  if (m.aborted) {
    log("run aborted: failures exceeded the threshold");
    return kExitPartial;
  }
  return m.failures.empty() ? kExitOk : kExitPartial;
}

fs::path report_json_for(const fs::path& p) {
  if (fs::is_regular_file(p)) return p;
  for (const fs::path& cand : {p / "report.json", p / "report" / "report.json"}) {
    if (fs::is_regular_file(cand)) return cand;
  }
  throw Error(ErrorCode::IoError, "no report.json under '" + p.string() + "'");
}

}  // namespace

int main(int argc, char** argv) {
  Registries reg;
  try {
    reg = make_default_registries();
    for (const auto& p : load_plugins_from_env(reg)) log("loaded plugin {}", p.string());
  } catch (const std::exception& e) {
    log("{}", e.what());
    return kExitConfig;
  }

  CLI::App app{"Evaluation and post-training harness for unified multimodal models", "umm"};
  app.footer(registry_listing(reg));
  app.require_subcommand(1);

  Common infer_c, eval_c, train_c, analyze_c;

  auto* infer = app.add_subcommand("infer", "Run inference over a dataset");
  add_common(infer, infer_c);
  std::string infer_dataset, infer_task = "understanding", infer_output = "runs", infer_resume;
  double infer_threshold = 0.2;
  infer->add_option("-d,--dataset", infer_dataset, "Dataset (.jsonl or directory)")->required();
  infer->add_option("-t,--task", infer_task, "understanding | generation | editing")->capture_default_str();
  infer->add_option("-o,--output", infer_output, "Runs directory")->capture_default_str();
  infer->add_option("--failure-threshold", infer_threshold, "Abort above this failure fraction")
      ->capture_default_str();
  infer->add_option("--resume", infer_resume, "Complete an interrupted run directory");

  auto* eval = app.add_subcommand("eval", "Run a benchmark and score it");
  add_common(eval, eval_c);
  std::string eval_resume, eval_score_only;
  std::size_t eval_limit = 0;
  eval->add_option("--resume", eval_resume, "Complete an interrupted run directory, then score it");
  eval->add_option("--score-only", eval_score_only, "Score an existing run directory (stage 2 only)");
  eval->add_option("--limit", eval_limit, "Dispatch at most this many samples");

  auto* train = app.add_subcommand("train", "Post-train a backbone");
  add_common(train, train_c);
  std::string train_resume;
  train->add_option("--resume", train_resume, "Continue a run directory from its latest checkpoint");

  auto* analyze = app.add_subcommand("analyze", "Query-consistency analysis");
  add_common(analyze, analyze_c);
  bool no_plots = false;
  analyze->add_flag("--no-plots", no_plots, "Skip the SVG plots");

  auto* report = app.add_subcommand("report", "Leaderboard over finished runs");
  std::vector<std::string> report_runs, report_labels;
  std::string report_metric = "overall", report_output;
  report->add_option("-r,--runs", report_runs, "Run directories or report.json files")->required();
  report->add_option("-m,--metric", report_metric, "Ranking metric")->capture_default_str();
  report->add_option("--labels", report_labels, "Row names, one per run");
  report->add_option("-o,--output", report_output, "Also write leaderboard.txt and leaderboard.csv here");

  auto* schema = app.add_subcommand("schema", "Print the config schema reference");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*infer) {
      auto cfg = load_config_as<InferenceConfig>(infer_c.config, infer_c.overrides);
      PipelineOptions po;
      po.output_dir = infer_output;
      po.workers = infer_c.workers;
      po.failure_threshold = infer_threshold;
      po.run_id = opt(infer_c.run_id);
      RunManifest m;
      if (!infer_resume.empty()) {
        m = resume_run(infer_resume, cfg, reg.backbones, po);
        return summarize_manifest(m, infer_resume);
      }
      const auto samples = load_dataset(infer_dataset);
      m = run_inference(cfg, samples, parse_task(infer_task), reg.backbones, po);
      return summarize_manifest(m, fs::path(infer_output) / m.run_id);
    }
    if (*eval) {
      auto cfg = load_config_as<EvalConfig>(eval_c.config, eval_c.overrides);
      EvalOptions eo;
      eo.workers = eval_c.workers;
      eo.run_id = opt(eval_c.run_id);
      eo.limit = eval_limit;
      EvalOutcome out;
      if (!eval_score_only.empty()) {
        out = score_run(eval_score_only, cfg, reg.benchmarks, eo);
      } else if (!eval_resume.empty()) {
        out = resume_benchmark(eval_resume, cfg, reg.backbones, reg.benchmarks, eo);
      } else {
        out = run_benchmark(cfg, reg.backbones, reg.benchmarks, eo);
      }
      const auto& r = out.report;
      log("{} on {}: overall {} = {}", r.adapter, r.benchmark, r.overall.metric_name,
          format_fixed(r.overall.value, r.decimals));
      if (!r.failures.empty()) log("{} sample(s) failed and were scored as wrong or excluded", r.failures.size());
      std::printf("%s\n", out.report_dir.string().c_str());
      return kExitOk;
    }
    if (*train) {
      auto cfg = load_config_as<TrainConfig>(train_c.config, train_c.overrides);
      TrainOptions to;
      to.run_id = opt(train_c.run_id);
      if (!train_resume.empty()) to.resume_dir = fs::path(train_resume);
      const auto out = umm::train(cfg, reg.backbones, reg.trainers, to);
      log("trained {} steps of {} from step {}: loss {:.6f} -> {:.6f}, {} checkpoint(s)",
          cfg.optimizer.steps - out.start_step, cfg.method, out.start_step, out.initial_loss, out.final_loss,
          out.checkpoints.size());
      std::printf("%s\n", out.run_dir.string().c_str());
      return kExitOk;
    }
    if (*analyze) {
      auto cfg = load_config_as<AnalysisConfig>(analyze_c.config, analyze_c.overrides);
      AnalysisOptions ao;
      ao.workers = analyze_c.workers;
      ao.run_id = opt(analyze_c.run_id);
      ao.plots = !no_plots;
      const auto samples = load_dataset(cfg.dataset_path);
      const auto out = umm::analyze(cfg, samples, reg.backbones, ao);
      log("analyzed {} sample(s): {} response cosines, {} layer point(s), {} dropped, {} failed",
          out.traces.size(), out.cosines.size(), out.curve.size(), out.dropped.size(), out.failures.size());
      std::printf("%s\n", out.run_dir.string().c_str());
      return out.failures.empty() ? kExitOk : kExitPartial;
    }
    if (*report) {
      std::vector<ScoreReport> reports;
      for (const auto& r : report_runs) reports.push_back(parse_report(report_json_for(r)));
      const auto board = assemble_leaderboard(reports, report_metric, report_labels);
      const std::string text = render_leaderboard_text(board);
      std::fputs(text.c_str(), stdout);
      if (!report_output.empty()) {
        fs::create_directories(report_output);
        write_file_atomic(fs::path(report_output) / "leaderboard.txt", text);
        write_file_atomic(fs::path(report_output) / "leaderboard.csv", render_leaderboard_csv(board));
      }
      return kExitOk;
    }
    if (*schema) {
      std::fputs(schema_reference().c_str(), stdout);
      return kExitOk;
    }
  } catch (const Error& e) {
    log("error: {}", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    log("error: {}", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
