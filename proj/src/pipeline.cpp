#include "umm/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "umm/error.hpp"

namespace umm {

void to_json(json& j, const RunManifest& m) {
  json failures = json::array();
  for (const auto& f : m.failures) failures.push_back({{"sample_id", f.sample_id}, {"error", f.error}});
  j = json{{"run_id", m.run_id},
           {"resolved_config", m.resolved_config},
           {"config_fingerprint", m.config_fingerprint},
           {"adapter", m.adapter},
           {"task", m.task},
           {"preprocessing_fingerprint", m.preprocessing_fingerprint},
           {"started", m.started},
           {"finished", m.finished},
           {"planned_count", m.planned_count},
           {"sample_count", m.sample_count},
           {"success_count", m.success_count},
           {"failures", failures},
           {"complete", m.complete},
           {"aborted", m.aborted}};
}

void from_json(const json& j, RunManifest& m) {
  j.at("run_id").get_to(m.run_id);
  m.resolved_config = j.at("resolved_config");
  j.at("config_fingerprint").get_to(m.config_fingerprint);
  j.at("adapter").get_to(m.adapter);
  j.at("task").get_to(m.task);
  j.at("preprocessing_fingerprint").get_to(m.preprocessing_fingerprint);
  j.at("started").get_to(m.started);
  j.at("finished").get_to(m.finished);
  j.at("planned_count").get_to(m.planned_count);
  j.at("sample_count").get_to(m.sample_count);
  j.at("success_count").get_to(m.success_count);
  m.failures.clear();
  for (const auto& f : j.at("failures")) {
    m.failures.push_back(RunFailure{f.at("sample_id").get<std::string>(), f.at("error").get<std::string>()});
  }
  j.at("complete").get_to(m.complete);
  j.at("aborted").get_to(m.aborted);
}

std::string safe_file_stem(std::string_view sample_id) {
  std::string out;
  for (char c : sample_id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out.empty() ? "_" : out;
}

InferenceRequest make_request(const SampleRecord& record, TaskKind task, const InferenceConfig& cfg) {
  InferenceRequest req;
  req.prompt = record.prompt;
  req.task = task;
  req.sample_id = record.sample_id;
  req.seed = cfg.seed;
  req.params = cfg.gen_params.is_object() ? cfg.gen_params : ParamMap::object();
  req.params.erase("batch_size");
  if (task != TaskKind::generation) req.images = record.images;
  return req;
}

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kSamples = "samples.jsonl";
constexpr const char* kResults = "results/results.jsonl";
constexpr const char* kPartial = "results/partial.jsonl";
constexpr const char* kTimings = "timings.jsonl";

bool is_multi_turn(const SampleRecord& r, TaskKind task) {
  return task == TaskKind::editing && r.meta.contains("turns") && r.meta.at("turns").is_array();
}

/// Serializes all result persistence through one lock.
class ResultWriter {
 public:
  explicit ResultWriter(fs::path run_dir) : run_dir_(std::move(run_dir)) {
    fs::create_directories(run_dir_ / "results");
    fs::create_directories(run_dir_ / "images");
    partial_.open(run_dir_ / kPartial, std::ios::app | std::ios::binary);
    timings_.open(run_dir_ / kTimings, std::ios::app | std::ios::binary);
    if (!partial_ || !timings_) throw Error(ErrorCode::IoError, "cannot open result files in " + run_dir_.string());
  }

  void write(InferenceResult result) {
    std::lock_guard lock(mu_);
    const std::string stem = safe_file_stem(result.sample_id);
    for (std::size_t k = 0; k < result.images.size(); ++k) {
      auto& img = result.images[k];
      const std::string rel = "images/" + stem + "_" + std::to_string(k) + extension_for_mime(img.mime);
      write_file(run_dir_ / rel, img.bytes);
      img.uri = rel;
    }
    if (result.timing) {
      timings_ << json{{"sample_id", result.sample_id}, {"timing", *result.timing}}.dump() << '\n';
      timings_.flush();
      result.timing.reset();
    }
    partial_ << to_record(result) << '\n';
    partial_.flush();
  }

 private:
  fs::path run_dir_;
  std::mutex mu_;
  std::ofstream partial_;
  std::ofstream timings_;
};

std::map<std::string, InferenceResult> read_persisted(const fs::path& run_dir) {
  std::map<std::string, InferenceResult> out;
  for (const char* name : {kResults, kPartial}) {
    const fs::path p = run_dir / name;
    if (!fs::exists(p)) continue;
    for (const auto& line : read_lines(p)) {
      if (trim(line).empty()) continue;
      // A torn final line from an interrupted writer is skipped, not fatal.
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) continue;
      auto r = j.get<InferenceResult>();
      out[r.sample_id] = std::move(r);
    }
  }
  return out;
}

void write_manifest(const fs::path& run_dir, const RunManifest& m) {
  write_file_atomic(run_dir / kManifest, json(m).dump(2) + "\n");
}

/// Runs the pending samples and returns the failures recorded this attempt.
std::vector<RunFailure> execute(const InferenceConfig& cfg, const std::vector<const SampleRecord*>& pending,
                                TaskKind task, const BackboneRegistry& registry,
                                const PipelineOptions& options, std::size_t planned,
                                std::size_t prior_failures, ResultWriter& writer, bool& aborted,
                                std::string& preprocessing) {
  const std::size_t batch_size =
      static_cast<std::size_t>(std::max<std::int64_t>(1, cfg.gen_params.value("batch_size", std::int64_t{1})));
  const std::size_t n_workers =
      std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(1, options.workers)),
                                                     (pending.size() + batch_size - 1) / batch_size));
  const double max_failures = options.failure_threshold * static_cast<double>(planned);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex fail_mu;
  std::vector<RunFailure> failures;
  std::exception_ptr fatal;

  auto record_failure = [&](const std::string& id, const std::string& what) {
    std::lock_guard lock(fail_mu);
    failures.push_back(RunFailure{id, what});
    if (static_cast<double>(prior_failures + failures.size()) > max_failures) stop = true;
  };

  auto run_single = [&](BackboneAdapter& adapter, const SampleRecord& rec) {
    const auto t0 = std::chrono::steady_clock::now();
    InferenceResult res;
    if (is_multi_turn(rec, task)) {
      // Each turn edits the previous turn's output.
      const auto& turns = rec.meta.at("turns");
      if (rec.images.empty()) throw Error(ErrorCode::InvalidRequest, "multi-turn sample without image");
      Image running = rec.images.front();
      for (std::size_t k = 0; k < turns.size(); ++k) {
        InferenceRequest req = make_request(rec, task, cfg);
        req.prompt = turns[k].get<std::string>();
        req.images = {running};
        req.params["turn"] = static_cast<int>(k);
        auto out = adapter.generate(std::span(&req, 1), cfg.gen_params);
        running = out.front().images.front();
        running.uri.reset();
        if (k == 0) res = out.front();
        else res.images.push_back(running);
      }
    } else {
      InferenceRequest req = make_request(rec, task, cfg);
      res = adapter.generate(std::span(&req, 1), cfg.gen_params).front();
    }
    res.timing = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    writer.write(std::move(res));
  };

  auto worker = [&] {
    std::unique_ptr<BackboneAdapter> adapter;
    try {
      adapter = registry.instantiate(cfg.backbone);
      adapter->load(cfg.backbone_cfg);
      std::lock_guard lock(fail_mu);
      preprocessing = adapter->preprocessing_fingerprint();
    } catch (...) {
      std::lock_guard lock(fail_mu);
      if (!fatal) fatal = std::current_exception();
      stop = true;
      return;
    }
    while (!stop) {
      const std::size_t begin = next.fetch_add(batch_size);
      if (begin >= pending.size()) break;
      const std::size_t end = std::min(pending.size(), begin + batch_size);
      bool batched_ok = false;
      const bool batchable = std::none_of(pending.begin() + static_cast<std::ptrdiff_t>(begin),
                                          pending.begin() + static_cast<std::ptrdiff_t>(end),
                                          [&](const SampleRecord* r) { return is_multi_turn(*r, task); });
      if (end - begin > 1 && batchable) {
        std::vector<InferenceRequest> reqs;
        for (std::size_t i = begin; i < end; ++i) reqs.push_back(make_request(*pending[i], task, cfg));
        try {
          const auto t0 = std::chrono::steady_clock::now();
          auto results = adapter->generate(reqs, cfg.gen_params);
          const double per = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() /
                             static_cast<double>(results.size());
          for (auto& r : results) {
            r.timing = per;
            writer.write(std::move(r));
          }
          batched_ok = true;
        } catch (const std::exception&) {
          // Fall back to singletons so one bad sample does not sink the batch.
        }
      }
      if (batched_ok) continue;
      for (std::size_t i = begin; i < end && !stop; ++i) {
        try {
          run_single(*adapter, *pending[i]);
        } catch (const std::exception& e) {
          record_failure(pending[i]->sample_id, e.what());
        }
      }
    }
  };

  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < n_workers; ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (fatal) std::rethrow_exception(fatal);
  aborted = stop && next.load() < pending.size();
  if (!aborted && stop) aborted = static_cast<double>(prior_failures + failures.size()) > max_failures;
  return failures;
}

/// Rewrites results.jsonl sorted by sample_id and refreshes the manifest counts.
void finalize(const fs::path& run_dir, RunManifest& m, const std::vector<SampleRecord>& samples) {
  auto persisted = read_persisted(run_dir);
  std::string body;
  for (const auto& [id, r] : persisted) body += to_record(r) + "\n";
  write_file_atomic(run_dir / kResults, body);
  std::error_code ec;
  fs::remove(run_dir / kPartial, ec);

  std::set<std::string> done;
  for (const auto& [id, r] : persisted) done.insert(id);
  std::erase_if(m.failures, [&](const RunFailure& f) { return done.count(f.sample_id) != 0; });
  std::sort(m.failures.begin(), m.failures.end(),
            [](const RunFailure& a, const RunFailure& b) { return a.sample_id < b.sample_id; });
  m.success_count = persisted.size();
  m.sample_count = m.success_count + m.failures.size();
  m.planned_count = samples.size();
  m.complete = !m.aborted && m.sample_count == samples.size();
  m.finished = utc_timestamp();
  write_manifest(run_dir, m);
}

}  // namespace

RunManifest run_inference(const InferenceConfig& cfg, std::span<const SampleRecord> samples,
                          TaskKind task, const BackboneRegistry& registry,
                          const PipelineOptions& options) {
  const auto& desc = registry.resolve(cfg.backbone);
  if (!desc.capabilities.supports(task)) {
    throw Error(ErrorCode::CapabilityError,
                "backbone '" + cfg.backbone + "' does not support " + std::string(to_string(task)));
  }
  std::set<std::string> ids;
  for (const auto& s : samples) {
    if (!ids.insert(s.sample_id).second) {
      throw Error(ErrorCode::InvalidRequest, "duplicate sample_id '" + s.sample_id + "'");
    }
  }

  RunManifest m;
  m.run_id = options.run_id.value_or(make_run_id());
  m.resolved_config = options.embed_config.value_or(to_tree(AnyConfig(cfg)));
  m.config_fingerprint = sha256_hex(m.resolved_config.dump());
  m.adapter = desc;
  m.task = task;
  m.started = utc_timestamp();
  m.planned_count = samples.size();

  const fs::path run_dir = options.output_dir / m.run_id;
  if (fs::exists(run_dir / kManifest)) {
    throw Error(ErrorCode::IoError, "run directory already exists: " + run_dir.string());
  }
  fs::create_directories(run_dir);
  std::string sample_lines;
  for (const auto& s : samples) sample_lines += to_record(s) + "\n";
  write_file_atomic(run_dir / kSamples, sample_lines);
  write_manifest(run_dir, m);

  std::vector<SampleRecord> owned(samples.begin(), samples.end());
  std::vector<const SampleRecord*> pending;
  for (const auto& s : owned) pending.push_back(&s);
  if (options.limit > 0 && pending.size() > options.limit) pending.resize(options.limit);

  {
    ResultWriter writer(run_dir);
    m.failures = execute(cfg, pending, task, registry, options, owned.size(), 0, writer, m.aborted,
                         m.preprocessing_fingerprint);
  }
  finalize(run_dir, m, owned);
  return m;
}

RunManifest resume_run(const fs::path& run_dir, const InferenceConfig& cfg,
                       const BackboneRegistry& registry, const PipelineOptions& options) {
  RunManifest m = load_manifest(run_dir);
  const json recorded = m.resolved_config.value("inference", json::object());
  const json requested = to_tree(AnyConfig(cfg)).at("inference");
  if (recorded != requested) {
    std::string keys;
    for (const auto& d : diff_configs(config_from_tree(json{{"inference", recorded}}),
                                      AnyConfig(cfg))) {
      keys += (keys.empty() ? "" : ", ") + d.key;
    }
    throw Error(ErrorCode::ManifestMismatch, "run " + m.run_id + " was produced with a different config (" + keys + ")");
  }
  auto samples = load_run_samples(run_dir);
  auto persisted = read_persisted(run_dir);
  std::vector<const SampleRecord*> pending;
  for (const auto& s : samples) {
    if (!persisted.count(s.sample_id)) pending.push_back(&s);
  }
  if (pending.empty() && m.complete) return m;
  if (options.limit > 0 && pending.size() > options.limit) pending.resize(options.limit);

  std::set<std::string> retried;
  for (const auto* s : pending) retried.insert(s->sample_id);
  std::erase_if(m.failures, [&](const RunFailure& f) { return retried.count(f.sample_id) != 0; });
  m.aborted = false;
  {
    ResultWriter writer(run_dir);
    auto fresh = execute(cfg, pending, m.task, registry, options, samples.size(), m.failures.size(),
                         writer, m.aborted, m.preprocessing_fingerprint);
    m.failures.insert(m.failures.end(), fresh.begin(), fresh.end());
  }
  finalize(run_dir, m, samples);
  return m;
}

RunManifest load_manifest(const fs::path& run_dir) {
  const fs::path p = run_dir / kManifest;
  if (!fs::exists(p)) throw Error(ErrorCode::IoError, "no manifest in " + run_dir.string());
  return json::parse(read_file(p)).get<RunManifest>();
}

std::vector<InferenceResult> load_results(const fs::path& run_dir) {
  auto persisted = read_persisted(run_dir);
  std::vector<InferenceResult> out;
  out.reserve(persisted.size());
  for (auto& [id, r] : persisted) {
    for (auto& img : r.images) {
      if (img.uri) img.bytes = read_file(run_dir / *img.uri);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SampleRecord> load_run_samples(const fs::path& run_dir) {
  std::vector<SampleRecord> out;
  for (const auto& line : read_lines(run_dir / kSamples)) {
    if (!trim(line).empty()) out.push_back(from_record<SampleRecord>(line));
  }
  return out;
}

}  // namespace umm
