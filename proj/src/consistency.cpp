#include "umm/consistency.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "umm/error.hpp"

namespace umm {

void to_json(json& j, const ConsistencyTrace& t) {
  json cos = json::array();
  for (const auto& c : t.pairwise_cosines) cos.push_back(c ? json(*c) : json(nullptr));
  json layers = json::array();
  for (const auto& l : t.layer_consistency) layers.push_back({{"layer_index", l.layer_index}, {"value", l.value}});
  j = json{{"sample_id", t.sample_id},
           {"variants", t.variants},
           {"responses", t.responses},
           {"query_embeddings", t.query_embeddings},
           {"response_embeddings", t.response_embeddings},
           {"pairwise_cosines", cos},
           {"layer_summaries", t.layer_summaries},
           {"layer_consistency", layers},
           {"stride", t.stride},
           {"include_final_layer", t.include_final_layer},
           {"flagged", t.flagged},
           {"note", t.note}};
}

void from_json(const json& j, ConsistencyTrace& t) {
  j.at("sample_id").get_to(t.sample_id);
  j.at("variants").get_to(t.variants);
  j.at("responses").get_to(t.responses);
  j.at("query_embeddings").get_to(t.query_embeddings);
  j.at("response_embeddings").get_to(t.response_embeddings);
  const json& cos = j.at("pairwise_cosines");
  for (std::size_t i = 0; i < 3; ++i) {
    t.pairwise_cosines[i] = cos.at(i).is_null() ? std::nullopt : std::optional<double>(cos.at(i).get<double>());
  }
  j.at("layer_summaries").get_to(t.layer_summaries);
  t.layer_consistency.clear();
  for (const auto& l : j.at("layer_consistency")) {
    t.layer_consistency.push_back(LayerValue{l.at("layer_index").get<int>(), l.at("value").get<double>()});
  }
  j.at("stride").get_to(t.stride);
  j.at("include_final_layer").get_to(t.include_final_layer);
  j.at("flagged").get_to(t.flagged);
  j.at("note").get_to(t.note);
}

std::array<double, 3> pairwise_cosines(const std::vector<double>& a, const std::vector<double>& b,
                                       const std::vector<double>& c) {
  return {cosine(a, b), cosine(a, c), cosine(b, c)};
}

std::vector<VariantSet> build_variants(std::span<const SampleRecord> samples, JudgeClient& rephraser,
                                       std::vector<RunFailure>* dropped) {
  std::vector<VariantSet> out;
  for (const auto& s : samples) {
    try {
      auto reph = rephraser.rephrase(s.prompt, 2);
      if (reph[0] == reph[1]) {
        throw Error(ErrorCode::DegenerateRephrase, "both rephrasings are identical");
      }
      out.push_back(VariantSet{s.sample_id, {s.prompt, reph[0], reph[1]}, s.images});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateRephrase) throw;
      if (dropped) dropped->push_back(RunFailure{s.sample_id, e.what()});
    }
  }
  return out;
}

std::array<std::optional<double>, 3> response_consistency(const std::array<std::string, 3>& responses,
                                                          JudgeClient& embedder) {
  std::vector<std::string> present;
  for (const auto& r : responses) {
    if (!r.empty()) present.push_back(r);
  }
  std::array<std::vector<double>, 3> vecs;
  if (!present.empty()) {
    auto emb = embedder.embed(present);
    std::size_t k = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      if (!responses[i].empty()) vecs[i] = std::move(emb[k++]);
    }
  }
  std::array<std::optional<double>, 3> out;
  const std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
  for (std::size_t p = 0; p < 3; ++p) {
    const auto [a, b] = pairs[p];
    if (!vecs[a].empty() && !vecs[b].empty()) out[p] = cosine(vecs[a], vecs[b]);
  }
  return out;
}

std::vector<std::vector<LayerSummary>> variant_layer_summaries(BackboneAdapter& adapter, const VariantSet& set,
                                                               const std::array<std::string, 3>& responses,
                                                               int stride, bool include_final_layer) {
  if (!adapter.descriptor().supports_latents) {
    throw Error(ErrorCode::NoLatentSupport, "backbone '" + adapter.name() + "' exposes no hidden states");
  }
  const auto layers = sampled_layers(adapter.num_layers(), stride, include_final_layer);
  std::vector<std::vector<LayerSummary>> out;
  for (std::size_t v = 0; v < 3; ++v) {
    InferenceRequest req;
    req.prompt = set.variants[v];
    req.images = set.images;
    req.task = TaskKind::understanding;
    req.sample_id = set.sample_id;
    // Re-feed prompt and response together; nothing is sampled here.
    const HiddenTrace trace = adapter.trace(req, responses[v]);
    out.push_back(summarize_response_span(trace, layers));
  }
  return out;
}

std::vector<LayerValue> layer_consistency(const std::vector<std::vector<LayerSummary>>& summaries) {
  if (summaries.size() != 3) throw Error(ErrorCode::PreconditionFailed, "layer consistency needs 3 variants");
  std::vector<LayerValue> out;
  for (std::size_t l = 0; l < summaries[0].size(); ++l) {
    const auto c = pairwise_cosines(summaries[0][l].summary, summaries[1][l].summary, summaries[2][l].summary);
    out.push_back(LayerValue{summaries[0][l].layer_index, (c[0] + c[1] + c[2]) / 3.0});
  }
  return out;
}

std::vector<LayerValue> layer_consistency(BackboneAdapter& adapter, const VariantSet& set,
                                          const std::array<std::string, 3>& responses, int stride,
                                          bool include_final_layer) {
  return layer_consistency(variant_layer_summaries(adapter, set, responses, stride, include_final_layer));
}

Histogram cosine_histogram(std::span<const double> values) {
  Histogram h;
  const bool negative = std::any_of(values.begin(), values.end(), [](double v) { return v < 0; });
  h.lo = negative ? -1.0 : 0.0;
  h.hi = 1.0;
  h.counts.assign(negative ? 100 : 50, 0);
  const double width = (h.hi - h.lo) / static_cast<double>(h.counts.size());
  for (double v : values) {
    auto bin = static_cast<std::ptrdiff_t>(std::floor((v - h.lo) / width));
    bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(h.counts.size()) - 1);
    ++h.counts[static_cast<std::size_t>(bin)];
    ++h.total;
  }
  return h;
}

std::vector<CurvePoint> mean_layer_curve(std::span<const ConsistencyTrace> traces) {
  std::map<int, std::pair<double, std::size_t>> acc;
  for (const auto& t : traces) {
    for (const auto& l : t.layer_consistency) {
      acc[l.layer_index].first += l.value;
      ++acc[l.layer_index].second;
    }
  }
  std::vector<CurvePoint> out;
  for (const auto& [layer, s] : acc) out.push_back(CurvePoint{layer, s.first / static_cast<double>(s.second), s.second});
  return out;
}

// ---- plots ----

namespace {

constexpr double kW = 480, kH = 300, kPad = 40;

std::string svg_open(const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">{3}</text>\n"
      "<line x1=\"{2}\" y1=\"{4}\" x2=\"{5}\" y2=\"{4}\" stroke=\"black\"/>\n"
      "<line x1=\"{2}\" y1=\"{2}\" x2=\"{2}\" y2=\"{4}\" stroke=\"black\"/>\n",
      kW, kH, kPad, title, kH - kPad, kW - kPad / 2);
}

std::string axis_label(double x, double y, const std::string& text, const char* anchor = "middle") {
  return fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"10\" "
                     "text-anchor=\"{}\">{}</text>\n",
                     x, y, anchor, text);
}

}  // namespace

std::string svg_histogram(const Histogram& h, const std::string& title) {
  std::string out = svg_open(title);
  const double plot_w = kW - 1.5 * kPad;
  const double plot_h = kH - 2 * kPad;
  const std::size_t peak = h.counts.empty() ? 0 : *std::max_element(h.counts.begin(), h.counts.end());
  const double bar_w = plot_w / static_cast<double>(std::max<std::size_t>(1, h.counts.size()));
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    if (h.counts[i] == 0) continue;
    const double bh = plot_h * static_cast<double>(h.counts[i]) / static_cast<double>(peak);
    out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"steelblue\"/>\n",
                       kPad + bar_w * static_cast<double>(i), kH - kPad - bh, bar_w, bh);
  }
  out += axis_label(kPad, kH - kPad + 14, format_fixed(h.lo, 1));
  out += axis_label(kPad + plot_w, kH - kPad + 14, format_fixed(h.hi, 1));
  out += axis_label(kPad - 4, kPad + 4, std::to_string(peak), "end");
  out += axis_label(kW / 2, kH - 8, fmt::format("cosine similarity (n = {})", h.total));
  return out + "</svg>\n";
}

std::string svg_curve(const std::vector<CurvePoint>& curve, const std::string& title) {
  std::string out = svg_open(title);
  const double plot_w = kW - 1.5 * kPad;
  const double plot_h = kH - 2 * kPad;
  if (!curve.empty()) {
    const double lo = std::min(0.0, std::min_element(curve.begin(), curve.end(), [](auto& a, auto& b) {
                                      return a.mean < b.mean;
                                    })->mean);
    const int first = curve.front().layer_index;
    const int last = curve.back().layer_index;
    const double span = std::max(1, last - first);
    auto px = [&](int layer) { return kPad + plot_w * static_cast<double>(layer - first) / span; };
    auto py = [&](double v) { return kH - kPad - plot_h * (v - lo) / (1.0 - lo); };
    std::string pts;
    for (const auto& p : curve) pts += fmt::format("{:.2f},{:.2f} ", px(p.layer_index), py(p.mean));
    pts.pop_back();
    out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"darkorange\" stroke-width=\"2\"/>\n", pts);
    for (const auto& p : curve) {
      out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"darkorange\"/>\n", px(p.layer_index),
                         py(p.mean));
      out += axis_label(px(p.layer_index), kH - kPad + 14, std::to_string(p.layer_index));
    }
    out += axis_label(kPad - 4, py(1.0) + 4, "1.0", "end");
    out += axis_label(kPad - 4, py(lo) + 4, format_fixed(lo, 1), "end");
  }
  out += axis_label(kW / 2, kH - 8, "layer");
  return out + "</svg>\n";
}

// ---- analysis run ----

AnalysisOutcome analyze(const AnalysisConfig& cfg, std::span<const SampleRecord> samples,
                        const BackboneRegistry& registry, const AnalysisOptions& options) {
  const AdapterDescriptor& desc = registry.resolve(cfg.inference.backbone);
  if (!desc.capabilities.supports(TaskKind::understanding)) {
    throw Error(ErrorCode::CapabilityError, "backbone '" + desc.name + "' cannot answer questions");
  }
  if (cfg.stride < 1) throw Error(ErrorCode::PreconditionFailed, "stride must be >= 1");

  std::vector<SampleRecord> chosen(samples.begin(), samples.end());
  std::sort(chosen.begin(), chosen.end(), [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; });
  if (cfg.max_samples > 0 && chosen.size() > static_cast<std::size_t>(cfg.max_samples)) chosen.resize(cfg.max_samples);

  JudgeClient rephraser(cfg.rephraser, options.rephraser_transport);
  JudgeClient embedder(cfg.embedder, options.embedder_transport);

  AnalysisOutcome out;
  out.run_id = options.run_id.value_or(make_run_id());
  out.run_dir = fs::path(cfg.output_dir) / out.run_id;
  fs::create_directories(out.run_dir);
  const std::string started = utc_timestamp();

  const auto sets = build_variants(chosen, rephraser, &out.dropped);

  // Deterministic decoding regardless of the configured sampling parameters.
  ParamMap gen = cfg.inference.gen_params.is_object() ? cfg.inference.gen_params : ParamMap::object();
  gen["temperature"] = 0.0;
  gen.erase("batch_size");

  std::vector<std::optional<ConsistencyTrace>> traces(sets.size());
  std::vector<RunFailure> failures;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;

  auto worker = [&] {
    std::unique_ptr<BackboneAdapter> adapter;
    try {
      adapter = registry.instantiate(cfg.inference.backbone);
      adapter->load(cfg.inference.backbone_cfg);
    } catch (...) {
      std::lock_guard lock(mu);
      if (!fatal) fatal = std::current_exception();
      return;
    }
    for (std::size_t i = next++; i < sets.size(); i = next++) {
      const VariantSet& set = sets[i];
      try {
        ConsistencyTrace t;
        t.sample_id = set.sample_id;
        t.variants = set.variants;
        t.stride = cfg.stride;
        t.include_final_layer = cfg.include_final_layer;
        // The three variants run back to back on this worker's adapter.
        for (std::size_t v = 0; v < 3; ++v) {
          InferenceRequest req;
          req.prompt = set.variants[v];
          req.images = set.images;
          req.task = TaskKind::understanding;
          req.sample_id = set.sample_id + "#v" + std::to_string(v);
          req.seed = cfg.inference.seed;
          req.params = gen;
          const auto res = adapter->generate(std::span(&req, 1), gen);
          t.responses[v] = res.front().text.value_or("");
        }
        t.query_embeddings = embedder.embed({t.variants.begin(), t.variants.end()});
        t.pairwise_cosines = response_consistency(t.responses, embedder);
        for (const auto& r : t.responses) {
          t.response_embeddings.push_back(r.empty() ? std::vector<double>{} : embedder.embed({r}).front());
        }
        if (std::any_of(t.responses.begin(), t.responses.end(), [](const auto& r) { return r.empty(); })) {
          t.flagged = true;
          t.note = "empty response";
        }
        if (desc.supports_latents && !t.flagged) {
          t.layer_summaries = variant_layer_summaries(*adapter, set, t.responses, cfg.stride, cfg.include_final_layer);
          t.layer_consistency = layer_consistency(t.layer_summaries);
        }
        traces[i] = std::move(t);
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        failures.push_back(RunFailure{set.sample_id, e.what()});
      }
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(
      1, std::min<std::size_t>(static_cast<std::size_t>(std::max(1, options.workers)), sets.size()));
  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < n_workers; ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (fatal) std::rethrow_exception(fatal);

  for (auto& t : traces) {
    if (t) out.traces.push_back(std::move(*t));
  }
  std::sort(failures.begin(), failures.end(), [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; });
  out.failures = std::move(failures);
  for (const auto& t : out.traces) {
    for (const auto& c : t.pairwise_cosines) {
      if (c) out.cosines.push_back(*c);
    }
  }
  out.histogram = cosine_histogram(out.cosines);
  out.curve = mean_layer_curve(out.traces);

  std::string trace_lines;
  for (const auto& t : out.traces) trace_lines += json(t).dump() + "\n";
  write_file_atomic(out.run_dir / "traces.jsonl", trace_lines);

  write_file_atomic(out.run_dir / "histogram.json",
                    json{{"lo", out.histogram.lo},
                         {"hi", out.histogram.hi},
                         {"bins", out.histogram.counts.size()},
                         {"counts", out.histogram.counts},
                         {"total", out.histogram.total}}
                            .dump(2) +
                        "\n");
  json curve = json::array();
  for (const auto& p : out.curve) curve.push_back({{"layer_index", p.layer_index}, {"mean", p.mean}, {"n", p.n}});
  write_file_atomic(out.run_dir / "layer_curve.json", curve.dump(2) + "\n");

  auto failures_json = [](const std::vector<RunFailure>& fs) {
    json a = json::array();
    for (const auto& f : fs) a.push_back({{"sample_id", f.sample_id}, {"error", f.error}});
    return a;
  };
  std::size_t flagged = 0;
  for (const auto& t : out.traces) flagged += t.flagged ? 1 : 0;
  double mean_cos = 0.0;
  for (double c : out.cosines) mean_cos += c;
  if (!out.cosines.empty()) mean_cos /= static_cast<double>(out.cosines.size());
  json layer_indices = json::array();
  if (desc.supports_latents) {
    // The adapter is not loaded here; depth comes from the traces.
    for (const auto& p : out.curve) layer_indices.push_back(p.layer_index);
  }
  const json summary{{"config_fingerprint", config_fingerprint(AnyConfig(cfg))},
                     {"backbone", cfg.inference.backbone},
                     {"samples", chosen.size()},
                     {"traced", out.traces.size()},
                     {"flagged", flagged},
                     {"dropped", failures_json(out.dropped)},
                     {"failures", failures_json(out.failures)},
                     {"cosine_count", out.cosines.size()},
                     {"mean_cosine", mean_cos},
                     {"stride", cfg.stride},
                     {"include_final_layer", cfg.include_final_layer},
                     {"layer_indices", layer_indices},
                     {"latents", desc.supports_latents}};
  write_file_atomic(out.run_dir / "summary.json", summary.dump(2) + "\n");

  if (options.plots) {
    write_file_atomic(out.run_dir / "response_cosines.svg",
                      svg_histogram(out.histogram, "Response consistency across query variants"));
    write_file_atomic(out.run_dir / "layer_consistency.svg",
                      svg_curve(out.curve, "Layerwise latent consistency"));
  }
  write_file_atomic(out.run_dir / "manifest.json", json{{"run_id", out.run_id},
                                                        {"started", started},
                                                        {"finished", utc_timestamp()},
                                                        {"resolved_config", to_tree(AnyConfig(cfg))},
                                                        {"config_fingerprint", config_fingerprint(AnyConfig(cfg))}}
                                                       .dump(2) +
                                                       "\n");
  return out;
}

}  // namespace umm
