// Python bindings. Structured values cross the boundary as JSON text; the
// package's __init__ turns them into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "umm/benchmarks.hpp"
#include "umm/config.hpp"
#include "umm/consistency.hpp"
#include "umm/error.hpp"
#include "umm/registries.hpp"
#include "umm/reporting.hpp"
#include "umm/scoring.hpp"
#include "umm/training.hpp"

namespace py = pybind11;
using namespace umm;

namespace {

Registries& registries() {
  static Registries r = [] {
    Registries reg = make_default_registries();
    load_plugins_from_env(reg);
    return reg;
  }();
  return r;
}

std::vector<CategoryAggregate> categories_from(const std::string& text) {
  return json::parse(text).get<std::vector<CategoryAggregate>>();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "umm native core";
  // Leaked on purpose: the type must outlive every translated exception.
  static py::handle umm_error = py::exception<Error>(m, "UmmError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(umm_error)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(umm_error.ptr(), exc.ptr());
    }
  });

  m.def("registered", [] {
    auto& r = registries();
    return std::map<std::string, std::vector<std::string>>{
        {"backbones", r.backbones.names()}, {"benchmarks", r.benchmarks.names()}, {"trainers", r.trainers.names()}};
  });

  m.def("validate_request", [](const std::string& req) {
    InferenceRequest r = json::parse(req).get<InferenceRequest>();
    return json(validate_request(r)).dump();
  });

  m.def("load_config", [](const fs::path& path, const std::vector<std::string>& overrides) {
    return to_tree(load_config(path, overrides)).dump();
  }, py::arg("path"), py::arg("overrides") = std::vector<std::string>{});
  m.def("load_config_text", [](const std::string& yaml, const std::vector<std::string>& overrides) {
    return to_tree(load_config_text(yaml, overrides)).dump();
  }, py::arg("yaml"), py::arg("overrides") = std::vector<std::string>{});
  m.def("config_fingerprint", [](const fs::path& path, const std::vector<std::string>& overrides) {
    return config_fingerprint(load_config(path, overrides));
  }, py::arg("path"), py::arg("overrides") = std::vector<std::string>{});
  m.def("diff_configs", [](const fs::path& a, const fs::path& b) {
    std::vector<std::string> keys;
    for (const auto& d : diff_configs(load_config(a), load_config(b))) keys.push_back(d.key);
    return keys;
  });
  m.def("schema_reference", &schema_reference);

  m.def("aggregate", [](const std::string& rule, const std::string& categories,
                        const std::map<std::string, double>& weights) {
    return aggregate(parse_aggregation(rule), categories_from(categories), weights);
  }, py::arg("rule"), py::arg("categories"), py::arg("weights") = std::map<std::string, double>{});
  m.def("make_edit_score", [](double sc, double pq) {
    const auto s = make_edit_score(sc, pq);
    return py::make_tuple(s.sc, s.pq, s.o);
  });
  m.def("extract_choice", [](const std::string& response, const std::string& options_meta) {
    return extract_choice(response, options_from_meta(json{{"options", json::parse(options_meta)}}));
  });
  m.def("cosine", &cosine);

  m.def("evaluate", [](const fs::path& config, const std::vector<std::string>& overrides,
                       const std::string& run_id, int workers) {
    auto cfg = load_config_as<EvalConfig>(config, overrides);
    EvalOptions opts;
    opts.workers = workers;
    if (!run_id.empty()) opts.run_id = run_id;
    py::gil_scoped_release release;
    auto out = run_benchmark(cfg, registries().backbones, registries().benchmarks, opts);
    return json{{"report", out.report}, {"run_dir", out.run_dir.string()}, {"report_dir", out.report_dir.string()}}
        .dump();
  }, py::arg("config"), py::arg("overrides") = std::vector<std::string>{}, py::arg("run_id") = "",
     py::arg("workers") = 1);

  m.def("train", [](const fs::path& config, const std::vector<std::string>& overrides, const std::string& run_id) {
    auto cfg = load_config_as<TrainConfig>(config, overrides);
    TrainOptions opts;
    if (!run_id.empty()) opts.run_id = run_id;
    py::gil_scoped_release release;
    auto out = umm::train(cfg, registries().backbones, registries().trainers, opts);
    json loss = json::array();
    for (const auto& p : out.loss_curve) loss.push_back({{"step", p.step}, {"loss", p.loss}});
    return json{{"run_id", out.run_id},           {"run_dir", out.run_dir.string()},
                {"checkpoints", out.checkpoints}, {"loss_curve", loss},
                {"initial_loss", out.initial_loss}, {"final_loss", out.final_loss},
                {"parameter_digest", out.parameter_digest}}
        .dump();
  }, py::arg("config"), py::arg("overrides") = std::vector<std::string>{}, py::arg("run_id") = "");

  m.def("analyze", [](const fs::path& config, const std::vector<std::string>& overrides, const std::string& run_id) {
    auto cfg = load_config_as<AnalysisConfig>(config, overrides);
    AnalysisOptions opts;
    if (!run_id.empty()) opts.run_id = run_id;
    py::gil_scoped_release release;
    const auto samples = load_dataset(cfg.dataset_path);
    auto out = umm::analyze(cfg, samples, registries().backbones, opts);
    json curve = json::array();
    for (const auto& p : out.curve) curve.push_back({{"layer_index", p.layer_index}, {"mean", p.mean}, {"n", p.n}});
    return json{{"run_id", out.run_id}, {"run_dir", out.run_dir.string()}, {"cosines", out.cosines},
                {"curve", curve}, {"traced", out.traces.size()}}
        .dump();
  }, py::arg("config"), py::arg("overrides") = std::vector<std::string>{}, py::arg("run_id") = "");

  m.def("parse_report", [](const fs::path& path) { return json(parse_report(path)).dump(); });
  m.def("leaderboard", [](const std::vector<std::string>& report_paths, const std::string& metric,
                          const std::vector<std::string>& labels) {
    std::vector<ScoreReport> reports;
    for (const auto& p : report_paths) reports.push_back(parse_report(p));
    return render_leaderboard_text(assemble_leaderboard(reports, metric, labels));
  }, py::arg("reports"), py::arg("metric") = "overall", py::arg("labels") = std::vector<std::string>{});
}
