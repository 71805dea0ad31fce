#include "umm/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <regex>
#include <set>

#include "umm/error.hpp"
#include "umm/judge.hpp"

namespace umm {

std::string_view to_string(Aggregation a) {
  switch (a) {
    case Aggregation::mean: return "mean";
    case Aggregation::weighted: return "weighted";
    case Aggregation::count_weighted: return "count_weighted";
    case Aggregation::sum: return "sum";
  }
  return "mean";
}

Aggregation parse_aggregation(std::string_view name) {
  for (auto a : {Aggregation::mean, Aggregation::weighted, Aggregation::count_weighted, Aggregation::sum}) {
    if (to_string(a) == name) return a;
  }
  throw Error(ErrorCode::ParseError, "unknown aggregation '" + std::string(name) + "'");
}

void to_json(json& j, const CategoryAggregate& c) {
  j = json{{"category", c.category}, {"n", c.n}, {"value", c.value}};
}

void from_json(const json& j, CategoryAggregate& c) {
  j.at("category").get_to(c.category);
  j.at("n").get_to(c.n);
  j.at("value").get_to(c.value);
}

void to_json(json& j, const SampleScores& s) {
  j = json{{"sample_id", s.sample_id}, {"category", s.category}, {"scores", s.scores}, {"detail", s.detail}};
}

void from_json(const json& j, SampleScores& s) {
  j.at("sample_id").get_to(s.sample_id);
  j.at("category").get_to(s.category);
  j.at("scores").get_to(s.scores);
  s.detail = j.value("detail", json::object());
}

void to_json(json& j, const ScoreReport& r) {
  json failures = json::array();
  for (const auto& f : r.failures) failures.push_back({{"sample_id", f.sample_id}, {"error", f.error}});
  j = json{{"benchmark", r.benchmark},
           {"adapter", r.adapter},
           {"per_sample", r.per_sample},
           {"categories", r.categories},
           {"overall", r.overall},
           {"aggregation", std::string(to_string(r.aggregation))},
           {"weights", r.weights},
           {"decimals", r.decimals},
           {"lower_is_better", r.lower_is_better},
           {"breakdowns", r.breakdowns},
           {"summary", r.summary},
           {"failures", failures},
           {"resolved_config", r.resolved_config},
           {"config_fingerprint", r.config_fingerprint}};
}

void from_json(const json& j, ScoreReport& r) {
  j.at("benchmark").get_to(r.benchmark);
  j.at("adapter").get_to(r.adapter);
  j.at("per_sample").get_to(r.per_sample);
  j.at("categories").get_to(r.categories);
  j.at("overall").get_to(r.overall);
  r.aggregation = parse_aggregation(j.at("aggregation").get<std::string>());
  j.at("weights").get_to(r.weights);
  j.at("decimals").get_to(r.decimals);
  j.at("lower_is_better").get_to(r.lower_is_better);
  j.at("breakdowns").get_to(r.breakdowns);
  j.at("summary").get_to(r.summary);
  r.failures.clear();
  for (const auto& f : j.at("failures")) {
    r.failures.push_back(RunFailure{f.at("sample_id").get<std::string>(), f.at("error").get<std::string>()});
  }
  r.resolved_config = j.at("resolved_config");
  j.at("config_fingerprint").get_to(r.config_fingerprint);
}

// ---- answer extraction ----

namespace {

bool iequals(std::string_view a, std::string_view b) { return to_lower(a) == to_lower(b); }

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string strip_decorations(std::string_view s) {
  std::string t = trim(s);
  const std::string_view lead = "([{\"'*";
  const std::string_view tail = ")]}\"'*.,:;!? ";
  std::size_t b = 0;
  std::size_t e = t.size();
  while (b < e && lead.find(t[b]) != std::string_view::npos) ++b;
  while (e > b && tail.find(t[e - 1]) != std::string_view::npos) --e;
  return trim(std::string_view(t).substr(b, e - b));
}

/// Word-boundary containment, case-insensitive.
bool contains_phrase(const std::string& haystack_lower, const std::string& needle_lower) {
  if (needle_lower.empty()) return false;
  for (std::size_t pos = haystack_lower.find(needle_lower); pos != std::string::npos;
       pos = haystack_lower.find(needle_lower, pos + 1)) {
    const bool left_ok = pos == 0 || !is_word_char(haystack_lower[pos - 1]) || !is_word_char(needle_lower.front());
    const std::size_t end = pos + needle_lower.size();
    const bool right_ok =
        end == haystack_lower.size() || !is_word_char(haystack_lower[end]) || !is_word_char(needle_lower.back());
    if (left_ok && right_ok) return true;
  }
  return false;
}

std::optional<double> parse_number(std::string_view s) {
  std::string t;
  for (char c : trim(s)) {
    if (c != ',') t += c;
  }
  if (!t.empty() && t.back() == '%') t.pop_back();
  if (t.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return std::nullopt;
  return v;
}

const std::regex& answer_is_regex() {
  static const std::regex re(R"(answer\s*(?:is|:)\s*:?\s*[\(\[]?([A-Za-z0-9]+)[\)\]]?)", std::regex::icase);
  return re;
}

}  // namespace

std::vector<ChoiceOption> options_from_meta(const json& meta) {
  std::vector<ChoiceOption> out;
  if (!meta.is_object() || !meta.contains("options")) return out;
  const json& opts = meta.at("options");
  if (opts.is_object()) {
    for (const auto& [label, text] : opts.items()) {
      out.push_back(ChoiceOption{label, text.is_string() ? text.get<std::string>() : text.dump()});
    }
  } else if (opts.is_array()) {
    for (std::size_t i = 0; i < opts.size(); ++i) {
      std::string label(1, static_cast<char>('A' + i));
      out.push_back(ChoiceOption{label, opts[i].is_string() ? opts[i].get<std::string>() : opts[i].dump()});
    }
  }
  return out;
}

std::optional<std::string> extract_choice(std::string_view response, const std::vector<ChoiceOption>& options) {
  if (options.size() < 2) throw Error(ErrorCode::PreconditionFailed, "extract_choice needs at least 2 options");

  // 1. the whole response is a label, e.g. "B", "(b)", "B."
  const std::string bare = strip_decorations(response);
  for (const auto& o : options) {
    if (iequals(bare, o.label)) return o.label;
  }

  // 2. "answer is X" / "answer: X"
  const std::string text(response);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), answer_is_regex()); it != std::sregex_iterator();
       ++it) {
    const std::string cand = (*it)[1].str();
    for (const auto& o : options) {
      if (iequals(cand, o.label)) return o.label;
    }
  }

  // 3. exactly one option's text appears in the response
  const std::string lower = to_lower(response);
  std::vector<const ChoiceOption*> hits;
  for (const auto& o : options) {
    if (contains_phrase(lower, to_lower(trim(o.text)))) hits.push_back(&o);
  }
  // "dark red" also contains "red"; keep only maximal matches.
  std::vector<const ChoiceOption*> maximal;
  for (const auto* h : hits) {
    const std::string ht = to_lower(trim(h->text));
    const bool dominated = std::any_of(hits.begin(), hits.end(), [&](const ChoiceOption* other) {
      const std::string ot = to_lower(trim(other->text));
      return other != h && ot.size() > ht.size() && contains_phrase(ot, ht);
    });
    if (!dominated) maximal.push_back(h);
  }
  if (maximal.size() == 1) return maximal.front()->label;
  return std::nullopt;
}

bool free_form_match(std::string_view response, std::string_view ground_truth) {
  auto norm = [](std::string_view s) { return to_lower(strip_decorations(s)); };
  std::string answer(response);
  std::smatch m;
  static const std::regex kTail(R"(answer\s*(?:is|:)\s*:?\s*(.+)$)", std::regex::icase);
  if (std::regex_search(answer, m, kTail)) answer = m[1].str();
  if (norm(answer) == norm(ground_truth) || norm(response) == norm(ground_truth)) return true;

  const auto gt = parse_number(ground_truth);
  if (!gt) return false;
  static const std::regex kNum(R"(-?\d[\d,]*(?:\.\d+)?|-?\.\d+)");
  std::optional<double> last;
  const std::string r(response);
  for (auto it = std::sregex_iterator(r.begin(), r.end(), kNum); it != std::sregex_iterator(); ++it) {
    if (auto v = parse_number(it->str())) last = v;
  }
  return last && std::abs(*last - *gt) <= 1e-6 * std::max(1.0, std::abs(*gt));
}

// ---- aggregation ----

double aggregate_mean(std::span<const CategoryAggregate> categories) {
  if (categories.empty()) throw Error(ErrorCode::EmptyInput, "aggregate_mean over no categories");
  double s = 0.0;
  for (const auto& c : categories) s += c.value;
  return s / static_cast<double>(categories.size());
}

double aggregate_weighted(std::span<const CategoryAggregate> categories,
                          const std::map<std::string, double>& weights) {
  if (categories.empty()) throw Error(ErrorCode::EmptyInput, "aggregate_weighted over no categories");
  std::set<std::string> names;
  for (const auto& c : categories) names.insert(c.category);
  std::set<std::string> keys;
  double total = 0.0;
  for (const auto& [k, w] : weights) {
    if (w < 0) throw Error(ErrorCode::WeightMismatch, "negative weight for '" + k + "'");
    keys.insert(k);
    total += w;
  }
  if (names != keys || names.size() != categories.size()) {
    std::string detail;
    for (const auto& n : names) detail += (keys.count(n) ? "" : " missing weight:" + n);
    for (const auto& k : keys) detail += (names.count(k) ? "" : " unknown category:" + k);
    throw Error(ErrorCode::WeightMismatch, "weights must cover exactly the categories;" + detail);
  }
  if (std::abs(total - 1.0) > 1e-6) throw Error(ErrorCode::WeightMismatch, "weights sum to " + std::to_string(total));
  double s = 0.0;
  for (const auto& c : categories) s += weights.at(c.category) * c.value;
  return s;
}

std::map<std::string, double> count_weights(std::span<const CategoryAggregate> categories) {
  double n = 0.0;
  for (const auto& c : categories) n += static_cast<double>(c.n);
  if (!(n > 0)) throw Error(ErrorCode::EmptyInput, "count weights over zero samples");
  std::map<std::string, double> w;
  for (const auto& c : categories) w[c.category] = static_cast<double>(c.n) / n;
  return w;
}

double aggregate_count_weighted(std::span<const CategoryAggregate> categories) {
  if (categories.empty()) throw Error(ErrorCode::EmptyInput, "aggregate over no categories");
  double num = 0.0;
  double den = 0.0;
  for (const auto& c : categories) {
    num += static_cast<double>(c.n) * c.value;
    den += static_cast<double>(c.n);
  }
  if (!(den > 0)) throw Error(ErrorCode::EmptyInput, "aggregate over zero samples");
  return num / den;
}

double aggregate_sum(std::span<const CategoryAggregate> categories) {
  if (categories.empty()) throw Error(ErrorCode::EmptyInput, "aggregate over no categories");
  double s = 0.0;
  for (const auto& c : categories) s += c.value;
  return s;
}

double aggregate(Aggregation rule, std::span<const CategoryAggregate> categories,
                 const std::map<std::string, double>& weights) {
  switch (rule) {
    case Aggregation::mean: return aggregate_mean(categories);
    case Aggregation::weighted: return aggregate_weighted(categories, weights);
    case Aggregation::count_weighted: return aggregate_count_weighted(categories);
    case Aggregation::sum: return aggregate_sum(categories);
  }
  return aggregate_mean(categories);
}

std::vector<CategoryAggregate> category_means(const std::vector<std::pair<std::string, double>>& category_values,
                                              double factor) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& [cat, v] : category_values) {
    auto& slot = acc[cat];
    slot.first += v;
    ++slot.second;
  }
  std::vector<CategoryAggregate> out;
  for (const auto& [cat, s] : acc) {
    out.push_back(CategoryAggregate{cat, s.second, factor * s.first / static_cast<double>(s.second)});
  }
  return out;
}

// ---- multiple choice ----

namespace {

std::map<std::string, const InferenceResult*> align(std::span<const SampleRecord> records,
                                                    std::span<const InferenceResult> results) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no records to score");
  std::map<std::string, const InferenceResult*> by_id;
  for (const auto& r : results) {
    if (!by_id.emplace(r.sample_id, &r).second) {
      throw Error(ErrorCode::Misaligned, "duplicate result for '" + r.sample_id + "'");
    }
  }
  if (by_id.size() != records.size()) {
    throw Error(ErrorCode::Misaligned, std::to_string(records.size()) + " records but " +
                                           std::to_string(by_id.size()) + " results");
  }
  std::set<std::string> seen;
  for (const auto& rec : records) {
    if (!by_id.count(rec.sample_id)) throw Error(ErrorCode::Misaligned, "no result for '" + rec.sample_id + "'");
    if (!seen.insert(rec.sample_id).second) {
      throw Error(ErrorCode::Misaligned, "duplicate record '" + rec.sample_id + "'");
    }
  }
  return by_id;
}

std::vector<const SampleRecord*> sorted_records(std::span<const SampleRecord> records) {
  std::vector<const SampleRecord*> out;
  for (const auto& r : records) out.push_back(&r);
  std::sort(out.begin(), out.end(),
            [](const SampleRecord* a, const SampleRecord* b) { return a->sample_id < b->sample_id; });
  return out;
}

std::string category_or_default(const SampleRecord& r) { return r.category.empty() ? "default" : r.category; }

}  // namespace

McOutcome score_multiple_choice(std::span<const SampleRecord> records, std::span<const InferenceResult> results) {
  const auto by_id = align(records, results);
  McOutcome out;
  std::vector<std::pair<std::string, double>> values;
  std::size_t correct = 0;
  for (const auto* rec : sorted_records(records)) {
    const InferenceResult& res = *by_id.at(rec->sample_id);
    const std::string response = res.text.value_or("");
    const auto options = options_from_meta(rec->meta);
    bool ok = false;
    json detail = json::object();
    if (options.size() >= 2) {
      const auto label = extract_choice(response, options);
      ok = label && iequals(*label, trim(rec->ground_truth));
      detail["extracted"] = label ? json(*label) : json(nullptr);
    } else {
      ok = !response.empty() && free_form_match(response, rec->ground_truth);
      detail["mode"] = "free_form";
    }
    correct += ok ? 1 : 0;
    const std::string cat = category_or_default(*rec);
    values.emplace_back(cat, ok ? 1.0 : 0.0);
    out.per_sample.push_back(
        SampleScores{rec->sample_id, cat, {make_score("correct", ok ? 1.0 : 0.0, Scale{0, 1})}, detail});
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(records.size());
  out.categories = category_means(values);
  return out;
}

// ---- editing ----

EditScore make_edit_score(double sc, double pq) {
  if (!(sc >= 0 && sc <= 10 && pq >= 0 && pq <= 10)) {
    throw Error(ErrorCode::InvalidRequest, "SC/PQ must lie in [0, 10]");
  }
  return EditScore{sc, pq, std::sqrt(sc * pq)};
}

EditTable edit_table(const std::vector<std::pair<std::string, EditScore>>& samples) {
  std::vector<std::pair<std::string, double>> sc, pq, o;
  for (const auto& [cat, s] : samples) {
    sc.emplace_back(cat, s.sc);
    pq.emplace_back(cat, s.pq);
    o.emplace_back(cat, s.o);
  }
  EditTable t;
  t.sc = category_means(sc);
  t.pq = category_means(pq);
  t.o = category_means(o);
  if (!samples.empty()) {
    t.avg_sc = aggregate_mean(t.sc);
    t.avg_pq = aggregate_mean(t.pq);
    t.avg_o = aggregate_mean(t.o);
  }
  return t;
}

ScoreReport score_edit_benchmark(std::span<const SampleRecord> records, std::span<const InferenceResult> results,
                                 JudgeClient& judge, const EditOptions& options) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no records to score");
  std::map<std::string, const InferenceResult*> by_id;
  for (const auto& r : results) by_id[r.sample_id] = &r;
  const std::set<std::string> declared(options.categories.begin(), options.categories.end());

  ScoreReport report;
  report.aggregation = Aggregation::mean;
  report.decimals = 3;
  std::vector<std::pair<std::string, EditScore>> full;
  std::vector<std::pair<std::string, EditScore>> subset;
  const Scale ten{0, 10};

  for (const auto* rec : sorted_records(records)) {
    const std::string cat = category_or_default(*rec);
    if (!declared.empty() && !declared.count(cat)) {
      throw Error(ErrorCode::InvalidRequest, "sample '" + rec->sample_id + "' has undeclared category '" + cat + "'");
    }
    try {
      auto it = by_id.find(rec->sample_id);
      if (it == by_id.end()) throw Error(ErrorCode::Misaligned, "no edited image");
      const InferenceResult& res = *it->second;
      if (rec->images.empty()) throw Error(ErrorCode::InvalidRequest, "no source image");

      std::vector<std::string> instructions;
      const bool multi = rec->meta.contains("turns") && rec->meta.at("turns").is_array();
      if (multi) {
        for (const auto& t : rec->meta.at("turns")) instructions.push_back(t.get<std::string>());
      } else {
        instructions.push_back(rec->prompt);
      }
      if (res.images.size() < instructions.size()) {
        throw Error(ErrorCode::Misaligned, "expected " + std::to_string(instructions.size()) + " edited image(s), got " +
                                               std::to_string(res.images.size()));
      }
      double sc = 0, pq = 0, o = 0;
      json turns = json::array();
      for (std::size_t k = 0; k < instructions.size(); ++k) {
        const Image& src = k == 0 ? rec->images.front() : res.images[k - 1];
        const std::string judge_id = multi ? rec->sample_id + "#" + std::to_string(k) : rec->sample_id;
        const JudgeVerdict v = judge.judge_edit(src, res.images[k], instructions[k], judge_id);
        const EditScore e = make_edit_score(v.sc, v.pq);
        sc += e.sc;
        pq += e.pq;
        o += e.o;
        turns.push_back(json{{"sc", e.sc}, {"pq", e.pq}, {"o", e.o}, {"rationale", v.rationale}});
      }
      const double k = static_cast<double>(instructions.size());
      const EditScore mean{sc / k, pq / k, o / k};
      full.emplace_back(cat, mean);
      if (rec->meta.value(options.subset_key, false)) subset.emplace_back(cat, mean);
      report.per_sample.push_back(SampleScores{
          rec->sample_id,
          cat,
          {make_score("SC", mean.sc, ten), make_score("PQ", mean.pq, ten), make_score("O", mean.o, ten)},
          json{{"turns", turns}}});
    } catch (const Error& e) {
      report.failures.push_back(RunFailure{rec->sample_id, e.what()});
    }
  }
  if (full.empty()) throw Error(ErrorCode::EmptyInput, "every sample failed judging");

  const EditTable t = edit_table(full);
  report.categories = t.o;
  report.overall = make_score("O", aggregate_mean(report.categories), ten);
  report.breakdowns["SC"] = t.sc;
  report.breakdowns["PQ"] = t.pq;
  report.breakdowns["O"] = t.o;
  report.summary["SC"] = t.avg_sc;
  report.summary["PQ"] = t.avg_pq;
  report.summary["O"] = t.avg_o;
  if (!subset.empty()) {
    const EditTable s = edit_table(subset);
    const std::string p = options.subset_key + "/";
    report.breakdowns[p + "SC"] = s.sc;
    report.breakdowns[p + "PQ"] = s.pq;
    report.breakdowns[p + "O"] = s.o;
    report.summary[p + "SC"] = s.avg_sc;
    report.summary[p + "PQ"] = s.avg_pq;
    report.summary[p + "O"] = s.avg_o;
  }
  return report;
}

// ---- MME ----

MmeComposition MmeComposition::standard() {
  return MmeComposition{{"existence", "count", "position", "color", "posters", "celebrity", "scene", "landmark",
                         "artwork", "OCR"},
                        {"commonsense_reasoning", "numerical_calculation", "text_translation", "code_reasoning"}};
}

MmeComposition MmeComposition::from_json(const json& j) {
  MmeComposition c;
  j.at("perception").get_to(c.perception);
  j.at("cognition").get_to(c.cognition);
  return c;
}

std::optional<bool> parse_yes_no(std::string_view response) {
  const std::string s = to_lower(strip_decorations(response));
  auto starts_word = [&](std::string_view w) {
    return s.compare(0, w.size(), w) == 0 && (s.size() == w.size() || !is_word_char(s[w.size()]));
  };
  if (starts_word("yes")) return true;
  if (starts_word("no")) return false;
  return std::nullopt;
}

MmeScore score_mme(std::span<const SampleRecord> records, std::span<const InferenceResult> results,
                   const MmeComposition& composition) {
  const auto by_id = align(records, results);
  std::map<std::string, bool> is_perception;
  for (const auto& s : composition.perception) is_perception[s] = true;
  for (const auto& s : composition.cognition) is_perception[s] = false;

  struct Group {
    std::size_t total = 0;
    std::size_t correct = 0;
  };
  std::map<std::string, std::map<std::string, Group>> subtasks;
  for (const auto* rec : sorted_records(records)) {
    if (!is_perception.count(rec->category)) {
      throw Error(ErrorCode::InvalidRequest, "'" + rec->sample_id + "': '" + rec->category + "' is not an MME subtask");
    }
    const auto truth = parse_yes_no(rec->ground_truth);
    if (!truth) throw Error(ErrorCode::InvalidRequest, "'" + rec->sample_id + "': ground truth must be yes/no");
    std::string image = rec->meta.value("image_id", std::string());
    if (image.empty()) {
      if (rec->images.empty()) throw Error(ErrorCode::InvalidRequest, "'" + rec->sample_id + "' has no image");
      image = sha256_hex(rec->images.front().bytes);
    }
    const auto answer = parse_yes_no(by_id.at(rec->sample_id)->text.value_or(""));
    Group& g = subtasks[rec->category][image];
    ++g.total;
    g.correct += (answer && *answer == *truth) ? 1 : 0;
  }

  MmeScore out;
  auto emit = [&](const std::vector<std::string>& names, double& total) {
    for (const auto& name : names) {
      auto it = subtasks.find(name);
      if (it == subtasks.end()) continue;
      std::size_t q = 0, qc = 0, imgs = 0, imgs_ok = 0;
      for (const auto& [image, g] : it->second) {
        if (g.total % 2 != 0) {
          throw Error(ErrorCode::OddQuestionCount,
                      name + ": image " + image.substr(0, 16) + " has " + std::to_string(g.total) + " question(s)");
        }
        q += g.total;
        qc += g.correct;
        ++imgs;
        imgs_ok += g.correct == g.total ? 1 : 0;
      }
      const double value = 100.0 * static_cast<double>(qc) / static_cast<double>(q) +
                           100.0 * static_cast<double>(imgs_ok) / static_cast<double>(imgs);
      out.per_subtask.push_back(CategoryAggregate{name, q, value});
      total += value;
    }
  };
  emit(composition.perception, out.perception);
  emit(composition.cognition, out.cognition);
  return out;
}

// ---- WISE ----

ScoreReport score_wise(std::span<const SampleRecord> records, const std::map<std::string, double>& wiscores,
                       const std::optional<std::map<std::string, double>>& weights) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no records to score");
  ScoreReport report;
  report.aggregation = Aggregation::weighted;
  report.decimals = 4;
  std::vector<std::pair<std::string, double>> values;
  for (const auto* rec : sorted_records(records)) {
    const std::string cat = category_or_default(*rec);
    auto it = wiscores.find(rec->sample_id);
    if (it == wiscores.end()) {
      report.failures.push_back(RunFailure{rec->sample_id, "no WiScore"});
      continue;
    }
    if (!(it->second >= 0 && it->second <= 1)) {
      throw Error(ErrorCode::InvalidRequest, "WiScore outside [0, 1] for '" + rec->sample_id + "'");
    }
    values.emplace_back(cat, it->second);
    report.per_sample.push_back(SampleScores{rec->sample_id, cat, {make_score("WiScore", it->second, Scale{0, 1})}});
  }
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "no scored WISE samples");
  report.categories = category_means(values);
  report.weights = weights ? *weights : count_weights(report.categories);
  report.overall = make_score("WiScore", aggregate_weighted(report.categories, report.weights), Scale{0, 1});
  return report;
}

}  // namespace umm
