#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "umm/error.hpp"
#include "umm/judge.hpp"
#include "umm/mocks.hpp"
#include "umm/scoring.hpp"
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

std::vector<ChoiceOption> abcd() {
  return {{"A", "fruit"}, {"B", "animal"}, {"C", "color"}, {"D", "tool"}};
}

std::vector<CategoryAggregate> cats(const std::vector<double>& values) {
  std::vector<CategoryAggregate> out;
  for (std::size_t i = 0; i < values.size(); ++i) out.push_back({"c" + std::to_string(i), 1, values[i]});
  return out;
}

std::string two(double v) { return format_fixed(v, 2); }

InferenceResult text_result(const std::string& id, const std::string& text) {
  InferenceResult r;
  r.sample_id = id;
  r.text = text;
  return r;
}

}  // namespace

TEST_SUITE("scoring") {
  TEST_CASE("extract_choice cascade") {
    const auto o = abcd();
    CHECK(extract_choice("The answer is B.", o) == "B");
    CHECK(extract_choice("B", o) == "B");
    CHECK(extract_choice("  (c) ", o) == "C");
    CHECK(extract_choice("answer is: d", o) == "D");
    CHECK(extract_choice("It is clearly an animal.", o) == "B");
    CHECK_FALSE(extract_choice("It could be A or B", o).has_value());
    CHECK_FALSE(extract_choice("either a fruit or a tool", o).has_value());
    CHECK_FALSE(extract_choice("", o).has_value());
    // Deterministic and total over odd inputs.
    for (const char* s : {"???", "A A A", "The answer is Z", "\n\n", "answer is"}) {
      CHECK(extract_choice(s, o) == extract_choice(s, o));
    }
  }

  TEST_CASE("options from meta") {
    const auto m = options_from_meta(json{{"options", {{"A", "x"}, {"B", "y"}}}});
    REQUIRE(m.size() == 2);
    CHECK(m[1].label == "B");
    const auto l = options_from_meta(json{{"options", {"x", "y", "z"}}});
    REQUIRE(l.size() == 3);
    CHECK(l[2].label == "C");
    CHECK(l[2].text == "z");
  }

  TEST_CASE("free-form matching") {
    CHECK(free_form_match("The result is 42.", "42"));
    CHECK(free_form_match("x = 3.50", "3.5"));
    CHECK_FALSE(free_form_match("about 41", "42"));
    CHECK(free_form_match("  Paris ", "paris"));
  }

  TEST_CASE("aggregate_mean") {
    CHECK(two(aggregate_mean(cats({99.38, 94.19, 78.75, 87.77, 51.00, 61.75}))) == "78.81");
    CHECK(two(aggregate_mean(cats({98.75, 98.99, 81.25, 92.55, 75.00, 73.00}))) == "86.59");
    CHECK(two(aggregate_mean(cats({0, 0, 0, 0, 0, 0}))) == "0.00");
    CHECK(code_of([] { aggregate_mean(std::vector<CategoryAggregate>{}); }) == ErrorCode::EmptyInput);
  }

  TEST_CASE("aggregate_weighted") {
    const std::vector<CategoryAggregate> mv{{"multi_choice", 1, 80.19}, {"free_form", 1, 61.52}};
    const std::map<std::string, double> w{{"multi_choice", 0.54}, {"free_form", 0.46}};
    CHECK(two(aggregate_weighted(mv, w)) == "71.60");
    const std::vector<CategoryAggregate> show{{"multi_choice", 1, 63.52}, {"free_form", 1, 37.39}};
    CHECK(two(aggregate_weighted(show, w)) == "51.50");

    const auto c = cats({10, 20, 60});
    const std::map<std::string, double> uniform{{"c0", 1.0 / 3}, {"c1", 1.0 / 3}, {"c2", 1.0 / 3}};
    CHECK(aggregate_weighted(c, uniform) == doctest::Approx(aggregate_mean(c)));
    CHECK(aggregate_weighted(cats({7, 9}), {{"c0", 1.0}, {"c1", 0.0}}) == 7);

    CHECK(code_of([&] { aggregate_weighted(c, {{"c0", 0.5}, {"c1", 0.5}}); }) == ErrorCode::WeightMismatch);
    CHECK(code_of([&] { aggregate_weighted(c, {{"c0", 0.5}, {"c1", 0.5}, {"zz", 0.0}}); }) ==
          ErrorCode::WeightMismatch);
    CHECK(code_of([&] { aggregate_weighted(c, {{"c0", 1.5}, {"c1", -0.5}, {"c2", 0.0}}); }) ==
          ErrorCode::WeightMismatch);
  }

  TEST_CASE("count weights and sums") {
    const std::vector<CategoryAggregate> c{{"a", 3, 1.0}, {"b", 1, 0.0}};
    CHECK(aggregate_count_weighted(c) == doctest::Approx(0.75));
    CHECK(aggregate(Aggregation::sum, c) == doctest::Approx(1.0));
    CHECK(count_weights(c).at("a") == doctest::Approx(0.75));
    CHECK(parse_aggregation(to_string(Aggregation::count_weighted)) == Aggregation::count_weighted);
  }

  TEST_CASE("fixture overalls sit inside their category hull") {
    struct F {
      const char* file;
      std::size_t first, last, overall;
    };
    for (const F& f : {F{"mmmu_subscores.csv", 1, 7, 7}, F{"wise_subscores.csv", 1, 7, 7},
                       F{"mathvista_subscores.csv", 2, 4, 1}, F{"geneval_subscores.csv", 1, 7, 7}}) {
      const auto t = test::read_csv(test::fixture(f.file));
      REQUIRE_FALSE(t.rows.empty());
      for (std::size_t r = 0; r < t.rows.size(); ++r) {
        CAPTURE(f.file);
        CAPTURE(t.rows[r][0]);
        const auto v = t.numbers(r, f.first, f.last);
        const double overall = std::stod(t.rows[r][f.overall]);
        CHECK(overall >= *std::min_element(v.begin(), v.end()) - 1e-9);
        CHECK(overall <= *std::max_element(v.begin(), v.end()) + 1e-9);
      }
    }
  }

  TEST_CASE("GEdit Avg column is the unweighted category mean") {
    for (const char* file : {"gedit_en_overall.csv", "gedit_en_intersection.csv"}) {
      const auto t = test::read_csv(test::fixture(file));
      REQUIRE(t.header.size() == 13);
      for (std::size_t r = 0; r < t.rows.size(); ++r) {
        CAPTURE(file);
        CAPTURE(t.rows[r][0]);
        std::vector<CategoryAggregate> c;
        for (std::size_t k = 1; k < 12; ++k) c.push_back({t.header[k], 1, std::stod(t.rows[r][k])});
        CHECK(std::abs(aggregate_mean(c) - std::stod(t.rows[r][12])) <= 0.005);
      }
    }
  }

  TEST_CASE("multiple-choice accuracy") {
    std::vector<SampleRecord> recs;
    std::vector<InferenceResult> res;
    for (int i = 0; i < 20; ++i) {
      const std::string id = "q" + std::to_string(100 + i);
      recs.push_back({id, "pick", {}, "A", i < 10 ? "x" : "y", json{{"options", {"p", "q", "r", "s"}}}});
      res.push_back(text_result(id, i < 13 ? "The answer is A." : "The answer is C."));
    }
    const auto all = score_multiple_choice(recs, res);
    CHECK(all.accuracy == doctest::Approx(0.65));
    REQUIRE(all.categories.size() == 2);
    CHECK(all.categories[0].value == doctest::Approx(1.0));
    CHECK(all.categories[1].value == doctest::Approx(0.3));

    std::reverse(res.begin(), res.end());
    CHECK(score_multiple_choice(recs, res).accuracy == doctest::Approx(0.65));

    res.pop_back();
    CHECK(code_of([&] { score_multiple_choice(recs, res); }) == ErrorCode::Misaligned);
    CHECK(code_of([&] { score_multiple_choice({}, {}); }) == ErrorCode::EmptyInput);
  }

  TEST_CASE("edit scores") {
    const auto e = make_edit_score(4, 9);
    CHECK(e.o == doctest::Approx(6.0).epsilon(1e-12));
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<std::pair<std::string, EditScore>> samples;
      for (int i = 0; i < 12; ++i) {
        const auto s = make_edit_score(rng.uniform(0, 10), rng.uniform(0, 10));
        CHECK(std::abs(s.o * s.o - s.sc * s.pq) < 1e-9);
        samples.emplace_back(i % 2 ? "color" : "style", s);
      }
      const auto t = edit_table(samples);
      for (std::size_t c = 0; c < t.o.size(); ++c) {
        CHECK(t.o[c].value <= std::sqrt(t.sc[c].value * t.pq[c].value) + 1e-12);
      }
      auto shuffled = samples;
      std::reverse(shuffled.begin(), shuffled.end());
      CHECK(edit_table(shuffled).avg_o == doctest::Approx(t.avg_o).epsilon(1e-12));
    }
  }

  TEST_CASE("edit benchmark scoring with a table judge") {
    const auto dir = test::scratch("score-edit");
    write_file(dir / "table.json",
               R"({"e1": {"sc": 4, "pq": 9}, "e2": {"sc": 8, "pq": 8}, "e3": {"sc": 6, "pq": 6}})");
    JudgeConfig jc;
    jc.endpoint = "mock:table:" + (dir / "table.json").string();
    jc.template_id = "viescore-edit/v1";
    JudgeClient judge(jc);

    std::vector<SampleRecord> recs;
    std::vector<InferenceResult> res;
    for (int i = 1; i <= 4; ++i) {
      const std::string id = "e" + std::to_string(i);
      recs.push_back({id, "edit it", {pattern_image(i, 4, 4)}, "", i <= 2 ? "color" : "style",
                      json{{"intersection", i != 2}}});
      InferenceResult r;
      r.sample_id = id;
      r.images.push_back(pattern_image(10 + i, 4, 4));
      res.push_back(r);
    }
    const auto rep = score_edit_benchmark(recs, res, judge);
    // e4 has no table entry: recorded, excluded.
    REQUIRE(rep.failures.size() == 1);
    CHECK(rep.failures[0].sample_id == "e4");
    REQUIRE(rep.categories.size() == 2);
    CHECK(rep.categories[0].category == "color");
    CHECK(rep.categories[0].value == doctest::Approx((6.0 + 8.0) / 2));
    CHECK(rep.categories[1].value == doctest::Approx(6.0));
    CHECK(rep.overall.value == doctest::Approx((7.0 + 6.0) / 2));
    CHECK(rep.breakdowns.at("SC")[0].value == doctest::Approx(6.0));
    CHECK(rep.summary.count("intersection/O") == 1);
    CHECK(rep.summary.at("intersection/O") == doctest::Approx((6.0 + 6.0) / 2));
    fs::remove_all(dir);
  }

  TEST_CASE("MME subtask values") {
    auto build = [](int correct_per_image) {
      std::vector<SampleRecord> recs;
      std::vector<InferenceResult> res;
      for (int img = 0; img < 4; ++img) {
        for (int q = 0; q < 2; ++q) {
          const std::string id = "m" + std::to_string(img) + std::to_string(q);
          recs.push_back({id, "?", {}, q == 0 ? "yes" : "no", "color", json{{"image_id", std::to_string(img)}}});
          const bool right = q < correct_per_image;
          res.push_back(text_result(id, right == (q == 0) ? "Yes" : "No"));
        }
      }
      return std::pair(recs, res);
    };
    {
      auto [recs, res] = build(2);
      const auto s = score_mme(recs, res);
      REQUIRE(s.per_subtask.size() == 1);
      CHECK(s.per_subtask[0].value == doctest::Approx(200));
      CHECK(s.perception == doctest::Approx(200));
      CHECK(s.cognition == 0);
    }
    {
      auto [recs, res] = build(1);
      CHECK(score_mme(recs, res).per_subtask[0].value == doctest::Approx(50));
    }
    {
      auto [recs, res] = build(2);
      recs.pop_back();
      res.pop_back();
      CHECK(code_of([&] { score_mme(recs, res); }) == ErrorCode::OddQuestionCount);
    }
    const auto std_comp = MmeComposition::standard();
    CHECK(std_comp.perception.size() == 10);
    CHECK(std_comp.cognition.size() == 4);
  }

  TEST_CASE("MME perception bound") {
    Rng rng(3);
    const auto comp = MmeComposition::standard();
    std::vector<SampleRecord> recs;
    std::vector<InferenceResult> res;
    for (const auto& sub : comp.perception) {
      for (int img = 0; img < 3; ++img) {
        for (int q = 0; q < 2; ++q) {
          const std::string id = sub + std::to_string(img) + std::to_string(q);
          recs.push_back({id, "?", {}, "yes", sub, json{{"image_id", sub + std::to_string(img)}}});
          res.push_back(text_result(id, rng.uniform() < 0.5 ? "yes" : "no"));
        }
      }
    }
    const auto s = score_mme(recs, res);
    CHECK(s.perception >= 0);
    CHECK(s.perception <= 200.0 * comp.perception.size());
    for (const auto& c : s.per_subtask) CHECK(Scale{0, 200}.contains(c.value));
  }

  TEST_CASE("WISE weighting") {
    std::vector<SampleRecord> recs;
    std::map<std::string, double> wi;
    for (int i = 0; i < 9; ++i) {
      const std::string id = "w" + std::to_string(i);
      recs.push_back({id, "draw", {}, "", i < 6 ? "culture" : "physics", {}});
      wi[id] = i < 6 ? 0.3 : 0.9;
    }
    const auto r = score_wise(recs, wi);
    CHECK(r.overall.value == doctest::Approx((6 * 0.3 + 3 * 0.9) / 9));
    CHECK(r.overall.value >= 0.3);
    CHECK(r.overall.value <= 0.9);
    const auto u = score_wise(recs, wi, std::map<std::string, double>{{"culture", 0.5}, {"physics", 0.5}});
    CHECK(u.overall.value == doctest::Approx(0.6));

    std::vector<SampleRecord> one(recs.begin(), recs.begin() + 6);
    const auto single = score_wise(one, wi);
    REQUIRE(single.categories.size() == 1);
    CHECK(single.overall.value == doctest::Approx(single.categories[0].value));

    for (auto& [id, v] : wi) v = 1.0;
    CHECK(score_wise(recs, wi).overall.value == doctest::Approx(1.0));
  }
}
