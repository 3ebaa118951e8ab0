#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "doctest.h"
#include "embedkit/errors.hpp"
#include "embedkit/indicators.hpp"

using namespace embedkit;

namespace {

LabeledDataset tiny_dataset(const std::vector<std::string>& labels) {
  std::vector<Sample> samples(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    samples[i].id = "t" + std::to_string(i);
    samples[i].label = labels[i];
  }
  return LabeledDataset(samples);
}

}  // namespace

TEST_CASE("label_indicator marks target labels") {
  const LabeledDataset d = tiny_dataset({"a", "b", "a"});
  CHECK(label_indicator(d, {"a"}).values == std::vector<int>{1, 0, 1});
  CHECK(label_indicator(d, {"a", "b"}).values == std::vector<int>{1, 1, 1});
  CHECK_THROWS_AS(label_indicator(d, {"missing"}), ValidationError);
}

TEST_CASE("phrase_indicator counts distinct phrases") {
  PhraseRule rule;
  rule.phrases = {"hope this helps", "alternatively"};
  rule.min_hits = 2;
  const std::vector<std::string> texts = {
      "I hope this helps! Alternatively, try the other approach.",
      "",
      "hope this helps",
      "hope this helps. hope this helps. hope this helps.",  // one distinct phrase
  };
  CHECK(phrase_indicator(texts, rule).values == std::vector<int>{1, 0, 0, 0});
}

TEST_CASE("phrase_indicator can count lists as one hit") {
  PhraseRule rule;
  rule.phrases = {"in conclusion"};
  rule.min_hits = 2;
  rule.count_lists_as_hit = true;
  const std::vector<std::string> texts = {
      "In conclusion:\n1. first\n2. second",
      "In conclusion, that is all.",
      "1. first\n2. second",
  };
  CHECK(phrase_indicator(texts, rule).values == std::vector<int>{1, 0, 0});
}

TEST_CASE("phrase_indicator with min_hits 1 equals the disjunction of singles") {
  const std::vector<std::string> texts = {
      "note the example here", "nothing to see", "worth mentioning",
      "an ExAmPlE in odd case", "noted"};
  PhraseRule rule;
  rule.phrases = {"example", "worth mentioning", "note"};
  rule.min_hits = 1;
  const IndicatorFeature joint = phrase_indicator(texts, rule);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    int any = 0;
    for (const std::string& p : rule.phrases) {
      PhraseRule single;
      single.phrases = {p};
      single.min_hits = 1;
      any = any || phrase_indicator(texts, single).values[i];
    }
    CHECK(joint.values[i] == any);
  }
}

TEST_CASE("word_indicator matches on word boundaries only") {
  const std::vector<std::string> texts = {
      "a valuable insight",
      "insignificance",
      "plain text with none of them",
      "significant!",
      "significantly better",
  };
  const IndicatorFeature f = word_indicator(texts, {"valuable", "insight", "significant"});
  CHECK(f.values == std::vector<int>{1, 0, 0, 1, 0});
}

TEST_CASE("count_indicator thresholds total occurrences") {
  const std::vector<std::string> texts = {
      "we think we know; our work shows we improved our results",  // 3 we + 2 our
      "we and our",                                                // 2
      "",
      "We, we, we, we, WE",  // 5
      "power tower our",     // 1 boundary match
  };
  const IndicatorFeature f = count_indicator(texts, {"we", "our"}, 5);
  CHECK(f.values == std::vector<int>{1, 0, 0, 1, 0});
}

TEST_CASE("length_indicator uses strict inequality on normalized length") {
  const std::string base(1499, 'x');
  const std::string exact(1500, 'x');
  // 1502 raw chars but collapses to 1499 + 1 space + 1 = 1501 -> not short.
  const std::string spaced = base + "  \n y";
  const IndicatorFeature f = length_indicator({base, exact, spaced}, 1500);
  CHECK(f.values == std::vector<int>{1, 0, 0});
}

TEST_CASE("special_char_ratio_indicator computes the special fraction") {
  CHECK(special_char_ratio("abc") == 0.0);
  CHECK(special_char_ratio("{};'") == 1.0);
  CHECK(special_char_ratio("a{b}") == doctest::Approx(0.5));
  CHECK(special_char_ratio("") == 0.0);
  const IndicatorFeature f =
      special_char_ratio_indicator({"abc", "{};'", "a{b}"}, 0.25);
  CHECK(f.values == std::vector<int>{0, 1, 1});
}

TEST_CASE("list_indicator needs two list-looking lines") {
  CHECK(list_indicator({"1. foo\n2. bar"}).values == std::vector<int>{1});
  CHECK(list_indicator({"- only one item"}).values == std::vector<int>{0});
  CHECK(list_indicator({"prose with no line starts\nmatching the pattern"}).values ==
        std::vector<int>{0});
  CHECK(list_indicator({"  - indented\n\t* starred"}).values == std::vector<int>{1});
  CHECK(list_indicator({"12) numbered\n3. dotted"}).values == std::vector<int>{1});
  CHECK(list_indicator({"-dash without space\n-again"}).values == std::vector<int>{0});
}

TEST_CASE("appearance rules are monotone under appended text") {
  const std::vector<std::string> texts = {"plain text", "we note an example"};
  const std::vector<std::string> longer = {texts[0] + " worth mentioning we our we our we our",
                                           texts[1] + " additionally 1. a\n2. b"};
  PhraseRule rule;
  rule.phrases = {"worth mentioning", "additionally", "note", "example"};
  rule.min_hits = 1;
  const auto before = phrase_indicator(texts, rule).values;
  const auto after = phrase_indicator(longer, rule).values;
  for (std::size_t i = 0; i < texts.size(); ++i) CHECK(after[i] >= before[i]);

  const auto wb = word_indicator(texts, {"our"}).values;
  const auto wa = word_indicator(longer, {"our"}).values;
  for (std::size_t i = 0; i < texts.size(); ++i) CHECK(wa[i] >= wb[i]);
}

TEST_CASE("rules serialize and round-trip through JSON") {
  const PhraseRule rule = presets::stackexchange_phrases();
  const nlohmann::json j = rule.to_json();
  const PhraseRule back = PhraseRule::from_json(j);
  CHECK(back.phrases == rule.phrases);
  CHECK(back.min_hits == rule.min_hits);
  CHECK(back.count_lists_as_hit == rule.count_lists_as_hit);

  // apply_rule dispatch drives every kind end-to-end.
  std::vector<Sample> samples(2);
  samples[0] = {"x0", "a", "we our we our we:\n1. x\n2. y"};
  samples[1] = {"x1", "b", "plain"};
  const LabeledDataset d{samples};
  CHECK(apply_rule(nlohmann::json{{"kind", "label"}, {"targets", {"a"}}}, d).values ==
        std::vector<int>{1, 0});
  CHECK(apply_rule(nlohmann::json{{"kind", "count"}, {"words", {"we", "our"}}, {"min_count", 4}}, d)
            .values == std::vector<int>{1, 0});
  CHECK(apply_rule(nlohmann::json{{"kind", "list"}}, d).values == std::vector<int>{1, 0});
  CHECK_THROWS_AS(apply_rule(nlohmann::json{{"kind", "nope"}}, d), ValidationError);
}

TEST_CASE("shipped presets encode the exact rule parameterizations") {
  const PhraseRule stack = presets::stackexchange_phrases();
  CHECK(stack.min_hits == 2);
  CHECK(stack.count_lists_as_hit);
  CHECK(stack.phrases.size() == 15);

  // Positive: two phrases. Negative: one phrase only.
  CHECK(phrase_indicator({"I apologize. Hope this helps!"}, stack).values[0] == 1);
  CHECK(phrase_indicator({"I apologize for the error."}, stack).values[0] == 0);
  // A list plus one phrase also crosses the threshold.
  CHECK(phrase_indicator({"Note:\n1. first\n2. second"}, stack).values[0] == 1);

  const nlohmann::json five = presets::rule_by_name("arxiv-five-words");
  CHECK(five["words"].size() == 8);
  const nlohmann::json econ = presets::rule_by_name("arxiv-econ-words");
  CHECK(econ["words"].size() == 6);
  const nlohmann::json count = presets::rule_by_name("we-our-count");
  CHECK(count["min_count"] == 5);
  const nlohmann::json len = presets::rule_by_name("short-abstract");
  CHECK(len["threshold_chars"] == 1500);
  CHECK_THROWS_AS(presets::rule_by_name("bogus"), ValidationError);
  CHECK(presets::names().size() == 5);
}
