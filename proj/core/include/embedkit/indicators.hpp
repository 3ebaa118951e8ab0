#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "embedkit/dataset.hpp"

namespace embedkit {

// A {0,1} explanatory variable together with the serialized rule that
// produced it, so reports stay auditable.
struct IndicatorFeature {
  std::string name;
  std::vector<int> values;
  nlohmann::json definition;
};

// "At least min_hits distinct phrases appear" style rule. Matching is plain
// substring, case-insensitive unless asked otherwise; a detected list can
// count as one extra hit.
struct PhraseRule {
  std::vector<std::string> phrases;
  int min_hits = 1;
  bool case_sensitive = false;
  bool count_lists_as_hit = false;

  nlohmann::json to_json() const;
  static PhraseRule from_json(const nlohmann::json& j);
};

// 1 where the sample's label belongs to `targets`.
IndicatorFeature label_indicator(const LabeledDataset& d,
                                 const std::vector<std::string>& targets);

IndicatorFeature phrase_indicator(const std::vector<std::string>& texts,
                                  const PhraseRule& rule);

// 1 when any listed word appears with word boundaries on both sides
// (case-insensitive, no stemming).
IndicatorFeature word_indicator(const std::vector<std::string>& texts,
                                const std::vector<std::string>& words);

// 1 when the boundary-matched occurrences across word_set total at least
// min_count.
IndicatorFeature count_indicator(const std::vector<std::string>& texts,
                                 const std::vector<std::string>& word_set,
                                 int min_count);

// 1 when the text is shorter than threshold_chars after collapsing runs of
// whitespace to single spaces. Counts Unicode scalar values.
IndicatorFeature length_indicator(const std::vector<std::string>& texts,
                                  std::size_t threshold_chars);

// Ratio of scalar values outside [A-Za-z0-9 ] to total; 1 when the ratio
// exceeds threshold_ratio.
IndicatorFeature special_char_ratio_indicator(
    const std::vector<std::string>& texts, double threshold_ratio);

// 1 when at least two lines look like list items: optional indent, then
// "- ", "* ", or digits followed by "." or ")" and a space.
IndicatorFeature list_indicator(const std::vector<std::string>& texts);

// Dispatch on a serialized rule ({"kind": ...}); text rules read d.texts().
IndicatorFeature apply_rule(const nlohmann::json& rule, const LabeledDataset& d);

// Matching/counting primitives, exposed for tests and rule composition.
bool text_matches_list_pattern(const std::string& text);
std::size_t count_word_occurrences(const std::string& text,
                                   const std::string& word);
std::size_t normalized_length(const std::string& text);
double special_char_ratio(const std::string& text);

// Rule presets with the exact parameterizations used for the shipped report
// tables. Known names: stackexchange-phrases, arxiv-five-words,
// arxiv-econ-words, we-our-count, short-abstract.
namespace presets {
PhraseRule stackexchange_phrases();
std::vector<std::string> arxiv_five_words();
std::vector<std::string> arxiv_econ_words();
nlohmann::json rule_by_name(const std::string& name);
std::vector<std::string> names();
}  // namespace presets

}  // namespace embedkit
