#include "embedkit/indicators.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "embedkit/errors.hpp"

namespace embedkit {

namespace {

bool is_ascii_alnum(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9');
}

std::string ascii_lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

// Number of Unicode scalar values; continuation bytes are skipped, invalid
// lead bytes count as one scalar each.
std::size_t utf8_scalar_count(const std::string& s) {
  std::size_t count = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++count;
  }
  return count;
}

IndicatorFeature make_feature(std::string name, std::vector<int> values,
                              nlohmann::json definition) {
  IndicatorFeature f;
  f.name = std::move(name);
  f.values = std::move(values);
  f.definition = std::move(definition);
  return f;
}

}  // namespace

nlohmann::json PhraseRule::to_json() const {
  nlohmann::json j;
  j["kind"] = "phrase";
  j["phrases"] = phrases;
  j["min_hits"] = min_hits;
  j["case_sensitive"] = case_sensitive;
  j["count_lists_as_hit"] = count_lists_as_hit;
  return j;
}

PhraseRule PhraseRule::from_json(const nlohmann::json& j) {
  PhraseRule r;
  r.phrases = j.at("phrases").get<std::vector<std::string>>();
  r.min_hits = j.value("min_hits", 1);
  r.case_sensitive = j.value("case_sensitive", false);
  r.count_lists_as_hit = j.value("count_lists_as_hit", false);
  if (r.phrases.empty()) throw ValidationError("phrase rule: empty phrase list");
  if (r.min_hits < 1) throw ValidationError("phrase rule: min_hits must be >= 1");
  return r;
}

IndicatorFeature label_indicator(const LabeledDataset& d,
                                 const std::vector<std::string>& targets) {
  if (targets.empty()) throw ValidationError("label_indicator: no target labels");
  for (const std::string& t : targets) d.class_index(t);  // unknown label check
  const std::unordered_set<std::string> target_set(targets.begin(), targets.end());
  std::vector<int> values;
  values.reserve(d.size());
  for (const Sample& s : d.samples()) {
    values.push_back(target_set.count(s.label) ? 1 : 0);
  }
  nlohmann::json def;
  def["kind"] = "label";
  def["targets"] = targets;
  std::string name = "label:" + targets[0];
  for (std::size_t i = 1; i < targets.size(); ++i) name += "|" + targets[i];
  return make_feature(std::move(name), std::move(values), std::move(def));
}

bool text_matches_list_pattern(const std::string& text) {
  std::size_t matched_lines = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::size_t i = pos;
    while (i < eol && (text[i] == ' ' || text[i] == '\t')) ++i;
    bool hit = false;
    if (i < eol && (text[i] == '-' || text[i] == '*')) {
      hit = i + 1 < eol && text[i + 1] == ' ';
    } else {
      std::size_t j = i;
      while (j < eol && text[j] >= '0' && text[j] <= '9') ++j;
      if (j > i && j < eol && (text[j] == '.' || text[j] == ')')) {
        hit = j + 1 < eol && text[j + 1] == ' ';
      }
    }
    if (hit) ++matched_lines;
    if (eol == text.size()) break;
    pos = eol + 1;
  }
  return matched_lines >= 2;
}

IndicatorFeature phrase_indicator(const std::vector<std::string>& texts,
                                  const PhraseRule& rule) {
  if (rule.phrases.empty()) throw ValidationError("phrase rule: empty phrase list");
  if (rule.min_hits < 1) throw ValidationError("phrase rule: min_hits must be >= 1");

  std::vector<std::string> needles;
  {
    std::unordered_set<std::string> seen;
    for (const std::string& p : rule.phrases) {
      const std::string needle = rule.case_sensitive ? p : ascii_lower(p);
      if (seen.insert(needle).second) needles.push_back(needle);
    }
  }

  std::vector<int> values;
  values.reserve(texts.size());
  for (const std::string& text : texts) {
    const std::string haystack = rule.case_sensitive ? text : ascii_lower(text);
    int hits = 0;
    for (const std::string& needle : needles) {
      if (haystack.find(needle) != std::string::npos) ++hits;
    }
    if (rule.count_lists_as_hit && text_matches_list_pattern(text)) ++hits;
    values.push_back(hits >= rule.min_hits ? 1 : 0);
  }
  return make_feature("phrase", std::move(values), rule.to_json());
}

std::size_t count_word_occurrences(const std::string& text,
                                   const std::string& word) {
  if (word.empty()) return 0;
  const std::string haystack = ascii_lower(text);
  const std::string needle = ascii_lower(word);
  std::size_t count = 0;
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string::npos) {
    const bool left_ok =
        pos == 0 || !is_ascii_alnum(static_cast<unsigned char>(haystack[pos - 1]));
    const std::size_t end = pos + needle.size();
    const bool right_ok =
        end >= haystack.size() ||
        !is_ascii_alnum(static_cast<unsigned char>(haystack[end]));
    if (left_ok && right_ok) {
      ++count;
      pos = end;
    } else {
      ++pos;
    }
  }
  return count;
}

IndicatorFeature word_indicator(const std::vector<std::string>& texts,
                                const std::vector<std::string>& words) {
  if (words.empty()) throw ValidationError("word_indicator: empty word list");
  std::vector<int> values;
  values.reserve(texts.size());
  for (const std::string& text : texts) {
    int hit = 0;
    for (const std::string& w : words) {
      if (count_word_occurrences(text, w) > 0) {
        hit = 1;
        break;
      }
    }
    values.push_back(hit);
  }
  nlohmann::json def;
  def["kind"] = "word";
  def["words"] = words;
  return make_feature("word", std::move(values), std::move(def));
}

IndicatorFeature count_indicator(const std::vector<std::string>& texts,
                                 const std::vector<std::string>& word_set,
                                 int min_count) {
  if (word_set.empty()) throw ValidationError("count_indicator: empty word list");
  if (min_count < 1) throw ValidationError("count_indicator: min_count must be >= 1");
  std::vector<int> values;
  values.reserve(texts.size());
  for (const std::string& text : texts) {
    std::size_t total = 0;
    for (const std::string& w : word_set) total += count_word_occurrences(text, w);
    values.push_back(total >= static_cast<std::size_t>(min_count) ? 1 : 0);
  }
  nlohmann::json def;
  def["kind"] = "count";
  def["words"] = word_set;
  def["min_count"] = min_count;
  return make_feature("count", std::move(values), std::move(def));
}

std::size_t normalized_length(const std::string& text) {
  std::string collapsed;
  collapsed.reserve(text.size());
  bool in_space = false;
  for (unsigned char c : text) {
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
                       c == '\f' || c == '\v';
    if (space) {
      in_space = true;
    } else {
      if (in_space && !collapsed.empty()) collapsed.push_back(' ');
      in_space = false;
      collapsed.push_back(static_cast<char>(c));
    }
  }
  return utf8_scalar_count(collapsed);
}

IndicatorFeature length_indicator(const std::vector<std::string>& texts,
                                  std::size_t threshold_chars) {
  if (threshold_chars == 0) {
    throw ValidationError("length_indicator: threshold must be positive");
  }
  std::vector<int> values;
  values.reserve(texts.size());
  for (const std::string& text : texts) {
    values.push_back(normalized_length(text) < threshold_chars ? 1 : 0);
  }
  nlohmann::json def;
  def["kind"] = "length";
  def["threshold_chars"] = threshold_chars;
  return make_feature("length<" + std::to_string(threshold_chars),
                      std::move(values), std::move(def));
}

double special_char_ratio(const std::string& text) {
  std::size_t total = 0;
  std::size_t special = 0;
  for (std::size_t i = 0; i < text.size();) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if ((c & 0xC0) == 0x80) {  // stray continuation byte
      ++total;
      ++special;
      ++i;
      continue;
    }
    std::size_t len = 1;
    if ((c & 0xE0) == 0xC0) len = 2;
    else if ((c & 0xF0) == 0xE0) len = 3;
    else if ((c & 0xF8) == 0xF0) len = 4;
    ++total;
    if (!(is_ascii_alnum(c) || c == ' ')) ++special;
    i += len;
  }
  if (total == 0) return 0.0;
  return static_cast<double>(special) / static_cast<double>(total);
}

IndicatorFeature special_char_ratio_indicator(
    const std::vector<std::string>& texts, double threshold_ratio) {
  if (!(threshold_ratio > 0.0 && threshold_ratio < 1.0)) {
    throw ValidationError("special_char_ratio_indicator: threshold must lie in (0, 1)");
  }
  std::vector<int> values;
  values.reserve(texts.size());
  for (const std::string& text : texts) {
    values.push_back(special_char_ratio(text) > threshold_ratio ? 1 : 0);
  }
  nlohmann::json def;
  def["kind"] = "special_char_ratio";
  def["threshold_ratio"] = threshold_ratio;
  def["alphabet"] = "ascii_alnum_plus_space";
  return make_feature("special_char_ratio", std::move(values), std::move(def));
}

IndicatorFeature list_indicator(const std::vector<std::string>& texts) {
  std::vector<int> values;
  values.reserve(texts.size());
  for (const std::string& text : texts) {
    values.push_back(text_matches_list_pattern(text) ? 1 : 0);
  }
  nlohmann::json def;
  def["kind"] = "list";
  return make_feature("lists", std::move(values), std::move(def));
}

IndicatorFeature apply_rule(const nlohmann::json& rule,
                            const LabeledDataset& d) {
  if (!rule.is_object() || !rule.contains("kind")) {
    throw ValidationError("indicator rule must be an object with a \"kind\"");
  }
  const std::string kind = rule["kind"].get<std::string>();
  if (kind == "label") {
    return label_indicator(d, rule.at("targets").get<std::vector<std::string>>());
  }
  if (kind == "phrase") return phrase_indicator(d.texts(), PhraseRule::from_json(rule));
  if (kind == "word") {
    return word_indicator(d.texts(), rule.at("words").get<std::vector<std::string>>());
  }
  if (kind == "count") {
    return count_indicator(d.texts(),
                           rule.at("words").get<std::vector<std::string>>(),
                           rule.at("min_count").get<int>());
  }
  if (kind == "length") {
    return length_indicator(d.texts(), rule.at("threshold_chars").get<std::size_t>());
  }
  if (kind == "special_char_ratio") {
    return special_char_ratio_indicator(d.texts(),
                                        rule.at("threshold_ratio").get<double>());
  }
  if (kind == "list") return list_indicator(d.texts());
  throw ValidationError("unknown indicator rule kind \"" + kind + "\"");
}

namespace presets {

PhraseRule stackexchange_phrases() {
  PhraseRule r;
  r.phrases = {"alternatively",
               "example",
               "helps",
               "if you have any questions",
               "worth mentioning",
               "additionally",
               "note",
               "in this case",
               "apologize",
               "you are correct",
               "ultimately",
               "this shows",
               "in conclusion",
               ":\n",
               "AI language model"};
  r.min_hits = 2;
  r.case_sensitive = false;
  r.count_lists_as_hit = true;
  return r;
}

std::vector<std::string> arxiv_five_words() {
  return {"significant", "important",   "contribution", "innovation",
          "valuable",    "insight",     "demonstrates", "understanding"};
}

std::vector<std::string> arxiv_econ_words() {
  return {"innovation",   "valuable",      "insight",
          "demonstrates", "understanding", "implication"};
}

nlohmann::json rule_by_name(const std::string& name) {
  if (name == "stackexchange-phrases") return stackexchange_phrases().to_json();
  if (name == "arxiv-five-words") {
    nlohmann::json j;
    j["kind"] = "word";
    j["words"] = arxiv_five_words();
    return j;
  }
  if (name == "arxiv-econ-words") {
    nlohmann::json j;
    j["kind"] = "word";
    j["words"] = arxiv_econ_words();
    return j;
  }
  if (name == "we-our-count") {
    nlohmann::json j;
    j["kind"] = "count";
    j["words"] = std::vector<std::string>{"we", "our"};
    j["min_count"] = 5;
    return j;
  }
  if (name == "short-abstract") {
    nlohmann::json j;
    j["kind"] = "length";
    j["threshold_chars"] = 1500;
    return j;
  }
  throw ValidationError("unknown indicator preset \"" + name + "\"");
}

std::vector<std::string> names() {
  return {"stackexchange-phrases", "arxiv-five-words", "arxiv-econ-words",
          "we-our-count", "short-abstract"};
}

}  // namespace presets

}  // namespace embedkit
