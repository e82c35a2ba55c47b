#include "afsp/prompting.hpp"

#include <array>

#include "afsp/error.hpp"
#include "afsp/text.hpp"

namespace afsp {

namespace {

bool iequals_ascii(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    char x = a[i];
    char y = b[i];
    if (x >= 'A' && x <= 'Z') x = static_cast<char>(x + 32);
    if (y >= 'A' && y <= 'Z') y = static_cast<char>(y + 32);
    if (x != y) return false;
  }
  return true;
}

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// Removes "<label> translation:" from the front of s, if present.
std::string_view strip_label(std::string_view s, std::string_view lang) {
  constexpr std::string_view kSuffix = " translation:";
  if (!lang.empty()) {
    const auto n = lang.size() + kSuffix.size();
    if (s.size() >= n && iequals_ascii(s.substr(0, lang.size()), lang) &&
        iequals_ascii(s.substr(lang.size(), kSuffix.size()), kSuffix)) {
      return s.substr(n);
    }
    return s;
  }
  std::size_t i = 0;
  while (i < s.size() && is_ascii_alpha(s[i])) ++i;
  if (i > 0 && i <= 32 && s.size() >= i + kSuffix.size() && iequals_ascii(s.substr(i, kSuffix.size()), kSuffix)) {
    return s.substr(i + kSuffix.size());
  }
  return s;
}

std::string_view strip_quotes(std::string_view s) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 6> kQuotes{{
      {"\"", "\""},
      {"'", "'"},
      {"“", "”"},
      {"‘", "’"},
      {"「", "」"},
      {"『", "』"},
  }};
  for (const auto& [open, close] : kQuotes) {
    if (s.size() >= open.size() + close.size() && s.substr(0, open.size()) == open &&
        s.substr(s.size() - close.size()) == close) {
      return s.substr(open.size(), s.size() - open.size() - close.size());
    }
  }
  return s;
}

}  // namespace

const PromptTemplate& prompt_template_v1() {
  static const PromptTemplate kV1{
      "v1",
      "You are a professional translator. I will give you one or more examples of text fragments, where the "
      "first one is in {src_lang} and the second one is the translation of the first fragment into {tgt_lang}. "
      "These sentences will be displayed below.\n",
      "{index}. {src_lang} text: {src_demo}\n"
      "{tgt_lang} translation: {tgt_demo}\n",
      "After the example pairs, I will provide a/an {src_lang} sentence and I would like you to translate it "
      "into {tgt_lang}. Please provide only the translation result without any additional comments, "
      "formatting, or chat content. Translate the text from {src_lang} to {tgt_lang}.\n",
      "{src_lang} text: {input}\n"
      "{tgt_lang} translation:",
  };
  return kV1;
}

std::string expand_placeholders(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& vars) {
  std::string out;
  out.reserve(tmpl.size() + 64);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = vars.find(tmpl.substr(i + 1, close - i - 1));
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i]);
    ++i;
  }
  return out;
}

std::string render_prompt(const PromptRequest& req, const PromptTemplate& tmpl) {
  if (text::is_blank(req.input_text)) {
    throw Error(ErrorCode::kEmptyInput, "input sentence is empty");
  }
  std::map<std::string, std::string, std::less<>> vars{
      {"src_lang", req.src_lang_name},
      {"tgt_lang", req.tgt_lang_name},
  };
  std::string out = expand_placeholders(tmpl.preamble, vars);
  for (std::size_t i = 0; i < req.demos.size(); ++i) {
    vars["index"] = std::to_string(i + 1);
    vars["src_demo"] = req.demos[i].first;
    vars["tgt_demo"] = req.demos[i].second;
    out += expand_placeholders(tmpl.demo_block, vars);
  }
  out += expand_placeholders(tmpl.instruction, vars);
  vars["input"] = req.input_text;
  out += expand_placeholders(tmpl.input_block, vars);
  return out;
}

std::string extract_translation(std::string_view raw, std::string_view tgt_lang_name) {
  auto s = text::trim(raw);
  s = text::trim(strip_label(s, tgt_lang_name));
  s = text::trim(strip_quotes(s));
  if (s.empty()) {
    throw Error(ErrorCode::kEmptyOutput, "no translation text in model output");
  }
  return std::string(s);
}

std::string language_display_name(std::string_view code) {
  static const std::map<std::string, std::string, std::less<>> kNames{
      {"ar", "Arabic"},  {"de", "German"},   {"en", "English"}, {"es", "Spanish"},
      {"fr", "French"},  {"it", "Italian"},  {"ja", "Japanese"}, {"ko", "Korean"},
      {"pt", "Portuguese"}, {"ru", "Russian"}, {"zh", "Chinese"},
  };
  auto it = kNames.find(code);
  return it == kNames.end() ? std::string(code) : it->second;
}

}  // namespace afsp
