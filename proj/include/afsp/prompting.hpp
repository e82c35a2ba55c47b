#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace afsp {

// Template resource, version 1. Placeholders use {name} and are expanded in a
// single pass, so braces inside substituted text are never re-expanded.
struct PromptTemplate {
  std::string_view version;
  std::string_view preamble;     // {src_lang}, {tgt_lang}
  std::string_view demo_block;   // {index}, {src_lang}, {tgt_lang}, {src_demo}, {tgt_demo}
  std::string_view instruction;  // {src_lang}, {tgt_lang}
  std::string_view input_block;  // {src_lang}, {tgt_lang}, {input}
};

const PromptTemplate& prompt_template_v1();

struct PromptRequest {
  std::string src_lang_name;
  std::string tgt_lang_name;
  // (src, tgt) in descending relevance.
  std::vector<std::pair<std::string, std::string>> demos;
  std::string input_text;
};

// Throws EmptyInput for a blank input sentence.
std::string render_prompt(const PromptRequest& req, const PromptTemplate& tmpl = prompt_template_v1());

// Expands {name} placeholders from `vars` in one left-to-right pass. Unknown
// placeholders are left untouched.
std::string expand_placeholders(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& vars);

// Strips surrounding whitespace, a leading "<lang> translation:" label and
// surrounding quotes. With an empty tgt_lang_name any single-word language
// label is accepted. Throws EmptyOutput when nothing is left.
std::string extract_translation(std::string_view raw, std::string_view tgt_lang_name = {});

// Display name for a language code ("zh" -> "Chinese"); unknown codes are
// returned unchanged.
std::string language_display_name(std::string_view code);

}  // namespace afsp
