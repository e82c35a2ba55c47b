#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "afsp/error.hpp"
#include "afsp/prompting.hpp"

using namespace afsp;

namespace {

std::string read_golden(const std::string& name) {
  std::ifstream in(std::string(AFSP_GOLDEN_DIR) + "/" + name, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PromptRequest golden_request() {
  PromptRequest req;
  req.src_lang_name = "Chinese";
  req.tgt_lang_name = "English";
  req.demos = {{"我们欢迎各方参与。", "We welcome the participation of all parties."},
               {"中方对此表示关切。", "China expresses concern about this."},
               {"双方将继续保持沟通。", "The two sides will maintain communication."}};
  req.input_text = "我们愿同各方加强合作。";
  return req;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(RenderPrompt, MatchesGoldenByteForByte) {
  const auto golden = read_golden("prompt_k3_zh_en.txt");
  ASSERT_FALSE(golden.empty());
  EXPECT_EQ(render_prompt(golden_request()), golden);
}

TEST(RenderPrompt, Deterministic) { EXPECT_EQ(render_prompt(golden_request()), render_prompt(golden_request())); }

TEST(RenderPrompt, DemosNumberedInGivenOrder) {
  const auto p = render_prompt(golden_request());
  const auto a = p.find("1. Chinese text: 我们欢迎各方参与。");
  const auto b = p.find("2. Chinese text: 中方对此表示关切。");
  const auto c = p.find("3. Chinese text: 双方将继续保持沟通。");
  ASSERT_NE(a, std::string::npos);
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
}

TEST(RenderPrompt, ZeroShotHasNoNumberedDemos) {
  auto req = golden_request();
  req.demos.clear();
  const auto p = render_prompt(req);
  EXPECT_EQ(p.find("1. "), std::string::npos);
  EXPECT_TRUE(p.ends_with("Chinese text: 我们愿同各方加强合作。\nEnglish translation:"));
  EXPECT_NE(p.find("After the example pairs"), std::string::npos);
}

TEST(RenderPrompt, BracesInInputAreNotExpanded) {
  auto req = golden_request();
  req.input_text = "{tgt_lang} {input}";
  req.demos = {{"{src_lang}", "{index}"}};
  const auto p = render_prompt(req);
  EXPECT_NE(p.find("Chinese text: {tgt_lang} {input}\n"), std::string::npos);
  EXPECT_NE(p.find("1. Chinese text: {src_lang}\nEnglish translation: {index}\n"), std::string::npos);
}

TEST(RenderPrompt, EmptyInput) {
  auto req = golden_request();
  req.input_text = " \n\t";
  EXPECT_EQ(code_of([&] { render_prompt(req); }), ErrorCode::kEmptyInput);
}

TEST(ExpandPlaceholders, UnknownLeftAlone) {
  EXPECT_EQ(expand_placeholders("{a}-{b}-{", {{"a", "x"}}), "x-{b}-{");
}

TEST(ExtractTranslation, StripsLabelQuotesAndWhitespace) {
  EXPECT_EQ(extract_translation("  We will cooperate.\n"), "We will cooperate.");
  EXPECT_EQ(extract_translation("English translation: We will cooperate.", "English"), "We will cooperate.");
  EXPECT_EQ(extract_translation("english TRANSLATION:   \"We will cooperate.\"", "English"), "We will cooperate.");
  EXPECT_EQ(extract_translation("French translation: Bonjour"), "Bonjour");
  EXPECT_EQ(extract_translation("“你好”"), "你好");
}

TEST(ExtractTranslation, OtherLabelKeptWhenLanguageGiven) {
  EXPECT_EQ(extract_translation("French translation: Bonjour", "English"), "French translation: Bonjour");
}

TEST(ExtractTranslation, EmptyOutput) {
  EXPECT_EQ(code_of([] { extract_translation("   "); }), ErrorCode::kEmptyOutput);
  EXPECT_EQ(code_of([] { extract_translation("English translation:  ", "English"); }), ErrorCode::kEmptyOutput);
  EXPECT_EQ(code_of([] { extract_translation("\"\""); }), ErrorCode::kEmptyOutput);
}

TEST(LanguageDisplayName, KnownAndUnknown) {
  EXPECT_EQ(language_display_name("zh"), "Chinese");
  EXPECT_EQ(language_display_name("en"), "English");
  EXPECT_EQ(language_display_name("xx"), "xx");
}
