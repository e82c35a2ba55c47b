#include <gtest/gtest.h>

#include "afsp/error.hpp"
#include "afsp/text.hpp"

namespace t = afsp::text;

TEST(Text, Utf8RoundTrip) {
  const std::string s = "héllo 你好 ｗｏｒｌｄ 😀";
  ASSERT_TRUE(t::valid_utf8(s));
  EXPECT_EQ(t::encode_utf8(t::decode_utf8(s)), s);
}

TEST(Text, RejectsMalformedUtf8) {
  EXPECT_FALSE(t::valid_utf8("\xff\xfe"));
  EXPECT_FALSE(t::valid_utf8("\xc0\xaf"));  // overlong
  EXPECT_FALSE(t::valid_utf8("\xe4\xbd"));  // truncated
  EXPECT_THROW(t::decode_utf8("a\x80"), afsp::Error);
}

TEST(Text, LexIsLossless) {
  for (const std::string s : {"", "  ", "The cat, sat.", "  leading and trailing  ", "我们欢迎各方参与。",
                              "mixed 中文 text!", "don't stop-now", "tab\tsep\nline"}) {
    EXPECT_EQ(t::render(t::lex(s)), s) << s;
  }
}

TEST(Text, LexPieceKinds) {
  const auto lexed = t::lex("Hi, 你好 don't");
  ASSERT_EQ(lexed.pieces.size(), 5u);
  EXPECT_EQ(lexed.pieces[0].text, "Hi");
  EXPECT_EQ(lexed.pieces[1].kind, t::PieceKind::kPunct);
  EXPECT_EQ(lexed.pieces[2].kind, t::PieceKind::kCjk);
  EXPECT_EQ(lexed.pieces[3].text, "好");
  EXPECT_EQ(lexed.pieces[4].text, "don't");
}

TEST(Text, SegmentWordsLowercasesAndDropsPunctuation) {
  EXPECT_EQ(t::segment_words("The Cat, sat!"), (std::vector<std::string>{"the", "cat", "sat"}));
  EXPECT_EQ(t::segment_words("你好。"), (std::vector<std::string>{"你", "好"}));
  EXPECT_TRUE(t::segment_words(" ... ").empty());
}

TEST(Text, CaseFoldingBeyondAscii) {
  EXPECT_EQ(t::to_lower("ÀÉÎ ΑΒΓ АБВ"), "àéî αβγ абв");
}

TEST(Text, CjkFraction) {
  EXPECT_DOUBLE_EQ(t::cjk_fraction("你好"), 1.0);
  EXPECT_DOUBLE_EQ(t::cjk_fraction("ab"), 0.0);
  EXPECT_DOUBLE_EQ(t::cjk_fraction("a你"), 0.5);
  EXPECT_DOUBLE_EQ(t::cjk_fraction("   "), 0.0);
}

TEST(Text, Trim) {
  EXPECT_EQ(t::trim("  a b \n"), "a b");
  EXPECT_TRUE(t::is_blank(" \t\n"));
  EXPECT_FALSE(t::is_blank(" x "));
}
