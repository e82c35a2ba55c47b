#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace afsp::text {

bool valid_utf8(std::string_view s);
// Throws Error(InvalidArgument) on malformed input.
std::u32string decode_utf8(std::string_view s);
void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(std::u32string_view s);

bool is_cjk(char32_t cp);
bool is_space(char32_t cp);
bool is_punct(char32_t cp);
// Letters, digits and any other non-CJK, non-space, non-punctuation code point.
bool is_word_char(char32_t cp);
char32_t to_lower(char32_t cp);
std::string to_lower(std::string_view s);

std::string_view trim(std::string_view s);
bool is_blank(std::string_view s);

// Share of CJK code points among non-space code points (0 for blank text).
double cjk_fraction(std::string_view s);

enum class PieceKind { kWord, kCjk, kPunct };

// One lexical unit plus the whitespace that preceded it. Rendering the
// pieces back (lead + text, then tail) reproduces the input byte for byte.
struct Piece {
  std::string lead;
  std::string text;
  PieceKind kind = PieceKind::kWord;
};

struct Lexed {
  std::vector<Piece> pieces;
  std::string tail;
};

// Words are runs of word characters (an apostrophe or hyphen between two
// word characters stays inside the word). Each CJK character and each
// punctuation mark is its own piece.
Lexed lex(std::string_view s);
std::string render(const Lexed& lexed);

// Whitespace to put in front of `piece` when it is spliced in after `prev`
// (nullptr at sentence start).
std::string spacing_before(const Piece* prev, const Piece& piece);

// Lowercased words and single CJK characters; punctuation dropped.
std::vector<std::string> segment_words(std::string_view s);

}  // namespace afsp::text
