#include "afsp/text.hpp"

#include "afsp/error.hpp"

namespace afsp::text {

namespace {

// Returns the decoded code point and advances i, or returns U+FFFFFFFF on a
// malformed sequence.
constexpr char32_t kBad = 0xFFFFFFFF;

char32_t next_cp(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  std::size_t len;
  char32_t cp;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return kBad;
  }
  if (i + len > s.size()) {
    return kBad;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      return kBad;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  // Overlong forms, surrogates and out-of-range values.
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    return kBad;
  }
  i += len;
  return cp;
}

bool in(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

}  // namespace

bool valid_utf8(std::string_view s) {
  for (std::size_t i = 0; i < s.size();) {
    if (next_cp(s, i) == kBad) {
      return false;
    }
  }
  return true;
}

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto at = i;
    const char32_t cp = next_cp(s, i);
    if (cp == kBad) {
      throw Error(ErrorCode::kInvalidArgument, "invalid UTF-8 at byte " + std::to_string(at));
    }
    out.push_back(cp);
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) {
    append_utf8(out, cp);
  }
  return out;
}

bool is_cjk(char32_t cp) {
  return in(cp, 0x2E80, 0x2FDF) || in(cp, 0x3040, 0x30FF) || in(cp, 0x3100, 0x312F) ||
         in(cp, 0x3190, 0x31FF) || in(cp, 0x3400, 0x4DBF) || in(cp, 0x4E00, 0x9FFF) ||
         in(cp, 0xAC00, 0xD7AF) || in(cp, 0xF900, 0xFAFF) || in(cp, 0x20000, 0x2FA1F);
}

bool is_space(char32_t cp) {
  return cp <= 0x20 || cp == 0x7F || cp == 0x85 || cp == 0xA0 || cp == 0x1680 ||
         in(cp, 0x2000, 0x200B) || cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F ||
         cp == 0x3000 || cp == 0xFEFF;
}

bool is_punct(char32_t cp) {
  if (cp < 0x80) {
    return cp > 0x20 && cp < 0x7F && !((cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z'));
  }
  return in(cp, 0xA1, 0xBF) || cp == 0xD7 || cp == 0xF7 || in(cp, 0x2010, 0x2027) ||
         in(cp, 0x2030, 0x205E) || in(cp, 0x20A0, 0x20CF) || in(cp, 0x2100, 0x214F) ||
         in(cp, 0x2190, 0x2BFF) || in(cp, 0x3001, 0x303F) || in(cp, 0xFE30, 0xFE4F) ||
         in(cp, 0xFF01, 0xFF0F) || in(cp, 0xFF1A, 0xFF20) || in(cp, 0xFF3B, 0xFF40) ||
         in(cp, 0xFF5B, 0xFF65) || in(cp, 0x1F000, 0x1FAFF);
}

bool is_word_char(char32_t cp) { return !is_space(cp) && !is_punct(cp) && !is_cjk(cp); }

char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp < 0xC0) return cp;
  if (in(cp, 0xC0, 0xDE) && cp != 0xD7) return cp + 0x20;
  if (in(cp, 0x100, 0x137) || in(cp, 0x14A, 0x177)) return (cp % 2 == 0) ? cp + 1 : cp;
  if (in(cp, 0x139, 0x148)) return (cp % 2 == 1) ? cp + 1 : cp;
  if (in(cp, 0x391, 0x3A9) && cp != 0x3A2) return cp + 0x20;
  if (in(cp, 0x410, 0x42F)) return cp + 0x20;
  if (in(cp, 0x400, 0x40F)) return cp + 0x50;
  if (in(cp, 0xFF21, 0xFF3A)) return cp + 0x20;
  return cp;
}

std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : decode_utf8(s)) {
    append_utf8(out, to_lower(cp));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; };
  while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
  return s;
}

bool is_blank(std::string_view s) {
  for (std::size_t i = 0; i < s.size();) {
    const char32_t cp = next_cp(s, i);
    if (cp == kBad || !is_space(cp)) {
      return false;
    }
  }
  return true;
}

double cjk_fraction(std::string_view s) {
  std::size_t total = 0;
  std::size_t cjk = 0;
  for (char32_t cp : decode_utf8(s)) {
    if (is_space(cp)) continue;
    ++total;
    if (is_cjk(cp)) ++cjk;
  }
  return total == 0 ? 0.0 : static_cast<double>(cjk) / static_cast<double>(total);
}

Lexed lex(std::string_view s) {
  const std::u32string cps = decode_utf8(s);
  Lexed out;
  std::string lead;
  std::size_t i = 0;
  while (i < cps.size()) {
    const char32_t cp = cps[i];
    if (is_space(cp)) {
      append_utf8(lead, cp);
      ++i;
      continue;
    }
    Piece piece;
    piece.lead = std::move(lead);
    lead.clear();
    if (is_cjk(cp)) {
      piece.kind = PieceKind::kCjk;
      append_utf8(piece.text, cp);
      ++i;
    } else if (is_punct(cp)) {
      piece.kind = PieceKind::kPunct;
      append_utf8(piece.text, cp);
      ++i;
    } else {
      piece.kind = PieceKind::kWord;
      while (i < cps.size()) {
        const char32_t c = cps[i];
        if (is_word_char(c)) {
          append_utf8(piece.text, c);
          ++i;
        } else if ((c == '\'' || c == '-' || c == 0x2019) && i + 1 < cps.size() && is_word_char(cps[i + 1])) {
          append_utf8(piece.text, c);
          ++i;
        } else {
          break;
        }
      }
    }
    out.pieces.push_back(std::move(piece));
  }
  out.tail = std::move(lead);
  return out;
}

std::string render(const Lexed& lexed) {
  std::string out;
  for (const auto& p : lexed.pieces) {
    out += p.lead;
    out += p.text;
  }
  out += lexed.tail;
  return out;
}

std::string spacing_before(const Piece* prev, const Piece& piece) {
  if (prev == nullptr) return "";
  if (piece.kind == PieceKind::kCjk || prev->kind == PieceKind::kCjk) return "";
  if (piece.kind == PieceKind::kPunct) return "";
  return " ";
}

std::vector<std::string> segment_words(std::string_view s) {
  std::vector<std::string> out;
  for (auto& piece : lex(s).pieces) {
    if (piece.kind == PieceKind::kPunct) continue;
    out.push_back(piece.kind == PieceKind::kWord ? to_lower(piece.text) : std::move(piece.text));
  }
  return out;
}

}  // namespace afsp::text
