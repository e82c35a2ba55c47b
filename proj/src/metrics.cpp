#include "afsp/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <unordered_map>

#include "afsp/error.hpp"
#include "afsp/text.hpp"

namespace afsp::metrics {

namespace {

constexpr int kBleuOrder = 4;
constexpr int kChrfOrder = 6;
constexpr double kChrfBeta = 2.0;
constexpr double kSmoothingEpsilon = 1e-9;

using NGramCounts = std::unordered_map<std::string, int>;

void check_sizes(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  if (hyp.size() != ref.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(hyp.size()) + " hypotheses vs " + std::to_string(ref.size()) + " references");
  }
  if (hyp.empty()) throw Error(ErrorCode::kEmptyCorpus, "no sentences to score");
}

// N-grams keyed by their tokens joined with a separator no token contains.
NGramCounts ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NGramCounts out;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t j = 1; j < n; ++j) {
      key += '\x1f';
      key += tokens[i + j];
    }
    ++out[key];
  }
  return out;
}

NGramCounts char_ngrams(const std::u32string& chars, std::size_t n) {
  NGramCounts out;
  if (chars.size() < n) return out;
  for (std::size_t i = 0; i + n <= chars.size(); ++i) ++out[text::encode_utf8(std::u32string_view(chars).substr(i, n))];
  return out;
}

int overlap(const NGramCounts& hyp, const NGramCounts& ref) {
  int m = 0;
  for (const auto& [g, c] : hyp) {
    auto it = ref.find(g);
    if (it != ref.end()) m += std::min(c, it->second);
  }
  return m;
}

int total(const NGramCounts& counts) {
  int t = 0;
  for (const auto& [g, c] : counts) t += c;
  return t;
}

struct BleuStats {
  std::array<long long, kBleuOrder> matches{};
  std::array<long long, kBleuOrder> totals{};
  long long hyp_len = 0;
  long long ref_len = 0;

  void add(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
    hyp_len += static_cast<long long>(hyp.size());
    ref_len += static_cast<long long>(ref.size());
    for (int n = 1; n <= kBleuOrder; ++n) {
      const auto h = ngrams(hyp, n);
      matches[n - 1] += overlap(h, ngrams(ref, n));
      totals[n - 1] += total(h);
    }
  }
};

double brevity_penalty(long long c, long long r) {
  if (c >= r) return 1.0;
  return std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
}

struct ChrfStats {
  std::array<long long, kChrfOrder> matches{};
  std::array<long long, kChrfOrder> hyp{};
  std::array<long long, kChrfOrder> ref{};

  void add(std::string_view h, std::string_view r) {
    auto strip = [](std::string_view s) {
      std::u32string out;
      for (char32_t cp : text::decode_utf8(s)) {
        if (!text::is_space(cp)) out.push_back(cp);
      }
      return out;
    };
    const auto hc = strip(h);
    const auto rc = strip(r);
    for (int n = 1; n <= kChrfOrder; ++n) {
      const auto hg = char_ngrams(hc, n);
      const auto rg = char_ngrams(rc, n);
      matches[n - 1] += overlap(hg, rg);
      hyp[n - 1] += total(hg);
      ref[n - 1] += total(rg);
    }
  }

  // Per-order F-beta averaged over orders where both sides have n-grams.
  std::optional<double> score() const {
    const double b2 = kChrfBeta * kChrfBeta;
    double sum = 0.0;
    int effective = 0;
    for (int i = 0; i < kChrfOrder; ++i) {
      if (hyp[i] == 0 || ref[i] == 0) continue;
      ++effective;
      if (matches[i] == 0) continue;
      const double p = static_cast<double>(matches[i]) / static_cast<double>(hyp[i]);
      const double r = static_cast<double>(matches[i]) / static_cast<double>(ref[i]);
      sum += (1.0 + b2) * p * r / (b2 * p + r);
    }
    if (effective == 0) return std::nullopt;
    return 100.0 * sum / effective;
  }
};

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double f1(double match, double hyp_total, double ref_total) {
  if (match == 0.0) return 0.0;
  const double p = match / hyp_total;
  const double r = match / ref_total;
  return 2.0 * p * r / (p + r);
}

}  // namespace

TokenizeMode parse_tokenize_mode(std::string_view s) {
  if (s == "auto") return TokenizeMode::kAuto;
  if (s == "word") return TokenizeMode::kWord;
  if (s == "char") return TokenizeMode::kChar;
  throw Error(ErrorCode::kInvalidArgument, "unknown tokenize mode '" + std::string(s) + "'");
}

std::string_view tokenize_mode_name(TokenizeMode m) {
  switch (m) {
    case TokenizeMode::kAuto: return "auto";
    case TokenizeMode::kWord: return "word";
    case TokenizeMode::kChar: return "char";
  }
  return "?";
}

std::vector<std::string> tokenize(std::string_view s, TokenizeMode mode) {
  std::vector<std::string> out;
  if (mode == TokenizeMode::kChar) {
    for (char32_t cp : text::decode_utf8(s)) {
      if (text::is_space(cp)) continue;
      std::string t;
      text::append_utf8(t, text::to_lower(cp));
      out.push_back(std::move(t));
    }
    return out;
  }
  for (const auto& piece : text::lex(s).pieces) out.push_back(text::to_lower(piece.text));
  return out;
}

TokenizeMode resolve_mode(const std::vector<std::string>& references, TokenizeMode requested) {
  if (requested != TokenizeMode::kAuto) return requested;
  std::size_t cjk = 0, other = 0;
  for (const auto& r : references) {
    for (char32_t cp : text::decode_utf8(r)) {
      if (text::is_space(cp)) continue;
      (text::is_cjk(cp) ? cjk : other) += 1;
    }
  }
  return cjk > other ? TokenizeMode::kChar : TokenizeMode::kWord;
}

double bleu4(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
             TokenizeMode mode) {
  check_sizes(hypotheses, references);
  mode = resolve_mode(references, mode);
  BleuStats stats;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    stats.add(tokenize(hypotheses[i], mode), tokenize(references[i], mode));
  }
  if (stats.hyp_len == 0) return 0.0;
  double log_sum = 0.0;
  for (int n = 0; n < kBleuOrder; ++n) {
    if (stats.matches[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(stats.matches[n]) / static_cast<double>(stats.totals[n]));
  }
  return 100.0 * brevity_penalty(stats.hyp_len, stats.ref_len) * std::exp(log_sum / kBleuOrder);
}

double sentence_bleu(std::string_view hypothesis, std::string_view reference, TokenizeMode mode) {
  if (mode == TokenizeMode::kAuto) mode = resolve_mode({std::string(reference)}, mode);
  BleuStats stats;
  stats.add(tokenize(hypothesis, mode), tokenize(reference, mode));
  if (stats.hyp_len == 0) return stats.ref_len == 0 ? 100.0 : 0.0;
  double log_sum = 0.0;
  int orders = 0;
  for (int n = 0; n < kBleuOrder; ++n) {
    if (stats.totals[n] == 0) continue;
    const double m = stats.matches[n] == 0 ? kSmoothingEpsilon : static_cast<double>(stats.matches[n]);
    log_sum += std::log(m / static_cast<double>(stats.totals[n]));
    ++orders;
  }
  return 100.0 * brevity_penalty(stats.hyp_len, stats.ref_len) * std::exp(log_sum / orders);
}

double chrf(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references) {
  check_sizes(hypotheses, references);
  ChrfStats stats;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) stats.add(hypotheses[i], references[i]);
  if (auto s = stats.score()) return *s;
  return hypotheses == references ? 100.0 : 0.0;
}

double sentence_chrf(std::string_view hypothesis, std::string_view reference) {
  ChrfStats stats;
  stats.add(hypothesis, reference);
  if (auto s = stats.score()) return *s;
  return text::is_blank(hypothesis) && text::is_blank(reference) ? 100.0 : 0.0;
}

double sentence_rouge(const std::vector<std::string>& hyp, const std::vector<std::string>& ref, RougeVariant variant) {
  if (variant == RougeVariant::kRL) {
    if (hyp.empty() && ref.empty()) return 1.0;
    if (hyp.empty() || ref.empty()) return 0.0;
    return f1(static_cast<double>(lcs_length(hyp, ref)), static_cast<double>(hyp.size()),
              static_cast<double>(ref.size()));
  }
  const std::size_t n = variant == RougeVariant::kR1 ? 1 : 2;
  const auto hg = ngrams(hyp, n);
  const auto rg = ngrams(ref, n);
  if (hg.empty() && rg.empty()) return hyp == ref ? 1.0 : 0.0;
  if (hg.empty() || rg.empty()) return 0.0;
  return f1(overlap(hg, rg), total(hg), total(rg));
}

double rouge(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
             RougeVariant variant, TokenizeMode mode) {
  check_sizes(hypotheses, references);
  mode = resolve_mode(references, mode);
  double sum = 0.0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    sum += sentence_rouge(tokenize(hypotheses[i], mode), tokenize(references[i], mode), variant);
  }
  return sum / static_cast<double>(hypotheses.size());
}

Metric parse_metric(std::string_view s) {
  if (s == "bleu" || s == "bleu4") return Metric::kBleu;
  if (s == "chrf") return Metric::kChrf;
  if (s == "rouge1") return Metric::kRouge1;
  if (s == "rouge2") return Metric::kRouge2;
  if (s == "rougeL" || s == "rougel") return Metric::kRougeL;
  throw Error(ErrorCode::kInvalidArgument, "unknown metric '" + std::string(s) + "'");
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::kBleu: return "bleu";
    case Metric::kChrf: return "chrf";
    case Metric::kRouge1: return "rouge1";
    case Metric::kRouge2: return "rouge2";
    case Metric::kRougeL: return "rougeL";
  }
  return "?";
}

std::vector<Metric> parse_metric_list(std::string_view s) {
  std::vector<Metric> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto item = text::trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!item.empty()) {
      const Metric m = parse_metric(item);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "no metrics requested");
  return out;
}

namespace {

bool is_rouge(Metric m) { return m == Metric::kRouge1 || m == Metric::kRouge2 || m == Metric::kRougeL; }

RougeVariant rouge_variant(Metric m) {
  return m == Metric::kRouge1 ? RougeVariant::kR1 : m == Metric::kRouge2 ? RougeVariant::kR2 : RougeVariant::kRL;
}

}  // namespace

EvalReport evaluate(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
                    const std::vector<Metric>& metrics, TokenizeMode mode) {
  check_sizes(hypotheses, references);
  EvalReport report;
  report.tokenize = resolve_mode(references, mode);
  report.metrics = metrics;
  report.sentences.resize(hypotheses.size());

  std::vector<std::vector<std::string>> hyp_tokens, ref_tokens;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    hyp_tokens.push_back(tokenize(hypotheses[i], report.tokenize));
    ref_tokens.push_back(tokenize(references[i], report.tokenize));
  }

  for (Metric m : metrics) {
    const std::string name(metric_name(m));
    switch (m) {
      case Metric::kBleu:
        report.corpus[name] = bleu4(hypotheses, references, report.tokenize);
        for (std::size_t i = 0; i < hypotheses.size(); ++i) {
          report.sentences[i][name] = sentence_bleu(hypotheses[i], references[i], report.tokenize);
        }
        break;
      case Metric::kChrf:
        report.corpus[name] = chrf(hypotheses, references);
        for (std::size_t i = 0; i < hypotheses.size(); ++i) {
          report.sentences[i][name] = sentence_chrf(hypotheses[i], references[i]);
        }
        break;
      default: {
        double sum = 0.0;
        for (std::size_t i = 0; i < hypotheses.size(); ++i) {
          const double v = sentence_rouge(hyp_tokens[i], ref_tokens[i], rouge_variant(m));
          report.sentences[i][name] = v;
          sum += v;
        }
        report.corpus[name] = sum / static_cast<double>(hypotheses.size());
      }
    }
  }
  return report;
}

nlohmann::json EvalReport::to_json() const {
  auto scaled = [this](const std::map<std::string, double>& values) {
    nlohmann::json out = nlohmann::json::object();
    for (Metric m : metrics) {
      const std::string name(metric_name(m));
      out[name] = values.at(name) * (is_rouge(m) ? 100.0 : 1.0);
    }
    return out;
  };
  nlohmann::json doc;
  doc["tokenize"] = tokenize_mode_name(tokenize);
  doc["sentences_scored"] = sentences.size();
  doc["corpus"] = scaled(corpus);
  doc["sentence"] = nlohmann::json::array();
  for (const auto& s : sentences) doc["sentence"].push_back(scaled(s));
  doc["notes"] = {
      "corpus BLEU-4 is unsmoothed; sentence BLEU floors zero matches to 1e-9",
      "chrF: character 1-6 grams, beta 2, whitespace removed",
      "ROUGE values are F1 scaled by 100",
      "METEOR and COMET-Kiwi are not computed",
  };
  return doc;
}

}  // namespace afsp::metrics
