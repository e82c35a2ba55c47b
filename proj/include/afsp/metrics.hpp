#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace afsp::metrics {

enum class TokenizeMode { kAuto, kWord, kChar };

TokenizeMode parse_tokenize_mode(std::string_view s);
std::string_view tokenize_mode_name(TokenizeMode m);

// kWord: lowercased words, single CJK characters and punctuation marks.
// kChar: every non-space code point.
std::vector<std::string> tokenize(std::string_view s, TokenizeMode mode);

// kChar when most non-space code points across the references are CJK.
TokenizeMode resolve_mode(const std::vector<std::string>& references, TokenizeMode requested);

// Corpus BLEU-4, unsmoothed, in [0, 100].
double bleu4(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
             TokenizeMode mode = TokenizeMode::kAuto);

// Sentence BLEU over orders with at least one hypothesis n-gram; zero
// match counts are floored to 1e-9.
double sentence_bleu(std::string_view hypothesis, std::string_view reference, TokenizeMode mode);

// chrF (n = 1..6, beta = 2) on whitespace-stripped code points, in [0, 100].
double chrf(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references);
double sentence_chrf(std::string_view hypothesis, std::string_view reference);

enum class RougeVariant { kR1, kR2, kRL };

// Mean sentence F1 in [0, 1].
double rouge(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
             RougeVariant variant, TokenizeMode mode = TokenizeMode::kAuto);
double sentence_rouge(const std::vector<std::string>& hyp_tokens, const std::vector<std::string>& ref_tokens,
                      RougeVariant variant);

enum class Metric { kBleu, kChrf, kRouge1, kRouge2, kRougeL };

Metric parse_metric(std::string_view s);
std::string_view metric_name(Metric m);
// Comma-separated list, e.g. "bleu,chrf,rougeL".
std::vector<Metric> parse_metric_list(std::string_view s);

struct EvalReport {
  TokenizeMode tokenize = TokenizeMode::kWord;
  std::vector<Metric> metrics;
  std::map<std::string, double> corpus;                    // ROUGE in [0, 1]
  std::vector<std::map<std::string, double>> sentences;  // same scales

  // ROUGE values are scaled by 100 in the JSON form.
  nlohmann::json to_json() const;
};

EvalReport evaluate(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
                    const std::vector<Metric>& metrics, TokenizeMode mode = TokenizeMode::kAuto);

}  // namespace afsp::metrics
