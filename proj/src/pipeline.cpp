#include "afsp/pipeline.hpp"

#include <fstream>
#include <future>

#include "afsp/error.hpp"
#include "afsp/prompting.hpp"

namespace afsp {

namespace {

template <typename F>
auto in_stage(Stage stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw Error(ErrorCode::kIoFailure, "read failed: " + path.string());
  return lines;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  return out;
}

}  // namespace

nlohmann::json TranslationResult::audit_record(std::string_view input) const {
  nlohmann::json rec;
  rec["input"] = input;
  rec["demos"] = demos_used;
  rec["candidates"] = nlohmann::json::array();
  for (const auto& c : candidates) {
    nlohmann::json item{{"text", c.text}};
    item["score"] = c.score ? nlohmann::json(*c.score) : nlohmann::json(nullptr);
    rec["candidates"].push_back(std::move(item));
  }
  rec["best"] = best;
  return rec;
}

nlohmann::json BatchSummary::to_json() const {
  return {{"count", count}, {"failures", failures}, {"wall_seconds", wall_time.count()}};
}

Pipeline::Pipeline(const RetrievalIndex* index, const EmbeddingTable* table, const ProjectionSet* proj,
                   const GenerationClient& client, const QualityScorer* scorer, TranslateOptions options)
    : client_(client), scorer_(scorer), options_(std::move(options)) {
  options_.retrieval.weights.validate();
  options_.generation.validate();
  if (options_.generation.tgt_lang_name.empty()) {
    options_.generation.tgt_lang_name = language_display_name(options_.tgt_lang);
  }
  if (options_.retrieval.k > 0) {
    if (index == nullptr || table == nullptr || proj == nullptr) {
      throw Error(ErrorCode::kInvalidArgument, "retrieval with k > 0 needs an index, a table and projections");
    }
    retriever_.emplace(*index, *table, *proj);
  }
  if (options_.generation.n_candidates > 1 && scorer_ == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "n_candidates > 1 needs a reranker");
  }
}

TranslationResult Pipeline::translate(std::string_view source) const {
  TranslationResult result;

  PromptRequest req;
  req.src_lang_name = language_display_name(options_.src_lang);
  req.tgt_lang_name = language_display_name(options_.tgt_lang);
  req.input_text = std::string(source);

  if (retriever_) {
    const auto demos = in_stage(Stage::kRetrieval, [&] { return retriever_->topk(source, options_.retrieval); });
    for (const auto& d : demos) {
      req.demos.emplace_back(d.pair.src_text, d.pair.tgt_text);
      result.demos_used.push_back(d.pair.id);
    }
  }

  const std::string prompt = in_stage(Stage::kPrompt, [&] { return render_prompt(req); });
  const auto generated = in_stage(Stage::kGeneration, [&] {
    auto set = client_.generate_candidates(prompt, options_.generation);
    if (set.candidates.empty()) throw Error(ErrorCode::kAllCandidatesEmpty, "client returned no candidates");
    return set;
  });
  result.prompt_fingerprint = generated.prompt_fingerprint;

  if (options_.generation.n_candidates == 1) {
    result.best = generated.candidates.front();
    result.candidates.push_back({result.best, std::nullopt});
    return result;
  }

  const auto ranked = in_stage(Stage::kRerank, [&] { return rank(*scorer_, generated.candidates); });
  result.candidates.resize(generated.candidates.size());
  for (std::size_t i = 0; i < generated.candidates.size(); ++i) result.candidates[i].text = generated.candidates[i];
  for (const auto& r : ranked) result.candidates[r.index].score = r.score;
  result.best = generated.candidates[ranked.front().index];
  return result;
}

BatchSummary Pipeline::translate_file(const std::filesystem::path& input, const std::filesystem::path& output,
                                      const std::optional<std::filesystem::path>& audit, std::ostream* log) const {
  const auto started = std::chrono::steady_clock::now();
  const auto lines = read_lines(input);
  auto out = open_output(output);
  std::optional<std::ofstream> audit_out;
  if (audit) audit_out = open_output(*audit);

  BatchSummary summary;
  summary.count = lines.size();
  const std::size_t chunk = options_.generation.max_in_flight;

  for (std::size_t begin = 0; begin < lines.size(); begin += chunk) {
    const std::size_t end = std::min(lines.size(), begin + chunk);
    std::vector<std::future<TranslationResult>> inflight;
    for (std::size_t i = begin; i < end; ++i) {
      inflight.push_back(std::async(std::launch::async, [this, &lines, i] { return translate(lines[i]); }));
    }
    for (std::size_t i = begin; i < end; ++i) {
      try {
        const auto result = inflight[i - begin].get();
        out << result.best << '\n';
        if (audit_out) *audit_out << result.audit_record(lines[i]).dump() << '\n';
      } catch (const std::exception& e) {
        ++summary.failures;
        out << '\n';
        if (audit_out) {
          *audit_out << nlohmann::json{{"input", lines[i]}, {"error", e.what()}}.dump() << '\n';
        }
        if (log != nullptr) *log << "line " << (i + 1) << ": " << e.what() << '\n';
      }
    }
    out.flush();
    if (audit_out) audit_out->flush();
    if (!out) throw Error(ErrorCode::kIoFailure, "write failed: " + output.string());
  }
  summary.wall_time = std::chrono::steady_clock::now() - started;
  return summary;
}

}  // namespace afsp
