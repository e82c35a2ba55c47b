// afsp: command-line front end for every pipeline stage.
//
// Exit codes: 0 success, 2 validation error, 3 external-service failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "afsp/binary_io.hpp"
#include "afsp/config.hpp"
#include "afsp/corpus.hpp"
#include "afsp/degeneration.hpp"
#include "afsp/embedding.hpp"
#include "afsp/error.hpp"
#include "afsp/hashing.hpp"
#include "afsp/llm_client.hpp"
#include "afsp/metrics.hpp"
#include "afsp/pipeline.hpp"
#include "afsp/prompting.hpp"
#include "afsp/reranker.hpp"
#include "afsp/retrieval.hpp"
#include "afsp/synthetic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitExternal = 3;

// Flags are applied on top of the config file once parsing is done, and
// only when given explicitly.
class Overrides {
 public:
  template <typename T, typename Target>
  void add(CLI::App& cmd, const std::string& flag, const std::string& help, Target setter) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = cmd.add_option(flag, *value, help);
    rules_.push_back([opt, value, setter](afsp::PipelineConfig& cfg) {
      if (opt->count() > 0) setter(cfg, *value);
    });
  }

  void flag(CLI::App& cmd, const std::string& name, const std::string& help,
            std::function<void(afsp::PipelineConfig&)> setter) {
    CLI::Option* opt = cmd.add_flag(name, help);
    rules_.push_back([opt, setter](afsp::PipelineConfig& cfg) {
      if (opt->count() > 0) setter(cfg);
    });
  }

  void apply(afsp::PipelineConfig& cfg) const {
    for (const auto& r : rules_) r(cfg);
  }

 private:
  std::vector<std::function<void(afsp::PipelineConfig&)>> rules_;
};

struct Command {
  CLI::App* app = nullptr;
  std::string config_path;
  Overrides overrides;
  std::function<int(afsp::PipelineConfig&)> run;

  afsp::PipelineConfig config() const {
    afsp::PipelineConfig cfg = config_path.empty() ? afsp::PipelineConfig{} : afsp::load_config(config_path);
    overrides.apply(cfg);
    cfg.validate();
    return cfg;
  }
};

fs::path require(const fs::path& p, std::string_view what) {
  if (p.empty()) {
    throw afsp::Error(afsp::ErrorCode::kInvalidArgument, std::string(what) + " path is not set");
  }
  return p;
}

void add_paths(Command& c) {
  c.overrides.add<std::string>(*c.app, "--corpus", "Demonstration corpus (binary)",
                               [](auto& cfg, const std::string& v) { cfg.paths.corpus = v; });
  c.overrides.add<std::string>(*c.app, "--table,--embeddings", "Embedding table",
                               [](auto& cfg, const std::string& v) { cfg.paths.table = v; });
}

void add_retrieval(Command& c) {
  c.overrides.add<std::string>(*c.app, "--index", "Retrieval index",
                               [](auto& cfg, const std::string& v) { cfg.paths.index = v; });
  c.overrides.add<std::size_t>(*c.app, "--k", "Number of demonstrations",
                               [](auto& cfg, std::size_t v) { cfg.retrieval.k = v; });
  c.overrides.add<std::string>(*c.app, "--weights,--alphas", "Fusion weights dense,sparse,multi",
                               [](auto& cfg, const std::string& v) { cfg.retrieval.weights = afsp::parse_weights(v); });
  c.overrides.flag(*c.app, "--normalize", "Min-max normalize each score over the pool",
                   [](auto& cfg) { cfg.retrieval.normalize_scores = true; });
}

void add_languages(Command& c) {
  c.overrides.add<std::string>(*c.app, "--src-lang", "Source language code",
                               [](auto& cfg, const std::string& v) { cfg.languages.src = v; });
  c.overrides.add<std::string>(*c.app, "--tgt-lang", "Target language code",
                               [](auto& cfg, const std::string& v) { cfg.languages.tgt = v; });
}

void add_generation(Command& c) {
  c.overrides.add<std::string>(*c.app, "--client", "http or mock",
                               [](auto& cfg, const std::string& v) { cfg.client = v; });
  c.overrides.add<std::string>(*c.app, "--mock-script", "Scripted candidates for --client mock",
                               [](auto& cfg, const std::string& v) { cfg.paths.mock_script = v; });
  c.overrides.add<std::string>(*c.app, "--endpoint", "Chat-completions base URL",
                               [](auto& cfg, const std::string& v) { cfg.generation.endpoint = v; });
  c.overrides.add<std::string>(*c.app, "--model", "Model name",
                               [](auto& cfg, const std::string& v) { cfg.generation.model = v; });
  c.overrides.add<std::size_t>(*c.app, "--n-candidates", "Completions sampled per sentence",
                               [](auto& cfg, std::size_t v) { cfg.generation.n_candidates = v; });
  c.overrides.add<double>(*c.app, "--temperature", "Sampling temperature",
                          [](auto& cfg, double v) { cfg.generation.temperature = v; });
  c.overrides.add<double>(*c.app, "--top-p", "Nucleus sampling mass",
                          [](auto& cfg, double v) { cfg.generation.top_p = v; });
  c.overrides.add<int>(*c.app, "--top-k", "Top-k sampling (sent only when set)",
                       [](auto& cfg, int v) { cfg.generation.top_k = v; });
  c.overrides.add<double>(*c.app, "--timeout", "Per-request timeout in seconds",
                          [](auto& cfg, double v) { cfg.generation.timeout_seconds = v; });
  c.overrides.add<int>(*c.app, "--retries", "Retries per request",
                       [](auto& cfg, int v) { cfg.generation.retries = v; });
  c.overrides.add<std::size_t>(*c.app, "--max-in-flight", "Concurrent sentences",
                               [](auto& cfg, std::size_t v) { cfg.generation.max_in_flight = v; });
}

std::unique_ptr<afsp::GenerationClient> make_client(const afsp::PipelineConfig& cfg) {
  if (cfg.client == "mock") {
    return std::make_unique<afsp::MockClient>(afsp::MockClient::load(require(cfg.paths.mock_script, "mock_script")));
  }
  if (cfg.client != "http") {
    throw afsp::Error(afsp::ErrorCode::kInvalidArgument, "unknown client '" + cfg.client + "'");
  }
  return std::make_unique<afsp::ChatCompletionsClient>();
}

// Loaded retrieval state; projections are re-derived from the config seed
// and checked against the index fingerprint.
struct RetrievalState {
  afsp::EmbeddingTable table;
  afsp::ProjectionSet proj;
  afsp::RetrievalIndex index;

  static RetrievalState load(const afsp::PipelineConfig& cfg) {
    auto table = afsp::EmbeddingTable::load(require(cfg.paths.table, "table"));
    auto proj = afsp::init_projections(table.dim(), cfg.embedding.projection_seed);
    auto index = afsp::RetrievalIndex::load(require(cfg.paths.index, "index"));
    return {std::move(table), std::move(proj), std::move(index)};
  }
};

afsp::PromptRequest prompt_request(const afsp::PipelineConfig& cfg, const std::string& input) {
  afsp::PromptRequest req;
  req.src_lang_name = afsp::language_display_name(cfg.languages.src);
  req.tgt_lang_name = afsp::language_display_name(cfg.languages.tgt);
  req.input_text = input;
  return req;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::string body;
  for (const auto& l : lines) body += l + "\n";
  afsp::write_file(path, body);
}

void register_synth(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
  auto& c = *cmds.emplace_back(std::make_unique<Command>());
  c.app = app.add_subcommand("synth", "Generate a seeded synthetic zh->en corpus (JSONL)");
  c.app->add_option("--config", c.config_path, "Pipeline config file");
  auto opts = std::make_shared<afsp::SyntheticOptions>();
  auto out = std::make_shared<std::string>();
  c.app->add_option("--pairs", opts->pairs, "Number of pairs")->capture_default_str();
  c.app->add_option("--seed", opts->seed, "Generator seed")->capture_default_str();
  c.app->add_option("--out", *out, "Output JSONL")->required();
  c.run = [opts, out](afsp::PipelineConfig&) {
    afsp::write_file(*out, afsp::to_jsonl(afsp::synthetic_corpus(*opts)));
    std::cout << json{{"pairs", opts->pairs}, {"out", *out}}.dump() << '\n';
    return kExitOk;
  };
}

void register_ingest(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
  auto& c = *cmds.emplace_back(std::make_unique<Command>());
  c.app = app.add_subcommand("ingest", "Parse a raw corpus, optionally split off a test set");
  c.app->add_option("--config", c.config_path, "Pipeline config file");
  struct Args {
    std::string input, format, test_src, test_ref, test_out;
  };
  auto a = std::make_shared<Args>();
  c.app->add_option("--input", a->input, "Raw corpus (JSONL or TSV)")->required()->check(CLI::ExistingFile);
  c.app->add_option("--format", a->format, "jsonl or tsv (default: from extension)");
  c.app->add_option("--test-src", a->test_src, "Write test sources, one per line");
  c.app->add_option("--test-ref", a->test_ref, "Write test references, one per line");
  c.app->add_option("--test-out", a->test_out, "Write the test split as JSONL");
  c.overrides.add<std::string>(*c.app, "--out", "Binary demonstration corpus",
                               [](auto& cfg, const std::string& v) { cfg.paths.corpus = v; });
  c.overrides.add<std::size_t>(*c.app, "--test-size", "Held-out test pairs (0: no split)",
                               [](auto& cfg, std::size_t v) { cfg.split.test_size = v; });
  c.overrides.add<std::uint64_t>(*c.app, "--split-seed", "Split seed",
                                 [](auto& cfg, std::uint64_t v) { cfg.split.seed = v; });
  c.run = [a](afsp::PipelineConfig& cfg) {
    std::string fmt = a->format;
    if (fmt.empty()) fmt = fs::path(a->input).extension() == ".tsv" ? "tsv" : "jsonl";
    const auto corpus = afsp::ingest(a->input, afsp::parse_corpus_format(fmt));
    const std::size_t n_test = cfg.split.test_size;
    json summary{{"pairs", corpus.size()}};
    if (n_test == 0) {
      afsp::save(corpus, require(cfg.paths.corpus, "corpus"));
      summary["demo"] = corpus.size();
    } else {
      const auto parts = afsp::split(corpus, n_test, cfg.split.seed);
      afsp::save(parts.demo, require(cfg.paths.corpus, "corpus"));
      std::vector<std::string> src, ref;
      for (const auto& p : parts.test.pairs()) {
        src.push_back(p.src_text);
        ref.push_back(p.tgt_text);
      }
      if (!a->test_src.empty()) write_lines(a->test_src, src);
      if (!a->test_ref.empty()) write_lines(a->test_ref, ref);
      if (!a->test_out.empty()) afsp::write_file(a->test_out, afsp::to_jsonl(parts.test));
      summary["demo"] = parts.demo.size();
      summary["test"] = parts.test.size();
    }
    summary["src_lang"] = corpus.src_lang();
    summary["tgt_lang"] = corpus.tgt_lang();
    std::cout << summary.dump() << '\n';
    return kExitOk;
  };
}

void register_gen_embeddings(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
  auto& c = *cmds.emplace_back(std::make_unique<Command>());
  c.app = app.add_subcommand("gen-embeddings", "Build a seeded embedding table over the corpus vocabulary");
  c.app->add_option("--config", c.config_path, "Pipeline config file");
  c.overrides.add<std::string>(*c.app, "--corpus", "Demonstration corpus (binary)",
                               [](auto& cfg, const std::string& v) { cfg.paths.corpus = v; });
  c.overrides.add<std::string>(*c.app, "--out", "Embedding table",
                               [](auto& cfg, const std::string& v) { cfg.paths.table = v; });
  c.overrides.add<std::size_t>(*c.app, "--dim", "Embedding dimension",
                               [](auto& cfg, std::size_t v) { cfg.embedding.dim = v; });
  c.overrides.add<std::uint64_t>(*c.app, "--seed", "Table seed",
                                 [](auto& cfg, std::uint64_t v) { cfg.embedding.table_seed = v; });
  c.run = [](afsp::PipelineConfig& cfg) {
    const auto corpus = afsp::load_corpus(require(cfg.paths.corpus, "corpus"));
    const auto table =
        afsp::synthetic_table(corpus, cfg.embedding.dim, cfg.embedding.table_seed, cfg.embedding.oov_seed);
    table.save(require(cfg.paths.table, "table"));
    std::cout << json{{"vocab", table.vocab_size()}, {"dim", table.dim()}}.dump() << '\n';
    return kExitOk;
  };
}

void register_index(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
  auto& c = *cmds.emplace_back(std::make_unique<Command>());
  c.app = app.add_subcommand("index", "Embed every demonstration and write the retrieval index");
  c.app->add_option("--config", c.config_path, "Pipeline config file");
  add_paths(c);
  c.overrides.add<std::string>(*c.app, "--out", "Retrieval index",
                               [](auto& cfg, const std::string& v) { cfg.paths.index = v; });
  c.overrides.add<std::uint64_t>(*c.app, "--projection-seed,--seed", "Projection seed",
                                 [](auto& cfg, std::uint64_t v) { cfg.embedding.projection_seed = v; });
  c.overrides.add<unsigned>(*c.app, "--workers", "Worker threads (0: all cores)",
                            [](auto& cfg, unsigned v) { cfg.index_workers = v; });
  c.run = [](afsp::PipelineConfig& cfg) {
    const auto corpus = afsp::load_corpus(require(cfg.paths.corpus, "corpus"));
    const auto table = afsp::EmbeddingTable::load(require(cfg.paths.table, "table"));
    const auto proj = afsp::init_projections(table.dim(), cfg.embedding.projection_seed);
    const auto index = afsp::build_index(corpus, table, proj, cfg.index_workers);
    index.save(require(cfg.paths.index, "index"));
    std::cout << json{{"entries", index.size()}, {"fingerprint", afsp::to_hex(index.fingerprint())}}.dump() << '\n';
    return kExitOk;
  };
}

void register_retrieve(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
  auto& c = *cmds.emplace_back(std::make_unique<Command>());
  c.app = app.add_subcommand("retrieve", "Print the top-k demonstrations for a query");
  c.app->add_option("--config", c.config_path, "Pipeline config file");
  auto query = std::make_shared<std::string>();
  c.app->add_option("--query", *query, "Source sentence")->required();
  c.overrides.add<std::string>(*c.app, "--table,--embeddings", "Embedding table",
                               [](auto& cfg, const std::string& v) { cfg.paths.table = v; });
  add_retrieval(c);
  c.run = [query](afsp::PipelineConfig& cfg) {
    const auto state = RetrievalState::load(cfg);
    const afsp::Retriever retriever(state.index, state.table, state.proj);
    json out = json::array();
    for (const auto& d : retriever.topk(*query, cfg.retrieval)) {
      out.push_back({{"id", d.pair.id},
                     {"position", d.position},
                     {"s_rank", d.s_rank},
                     {"s_dense", d.s_dense},
                     {"s_sparse", d.s_sparse},
                     {"s_multi", d.s_multi},
                     {"src", d.pair.src_text},
                     {"tgt", d.pair.tgt_text}});
    }
    std::cout << out.dump(2) << '\n';
    return kExitOk;
  };
}

void register_prompt(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
  auto& c = *cmds.emplace_back(std::make_unique<Command>());
  c.app = app.add_subcommand("prompt", "Render the few-shot prompt for a query");
  c.app->add_option("--config", c.config_path, "Pipeline config file");
  auto query = std::make_shared<std::string>();
  auto fingerprint = std::make_shared<bool>(false);
  c.app->add_option("--query", *query, "Source sentence")->required();
  c.app->add_flag("--fingerprint", *fingerprint, "Print the prompt's SHA-256 (mock script key) instead");
  c.overrides.add<std::string>(*c.app, "--table,--embeddings", "Embedding table",
                               [](auto& cfg, const std::string& v) { cfg.paths.table = v; });
  add_retrieval(c);
  add_languages(c);
  c.run = [query, fingerprint](afsp::PipelineConfig& cfg) {
    auto req = prompt_request(cfg, *query);
    if (cfg.retrieval.k > 0) {
      const auto state = RetrievalState::load(cfg);
      const afsp::Retriever retriever(state.index, state.table, state.proj);
      for (const auto& d : retriever.topk(*query, cfg.retrieval)) req.demos.emplace_back(d.pair.src_text, d.pair.tgt_text);
    }
    const auto prompt = afsp::render_prompt(req);
    if (*fingerprint) {
      std::cout << afsp::prompt_fingerprint(prompt) << '\n';
    } else {
      std::cout << prompt << '\n';
    }
    return kExitOk;
  };
}

void register_degrade(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
  auto& c = *cmds.emplace_back(std::make_unique<Command>());
  c.app = app.add_subcommand("degrade", "Generate the graded reranker training set");
  c.app->add_option("--config", c.config_path, "Pipeline config file");
  add_paths(c);
  c.overrides.add<std::string>(*c.app, "--out", "Dataset JSONL",
                               [](auto& cfg, const std::string& v) { cfg.paths.dataset = v; });
  c.overrides.add<std::string>(*c.app, "--synonyms", "Synonym TSV for Replace",
                               [](auto& cfg, const std::string& v) { cfg.paths.synonyms = v; });
  c.overrides.add<int>(*c.app, "--max-ops,--max-size", "Largest operation combination",
                       [](auto& cfg, int v) { cfg.degeneration.max_size = v; });
  c.overrides.add<std::uint64_t>(*c.app, "--seed", "Degeneration seed",
                                 [](auto& cfg, std::uint64_t v) { cfg.degeneration.seed = v; });
  c.overrides.add<std::string>(*c.app, "--translator", "mock or llm (Back operation)",
                               [](auto& cfg, const std::string& v) { cfg.degeneration.translator = v; });
  c.overrides.add<unsigned>(*c.app, "--workers", "Worker threads",
                            [](auto& cfg, unsigned v) { cfg.degeneration.workers = v; });
  c.overrides.add<std::string>(*c.app, "--translator-endpoint", "Back-translate through this chat endpoint",
                               [](auto& cfg, const std::string& v) {
                                 cfg.degeneration.translator = "llm";
                                 cfg.client = "http";
                                 cfg.generation.endpoint = v;
                               });
  add_generation(c);
  c.run = [](afsp::PipelineConfig& cfg) {
    const auto corpus = afsp::load_corpus(require(cfg.paths.corpus, "corpus"));
    std::optional<afsp::EmbeddingTable> table;
    if (!cfg.paths.table.empty()) table = afsp::EmbeddingTable::load(cfg.paths.table);
    std::optional<afsp::SynonymTable> synonyms;
    if (!cfg.paths.synonyms.empty()) synonyms = afsp::SynonymTable::load(cfg.paths.synonyms);

    std::unique_ptr<afsp::Translator> translator;
    if (cfg.degeneration.translator == "llm") {
      translator = std::make_unique<afsp::ChatTranslator>(std::shared_ptr<const afsp::GenerationClient>(make_client(cfg)),
                                                          cfg.generation);
    } else {
      translator = std::make_unique<afsp::MockTranslator>(cfg.degeneration.seed);
    }
    afsp::DegenerationResources res{translator.get(), table ? &*table : nullptr, synonyms ? &*synonyms : nullptr};
    const auto data =
        afsp::generate_dataset(corpus, cfg.degeneration.max_size, cfg.degeneration.seed, res, cfg.degeneration.workers);
    afsp::write_file(require(cfg.paths.dataset, "dataset"), afsp::to_jsonl(data.examples));
    for (const auto& s : data.skipped) {
      std::string ops;
      for (const auto& n : s.ops.names()) ops += (ops.empty() ? "" : "+") + n;
      std::cerr << "skipped " << s.pair_id << " [" << ops << "]: " << s.reason << '\n';
    }
    std::cout << json{{"examples", data.examples.size()}, {"skipped", data.skipped.size()}}.dump() << '\n';
    return kExitOk;
  };
}

void register_train(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
  auto& c = *cmds.emplace_back(std::make_unique<Command>());
  c.app = app.add_subcommand("train-reranker", "Fit the reference quality scorer on a degeneration dataset");
  c.app->add_option("--config", c.config_path, "Pipeline config file");
  c.overrides.add<std::string>(*c.app, "--data,--dataset", "Dataset JSONL",
                               [](auto& cfg, const std::string& v) { cfg.paths.dataset = v; });
  c.overrides.add<std::string>(*c.app, "--out", "Reranker model",
                               [](auto& cfg, const std::string& v) { cfg.paths.reranker = v; });
  c.overrides.add<std::size_t>(*c.app, "--epochs", "Training epochs",
                               [](auto& cfg, std::size_t v) { cfg.reranker.epochs = v; });
  c.overrides.add<double>(*c.app, "--lr", "Learning rate",
                          [](auto& cfg, double v) { cfg.reranker.learning_rate = v; });
  c.overrides.add<std::size_t>(*c.app, "--batch-size", "Mini-batch size",
                               [](auto& cfg, std::size_t v) { cfg.reranker.batch_size = v; });
  c.overrides.add<std::uint64_t>(*c.app, "--seed", "Shuffle seed",
                                 [](auto& cfg, std::uint64_t v) { cfg.reranker.seed = v; });
  c.overrides.add<std::string>(*c.app, "--optimizer", "adagrad or sgd",
                               [](auto& cfg, const std::string& v) { cfg.reranker.optimizer = afsp::parse_optimizer(v); });
  c.run = [](afsp::PipelineConfig& cfg) {
    const auto examples = afsp::parse_examples_jsonl(afsp::read_file(require(cfg.paths.dataset, "dataset")));
    const auto result = afsp::train(examples, cfg.reranker);
    result.model.save(require(cfg.paths.reranker, "reranker"));
    std::cout << json{{"examples", examples.size()},
                      {"optimizer", afsp::optimizer_name(cfg.reranker.optimizer)},
                      {"initial_mse", result.report.initial_mse},
                      {"epoch_mse", result.report.epoch_mse},
                      {"fingerprint", afsp::to_hex(result.report.fingerprint)}}
                     .dump()
              << '\n';
    return kExitOk;
  };
}

void register_translate(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
  auto& c = *cmds.emplace_back(std::make_unique<Command>());
  c.app = app.add_subcommand("translate", "Translate a sentence or a file, one sentence per line");
  c.app->add_option("--config", c.config_path, "Pipeline config file");
  struct Args {
    std::string text, input, output, audit;
  };
  auto a = std::make_shared<Args>();
  auto* text = c.app->add_option("--text", a->text, "Single source sentence");
  auto* input = c.app->add_option("--input", a->input, "Source file")->check(CLI::ExistingFile);
  c.app->add_option("--output", a->output, "Translation file")->needs(input);
  c.app->add_option("--audit", a->audit, "Audit JSONL")->needs(input);
  text->excludes(input);
  c.overrides.add<std::string>(*c.app, "--table,--embeddings", "Embedding table",
                               [](auto& cfg, const std::string& v) { cfg.paths.table = v; });
  c.overrides.add<std::string>(*c.app, "--reranker", "Reranker model",
                               [](auto& cfg, const std::string& v) { cfg.paths.reranker = v; });
  add_retrieval(c);
  add_languages(c);
  add_generation(c);
  c.run = [a](afsp::PipelineConfig& cfg) {
    if (a->text.empty() == a->input.empty()) {
      throw afsp::Error(afsp::ErrorCode::kInvalidArgument, "give exactly one of --text or --input");
    }
    if (!a->input.empty() && a->output.empty()) {
      throw afsp::Error(afsp::ErrorCode::kInvalidArgument, "--input needs --output");
    }
    std::optional<RetrievalState> state;
    if (cfg.retrieval.k > 0) state = RetrievalState::load(cfg);
    std::optional<afsp::NGramRegressor> scorer;
    if (cfg.generation.n_candidates > 1) scorer = afsp::NGramRegressor::load(require(cfg.paths.reranker, "reranker"));
    const auto client = make_client(cfg);

    afsp::TranslateOptions opts{cfg.retrieval, cfg.generation, cfg.languages.src, cfg.languages.tgt};
    const afsp::Pipeline pipeline(state ? &state->index : nullptr, state ? &state->table : nullptr,
                                  state ? &state->proj : nullptr, *client, scorer ? &*scorer : nullptr, opts);
    if (!a->text.empty()) {
      const auto result = pipeline.translate(a->text);
      std::cout << result.audit_record(a->text).dump(2) << '\n';
      return kExitOk;
    }
    std::optional<fs::path> audit;
    if (!a->audit.empty()) audit = a->audit;
    const auto summary = pipeline.translate_file(a->input, a->output, audit, &std::cerr);
    std::cout << summary.to_json().dump() << '\n';
    return summary.failures == 0 ? kExitOk : kExitExternal;
  };
}

void register_evaluate(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
  auto& c = *cmds.emplace_back(std::make_unique<Command>());
  c.app = app.add_subcommand("evaluate", "Score hypotheses against references");
  c.app->add_option("--config", c.config_path, "Pipeline config file");
  struct Args {
    std::string hyp, ref, metrics = "bleu,chrf,rouge1,rouge2,rougeL";
  };
  auto a = std::make_shared<Args>();
  c.app->add_option("--hyp", a->hyp, "Hypotheses, one per line")->required()->check(CLI::ExistingFile);
  c.app->add_option("--ref", a->ref, "References, one per line")->required()->check(CLI::ExistingFile);
  c.app->add_option("--metrics", a->metrics, "Comma-separated metric list")->capture_default_str();
  c.overrides.add<std::string>(*c.app, "--tokenize", "auto, word or char",
                               [](auto& cfg, const std::string& v) { cfg.tokenize = afsp::metrics::parse_tokenize_mode(v); });
  c.run = [a](afsp::PipelineConfig& cfg) {
    auto lines = [](const std::string& path) {
      std::vector<std::string> out;
      std::ifstream in(path, std::ios::binary);
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out.push_back(std::move(line));
      }
      return out;
    };
    const auto report =
        afsp::metrics::evaluate(lines(a->hyp), lines(a->ref), afsp::metrics::parse_metric_list(a->metrics), cfg.tokenize);
    std::cout << report.to_json().dump(2) << '\n';
    return kExitOk;
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive few-shot prompting for machine translation"};
  app.require_subcommand(1);
  std::vector<std::unique_ptr<Command>> cmds;
  register_synth(app, cmds);
  register_ingest(app, cmds);
  register_gen_embeddings(app, cmds);
  register_index(app, cmds);
  register_retrieve(app, cmds);
  register_prompt(app, cmds);
  register_degrade(app, cmds);
  register_train(app, cmds);
  register_translate(app, cmds);
  register_evaluate(app, cmds);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  for (const auto& c : cmds) {
    if (!c->app->parsed()) continue;
    try {
      auto cfg = c->config();
      return c->run(cfg);
    } catch (const afsp::Error& e) {
      std::cerr << "afsp " << c->app->get_name() << ": " << e.what() << '\n';
      return afsp::is_external(e.code()) ? kExitExternal : kExitValidation;
    } catch (const std::exception& e) {
      std::cerr << "afsp " << c->app->get_name() << ": " << e.what() << '\n';
      return kExitValidation;
    }
  }
  return kExitValidation;
}
