// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "afsp/binary_io.hpp"
#include "afsp/corpus.hpp"
#include "afsp/degeneration.hpp"
#include "afsp/embedding.hpp"
#include "afsp/error.hpp"
#include "afsp/llm_client.hpp"
#include "afsp/metrics.hpp"
#include "afsp/pipeline.hpp"
#include "afsp/prompting.hpp"
#include "afsp/reranker.hpp"
#include "afsp/retrieval.hpp"
#include "afsp/rng.hpp"
#include "afsp/synthetic.hpp"
#include "oracles/metric_oracle.hpp"
#include "oracles/retrieval_oracle.hpp"

namespace fs = std::filesystem;
using namespace afsp;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

Corpus synthetic(std::size_t pairs, std::uint64_t seed) {
  SyntheticOptions o;
  o.pairs = pairs;
  o.seed = seed;
  return synthetic_corpus(o);
}

Outcome retrieval_oracle_equivalence() {
  Outcome out;
  const auto corpus = synthetic(1000, 101);
  const auto table = synthetic_table(corpus, 64, 102, 103);
  const auto proj = init_projections(64, 104);

  const auto t0 = Clock::now();
  const auto index = build_index(corpus, table, proj);
  Rng rng(105);
  std::vector<std::string> queries;
  for (int i = 0; i < 100; ++i) {
    // Half copies of demonstrations, half shuffled recombinations.
    const auto& a = corpus[rng.uniform_index(corpus.size())].src_text;
    const auto& b = corpus[rng.uniform_index(corpus.size())].src_text;
    queries.push_back(i % 2 == 0 ? a : a.substr(0, a.size() / 3 / 3 * 3) + b);
  }
  std::vector<std::vector<ScoredDemo>> got;
  for (const auto& q : queries) got.push_back(retrieve_topk(q, index, table, proj, Weights{}, 3));
  const double elapsed = seconds_since(t0);

  std::vector<oracle::Repr> demo;
  for (const auto& p : corpus.pairs()) demo.push_back(oracle::represent(table, proj, p.src_text));
  double worst = 0.0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto expected = oracle::topk(corpus, demo, oracle::represent(table, proj, queries[i]), Weights{}, 3);
    out.require(got[i].size() == expected.size(), "result size differs for query " + std::to_string(i));
    for (std::size_t j = 0; j < std::min(got[i].size(), expected.size()); ++j) {
      out.require(got[i][j].pair.id == expected[j].id, "id/order differs for query " + std::to_string(i));
      worst = std::max(worst, std::abs(got[i][j].s_rank - expected[j].s_rank));
    }
  }
  out.require(worst <= 1e-6, "score deviation " + fmt(worst));
  out.require(elapsed < 5.0, "took " + fmt(elapsed) + " s");
  if (out.pass) out.detail = "100 queries, max |diff| " + fmt(worst) + ", " + fmt(elapsed) + " s";
  return out;
}

Outcome hybrid_fidelity() {
  Outcome out;
  const double s = score_hybrid(0.9, 2.5, 0.8, Weights{0.4, 0.4, 0.2});
  out.require(s == 1.52, "score_hybrid gave " + fmt(s));
  Rng rng(201);
  std::vector<std::array<double, 3>> triples(100);
  for (auto& t : triples) t = {rng.uniform01() * 2 - 1, rng.uniform01() * 5, rng.uniform01() * 2 - 1};
  auto argmax = [&](const Weights& w) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < triples.size(); ++i) {
      const auto& a = triples[i];
      const auto& b = triples[best];
      if (score_hybrid(a[0], a[1], a[2], w) > score_hybrid(b[0], b[1], b[2], w)) best = i;
    }
    return best;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const Weights w{rng.uniform01() + 0.01, rng.uniform01() + 0.01, rng.uniform01() + 0.01};
    const double c = std::exp(rng.uniform01() * 8 - 4);
    out.require(argmax(w) == argmax(Weights{c * w.dense, c * w.sparse, c * w.multi}),
                "argmax changed under scaling in trial " + std::to_string(trial));
  }
  if (out.pass) out.detail = "1.52 exact; argmax stable over 100 scalings of 100 triples";
  return out;
}

Outcome self_similarity() {
  Outcome out;
  const auto corpus = synthetic(200, 301);
  const auto table = synthetic_table(corpus, 64, 302, 303);
  const auto proj = init_projections(64, 304);
  Rng rng(305);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    std::string text = corpus[rng.uniform_index(corpus.size())].src_text;
    if (i % 5 == 0) text += " unseen words " + std::to_string(i);
    if (i % 7 == 0) text = corpus[rng.uniform_index(corpus.size())].tgt_text;
    const auto q = represent(table, proj, text);
    const auto p = represent(table, proj, corpus[rng.uniform_index(corpus.size())].src_text);
    worst = std::max({worst, std::abs(score_dense(q.dense, q.dense) - 1.0), std::abs(score_multi(q.multi, q.multi) - 1.0)});
    out.require(score_sparse(q.sparse, p.sparse) == score_sparse(p.sparse, q.sparse), "sparse asymmetry");
  }
  out.require(worst <= 1e-6, "self-score deviation " + fmt(worst));
  if (out.pass) out.detail = "50 texts, max |self - 1| " + fmt(worst);
  return out;
}

Outcome degeneration_accounting() {
  Outcome out;
  const auto corpus = synthetic(100, 401);
  const auto table = synthetic_table(corpus, 64, 402, 403);
  const MockTranslator translator(404);
  const DegenerationResources res{&translator, &table, nullptr};
  const auto a = generate_dataset(corpus, 2, 405, res, 4);
  out.require(a.examples.size() + a.skipped.size() == 2200,
              std::to_string(a.examples.size()) + " examples + " + std::to_string(a.skipped.size()) + " skips");
  for (const auto& s : a.skipped) out.require(!s.reason.empty() && !s.pair_id.empty(), "unlogged skip");
  for (const auto& e : a.examples) {
    out.require(e.score == 1.0 || e.score == 0.8 || e.score == 0.6, "score " + fmt(e.score));
  }
  const auto b = generate_dataset(corpus, 2, 405, res, 1);
  out.require(to_jsonl(a.examples) == to_jsonl(b.examples), "regeneration differs");
  if (out.pass) {
    out.detail = std::to_string(a.examples.size()) + " examples + " + std::to_string(a.skipped.size()) +
                 " logged skips = 2200; regeneration byte-identical";
  }
  return out;
}

Outcome score_clamp() {
  Outcome out;
  const double expected[] = {1.0, 0.8, 0.6, 0.4, 0.2, 0.0, 0.0};
  for (unsigned n = 0; n <= 6; ++n) {
    const double s = score_of(OpCombination(static_cast<std::uint8_t>((1u << n) - 1)));
    out.require(s == expected[n], "|b|=" + std::to_string(n) + " gave " + fmt(s));
  }
  if (out.pass) out.detail = "1.0 0.8 0.6 0.4 0.2 0.0 0.0";
  return out;
}

// Shared by the separation and end-to-end criteria.
struct RerankerSetup {
  Corpus train_pairs;
  Corpus held_out;
  EmbeddingTable table;
  MockTranslator translator{3};
  double seconds = 0.0;  // set while `trained` is built, so declared first
  TrainResult trained;

  RerankerSetup()
      : RerankerSetup(split(synthetic(500, 11), 100, 5)) {}

 private:
  explicit RerankerSetup(CorpusSplit parts)
      : train_pairs(std::move(parts.demo)),
        held_out(std::move(parts.test)),
        table(synthetic_table(train_pairs, 64, 1, 2)),
        trained([this] {
          const auto t0 = Clock::now();
          const DegenerationResources res{&translator, &table, nullptr};
          const auto data = generate_dataset(train_pairs, 4, 9, res, 4);
          TrainOptions o;
          o.epochs = 20;
          o.seed = 1;
          auto r = train(data.examples, o);
          seconds = seconds_since(t0);
          return r;
        }()) {}
};

Outcome reranker_separation(const RerankerSetup& s) {
  Outcome out;
  const DegenerationResources res{&s.translator, &s.table, nullptr};
  const auto test = generate_dataset(s.held_out, 2, 10, res, 4);
  double clean = 0.0, degraded = 0.0;
  std::size_t n_clean = 0, n_degraded = 0;
  for (const auto& e : test.examples) {
    const double v = s.trained.model.score(e.text);
    if (e.ops.empty()) {
      clean += v;
      ++n_clean;
    } else if (e.ops.size() == 2) {
      degraded += v;
      ++n_degraded;
    }
  }
  const double gap = clean / n_clean - degraded / n_degraded;
  const auto& rep = s.trained.report;
  out.require(s.train_pairs.size() == 400 && n_clean == 100, "split sizes");
  out.require(gap >= 0.15, "gap " + fmt(gap));
  out.require(rep.epoch_mse.back() < rep.initial_mse, "final MSE not below initial");
  out.require(s.seconds < 60.0, "took " + fmt(s.seconds) + " s");
  out.detail = "gap " + fmt(gap) + ", MSE " + fmt(rep.initial_mse) + " -> " + fmt(rep.epoch_mse.back()) + ", " +
               fmt(s.seconds) + " s" + (out.pass ? "" : "; " + out.detail);
  return out;
}

Outcome end_to_end_selection(const RerankerSetup& s) {
  Outcome out;
  const Degenerator degenerator(DegenerationResources{&s.translator, &s.table, nullptr});
  const auto parallel = OpCombination::of({DegenerationOp::kParallel});
  const auto insert_se = OpCombination::of({DegenerationOp::kInsert, DegenerationOp::kSe});
  MockClient mock;
  TranslateOptions opts;
  opts.src_lang = "zh";
  opts.tgt_lang = "en";
  opts.retrieval.k = 0;
  opts.generation.n_candidates = 3;
  std::size_t correct = 0;
  for (const auto& pair : s.held_out.pairs()) {
    Rng r1(combination_seed(7, pair.id, parallel)), r2(combination_seed(7, pair.id, insert_se));
    const auto prompt = render_prompt({"Chinese", "English", {}, pair.src_text});
    mock.add(prompt, {pair.tgt_text, degenerator.apply(parallel, pair, r1), degenerator.apply(insert_se, pair, r2)});
  }
  const Pipeline pipeline(nullptr, nullptr, nullptr, mock, &s.trained.model, opts);
  for (const auto& pair : s.held_out.pairs()) {
    if (pipeline.translate(pair.src_text).best == pair.tgt_text) ++correct;
  }
  out.require(correct >= 95, std::to_string(correct) + "/100");
  out.detail = std::to_string(correct) + "/100 picked the clean reference";
  return out;
}

Outcome prompt_golden() {
  Outcome out;
  std::ifstream in(std::string(AFSP_GOLDEN_DIR) + "/prompt_k3_zh_en.txt", std::ios::binary);
  std::ostringstream golden;
  golden << in.rdbuf();
  PromptRequest req{"Chinese",
                    "English",
                    {{"我们欢迎各方参与。", "We welcome the participation of all parties."},
                     {"中方对此表示关切。", "China expresses concern about this."},
                     {"双方将继续保持沟通。", "The two sides will maintain communication."}},
                    "我们愿同各方加强合作。"};
  const auto p = render_prompt(req);
  out.require(!golden.str().empty(), "golden file missing");
  out.require(p == golden.str(), "rendered prompt differs from golden");
  out.require(p.starts_with("You are a professional translator"), "opening sentence");
  if (out.pass) out.detail = std::to_string(p.size()) + " bytes identical";
  return out;
}

Outcome metrics_sanity() {
  Outcome out;
  using namespace metrics;
  const std::vector<std::vector<std::string>> texts{
      {"the cat sat on the mat"}, {"我们愿同各方加强合作。"}, {"A quick, brown fox jumps over the lazy dog."}};
  for (const auto& x : texts) {
    out.require(bleu4(x, x) == 100.0, "bleu4(x,x) for " + x[0]);
    out.require(chrf(x, x) == 100.0, "chrf(x,x) for " + x[0]);
    out.require(rouge(x, x, RougeVariant::kRL) == 1.0, "rougeL(x,x) for " + x[0]);
  }
  struct Pinned {
    double got, want;
    const char* name;
  };
  const Pinned pinned[] = {
      {bleu4({"the the the cat"}, {"the cat"}, TokenizeMode::kWord), 0.0, "bleu degenerate"},
      {sentence_bleu("the the the cat", "the cat", TokenizeMode::kWord), 0.0016990442448471224, "sentence bleu"},
      {bleu4({"the cat sat on the mat", "a quick brown fox jumps"},
             {"the cat sat on a mat", "the quick brown fox jumps over"}, TokenizeMode::kWord),
       54.258003648721974, "corpus bleu"},
      {sentence_chrf("abcd", "abce"), 47.916666666666664, "chrf abcd"},
      {sentence_chrf("the cat", "the hat"), 28.055555555555557, "chrf cat"},
      {oracle::bleu({{"the", "cat", "sat", "on", "the", "mat"}, {"a", "quick", "brown", "fox", "jumps"}},
                    {{"the", "cat", "sat", "on", "a", "mat"}, {"the", "quick", "brown", "fox", "jumps", "over"}}),
       54.258003648721974, "oracle bleu"},
      {oracle::chrf("abcd", "abce"), 47.916666666666664, "oracle chrf"},
  };
  for (const auto& p : pinned) out.require(std::abs(p.got - p.want) <= 1e-6, std::string(p.name) + " = " + fmt(p.got));
  if (out.pass) out.detail = "identity checks and 7 pinned values";
  return out;
}

// ingest -> index -> degrade -> train -> translate, all artifacts on disk.
std::map<std::string, std::string> full_run(const fs::path& dir, unsigned workers) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file(dir / "raw.jsonl", to_jsonl(synthetic(150, 1001)));
  const auto parts = split(ingest(dir / "raw.jsonl", CorpusFormat::kJsonl), 20, 1002);
  save(parts.demo, dir / "demo.cor");
  const auto demo = load_corpus(dir / "demo.cor");
  synthetic_table(demo, 32, 1003, 1004).save(dir / "table.emb");
  const auto table = EmbeddingTable::load(dir / "table.emb");
  const auto proj = init_projections(table.dim(), 1005);
  build_index(demo, table, proj, workers).save(dir / "demo.idx");
  const auto index = RetrievalIndex::load(dir / "demo.idx");

  const MockTranslator translator(1006);
  const auto data = generate_dataset(demo, 3, 1007, DegenerationResources{&translator, &table, nullptr}, workers);
  write_file(dir / "degraded.jsonl", to_jsonl(data.examples));
  TrainOptions to;
  to.seed = 1008;
  to.epochs = 5;
  train(parse_examples_jsonl(read_file(dir / "degraded.jsonl")), to).model.save(dir / "reranker.bin");
  const auto model = NGramRegressor::load(dir / "reranker.bin");

  TranslateOptions opts;
  opts.src_lang = "zh";
  opts.tgt_lang = "en";
  opts.generation.n_candidates = 3;
  const Retriever retriever(index, table, proj);
  MockClient mock;
  std::string inputs;
  for (const auto& p : parts.test.pairs()) {
    PromptRequest req{"Chinese", "English", {}, p.src_text};
    for (const auto& d : retriever.topk(p.src_text, opts.retrieval)) req.demos.emplace_back(d.pair.src_text, d.pair.tgt_text);
    mock.add(render_prompt(req), {p.tgt_text + " " + p.tgt_text, p.tgt_text, p.src_text});
    inputs += p.src_text + "\n";
  }
  write_file(dir / "test.src", inputs);
  const Pipeline pipeline(&index, &table, &proj, mock, &model, opts);
  pipeline.translate_file(dir / "test.src", dir / "hyp.txt", dir / "audit.jsonl");

  std::map<std::string, std::string> artifacts;
  for (const auto& e : fs::directory_iterator(dir)) artifacts[e.path().filename().string()] = read_file(e.path());
  return artifacts;
}

Outcome determinism_sweep() {
  Outcome out;
  const auto base = fs::temp_directory_path() / ("afsp_acceptance_" + std::to_string(::getpid()));
  const auto a = full_run(base / "a", 1);
  const auto b = full_run(base / "b", 4);
  fs::remove_all(base);
  out.require(a.size() == b.size() && a.size() >= 8, "artifact sets differ");
  for (const auto& [name, bytes] : a) {
    auto it = b.find(name);
    out.require(it != b.end() && it->second == bytes, name + " differs between runs");
  }
  out.require(!a.at("hyp.txt").empty(), "no translations");
  if (out.pass) out.detail = std::to_string(a.size()) + " artifacts byte-identical across runs (1 vs 4 workers)";
  return out;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << o.detail << std::endl;
  };

  report(1, "retrieval oracle equivalence", retrieval_oracle_equivalence);
  report(2, "hybrid score fidelity", hybrid_fidelity);
  report(3, "self-similarity", self_similarity);
  report(4, "degeneration accounting", degeneration_accounting);
  report(5, "quality score clamp", score_clamp);
  std::optional<RerankerSetup> setup;
  try {
    setup.emplace();
  } catch (const std::exception& e) {
    std::cerr << "reranker setup failed: " << e.what() << '\n';
  }
  report(6, "reranker separation", [&] {
    if (!setup) throw std::runtime_error("reranker setup failed");
    return reranker_separation(*setup);
  });
  report(7, "end-to-end selection", [&] {
    if (!setup) throw std::runtime_error("reranker setup failed");
    return end_to_end_selection(*setup);
  });
  report(8, "prompt golden", prompt_golden);
  report(9, "metrics sanity", metrics_sanity);
  report(10, "determinism sweep", determinism_sweep);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
