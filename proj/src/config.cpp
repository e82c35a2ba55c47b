#include "afsp/config.hpp"

#include <functional>
#include <type_traits>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "afsp/binary_io.hpp"
#include "afsp/error.hpp"

namespace afsp {

namespace {

namespace pt = boost::property_tree;

using Setter = std::function<void(PipelineConfig&, const std::string&)>;

[[noreturn]] void bad_value(const std::string& key, const std::string& value, std::string_view expected) {
  throw Error(ErrorCode::kInvalidArgument, "config " + key + " = '" + value + "': expected " + std::string(expected));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (in.fail() || !in.eof()) bad_value(key, value, "a number");
  if constexpr (std::is_unsigned_v<T>) {
    if (value.find('-') != std::string::npos) bad_value(key, value, "a non-negative number");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value, "true or false");
}

std::map<std::string, Setter> setters(const std::filesystem::path& base) {
  auto path = [base](std::filesystem::path PipelineConfig::Paths::*field) {
    return Setter([base, field](PipelineConfig& c, const std::string& v) {
      std::filesystem::path p(v);
      c.paths.*field = (!p.empty() && p.is_relative() && !base.empty()) ? base / p : p;
    });
  };
  std::map<std::string, Setter> s;
  s["paths.corpus"] = path(&PipelineConfig::Paths::corpus);
  s["paths.table"] = path(&PipelineConfig::Paths::table);
  s["paths.index"] = path(&PipelineConfig::Paths::index);
  s["paths.reranker"] = path(&PipelineConfig::Paths::reranker);
  s["paths.dataset"] = path(&PipelineConfig::Paths::dataset);
  s["paths.synonyms"] = path(&PipelineConfig::Paths::synonyms);
  s["paths.mock_script"] = path(&PipelineConfig::Paths::mock_script);

  s["embedding.dim"] = [](auto& c, const auto& v) { c.embedding.dim = parse_number<std::size_t>("embedding.dim", v); };
  s["embedding.table_seed"] = [](auto& c, const auto& v) {
    c.embedding.table_seed = parse_number<std::uint64_t>("embedding.table_seed", v);
  };
  s["embedding.projection_seed"] = [](auto& c, const auto& v) {
    c.embedding.projection_seed = parse_number<std::uint64_t>("embedding.projection_seed", v);
  };
  s["embedding.oov_seed"] = [](auto& c, const auto& v) {
    c.embedding.oov_seed = parse_number<std::uint64_t>("embedding.oov_seed", v);
  };

  s["retrieval.weights"] = [](auto& c, const auto& v) { c.retrieval.weights = parse_weights(v); };
  s["retrieval.k"] = [](auto& c, const auto& v) { c.retrieval.k = parse_number<std::size_t>("retrieval.k", v); };
  s["retrieval.normalize_scores"] = [](auto& c, const auto& v) {
    c.retrieval.normalize_scores = parse_bool("retrieval.normalize_scores", v);
  };
  s["retrieval.workers"] = [](auto& c, const auto& v) {
    c.index_workers = parse_number<unsigned>("retrieval.workers", v);
  };

  s["languages.src"] = [](auto& c, const auto& v) { c.languages.src = v; };
  s["languages.tgt"] = [](auto& c, const auto& v) { c.languages.tgt = v; };

  s["generation.client"] = [](auto& c, const auto& v) {
    if (v != "http" && v != "mock") bad_value("generation.client", v, "http or mock");
    c.client = v;
  };
  s["generation.endpoint"] = [](auto& c, const auto& v) { c.generation.endpoint = v; };
  s["generation.model"] = [](auto& c, const auto& v) { c.generation.model = v; };
  s["generation.n_candidates"] = [](auto& c, const auto& v) {
    c.generation.n_candidates = parse_number<std::size_t>("generation.n_candidates", v);
  };
  s["generation.temperature"] = [](auto& c, const auto& v) {
    c.generation.temperature = parse_number<double>("generation.temperature", v);
  };
  s["generation.top_p"] = [](auto& c, const auto& v) {
    c.generation.top_p = parse_number<double>("generation.top_p", v);
  };
  s["generation.top_k"] = [](auto& c, const auto& v) {
    c.generation.top_k = parse_number<int>("generation.top_k", v);
  };
  s["generation.max_tokens"] = [](auto& c, const auto& v) {
    c.generation.max_tokens = parse_number<int>("generation.max_tokens", v);
  };
  s["generation.timeout"] = [](auto& c, const auto& v) {
    c.generation.timeout_seconds = parse_number<double>("generation.timeout", v);
  };
  s["generation.retries"] = [](auto& c, const auto& v) {
    c.generation.retries = parse_number<int>("generation.retries", v);
  };
  s["generation.max_in_flight"] = [](auto& c, const auto& v) {
    c.generation.max_in_flight = parse_number<std::size_t>("generation.max_in_flight", v);
  };

  s["degeneration.max_size"] = [](auto& c, const auto& v) {
    c.degeneration.max_size = parse_number<int>("degeneration.max_size", v);
  };
  s["degeneration.seed"] = [](auto& c, const auto& v) {
    c.degeneration.seed = parse_number<std::uint64_t>("degeneration.seed", v);
  };
  s["degeneration.translator"] = [](auto& c, const auto& v) {
    if (v != "mock" && v != "llm") bad_value("degeneration.translator", v, "mock or llm");
    c.degeneration.translator = v;
  };
  s["degeneration.workers"] = [](auto& c, const auto& v) {
    c.degeneration.workers = parse_number<unsigned>("degeneration.workers", v);
  };

  s["reranker.epochs"] = [](auto& c, const auto& v) {
    c.reranker.epochs = parse_number<std::size_t>("reranker.epochs", v);
  };
  s["reranker.learning_rate"] = [](auto& c, const auto& v) {
    c.reranker.learning_rate = parse_number<double>("reranker.learning_rate", v);
  };
  s["reranker.batch_size"] = [](auto& c, const auto& v) {
    c.reranker.batch_size = parse_number<std::size_t>("reranker.batch_size", v);
  };
  s["reranker.optimizer"] = [](auto& c, const auto& v) { c.reranker.optimizer = parse_optimizer(v); };
  s["reranker.seed"] = [](auto& c, const auto& v) {
    c.reranker.seed = parse_number<std::uint64_t>("reranker.seed", v);
  };
  s["reranker.feature_dim"] = [](auto& c, const auto& v) {
    c.reranker.feature_dim = parse_number<std::uint32_t>("reranker.feature_dim", v);
  };
  s["reranker.hash_seed"] = [](auto& c, const auto& v) {
    c.reranker.hash_seed = parse_number<std::uint64_t>("reranker.hash_seed", v);
  };

  s["split.test_size"] = [](auto& c, const auto& v) {
    c.split.test_size = parse_number<std::size_t>("split.test_size", v);
  };
  s["split.seed"] = [](auto& c, const auto& v) { c.split.seed = parse_number<std::uint64_t>("split.seed", v); };

  s["metrics.tokenize"] = [](auto& c, const auto& v) { c.tokenize = metrics::parse_tokenize_mode(v); };
  return s;
}

std::string join_weights(const Weights& w) {
  std::ostringstream out;
  out << w.dense << ',' << w.sparse << ',' << w.multi;
  return out.str();
}

}  // namespace

void PipelineConfig::validate() const {
  if (embedding.dim == 0) throw Error(ErrorCode::kInvalidArgument, "embedding.dim must be >= 1");
  retrieval.weights.validate();
  generation.validate();
  if (degeneration.max_size < 0 || degeneration.max_size > 6) {
    throw Error(ErrorCode::kInvalidArgument, "degeneration.max_size must be in [0, 6]");
  }
  if (reranker.epochs == 0 || reranker.batch_size == 0 || !(reranker.learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "reranker epochs, batch_size and learning_rate must be positive");
  }
  if (reranker.feature_dim <= kDenseFeatureSlots) {
    throw Error(ErrorCode::kInvalidArgument, "reranker.feature_dim is too small");
  }
  if (languages.src.empty() || languages.tgt.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "languages.src and languages.tgt are required");
  }
}

PipelineConfig parse_config(std::string_view ini, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  std::istringstream in{std::string(ini)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
  }
  const auto table = setters(base_dir);
  PipelineConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw Error(ErrorCode::kInvalidArgument, "config: key '" + section + "' is outside any section");
    }
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      auto it = table.find(full);
      if (it == table.end()) throw Error(ErrorCode::kInvalidArgument, "config: unknown key '" + full + "'");
      it->second(cfg, value.get_value<std::string>());
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

std::string render_config(const PipelineConfig& c) {
  std::ostringstream out;
  out << "[paths]\n"
      << "corpus = " << c.paths.corpus.string() << "\n"
      << "table = " << c.paths.table.string() << "\n"
      << "index = " << c.paths.index.string() << "\n"
      << "reranker = " << c.paths.reranker.string() << "\n"
      << "dataset = " << c.paths.dataset.string() << "\n"
      << "synonyms = " << c.paths.synonyms.string() << "\n"
      << "mock_script = " << c.paths.mock_script.string() << "\n\n"
      << "[embedding]\n"
      << "dim = " << c.embedding.dim << "\n"
      << "table_seed = " << c.embedding.table_seed << "\n"
      << "projection_seed = " << c.embedding.projection_seed << "\n"
      << "oov_seed = " << c.embedding.oov_seed << "\n\n"
      << "[retrieval]\n"
      << "weights = " << join_weights(c.retrieval.weights) << "\n"
      << "k = " << c.retrieval.k << "\n"
      << "normalize_scores = " << (c.retrieval.normalize_scores ? "true" : "false") << "\n"
      << "workers = " << c.index_workers << "\n\n"
      << "[languages]\n"
      << "src = " << c.languages.src << "\n"
      << "tgt = " << c.languages.tgt << "\n\n"
      << "[generation]\n"
      << "client = " << c.client << "\n"
      << "endpoint = " << c.generation.endpoint << "\n"
      << "model = " << c.generation.model << "\n"
      << "n_candidates = " << c.generation.n_candidates << "\n"
      << "temperature = " << c.generation.temperature << "\n"
      << "top_p = " << c.generation.top_p << "\n";
  if (c.generation.top_k) out << "top_k = " << *c.generation.top_k << "\n";
  out << "max_tokens = " << c.generation.max_tokens << "\n"
      << "timeout = " << c.generation.timeout_seconds << "\n"
      << "retries = " << c.generation.retries << "\n"
      << "max_in_flight = " << c.generation.max_in_flight << "\n\n"
      << "[degeneration]\n"
      << "max_size = " << c.degeneration.max_size << "\n"
      << "seed = " << c.degeneration.seed << "\n"
      << "translator = " << c.degeneration.translator << "\n"
      << "workers = " << c.degeneration.workers << "\n\n"
      << "[reranker]\n"
      << "epochs = " << c.reranker.epochs << "\n"
      << "learning_rate = " << c.reranker.learning_rate << "\n"
      << "batch_size = " << c.reranker.batch_size << "\n"
      << "optimizer = " << optimizer_name(c.reranker.optimizer) << "\n"
      << "seed = " << c.reranker.seed << "\n"
      << "feature_dim = " << c.reranker.feature_dim << "\n"
      << "hash_seed = " << c.reranker.hash_seed << "\n\n"
      << "[split]\n"
      << "test_size = " << c.split.test_size << "\n"
      << "seed = " << c.split.seed << "\n\n"
      << "[metrics]\n"
      << "tokenize = " << metrics::tokenize_mode_name(c.tokenize) << "\n";
  return out.str();
}

}  // namespace afsp
