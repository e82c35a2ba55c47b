#include "afsp/llm_client.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "afsp/binary_io.hpp"
#include "afsp/error.hpp"
#include "afsp/hashing.hpp"
#include "afsp/prompting.hpp"
#include "afsp/rng.hpp"

namespace afsp {

namespace {

using json = nlohmann::json;
using std::chrono::milliseconds;

constexpr milliseconds kBackoffBase{500};

bool retryable_status(int status) { return status == 408 || status == 409 || status == 429 || status >= 500; }

std::optional<milliseconds> retry_after(const HttpResponse& r) {
  auto it = r.headers.find("retry-after");
  if (it == r.headers.end()) return std::nullopt;
  char* end = nullptr;
  const double seconds = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str() || !std::isfinite(seconds)) return std::nullopt;
  return milliseconds(static_cast<long long>(std::max(0.0, seconds) * 1000.0));
}

std::string lowercase_ascii(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
  }
  return s;
}

}  // namespace

void GenerationConfig::validate() const {
  if (n_candidates < 1) throw Error(ErrorCode::kInvalidArgument, "n_candidates must be >= 1");
  if (!(temperature >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "top_p must be in (0, 1]");
  if (max_tokens < 1) throw Error(ErrorCode::kInvalidArgument, "max_tokens must be >= 1");
  if (!(timeout_seconds > 0.0)) throw Error(ErrorCode::kInvalidArgument, "timeout must be positive");
  if (retries < 0) throw Error(ErrorCode::kInvalidArgument, "retries must be >= 0");
  if (max_in_flight < 1) throw Error(ErrorCode::kInvalidArgument, "max_in_flight must be >= 1");
}

std::string prompt_fingerprint(std::string_view prompt) { return to_hex(sha256(prompt)); }

void MockClient::add(std::string_view prompt, std::vector<std::string> candidates) {
  script_[prompt_fingerprint(prompt)] = std::move(candidates);
}

MockClient MockClient::from_json(const json& doc) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kMalformedRecord, "mock script must be a JSON object");
  }
  Script script;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_array()) {
      throw Error(ErrorCode::kMalformedRecord, "mock script entry '" + key + "' is not an array");
    }
    auto& list = script[key];
    for (const auto& c : value) {
      if (!c.is_string()) throw Error(ErrorCode::kMalformedRecord, "mock candidates must be strings");
      list.push_back(c.get<std::string>());
    }
  }
  return MockClient(std::move(script));
}

MockClient MockClient::load(const std::filesystem::path& path) {
  try {
    return from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedRecord, path.string() + ": " + e.what());
  }
}

json MockClient::to_json() const {
  json doc = json::object();
  for (const auto& [key, list] : script_) doc[key] = list;
  return doc;
}

CandidateSet MockClient::generate_candidates(const std::string& prompt, const GenerationConfig&) const {
  const auto fp = prompt_fingerprint(prompt);
  auto it = script_.find(fp);
  if (it == script_.end()) {
    throw Error(ErrorCode::kScriptMiss, "no scripted candidates for prompt " + fp);
  }
  CandidateSet out;
  out.prompt_fingerprint = fp;
  out.candidates = it->second;
  for (std::size_t i = 0; i < it->second.size(); ++i) out.raw.push_back({i, it->second[i], "scripted"});
  return out;
}

HttpResponse HttplibTransport::post(const std::string& url, const std::map<std::string, std::string>& headers,
                                    const std::string& body, milliseconds timeout) const {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint URL has no scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(base);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  auto res = client.Post(path, h, body, "application/json");
  if (!res) {
    throw Error(ErrorCode::kNetworkFailure, "POST " + url + ": " + httplib::to_string(res.error()));
  }
  HttpResponse out;
  out.status = res->status;
  out.body = res->body;
  for (const auto& [k, v] : res->headers) out.headers[lowercase_ascii(k)] = v;
  return out;
}

ChatCompletionsClient::ChatCompletionsClient(std::shared_ptr<const HttpTransport> transport, Sleeper sleeper,
                                             std::optional<std::string> api_key)
    : transport_(transport ? std::move(transport) : std::make_shared<HttplibTransport>()),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper([](milliseconds d) { std::this_thread::sleep_for(d); })),
      api_key_(std::move(api_key)) {
  if (!api_key_) {
    if (const char* env = std::getenv("AFSP_API_KEY"); env != nullptr && *env != '\0') api_key_ = env;
  }
}

json ChatCompletionsClient::request_body(const std::string& prompt, const GenerationConfig& cfg, std::size_t n) {
  json body;
  body["model"] = cfg.model;
  body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = cfg.temperature;
  body["top_p"] = cfg.top_p;
  body["n"] = n;
  body["max_tokens"] = cfg.max_tokens;
  if (cfg.top_k) body["top_k"] = *cfg.top_k;
  if (cfg.seed) body["seed"] = *cfg.seed;
  return body;
}

std::vector<CandidateMeta> ChatCompletionsClient::parse_choices(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedResponse, std::string("response is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array()) {
    throw Error(ErrorCode::kMalformedResponse, "response has no choices array");
  }
  std::vector<CandidateMeta> out;
  std::size_t i = 0;
  for (const auto& choice : doc["choices"]) {
    if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object() ||
        !choice["message"].contains("content") || !choice["message"]["content"].is_string()) {
      throw Error(ErrorCode::kMalformedResponse, "choice " + std::to_string(i) + " has no message content");
    }
    CandidateMeta meta;
    meta.choice_index = choice.value("index", i);
    meta.raw = choice["message"]["content"].get<std::string>();
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
      meta.finish_reason = choice["finish_reason"].get<std::string>();
    }
    out.push_back(std::move(meta));
    ++i;
  }
  return out;
}

HttpResponse ChatCompletionsClient::send(const std::string& prompt, const GenerationConfig& cfg, std::size_t n) const {
  const std::string url = cfg.endpoint + (cfg.endpoint.ends_with('/') ? "" : "/") + "chat/completions";
  std::map<std::string, std::string> headers{{"Content-Type", "application/json"}};
  if (api_key_) headers["Authorization"] = "Bearer " + *api_key_;
  const std::string body = request_body(prompt, cfg, n).dump();

  const auto timeout = milliseconds(static_cast<long long>(cfg.timeout_seconds * 1000.0));
  // Every attempt may take up to `timeout`, so backoff must fit in whatever
  // remains of (retries + 1) * timeout after the next attempt's share.
  auto budget = timeout * (cfg.retries + 1);
  Rng jitter(fnv1a64(prompt) ^ n);

  ErrorCode last_code = ErrorCode::kNetworkFailure;
  std::string last_detail;
  for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
    const auto started = std::chrono::steady_clock::now();
    std::optional<milliseconds> hinted;
    try {
      auto res = transport_->post(url, headers, body, timeout);
      if (res.status >= 200 && res.status < 300) return res;
      if (!retryable_status(res.status)) return res;
      last_code = res.status == 429 ? ErrorCode::kRateLimited : ErrorCode::kNetworkFailure;
      last_detail = "HTTP " + std::to_string(res.status) + ": " + res.body.substr(0, 200);
      hinted = retry_after(res);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNetworkFailure) throw;
      last_code = ErrorCode::kNetworkFailure;
      last_detail = e.detail();
    }
    budget -= std::chrono::duration_cast<milliseconds>(std::chrono::steady_clock::now() - started);
    if (attempt == cfg.retries) break;

    milliseconds delay = hinted.value_or(kBackoffBase * (1LL << std::min(attempt, 16)));
    if (!hinted) delay += milliseconds(static_cast<long long>(jitter.uniform01() * static_cast<double>(delay.count()) / 2));
    const auto room = budget - timeout;
    if (room <= milliseconds::zero()) break;
    delay = std::min(delay, room);
    sleeper_(delay);
    budget -= delay;
  }
  throw Error(last_code, last_detail + " (after " + std::to_string(cfg.retries) + " retries)");
}

CandidateSet ChatCompletionsClient::generate_candidates(const std::string& prompt, const GenerationConfig& cfg) const {
  if (prompt.empty()) throw Error(ErrorCode::kEmptyInput, "prompt is empty");
  cfg.validate();

  CandidateSet out;
  out.prompt_fingerprint = prompt_fingerprint(prompt);

  auto check = [](const HttpResponse& res) {
    if (res.status < 200 || res.status >= 300) {
      throw Error(ErrorCode::kNetworkFailure, "HTTP " + std::to_string(res.status) + ": " + res.body.substr(0, 200));
    }
  };

  auto first = send(prompt, cfg, cfg.n_candidates);
  const bool rejected_multi = cfg.n_candidates > 1 && (first.status == 400 || first.status == 422);
  if (!rejected_multi) {
    check(first);
    out.raw = parse_choices(first.body);
  }
  // Servers that reject n > 1 (or silently answer with a single choice) get
  // topped up with single-completion calls.
  if (rejected_multi || (cfg.n_candidates > 1 && out.raw.size() == 1)) {
    while (out.raw.size() < cfg.n_candidates) {
      auto res = send(prompt, cfg, 1);
      check(res);
      auto choices = parse_choices(res.body);
      if (choices.empty()) throw Error(ErrorCode::kMalformedResponse, "single-completion call returned no choices");
      choices.front().choice_index = out.raw.size();
      out.raw.push_back(std::move(choices.front()));
    }
  }

  for (const auto& meta : out.raw) {
    try {
      out.candidates.push_back(extract_translation(meta.raw, cfg.tgt_lang_name));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyOutput) throw;
    }
  }
  if (out.candidates.empty()) {
    throw Error(ErrorCode::kAllCandidatesEmpty, std::to_string(out.raw.size()) + " completions, none usable");
  }
  return out;
}

ChatTranslator::ChatTranslator(std::shared_ptr<const GenerationClient> client, GenerationConfig cfg)
    : client_(std::move(client)), cfg_(std::move(cfg)) {
  cfg_.n_candidates = 1;
}

std::string ChatTranslator::translate(std::string_view text, std::string_view from_lang, std::string_view to_lang,
                                      std::uint64_t variant) const {
  PromptRequest req;
  req.src_lang_name = language_display_name(from_lang);
  req.tgt_lang_name = language_display_name(to_lang);
  req.input_text = std::string(text);
  auto cfg = cfg_;
  cfg.seed = variant;
  cfg.tgt_lang_name = req.tgt_lang_name;
  auto result = client_->generate_candidates(render_prompt(req), cfg);
  return result.candidates.front();
}

}  // namespace afsp
