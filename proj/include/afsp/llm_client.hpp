#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "afsp/degeneration.hpp"

namespace afsp {

struct GenerationConfig {
  std::string endpoint = "http://localhost:8000/v1";
  std::string model = "default";
  std::size_t n_candidates = 30;
  double temperature = 0.8;
  double top_p = 0.95;
  std::optional<int> top_k;  // passed through when set
  std::optional<std::uint64_t> seed;
  int max_tokens = 256;
  double timeout_seconds = 60.0;
  int retries = 3;
  std::size_t max_in_flight = 4;
  // Language display name used to strip "<name> translation:" labels.
  std::string tgt_lang_name;

  void validate() const;
};

struct CandidateMeta {
  std::size_t choice_index = 0;
  std::string raw;
  std::string finish_reason;
};

struct CandidateSet {
  std::string prompt_fingerprint;
  std::vector<std::string> candidates;
  std::vector<CandidateMeta> raw;  // every completion received, kept or not
};

// Hex SHA-256 of the prompt text.
std::string prompt_fingerprint(std::string_view prompt);

class GenerationClient {
 public:
  virtual ~GenerationClient() = default;
  virtual CandidateSet generate_candidates(const std::string& prompt, const GenerationConfig& cfg) const = 0;
};

// Returns scripted candidates verbatim, keyed by prompt fingerprint.
class MockClient final : public GenerationClient {
 public:
  using Script = std::map<std::string, std::vector<std::string>>;

  MockClient() = default;
  explicit MockClient(Script script) : script_(std::move(script)) {}

  void add(std::string_view prompt, std::vector<std::string> candidates);
  const Script& script() const noexcept { return script_; }

  // {"<fingerprint>": ["candidate", ...], ...}
  static MockClient from_json(const nlohmann::json& doc);
  static MockClient load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  // Throws ScriptMiss for unknown prompts.
  CandidateSet generate_candidates(const std::string& prompt, const GenerationConfig& cfg) const override;

 private:
  Script script_;
};

struct HttpResponse {
  int status = 0;
  std::map<std::string, std::string> headers;  // lowercase names
  std::string body;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  // Throws Error(NetworkFailure) when no response was received.
  virtual HttpResponse post(const std::string& url, const std::map<std::string, std::string>& headers,
                            const std::string& body, std::chrono::milliseconds timeout) const = 0;
};

// cpp-httplib backed transport (http and https).
class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post(const std::string& url, const std::map<std::string, std::string>& headers,
                    const std::string& body, std::chrono::milliseconds timeout) const override;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

// OpenAI-style POST {endpoint}/chat/completions client. Bearer token from
// AFSP_API_KEY unless given explicitly.
class ChatCompletionsClient final : public GenerationClient {
 public:
  explicit ChatCompletionsClient(std::shared_ptr<const HttpTransport> transport = nullptr, Sleeper sleeper = nullptr,
                                 std::optional<std::string> api_key = std::nullopt);

  CandidateSet generate_candidates(const std::string& prompt, const GenerationConfig& cfg) const override;

  static nlohmann::json request_body(const std::string& prompt, const GenerationConfig& cfg, std::size_t n);
  // Raw choices[*].message.content with finish reasons. Throws
  // MalformedResponse.
  static std::vector<CandidateMeta> parse_choices(const std::string& body);

 private:
  // Sends one request with retries. Non-retryable error statuses are
  // returned to the caller.
  HttpResponse send(const std::string& prompt, const GenerationConfig& cfg, std::size_t n) const;

  std::shared_ptr<const HttpTransport> transport_;
  Sleeper sleeper_;
  std::optional<std::string> api_key_;
};

// Back-translation through a generation client using the zero-shot prompt.
class ChatTranslator final : public Translator {
 public:
  ChatTranslator(std::shared_ptr<const GenerationClient> client, GenerationConfig cfg);
  std::string translate(std::string_view text, std::string_view from_lang, std::string_view to_lang,
                        std::uint64_t variant) const override;

 private:
  std::shared_ptr<const GenerationClient> client_;
  GenerationConfig cfg_;
};

}  // namespace afsp
