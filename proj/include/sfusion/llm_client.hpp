#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "sfusion/errors.hpp"

namespace sfusion {

struct LlmRequest {
  std::string model;
  // Complex text and prompt, already concatenated.
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 1024;
};

enum class BackendKind { Live, Cache, Mock };

const char* to_string(BackendKind kind);

struct LlmResponse {
  std::string text;
  int token_count = 0;
  std::chrono::milliseconds latency{0};
  BackendKind backend_kind = BackendKind::Mock;
};

// SHA-256 over a canonical JSON encoding of all four request fields.
std::string cache_key(const LlmRequest& request);

class Backend {
 public:
  virtual ~Backend() = default;
  // Thread-safe. Returns non-empty text or throws BackendError.
  virtual LlmResponse complete(const LlmRequest& request) = 0;
};

LlmResponse complete(Backend& backend, const LlmRequest& request);

struct LiveConfig {
  // Full chat-completions URL, e.g. https://host/v1/chat/completions.
  std::string endpoint;
  // Name of the environment variable holding the bearer token.
  std::string credential_env = "OPENAI_API_KEY";
  int max_attempts = 4;
  std::chrono::milliseconds base_backoff{500};
  std::chrono::seconds timeout{120};
  int max_in_flight = 4;
};

// Chat-completion HTTP backend. Retries network failures, 429 and 5xx with
// exponential backoff; authentication failures are not retried.
class LiveBackend : public Backend {
 public:
  // Throws BackendError(Auth) when the credential variable is unset.
  explicit LiveBackend(LiveConfig config);
  LlmResponse complete(const LlmRequest& request) override;

 private:
  LlmResponse attempt(const LlmRequest& request);

  LiveConfig config_;
  std::string credential_;
  std::string scheme_host_port_;
  std::string path_;
  std::counting_semaphore<> in_flight_;
};

struct CacheEntry {
  LlmRequest request;
  std::string text;
  int token_count = 0;
};

/// Append-only JSON-lines store of {key, request, response, timestamp}.
/// Later lines win over earlier ones with the same key; a torn final line
/// is skipped on load.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path path);

  std::optional<CacheEntry> lookup(const std::string& key) const;
  void store(const std::string& key, const LlmRequest& request, const LlmResponse& response);
  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, CacheEntry> entries_;
  std::mutex write_mu_;
};

/// Serves from the cache; on a miss forwards to `fallback` and records the
/// answer, or throws BackendError(CacheMiss) when there is no fallback.
class ReplayBackend : public Backend {
 public:
  ReplayBackend(std::shared_ptr<ResponseCache> cache, std::shared_ptr<Backend> fallback = nullptr);
  LlmResponse complete(const LlmRequest& request) override;

 private:
  std::shared_ptr<ResponseCache> cache_;
  std::shared_ptr<Backend> fallback_;
};

struct MockRule {
  std::string contains;
  std::string response;
};

/// Scripted responses. Resolution order: `keyed` (SHA-256 of the prompt),
/// fact echo, `rules` (first substring match), `responder`, then `sequence`
/// in order, then `fallback_response`.
struct MockScript {
  std::map<std::string, std::string> keyed;
  // Answer edit prompts with the facts injected under the final "New Fact:".
  bool echo_facts = false;
  std::vector<MockRule> rules;
  std::function<std::optional<std::string>(const LlmRequest&)> responder;
  std::vector<std::string> sequence;
  std::optional<std::string> fallback_response;

  // {"keyed": {...}, "echo_facts": bool, "rules": [{"contains", "response"}],
  //  "sequence": [...], "default": "..."}
  static MockScript from_file(const std::filesystem::path& path);
};

// Text following the last "New Fact:" marker, up to the end of that line.
std::optional<std::string> last_injected_facts(const std::string& prompt);

class MockBackend : public Backend {
 public:
  explicit MockBackend(MockScript script);
  LlmResponse complete(const LlmRequest& request) override;
  std::size_t calls() const;

 private:
  MockScript script_;
  mutable std::mutex mu_;
  std::size_t next_ = 0;
  std::size_t calls_ = 0;
};

}  // namespace sfusion
