#include "sfusion/llm_client.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "sfusion/io_util.hpp"

namespace sfusion {

using json = nlohmann::json;

const char* to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::Live: return "live";
    case BackendKind::Cache: return "cache";
    case BackendKind::Mock: return "mock";
  }
  return "?";
}

namespace {

json request_to_json(const LlmRequest& r) {
  // nlohmann::json objects iterate in key order, so dump() is canonical.
  return json{{"model", r.model},
              {"prompt", r.prompt},
              {"temperature", r.temperature},
              {"max_tokens", r.max_tokens}};
}

LlmRequest request_from_json(const json& j) {
  LlmRequest r;
  r.model = j.at("model").get<std::string>();
  r.prompt = j.at("prompt").get<std::string>();
  r.temperature = j.at("temperature").get<double>();
  r.max_tokens = j.at("max_tokens").get<int>();
  return r;
}

bool same_request(const LlmRequest& a, const LlmRequest& b) {
  return a.model == b.model && a.prompt == b.prompt && a.temperature == b.temperature &&
         a.max_tokens == b.max_tokens;
}

int count_words(const std::string& text) {
  std::istringstream ss(text);
  std::string w;
  int n = 0;
  while (ss >> w) ++n;
  return n;
}

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void validate_request(const LlmRequest& r) {
  if (r.prompt.empty()) throw UsageError("LLM request with empty prompt");
  if (r.temperature < 0) throw UsageError("LLM request with negative temperature");
  if (r.max_tokens <= 0) throw UsageError("LLM request with non-positive max_tokens");
}

}  // namespace

std::string cache_key(const LlmRequest& request) {
  return sha256_hex(request_to_json(request).dump());
}

LlmResponse complete(Backend& backend, const LlmRequest& request) {
  validate_request(request);
  auto response = backend.complete(request);
  if (response.text.empty()) throw BackendError(BackendErrorKind::BadResponse, "empty completion");
  return response;
}

// ---- live ------------------------------------------------------------------

LiveBackend::LiveBackend(LiveConfig config)
    : config_(std::move(config)), in_flight_(std::max(1, config_.max_in_flight)) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, kUrl)) {
    throw UsageError("invalid endpoint URL '" + config_.endpoint + "'");
  }
  scheme_host_port_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";

  const char* cred = std::getenv(config_.credential_env.c_str());
  if (cred == nullptr || *cred == '\0') {
    throw BackendError(BackendErrorKind::Auth,
                       "environment variable " + config_.credential_env + " is not set");
  }
  credential_ = cred;
}

LlmResponse LiveBackend::attempt(const LlmRequest& request) {
  httplib::Client cli(scheme_host_port_);
  cli.set_connection_timeout(config_.timeout);
  cli.set_read_timeout(config_.timeout);
  cli.set_write_timeout(config_.timeout);

  json body{{"model", request.model},
            {"messages", json::array({json{{"role", "user"}, {"content", request.prompt}}})},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens}};
  httplib::Headers headers{{"Authorization", "Bearer " + credential_}};

  const auto t0 = std::chrono::steady_clock::now();
  auto res = cli.Post(path_, headers, body.dump(), "application/json");
  const auto latency =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);

  if (!res) {
    throw BackendError(BackendErrorKind::Network, httplib::to_string(res.error()));
  }
  const int status = res->status;
  if (status == 401 || status == 403) {
    throw BackendError(BackendErrorKind::Auth, "HTTP " + std::to_string(status));
  }
  if (status == 429) throw BackendError(BackendErrorKind::RateLimit, "HTTP 429");
  if (status >= 500) throw BackendError(BackendErrorKind::Network, "HTTP " + std::to_string(status));
  if (status != 200) {
    throw BackendError(BackendErrorKind::BadResponse, "HTTP " + std::to_string(status));
  }

  auto doc = json::parse(res->body, nullptr, false);
  if (doc.is_discarded()) throw BackendError(BackendErrorKind::BadResponse, "body is not JSON");
  LlmResponse out;
  try {
    out.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(BackendErrorKind::BadResponse, e.what());
  }
  if (auto u = doc.find("usage"); u != doc.end() && u->contains("completion_tokens")) {
    out.token_count = u->at("completion_tokens").get<int>();
  } else {
    out.token_count = count_words(out.text);
  }
  out.latency = latency;
  out.backend_kind = BackendKind::Live;
  if (out.text.empty()) throw BackendError(BackendErrorKind::BadResponse, "empty completion");
  return out;
}

LlmResponse LiveBackend::complete(const LlmRequest& request) {
  for (int i = 0;; ++i) {
    try {
      in_flight_.acquire();
      struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
      } release{in_flight_};
      return attempt(request);
    } catch (const BackendError& e) {
      const bool retryable =
          e.kind == BackendErrorKind::Network || e.kind == BackendErrorKind::RateLimit;
      if (!retryable || i + 1 >= config_.max_attempts) throw;
      std::this_thread::sleep_for(config_.base_backoff * (1 << i));
    }
  }
}

// ---- cache -----------------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  const auto text = read_file(path_);
  for (auto line : split_lines(text)) {
    auto doc = json::parse(line, nullptr, false);
    if (doc.is_discarded()) continue;  // torn write
    try {
      CacheEntry e;
      e.request = request_from_json(doc.at("request"));
      e.text = doc.at("response").at("text").get<std::string>();
      e.token_count = doc.at("response").value("token_count", 0);
      entries_[doc.at("key").get<std::string>()] = std::move(e);
    } catch (const json::exception&) {
      continue;
    }
  }
}

std::optional<CacheEntry> ResponseCache::lookup(const std::string& key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::store(const std::string& key, const LlmRequest& request,
                          const LlmResponse& response) {
  json line{{"key", key},
            {"request", request_to_json(request)},
            {"response", {{"text", response.text}, {"token_count", response.token_count}}},
            {"timestamp", utc_timestamp()}};
  std::lock_guard wlock(write_mu_);
  {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) throw DataError("cannot append to cache " + path_.string());
    out << line.dump() << '\n';
    out.flush();
  }
  std::unique_lock lock(mu_);
  entries_[key] = CacheEntry{request, response.text, response.token_count};
}

std::size_t ResponseCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

ReplayBackend::ReplayBackend(std::shared_ptr<ResponseCache> cache, std::shared_ptr<Backend> fallback)
    : cache_(std::move(cache)), fallback_(std::move(fallback)) {}

LlmResponse ReplayBackend::complete(const LlmRequest& request) {
  const auto key = cache_key(request);
  if (auto hit = cache_->lookup(key); hit && same_request(hit->request, request)) {
    return LlmResponse{hit->text, hit->token_count, std::chrono::milliseconds{0},
                       BackendKind::Cache};
  }
  if (!fallback_) throw BackendError(BackendErrorKind::CacheMiss, "no cached response for " + key);
  auto response = fallback_->complete(request);
  if (response.text.empty()) throw BackendError(BackendErrorKind::BadResponse, "empty completion");
  cache_->store(key, request, response);
  return response;
}

// ---- mock ------------------------------------------------------------------

std::optional<std::string> last_injected_facts(const std::string& prompt) {
  static constexpr std::string_view kMarker = "New Fact:";
  auto pos = prompt.rfind(kMarker);
  if (pos == std::string::npos) return std::nullopt;
  pos += kMarker.size();
  auto nl = prompt.find('\n', pos);
  auto facts = trim(std::string_view(prompt).substr(pos, nl == std::string::npos ? nl : nl - pos));
  if (facts.empty()) return std::nullopt;
  return facts;
}

MockScript MockScript::from_file(const std::filesystem::path& path) {
  auto doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw DataError(path.string() + ": mock script must be a JSON object");
  }
  MockScript s;
  try {
    if (doc.contains("keyed")) s.keyed = doc["keyed"].get<std::map<std::string, std::string>>();
    s.echo_facts = doc.value("echo_facts", false);
    if (doc.contains("rules")) {
      for (const auto& r : doc["rules"]) {
        s.rules.push_back({r.at("contains").get<std::string>(), r.at("response").get<std::string>()});
      }
    }
    if (doc.contains("sequence")) s.sequence = doc["sequence"].get<std::vector<std::string>>();
    if (doc.contains("default")) s.fallback_response = doc["default"].get<std::string>();
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return s;
}

MockBackend::MockBackend(MockScript script) : script_(std::move(script)) {}

LlmResponse MockBackend::complete(const LlmRequest& request) {
  auto resolve = [&]() -> std::string {
    std::lock_guard lock(mu_);
    ++calls_;
    if (!script_.keyed.empty()) {
      if (auto it = script_.keyed.find(sha256_hex(request.prompt)); it != script_.keyed.end()) {
        return it->second;
      }
    }
    if (script_.echo_facts) {
      if (auto facts = last_injected_facts(request.prompt)) return *facts;
    }
    for (const auto& rule : script_.rules) {
      if (request.prompt.find(rule.contains) != std::string::npos) return rule.response;
    }
    if (script_.responder) {
      if (auto r = script_.responder(request)) return *r;
    }
    if (next_ < script_.sequence.size()) return script_.sequence[next_++];
    if (script_.fallback_response) return *script_.fallback_response;
    throw BackendError(BackendErrorKind::MockExhausted, "no scripted response");
  };
  LlmResponse out;
  out.text = resolve();
  if (out.text.empty()) throw BackendError(BackendErrorKind::BadResponse, "empty completion");
  out.token_count = count_words(out.text);
  out.backend_kind = BackendKind::Mock;
  return out;
}

std::size_t MockBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

}  // namespace sfusion
