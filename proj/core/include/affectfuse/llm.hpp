#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "affectfuse/common.hpp"
#include "affectfuse/corpus.hpp"

namespace affectfuse::llm {

// ---------------------------------------------------------------------------
// Prompts and token accounting

/// The per-task user message with `{text}` (and `{trait}`) substituted.
std::string build_prompt(const corpus::TaskSpec& task, std::string_view text);

inline constexpr double kCharsPerToken = 4.3;
inline constexpr std::size_t kCallOverheadTokens = 8;

struct TokenEstimate {
  std::size_t prompt_base_tokens = 0;
  std::size_t text_tokens = 0;
  std::size_t overhead_tokens = kCallOverheadTokens;
  std::size_t total = 0;
};

/// Prompt template size for the task with an empty `{text}`: 63, 50 or 75.
std::size_t prompt_base_tokens(const corpus::TaskSpec& task);

/// ceil(code points / 4.3).
std::size_t estimate_text_tokens(std::string_view text);

TokenEstimate estimate_tokens(const corpus::TaskSpec& task, std::string_view text,
                              std::optional<std::string_view> response = std::nullopt);

/// Mean wall time of a call processing `total_tokens` tokens: 0.038 T + 1.32.
double estimate_latency_seconds(std::size_t total_tokens);

// ---------------------------------------------------------------------------
// Chat completion parameters and records

struct ChatParams {
  std::string model = "gpt-3.5-turbo-0301";
  double temperature = 1.0;
  int n_choices = 1;
  std::string endpoint_url = "https://api.openai.com/v1";
  std::chrono::seconds timeout{60};
  int max_retries = 5;

  /// Throws ConfigError on negative temperature, n_choices < 1 or max_retries < 0.
  void validate() const;
};

/// Cache key: hex SHA-256 over (model, temperature, n_choices, prompt).
std::string cache_key(const ChatParams& params, std::string_view prompt);

struct ChatRecord {
  std::string example_id;
  std::string task;  // TaskSpec::name()
  std::string prompt;
  std::string response;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  std::string created_at;     // ISO-8601 UTC
  std::string params_digest;  // cache_key(params, prompt)

  bool operator==(const ChatRecord&) const = default;
};

std::string to_json_line(const ChatRecord& record);
ChatRecord record_from_json_line(std::string_view line);

// ---------------------------------------------------------------------------
// Transport

struct HttpRequest {
  std::string url;
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
  std::chrono::seconds timeout{60};
};

/// `status == 0` means the request never produced an HTTP response
/// (connection refused, timeout, TLS failure).
struct HttpResponse {
  int status = 0;
  std::string body;
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// cpp-httplib backed transport (http and https).
class HttpTransport final : public ChatTransport {
 public:
  HttpResponse post(const HttpRequest& request) override;
};

/// JSON body of a successful chat completion with a single choice.
std::string completion_payload(std::string_view content, std::optional<std::size_t> prompt_tokens,
                               std::optional<std::size_t> completion_tokens);

/// Extracts the user message from a chat-completion request body.
std::string prompt_of_request(std::string_view request_body);

/// In-process transport for tests and offline runs: answers every request
/// with a configurable function and counts the calls.
class MockTransport final : public ChatTransport {
 public:
  using Handler = std::function<HttpResponse(const HttpRequest&)>;

  explicit MockTransport(Handler handler);

  /// Replies 200 with `reply(prompt)` as the first choice's content.
  static MockTransport replying(std::function<std::string(std::string_view prompt)> reply);

  HttpResponse post(const HttpRequest& request) override;

  std::size_t calls() const { return calls_.load(); }
  std::vector<HttpRequest> requests() const;

 private:
  Handler handler_;
  std::atomic<std::size_t> calls_{0};
  mutable std::mutex mutex_;
  std::vector<HttpRequest> requests_;
};

// ---------------------------------------------------------------------------
// Client with retries

struct RetryPolicy {
  std::chrono::milliseconds base{1000};
  std::chrono::milliseconds cap{60000};
};

/// Upper bound of the full-jitter delay before retry `attempt` (0-based):
/// min(cap, base * 2^attempt).
std::chrono::milliseconds backoff_ceiling(const RetryPolicy& policy, int attempt);

struct ClientOptions {
  RetryPolicy retry;
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
  std::uint64_t jitter_seed = 0;
  std::optional<std::string> api_key;                    // sent as a Bearer token
};

struct Completion {
  std::string content;
  std::optional<std::size_t> prompt_tokens;
  std::optional<std::size_t> completion_tokens;
};

/// Issues single-user-message chat completions with retry on transport
/// failures, 408, 429 and 5xx. Safe to call from several threads.
class ChatClient {
 public:
  ChatClient(ChatTransport& transport, ChatParams params, ClientOptions options = {});

  /// Throws TransportError once retries are exhausted, ApiError on a
  /// non-retryable status or unreadable payload, EmptyResponse when the
  /// first choice has no content.
  Completion complete(const std::string& prompt);

  const ChatParams& params() const { return params_; }

 private:
  std::chrono::milliseconds jittered_delay(int attempt);

  ChatTransport& transport_;
  ChatParams params_;
  ClientOptions options_;
  std::mutex rng_mutex_;
  Rng jitter_;
};

/// Reads `AFFECTFUSE_API_KEY` from the environment.
std::optional<std::string> api_key_from_env();

// ---------------------------------------------------------------------------
// Response cache

/// Append-only JSONL store of ChatRecords indexed by `params_digest`.
/// Writes are serialized; a truncated final line (interrupted append) is
/// ignored on load.
class CacheStore {
 public:
  /// Memory-only store.
  CacheStore() = default;
  /// Loads `file` if it exists; later puts append to it.
  explicit CacheStore(std::filesystem::path file);

  std::optional<ChatRecord> find(const std::string& key) const;
  void put(const ChatRecord& record);
  std::size_t size() const;

  /// Rewrites the file with one record per key (first occurrence wins),
  /// via temp file and rename. Returns the number of lines dropped.
  std::size_t compact();

 private:
  std::filesystem::path file_;
  mutable std::mutex mutex_;
  std::map<std::string, ChatRecord> index_;
  std::size_t lines_ = 0;
};

/// Token bucket: `rate` permits per second, bucket of `burst`. A
/// non-positive rate disables limiting.
class RateLimiter {
 public:
  RateLimiter(double rate, double burst);
  void acquire();

 private:
  double rate_;
  double burst_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mutex_;
};

struct CollectOptions {
  std::size_t concurrency = 4;
  double requests_per_second = 0.0;
  double burst = 4.0;
};

struct CollectStats {
  std::size_t hits = 0;
  std::size_t requests = 0;
};

/// One record per example, in input order. Cached prompts are served from
/// `cache`; each distinct missing prompt costs exactly one request and is
/// persisted before returning.
std::vector<ChatRecord> collect(const std::vector<corpus::Example>& examples,
                                const corpus::TaskSpec& task, ChatClient& client,
                                CacheStore& cache, const CollectOptions& options = {},
                                CollectStats* stats = nullptr);

}  // namespace affectfuse::llm
