#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "affectfuse/error.hpp"
#include "affectfuse/llm.hpp"

namespace affectfuse::llm {
namespace {

using json = nlohmann::json;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool retryable(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

std::string chat_url(std::string_view endpoint) {
  std::string url(endpoint);
  while (!url.empty() && url.back() == '/') url.pop_back();
  return url + "/chat/completions";
}

std::optional<std::size_t> usage_field(const json& body, const char* key) {
  if (!body.contains("usage") || !body["usage"].is_object()) return std::nullopt;
  const auto& usage = body["usage"];
  if (!usage.contains(key) || !usage[key].is_number_unsigned()) return std::nullopt;
  return usage[key].get<std::size_t>();
}

}  // namespace

void ChatParams::validate() const {
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (n_choices < 1) throw ConfigError("n_choices must be >= 1");
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (model.empty()) throw ConfigError("model name must not be empty");
}

std::string cache_key(const ChatParams& params, std::string_view prompt) {
  const json material = json::array({params.model, params.temperature, params.n_choices, prompt});
  return sha256_hex(material.dump());
}

std::string to_json_line(const ChatRecord& r) {
  json j;
  j["example_id"] = r.example_id;
  j["task"] = r.task;
  j["prompt"] = r.prompt;
  j["response"] = r.response;
  j["prompt_tokens"] = r.prompt_tokens;
  j["completion_tokens"] = r.completion_tokens;
  j["created_at"] = r.created_at;
  j["params_digest"] = r.params_digest;
  return j.dump();
}

ChatRecord record_from_json_line(std::string_view line) {
  const json j = json::parse(line);
  ChatRecord r;
  r.example_id = j.at("example_id").get<std::string>();
  r.task = j.at("task").get<std::string>();
  r.prompt = j.at("prompt").get<std::string>();
  r.response = j.at("response").get<std::string>();
  r.prompt_tokens = j.at("prompt_tokens").get<std::size_t>();
  r.completion_tokens = j.at("completion_tokens").get<std::size_t>();
  r.created_at = j.at("created_at").get<std::string>();
  r.params_digest = j.at("params_digest").get<std::string>();
  return r;
}

std::string completion_payload(std::string_view content, std::optional<std::size_t> prompt_tokens,
                               std::optional<std::size_t> completion_tokens) {
  json body = {
      {"object", "chat.completion"},
      {"choices", json::array({{{"index", 0},
                                {"message", {{"role", "assistant"}, {"content", content}}},
                                {"finish_reason", "stop"}}})},
  };
  if (prompt_tokens || completion_tokens) {
    body["usage"] = json::object();
    if (prompt_tokens) body["usage"]["prompt_tokens"] = *prompt_tokens;
    if (completion_tokens) body["usage"]["completion_tokens"] = *completion_tokens;
  }
  return body.dump();
}

std::string prompt_of_request(std::string_view request_body) {
  const json body = json::parse(request_body);
  return body.at("messages").at(0).at("content").get<std::string>();
}

MockTransport::MockTransport(Handler handler) : handler_(std::move(handler)) {}

MockTransport MockTransport::replying(std::function<std::string(std::string_view)> reply) {
  return MockTransport([reply = std::move(reply)](const HttpRequest& request) {
    const std::string prompt = prompt_of_request(request.body);
    return HttpResponse{200, completion_payload(reply(prompt), std::nullopt, std::nullopt)};
  });
}

HttpResponse MockTransport::post(const HttpRequest& request) {
  ++calls_;
  {
    std::lock_guard lock(mutex_);
    requests_.push_back(request);
  }
  return handler_(request);
}

std::vector<HttpRequest> MockTransport::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

std::chrono::milliseconds backoff_ceiling(const RetryPolicy& policy, int attempt) {
  const auto cap = policy.cap.count();
  auto delay = policy.base.count();
  for (int i = 0; i < attempt && delay < cap; ++i) delay *= 2;
  return std::chrono::milliseconds(std::min(delay, cap));
}

ChatClient::ChatClient(ChatTransport& transport, ChatParams params, ClientOptions options)
    : transport_(transport),
      params_(std::move(params)),
      options_(std::move(options)),
      jitter_(options_.jitter_seed) {
  params_.validate();
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

std::chrono::milliseconds ChatClient::jittered_delay(int attempt) {
  const auto ceiling = backoff_ceiling(options_.retry, attempt);
  std::lock_guard lock(rng_mutex_);
  // Full jitter: uniform on [0, ceiling].
  return std::chrono::milliseconds(
      static_cast<std::int64_t>(jitter_.below(static_cast<std::uint64_t>(ceiling.count()) + 1)));
}

Completion ChatClient::complete(const std::string& prompt) {
  HttpRequest request;
  request.url = chat_url(params_.endpoint_url);
  request.timeout = params_.timeout;
  request.headers.emplace_back("Content-Type", "application/json");
  if (options_.api_key) request.headers.emplace_back("Authorization", "Bearer " + *options_.api_key);
  request.body = json{{"model", params_.model},
                      {"temperature", params_.temperature},
                      {"n", params_.n_choices},
                      {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}}
                     .dump();

  for (int attempt = 0;; ++attempt) {
    const HttpResponse response = transport_.post(request);
    if (response.status >= 200 && response.status < 300) {
      json body;
      try {
        body = json::parse(response.body);
      } catch (const json::parse_error&) {
        throw ApiError(response.status, response.body);
      }
      // Only the first choice is kept even when n > 1.
      if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) {
        throw EmptyResponse("chat completion has no choices");
      }
      const auto& choice = body["choices"][0];
      if (!choice.contains("message") || !choice["message"].contains("content") ||
          !choice["message"]["content"].is_string() ||
          choice["message"]["content"].get_ref<const std::string&>().empty()) {
        throw EmptyResponse("first choice has no message content");
      }
      return Completion{choice["message"]["content"].get<std::string>(),
                        usage_field(body, "prompt_tokens"), usage_field(body, "completion_tokens")};
    }
    if (!retryable(response.status)) throw ApiError(response.status, response.body);
    if (attempt >= params_.max_retries) {
      throw TransportError("chat request failed after " + std::to_string(attempt + 1) +
                           " attempts (last HTTP status " + std::to_string(response.status) + ")");
    }
    options_.sleep(jittered_delay(attempt));
  }
}

std::optional<std::string> api_key_from_env() {
  const char* key = std::getenv("AFFECTFUSE_API_KEY");
  if (key == nullptr || *key == '\0') return std::nullopt;
  return std::string(key);
}

RateLimiter::RateLimiter(double rate, double burst)
    : rate_(rate), burst_(std::max(1.0, burst)), tokens_(burst_), last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  if (rate_ <= 0.0) return;
  std::unique_lock lock(mutex_);
  for (;;) {
    const auto now = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
    lock.unlock();
    std::this_thread::sleep_for(wait);
    lock.lock();
  }
}

std::vector<ChatRecord> collect(const std::vector<corpus::Example>& examples,
                                const corpus::TaskSpec& task, ChatClient& client,
                                CacheStore& cache, const CollectOptions& options,
                                CollectStats* stats) {
  struct Pending {
    std::string key;
    std::string prompt;
    const corpus::Example* example;
  };
  std::vector<std::string> keys;
  keys.reserve(examples.size());
  std::vector<Pending> misses;
  std::unordered_map<std::string, bool> scheduled;
  std::size_t hits = 0;
  for (const auto& ex : examples) {
    std::string prompt = build_prompt(task, ex.text);
    std::string key = cache_key(client.params(), prompt);
    if (cache.find(key)) {
      ++hits;
    } else if (scheduled.emplace(key, true).second) {
      misses.push_back({key, std::move(prompt), &ex});
    }
    keys.push_back(std::move(key));
  }

  RateLimiter limiter(options.requests_per_second, options.burst);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= misses.size() || failed.load()) return;
      const auto& job = misses[i];
      try {
        limiter.acquire();
        Completion completion = client.complete(job.prompt);
        ChatRecord record;
        record.example_id = job.example->id;
        record.task = task.name();
        record.prompt = job.prompt;
        record.prompt_tokens =
            completion.prompt_tokens.value_or(estimate_tokens(task, job.example->text).total);
        record.completion_tokens =
            completion.completion_tokens.value_or(estimate_text_tokens(completion.content));
        record.response = std::move(completion.content);
        record.created_at = utc_timestamp();
        record.params_digest = job.key;
        cache.put(record);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed = true;
        return;
      }
    }
  };

  const std::size_t n_workers = std::min(std::max<std::size_t>(1, options.concurrency), misses.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    if (n_workers > 0) worker();
  }
  if (first_error) std::rethrow_exception(first_error);

  if (stats) {
    stats->hits = hits;
    stats->requests = misses.size();
  }

  std::vector<ChatRecord> out;
  out.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    auto record = cache.find(keys[i]);
    if (!record) throw EmptyResponse("no cached response for example '" + examples[i].id + "'");
    record->example_id = examples[i].id;
    out.push_back(std::move(*record));
  }
  return out;
}

}  // namespace affectfuse::llm
