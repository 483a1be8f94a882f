#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "aoa/errors.hpp"

namespace aoa::llm {

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);

struct Message {
  Role role = Role::User;
  std::string content;

  bool operator==(const Message&) const = default;
};

/// One chat completion request. The system prompt is kept as its own field so
/// paired probes can assert that two requests differ in nothing else; it is
/// emitted as the leading system message on the wire.
struct ChatRequest {
  std::string model;
  std::string system_prompt;       // empty = no system message
  std::vector<Message> messages;   // user/assistant turns only
  double temperature = 0.0;
  int max_tokens = 1024;
  std::optional<long> seed;
};

/// Canonical OpenAI-style request body. This exact string is what backends
/// send and what the capture log records.
std::string request_payload(const ChatRequest& request);

struct Usage {
  long prompt_tokens = 0;
  long completion_tokens = 0;
  long total_tokens = 0;
};

struct ChatResult {
  std::string text;
  Usage usage;
  int retry_count = 0;
};

class ClientError : public std::runtime_error {
 public:
  ClientError(const std::string& message, int status) : std::runtime_error(message), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

/// Network failure or 5xx that survived the retry budget.
class TransportError : public ClientError {
 public:
  using ClientError::ClientError;
};

/// 429 that survived the backoff budget.
class RateLimited : public ClientError {
 public:
  using ClientError::ClientError;
};

/// Non-retryable 4xx; message carries a body excerpt.
class ProviderError : public ClientError {
 public:
  using ClientError::ClientError;
};

/// Raw wire-level reply. status 0 means the connection itself failed.
struct WireReply {
  int status = 0;
  std::string body;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual WireReply send(const std::string& payload) = 0;
};

/// One canned-reply rule. Empty matchers match anything. Replies are consumed
/// per hit (the last one repeats); any listed failure statuses are injected,
/// one per hit, before the replies start.
struct ScriptedRule {
  std::string system_contains;
  std::string user_contains;
  std::vector<std::string> replies;
  std::vector<int> fail_statuses;
};

void to_json(nlohmann::json& j, const ScriptedRule& r);
void from_json(const nlohmann::json& j, ScriptedRule& r);

/// First matching rule wins; requests matching no rule get the default reply,
/// which must always be present.
struct ScriptedBehavior {
  std::vector<ScriptedRule> rules;
  std::string default_reply = "OK";

  static ScriptedBehavior from_file(const std::filesystem::path& path);
};

void to_json(nlohmann::json& j, const ScriptedBehavior& b);
void from_json(const nlohmann::json& j, ScriptedBehavior& b);

/// Deterministic offline stand-in for a chat endpoint. Replies are wrapped in
/// proper completion JSON so the client code path is identical to live runs.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(ScriptedBehavior behavior);

  WireReply send(const std::string& payload) override;

 private:
  ScriptedBehavior behavior_;
  std::vector<std::size_t> hits_;
  std::size_t default_hits_ = 0;
  std::mutex mu_;
};

/// OpenAI-compatible chat-completions endpoint over HTTP(S).
class HttpBackend : public Backend {
 public:
  /// `endpoint` is scheme://host[:port][/prefix]; the request path is
  /// <prefix>/v1/chat/completions.
  HttpBackend(std::string endpoint, std::string api_key);

  WireReply send(const std::string& payload) override;

 private:
  std::string base_;
  std::string path_;
  std::string api_key_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{200};
  double jitter = 0.1;       // +/- fraction applied on top of the exponential delay
  unsigned jitter_seed = 0;  // deterministic jitter for reproducible schedules
  std::function<void(std::chrono::milliseconds)> sleeper;  // injectable; default really sleeps

  /// Pre-jitter delay for the given 0-based attempt: base * 2^attempt.
  std::chrono::milliseconds backoff(int attempt) const;
};

bool is_retryable_status(int status);

/// Blocking token bucket admitting `permits_per_second` requests on average
/// with bursts up to `burst`.
class RateLimiter {
 public:
  RateLimiter(double permits_per_second, double burst);

  void acquire();

 private:
  double rate_;
  double burst_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mu_;
};

struct CapturedCall {
  std::string payload;  // exact bytes handed to the backend
  std::string reply_text;
  int status = 0;
  int attempts = 0;
};

/// Thread-safe chat client: retries with exponential backoff on retryable
/// statuses, fails fast on other 4xx, records every logical call, and
/// accumulates token usage.
class ChatClient {
 public:
  explicit ChatClient(std::shared_ptr<Backend> backend, RetryPolicy retry = {},
                      std::shared_ptr<RateLimiter> limiter = nullptr);

  /// Throws TransportError / RateLimited / ProviderError.
  ChatResult complete(const ChatRequest& request);

  std::vector<CapturedCall> captures() const;
  Usage total_usage() const;
  void clear_captures();

 private:
  std::shared_ptr<Backend> backend_;
  RetryPolicy retry_;
  std::shared_ptr<RateLimiter> limiter_;
  mutable std::mutex mu_;
  std::vector<CapturedCall> captures_;
  Usage total_usage_;
};

/// Convenience: scripted client with no delays, for tests and offline runs.
ChatClient make_scripted_client(ScriptedBehavior behavior, int max_attempts = 3);

}  // namespace aoa::llm
