#include "aoa/llm_client.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <thread>

#include "httplib.h"

namespace aoa::llm {

namespace {

nlohmann::json wire_messages(const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  if (!request.system_prompt.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
  }
  for (const auto& message : request.messages) {
    messages.push_back({{"role", to_string(message.role)}, {"content", message.content}});
  }
  return messages;
}

std::string excerpt(const std::string& body, std::size_t limit = 200) {
  if (body.size() <= limit) return body;
  return body.substr(0, limit) + "...";
}

Usage parse_usage(const nlohmann::json& j) {
  Usage usage;
  if (auto it = j.find("usage"); it != j.end() && it->is_object()) {
    usage.prompt_tokens = it->value("prompt_tokens", 0L);
    usage.completion_tokens = it->value("completion_tokens", 0L);
    usage.total_tokens = it->value("total_tokens", usage.prompt_tokens + usage.completion_tokens);
  }
  return usage;
}

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

std::string request_payload(const ChatRequest& request) {
  nlohmann::json body{
      {"model", request.model},
      {"messages", wire_messages(request)},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
  };
  if (request.seed) body["seed"] = *request.seed;
  return body.dump();
}

void to_json(nlohmann::json& j, const ScriptedRule& r) {
  j = nlohmann::json{{"system_contains", r.system_contains},
                     {"user_contains", r.user_contains},
                     {"replies", r.replies},
                     {"fail_statuses", r.fail_statuses}};
}

void from_json(const nlohmann::json& j, ScriptedRule& r) {
  r.system_contains = j.value("system_contains", std::string{});
  r.user_contains = j.value("user_contains", std::string{});
  r.replies = j.value("replies", std::vector<std::string>{});
  r.fail_statuses = j.value("fail_statuses", std::vector<int>{});
}

void to_json(nlohmann::json& j, const ScriptedBehavior& b) {
  j = nlohmann::json{{"rules", b.rules}, {"default_reply", b.default_reply}};
}

void from_json(const nlohmann::json& j, ScriptedBehavior& b) {
  b.rules = j.value("rules", std::vector<ScriptedRule>{});
  if (!j.contains("default_reply")) throw SchemaError("scripted behavior needs a default_reply");
  b.default_reply = j.at("default_reply").get<std::string>();
}

ScriptedBehavior ScriptedBehavior::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw SchemaError("malformed scripted-behavior JSON in " + path.string());
  return j.get<ScriptedBehavior>();
}

ScriptedBackend::ScriptedBackend(ScriptedBehavior behavior) : behavior_(std::move(behavior)) {
  hits_.assign(behavior_.rules.size(), 0);
}

WireReply ScriptedBackend::send(const std::string& payload) {
  nlohmann::json request = nlohmann::json::parse(payload, nullptr, false);
  std::string system;
  std::string users;
  if (!request.is_discarded()) {
    for (const auto& message : request.value("messages", nlohmann::json::array())) {
      std::string role = message.value("role", "");
      std::string content = message.value("content", "");
      if (role == "system") {
        system += content;
      } else if (role == "user") {
        users += content;
        users += '\n';
      }
    }
  }

  std::lock_guard<std::mutex> lock(mu_);
  const std::string* reply = &behavior_.default_reply;
  for (std::size_t i = 0; i < behavior_.rules.size(); ++i) {
    const ScriptedRule& rule = behavior_.rules[i];
    bool system_ok = rule.system_contains.empty() || system.find(rule.system_contains) != std::string::npos;
    bool user_ok = rule.user_contains.empty() || users.find(rule.user_contains) != std::string::npos;
    if (!system_ok || !user_ok) continue;

    std::size_t hit = hits_[i]++;
    if (hit < rule.fail_statuses.size()) {
      return {rule.fail_statuses[hit], "injected failure"};
    }
    if (!rule.replies.empty()) {
      std::size_t index = std::min(hit - rule.fail_statuses.size(), rule.replies.size() - 1);
      reply = &rule.replies[index];
    }
    break;
  }

  long prompt_tokens = static_cast<long>(payload.size() / 4);
  long completion_tokens = static_cast<long>(reply->size() / 4);
  nlohmann::json body{
      {"id", "scripted-" + std::to_string(default_hits_++)},
      {"object", "chat.completion"},
      {"choices",
       nlohmann::json::array(
           {{{"index", 0},
             {"message", {{"role", "assistant"}, {"content", *reply}}},
             {"finish_reason", "stop"}}})},
      {"usage",
       {{"prompt_tokens", prompt_tokens},
        {"completion_tokens", completion_tokens},
        {"total_tokens", prompt_tokens + completion_tokens}}},
  };
  return {200, body.dump()};
}

HttpBackend::HttpBackend(std::string endpoint, std::string api_key)
    : api_key_(std::move(api_key)) {
  // Split scheme://host[:port] from any path prefix.
  std::size_t scheme = endpoint.find("://");
  std::size_t path_start =
      scheme == std::string::npos ? endpoint.find('/') : endpoint.find('/', scheme + 3);
  if (path_start == std::string::npos) {
    base_ = endpoint;
    path_ = "/v1/chat/completions";
  } else {
    base_ = endpoint.substr(0, path_start);
    std::string prefix = endpoint.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    path_ = prefix + "/v1/chat/completions";
  }
}

WireReply HttpBackend::send(const std::string& payload) {
  httplib::Client client(base_);
  client.set_connection_timeout(30);
  client.set_read_timeout(120);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  auto res = client.Post(path_, headers, payload, "application/json");
  if (!res) return {0, httplib::to_string(res.error())};
  return {res->status, res->body};
}

std::chrono::milliseconds RetryPolicy::backoff(int attempt) const {
  double factor = std::pow(2.0, attempt);
  return std::chrono::milliseconds(static_cast<long>(base_delay.count() * factor));
}

bool is_retryable_status(int status) {
  return status == 0 || status == 429 || status == 500 || status == 502 || status == 503 ||
         status == 504;
}

RateLimiter::RateLimiter(double permits_per_second, double burst)
    : rate_(permits_per_second), burst_(std::max(burst, 1.0)), tokens_(burst_),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  std::unique_lock<std::mutex> lock(mu_);
  for (;;) {
    auto now = std::chrono::steady_clock::now();
    tokens_ = std::min(burst_, tokens_ + rate_ * std::chrono::duration<double>(now - last_).count());
    last_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    double wait_s = (1.0 - tokens_) / rate_;
    lock.unlock();
    std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
    lock.lock();
  }
}

ChatClient::ChatClient(std::shared_ptr<Backend> backend, RetryPolicy retry,
                       std::shared_ptr<RateLimiter> limiter)
    : backend_(std::move(backend)), retry_(std::move(retry)), limiter_(std::move(limiter)) {}

ChatResult ChatClient::complete(const ChatRequest& request) {
  std::string payload = request_payload(request);
  std::mt19937_64 jitter_rng(retry_.jitter_seed);

  WireReply last;
  int attempts = 0;
  for (int attempt = 0; attempt < std::max(retry_.max_attempts, 1); ++attempt) {
    if (limiter_) limiter_->acquire();
    last = backend_->send(payload);
    ++attempts;

    if (last.status == 200) {
      nlohmann::json body = nlohmann::json::parse(last.body, nullptr, false);
      if (body.is_discarded() || !body.contains("choices") || body["choices"].empty()) {
        std::lock_guard<std::mutex> lock(mu_);
        captures_.push_back({payload, last.body, last.status, attempts});
        throw ProviderError("malformed completion body: " + excerpt(last.body), 200);
      }
      ChatResult result;
      result.text = body["choices"][0].value("message", nlohmann::json::object())
                        .value("content", std::string{});
      result.usage = parse_usage(body);
      result.retry_count = attempts - 1;
      std::lock_guard<std::mutex> lock(mu_);
      captures_.push_back({payload, result.text, last.status, attempts});
      total_usage_.prompt_tokens += result.usage.prompt_tokens;
      total_usage_.completion_tokens += result.usage.completion_tokens;
      total_usage_.total_tokens += result.usage.total_tokens;
      return result;
    }

    if (!is_retryable_status(last.status)) {
      std::lock_guard<std::mutex> lock(mu_);
      captures_.push_back({payload, last.body, last.status, attempts});
      throw ProviderError("provider rejected request (HTTP " + std::to_string(last.status) +
                              "): " + excerpt(last.body),
                          last.status);
    }

    if (attempt + 1 < retry_.max_attempts) {
      auto delay = retry_.backoff(attempt);
      if (retry_.jitter > 0 && delay.count() > 0) {
        std::uniform_real_distribution<double> dist(1.0 - retry_.jitter, 1.0 + retry_.jitter);
        delay = std::chrono::milliseconds(static_cast<long>(delay.count() * dist(jitter_rng)));
      }
      if (retry_.sleeper) {
        retry_.sleeper(delay);
      } else if (delay.count() > 0) {
        std::this_thread::sleep_for(delay);
      }
    }
  }

  {
    std::lock_guard<std::mutex> lock(mu_);
    captures_.push_back({payload, last.body, last.status, attempts});
  }
  std::string message = "request failed after " + std::to_string(attempts) +
                        " attempts (last HTTP " + std::to_string(last.status) + ")";
  if (last.status == 429) throw RateLimited(message, last.status);
  throw TransportError(message, last.status);
}

std::vector<CapturedCall> ChatClient::captures() const {
  std::lock_guard<std::mutex> lock(mu_);
  return captures_;
}

Usage ChatClient::total_usage() const {
  std::lock_guard<std::mutex> lock(mu_);
  return total_usage_;
}

void ChatClient::clear_captures() {
  std::lock_guard<std::mutex> lock(mu_);
  captures_.clear();
}

ChatClient make_scripted_client(ScriptedBehavior behavior, int max_attempts) {
  RetryPolicy retry;
  retry.max_attempts = max_attempts;
  retry.base_delay = std::chrono::milliseconds(0);
  retry.sleeper = [](std::chrono::milliseconds) {};
  return ChatClient(std::make_shared<ScriptedBackend>(std::move(behavior)), std::move(retry));
}

}  // namespace aoa::llm
