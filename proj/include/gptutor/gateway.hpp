#pragma once

#include "gptutor/context.hpp"
#include "gptutor/prompt.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gptutor {

struct LlmConfig {
  std::string api_base = "https://api.openai.com/v1";
  std::string api_key_source = "OPENAI_API_KEY";
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.0;
  std::chrono::milliseconds timeout{30'000};
  int max_retries = 2;
  int max_concurrent = 4;
};

// Throws Error(InvalidArgument) unless timeout > 0, max_retries >= 0, max_concurrent >= 1.
void validate(const LlmConfig& config);

struct ExplanationResult {
  std::string text;
  std::string model;
  bool cached = false;
  std::int64_t latency_ms = 0;
  BackendKind backend = BackendKind::Mock;
};

// --- transport -------------------------------------------------------------------------

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::chrono::milliseconds timeout{30'000};
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Raised by transports for failures below HTTP (connect, read, timeout, abort).
class TransportError : public std::runtime_error {
 public:
  enum class Kind { Timeout, Network, Cancelled };
  TransportError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class Transport {
 public:
  virtual ~Transport() = default;
  // Must abort promptly once `stop` is requested.
  virtual HttpResponse post(const HttpRequest& request, std::stop_token stop) = 0;
};

// HTTP(S) transport backed by cpp-httplib.
std::shared_ptr<Transport> make_http_transport();

// --- wire format -------------------------------------------------------------------------

// {model, temperature, messages:[system, user]}
std::string build_request_body(const LlmConfig& config, const PromptBundle& prompt);

// choices[0].message.content; throws Error(MalformedResponse).
std::string parse_completion_response(std::string_view body);

// sha256(system + "\0" + user); keys transcripts and the mock answer.
std::string prompt_hash(const PromptBundle& prompt);

// --- backends ------------------------------------------------------------------------------

class Backend {
 public:
  virtual ~Backend() = default;
  virtual ExplanationResult complete(const PromptBundle& prompt, std::stop_token stop) = 0;
  virtual BackendKind kind() const noexcept = 0;
};

class ConcurrencyLimiter {
 public:
  explicit ConcurrencyLimiter(int capacity) : available_(capacity) {}

  // False when stop was requested before a slot freed up.
  bool acquire(std::stop_token stop);
  void release();

 private:
  std::mutex mutex_;
  std::condition_variable_any freed_;
  int available_;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
using Sleeper = std::function<void(std::chrono::milliseconds, std::stop_token)>;
using LogSink = std::function<void(std::string_view)>;

EnvLookup process_environment();
void interruptible_sleep(std::chrono::milliseconds duration, std::stop_token stop);

class LiveBackend : public Backend {
 public:
  struct Options {
    EnvLookup env = process_environment();
    Sleeper sleep = interruptible_sleep;
    std::function<double()> jitter;  // uniform [0, 1); defaults to a seeded engine
    LogSink log;
    std::chrono::milliseconds backoff_base{1000};
  };

  LiveBackend(LlmConfig config, std::shared_ptr<Transport> transport);
  LiveBackend(LlmConfig config, std::shared_ptr<Transport> transport, Options options);

  ExplanationResult complete(const PromptBundle& prompt, std::stop_token stop) override;
  BackendKind kind() const noexcept override { return BackendKind::Live; }

 private:
  LlmConfig config_;
  std::shared_ptr<Transport> transport_;
  Options options_;
  ConcurrencyLimiter limiter_;
  std::mutex jitter_mutex_;
};

// Deterministic offline answer: "MOCK-EXPLANATION <12 hex of prompt_hash> <language>".
class MockBackend : public Backend {
 public:
  ExplanationResult complete(const PromptBundle& prompt, std::stop_token stop) override;
  BackendKind kind() const noexcept override { return BackendKind::Mock; }
};

std::string mock_explanation(const PromptBundle& prompt);

struct TranscriptEntry {
  std::string prompt_sha256;
  std::string model;
  std::string text;
  std::string recorded_at;
};

// Appends one JSON line; throws Error(StoreUnwritable).
void record_transcript(const std::filesystem::path& store, const PromptBundle& prompt,
                       const ExplanationResult& result);

// All entries keyed by prompt hash; later lines win. Missing store -> empty map.
std::map<std::string, TranscriptEntry> load_transcripts(const std::filesystem::path& store);

// Answers from a transcript store; a miss is BackendUnavailable ("no transcript ...").
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(std::filesystem::path store) : store_(std::move(store)) {}

  ExplanationResult complete(const PromptBundle& prompt, std::stop_token stop) override;
  BackendKind kind() const noexcept override { return BackendKind::Replay; }

 private:
  std::filesystem::path store_;
};

// Forwards to `inner` and records every successful answer.
class RecordingBackend : public Backend {
 public:
  RecordingBackend(std::shared_ptr<Backend> inner, std::filesystem::path store)
      : inner_(std::move(inner)), store_(std::move(store)) {}

  ExplanationResult complete(const PromptBundle& prompt, std::stop_token stop) override;
  BackendKind kind() const noexcept override { return inner_->kind(); }

 private:
  std::shared_ptr<Backend> inner_;
  std::filesystem::path store_;
};

// Single-shot completion through `backend`.
inline ExplanationResult complete(Backend& backend, const PromptBundle& prompt,
                                  std::stop_token stop = {}) {
  return backend.complete(prompt, std::move(stop));
}

}  // namespace gptutor
