#include "gptutor/gateway.hpp"

#include "gptutor/error.hpp"
#include "gptutor/hash.hpp"

#include "json.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <random>

namespace gptutor {

using nlohmann::json;
using nlohmann::ordered_json;

void validate(const LlmConfig& config) {
  if (config.timeout.count() <= 0 || config.max_retries < 0 || config.max_concurrent < 1) {
    throw Error(ErrorCode::InvalidArgument,
                "llm config needs timeout > 0, max_retries >= 0 and max_concurrent >= 1");
  }
}

std::string build_request_body(const LlmConfig& config, const PromptBundle& prompt) {
  ordered_json body;
  body["model"] = prompt.model.empty() ? config.model : prompt.model;
  body["temperature"] = config.temperature;
  body["messages"] = ordered_json::array({
      ordered_json{{"role", "system"}, {"content", prompt.system_message}},
      ordered_json{{"role", "user"}, {"content", prompt.user_message}},
  });
  return body.dump();
}

std::string parse_completion_response(std::string_view body) {
  const json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::MalformedResponse, "completion response is not a JSON object");
  }
  const auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty()) {
    throw Error(ErrorCode::MalformedResponse, "completion response has no choices");
  }
  const json& first = (*choices)[0];
  if (!first.is_object() || !first.contains("message") || !first["message"].is_object()) {
    throw Error(ErrorCode::MalformedResponse, "completion choice has no message");
  }
  const json& message = first["message"];
  const auto content = message.find("content");
  if (content == message.end() || !content->is_string()) {
    throw Error(ErrorCode::MalformedResponse, "completion message has no content");
  }
  return content->get<std::string>();
}

std::string prompt_hash(const PromptBundle& prompt) {
  std::string material = prompt.system_message;
  material += '\0';
  material += prompt.user_message;
  return sha256_hex(material);
}

bool ConcurrencyLimiter::acquire(std::stop_token stop) {
  std::unique_lock lock(mutex_);
  if (!freed_.wait(lock, stop, [&] { return available_ > 0; })) return false;
  --available_;
  return true;
}

void ConcurrencyLimiter::release() {
  {
    std::lock_guard lock(mutex_);
    ++available_;
  }
  freed_.notify_one();
}

EnvLookup process_environment() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* value = std::getenv(name.c_str());
    if (value == nullptr) return std::nullopt;
    return std::string(value);
  };
}

void interruptible_sleep(std::chrono::milliseconds duration, std::stop_token stop) {
  std::mutex mutex;
  std::condition_variable_any cv;
  std::unique_lock lock(mutex);
  cv.wait_for(lock, stop, duration, [] { return false; });
}

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ms(Clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - since).count();
}

// Every message that leaves the backend goes through here.
std::string scrub(std::string text, const std::string& secret) {
  if (secret.empty()) return text;
  for (auto pos = text.find(secret); pos != std::string::npos; pos = text.find(secret, pos)) {
    text.replace(pos, secret.size(), "***");
  }
  return text;
}

std::string body_snippet(const std::string& body) {
  constexpr std::size_t kMax = 200;
  return body.size() > kMax ? body.substr(0, kMax) + "..." : body;
}

std::string chat_completions_url(std::string base) {
  while (!base.empty() && base.back() == '/') base.pop_back();
  return base + "/chat/completions";
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

}  // namespace

LiveBackend::LiveBackend(LlmConfig config, std::shared_ptr<Transport> transport)
    : LiveBackend(std::move(config), std::move(transport), Options{}) {}

LiveBackend::LiveBackend(LlmConfig config, std::shared_ptr<Transport> transport, Options options)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      options_(std::move(options)),
      limiter_(config_.max_concurrent) {
  validate(config_);
  if (!options_.jitter) {
    auto engine = std::make_shared<std::mt19937_64>(std::random_device{}());
    options_.jitter = [engine] { return std::uniform_real_distribution<double>(0.0, 1.0)(*engine); };
  }
}

ExplanationResult LiveBackend::complete(const PromptBundle& prompt, std::stop_token stop) {
  const auto started = Clock::now();
  const std::string& env_name = config_.api_key_source;
  const auto key = options_.env ? options_.env(env_name) : std::nullopt;
  if (!key || key->empty()) {
    throw Error(ErrorCode::AuthError,
                "no API key: set the " + env_name + " environment variable");
  }
  auto log = [&](const std::string& line) {
    if (options_.log) options_.log(scrub(line, *key));
  };
  auto fail = [&](ErrorCode code, const std::string& message) -> Error {
    return Error(code, scrub(message, *key));
  };

  if (!limiter_.acquire(stop)) throw Error(ErrorCode::Cancelled, "request cancelled");
  struct Release {
    ConcurrencyLimiter& limiter;
    ~Release() { limiter.release(); }
  } release{limiter_};

  HttpRequest request;
  request.url = chat_completions_url(config_.api_base);
  request.headers = {{"Authorization", "Bearer " + *key}, {"Content-Type", "application/json"}};
  request.body = build_request_body(config_, prompt);
  request.timeout = config_.timeout;

  std::optional<Error> last;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (stop.stop_requested()) throw Error(ErrorCode::Cancelled, "request cancelled");
    try {
      log("POST " + request.url + " attempt " + std::to_string(attempt + 1));
      const HttpResponse response = transport_->post(request, stop);
      if (response.status >= 200 && response.status < 300) {
        ExplanationResult result;
        result.text = parse_completion_response(response.body);
        if (result.text.empty()) {
          throw fail(ErrorCode::MalformedResponse, "completion content is empty");
        }
        result.model = prompt.model;
        result.backend = BackendKind::Live;
        result.latency_ms = elapsed_ms(started);
        return result;
      }
      const std::string status = "HTTP " + std::to_string(response.status);
      log("backend answered " + status);
      if (response.status == 401 || response.status == 403) {
        throw fail(ErrorCode::AuthError, "backend rejected the API key (" + status +
                                             "); check the " + env_name + " environment variable");
      }
      if (response.status == 429) {
        last = fail(ErrorCode::RateLimited, "rate limited by backend (" + status + ")");
      } else if (response.status >= 500) {
        last = fail(ErrorCode::BackendUnavailable,
                    "backend error (" + status + "): " + body_snippet(response.body));
      } else {
        throw fail(ErrorCode::RequestRejected,
                   "backend rejected the request (" + status + "): " + body_snippet(response.body));
      }
    } catch (const TransportError& e) {
      if (e.kind() == TransportError::Kind::Cancelled || stop.stop_requested()) {
        throw Error(ErrorCode::Cancelled, "request cancelled");
      }
      log(std::string("transport failure: ") + e.what());
      last = fail(ErrorCode::BackendUnavailable, std::string("backend unreachable: ") + e.what());
    }
    if (attempt < config_.max_retries) {
      const auto ceiling = options_.backoff_base * (1LL << attempt);
      double fraction = 0.0;
      {
        std::lock_guard lock(jitter_mutex_);
        fraction = options_.jitter();
      }
      const auto delay = std::chrono::milliseconds(
          static_cast<std::int64_t>(fraction * static_cast<double>(ceiling.count())));
      if (options_.sleep) options_.sleep(delay, stop);
    }
  }
  throw *last;
}

std::string mock_explanation(const PromptBundle& prompt) {
  return "MOCK-EXPLANATION " + prompt_hash(prompt).substr(0, 12) + " " + prompt.language;
}

ExplanationResult MockBackend::complete(const PromptBundle& prompt, std::stop_token stop) {
  if (stop.stop_requested()) throw Error(ErrorCode::Cancelled, "request cancelled");
  ExplanationResult result;
  result.text = mock_explanation(prompt);
  result.model = prompt.model;
  result.backend = BackendKind::Mock;
  return result;
}

void record_transcript(const std::filesystem::path& store, const PromptBundle& prompt,
                       const ExplanationResult& result) {
  std::error_code ec;
  if (store.has_parent_path()) std::filesystem::create_directories(store.parent_path(), ec);
  std::ofstream out(store, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::StoreUnwritable, "cannot write transcript store " + store.string());
  ordered_json line;
  line["prompt_sha256"] = prompt_hash(prompt);
  line["model"] = result.model;
  line["text"] = result.text;
  line["recorded_at"] = utc_timestamp();
  out << line.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::StoreUnwritable, "cannot write transcript store " + store.string());
}

std::map<std::string, TranscriptEntry> load_transcripts(const std::filesystem::path& store) {
  std::map<std::string, TranscriptEntry> entries;
  std::ifstream in(store, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    const json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) continue;
    TranscriptEntry entry;
    entry.prompt_sha256 = doc.value("prompt_sha256", "");
    entry.model = doc.value("model", "");
    entry.text = doc.value("text", "");
    entry.recorded_at = doc.value("recorded_at", "");
    if (entry.prompt_sha256.empty()) continue;
    entries[entry.prompt_sha256] = std::move(entry);
  }
  return entries;
}

ExplanationResult ReplayBackend::complete(const PromptBundle& prompt, std::stop_token stop) {
  if (stop.stop_requested()) throw Error(ErrorCode::Cancelled, "request cancelled");
  const auto started = Clock::now();
  const std::string key = prompt_hash(prompt);
  const auto entries = load_transcripts(store_);
  const auto it = entries.find(key);
  if (it == entries.end()) {
    throw Error(ErrorCode::BackendUnavailable,
                "no transcript for prompt " + key + " in " + store_.generic_string());
  }
  ExplanationResult result;
  result.text = it->second.text;
  result.model = it->second.model.empty() ? prompt.model : it->second.model;
  result.backend = BackendKind::Replay;
  result.latency_ms = elapsed_ms(started);
  return result;
}

ExplanationResult RecordingBackend::complete(const PromptBundle& prompt, std::stop_token stop) {
  ExplanationResult result = inner_->complete(prompt, stop);
  record_transcript(store_, prompt, result);
  return result;
}

}  // namespace gptutor
