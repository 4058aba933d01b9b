#include "gptutor/server.hpp"

#include "gptutor/error.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

namespace gptutor {

using nlohmann::json;
using nlohmann::ordered_json;

namespace rpc {

int error_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::RootNotFound: return -32001;
    case ErrorCode::FileNotFound: return -32010;
    case ErrorCode::OutsideWorkspace: return -32011;
    case ErrorCode::NoToken: return -32012;
    case ErrorCode::BudgetTooSmall: return -32013;
    case ErrorCode::AuthError: return -32020;
    case ErrorCode::RateLimited: return -32021;
    case ErrorCode::BackendUnavailable: return -32022;
    case ErrorCode::MalformedResponse: return -32023;
    case ErrorCode::RequestRejected: return -32024;
    case ErrorCode::StoreUnwritable: return -32030;
    case ErrorCode::InvalidArgument: return kInvalidParams;
    case ErrorCode::Cancelled: return kRequestCancelled;
  }
  return kInternalError;
}

std::optional<std::string> read_message(std::istream& in) {
  std::optional<std::size_t> length;
  std::string line;
  bool any_header = false;
  while (true) {
    if (!std::getline(in, line)) {
      if (!any_header) return std::nullopt;
      throw std::runtime_error("unexpected end of stream in message header");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!any_header) continue;
      break;
    }
    any_header = true;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw std::runtime_error("malformed header line: " + line);
    std::string name = line.substr(0, colon);
    for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (name == "content-length") {
      try {
        length = std::stoul(line.substr(colon + 1));
      } catch (const std::logic_error&) {
        throw std::runtime_error("invalid Content-Length");
      }
    }
  }
  if (!length) throw std::runtime_error("missing Content-Length header");
  std::string body(*length, '\0');
  in.read(body.data(), static_cast<std::streamsize>(*length));
  if (static_cast<std::size_t>(in.gcount()) != *length) {
    throw std::runtime_error("unexpected end of stream in message body");
  }
  return body;
}

void write_message(std::ostream& out, const std::string& body) {
  out << "Content-Length: " << body.size() << "\r\n\r\n" << body;
  out.flush();
}

}  // namespace rpc

namespace {

// Thrown while decoding params; becomes -32602.
struct InvalidParams : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Position parse_position(const json& params, const char* field) {
  if (!params.is_object() || !params.contains(field) || !params[field].is_object()) {
    throw InvalidParams(std::string("selection.") + field + " must be an object");
  }
  const json& pos = params[field];
  auto number = [&](const char* key) {
    if (!pos.contains(key) || !pos[key].is_number_integer() || pos[key].get<long long>() < 0) {
      throw InvalidParams(std::string("selection.") + field + "." + key +
                          " must be a non-negative integer");
    }
    return pos[key].get<std::size_t>();
  };
  return {number("line"), number("character")};
}

}  // namespace

RpcServer::RpcServer(ServiceConfig base, BackendFactory factory)
    : base_(std::move(base)), factory_(std::move(factory)) {}

RpcServer::~RpcServer() { drain(); }

void RpcServer::respond(const json& id, ordered_json result) {
  ordered_json message;
  message["jsonrpc"] = "2.0";
  message["id"] = id;
  message["result"] = std::move(result);
  std::lock_guard lock(out_mutex_);
  rpc::write_message(*out_, message.dump());
}

void RpcServer::respond_error(const json& id, int code, const std::string& text,
                              std::optional<ordered_json> data) {
  ordered_json error;
  error["code"] = code;
  error["message"] = text;
  if (data) error["data"] = std::move(*data);
  ordered_json message;
  message["jsonrpc"] = "2.0";
  message["id"] = id;
  message["error"] = std::move(error);
  std::lock_guard lock(out_mutex_);
  rpc::write_message(*out_, message.dump());
}

void RpcServer::respond_domain_error(const json& id, const Error& error) {
  ordered_json data;
  data["error"] = to_string(error.code());
  respond_error(id, rpc::error_code_for(error.code()), error.what(), std::move(data));
}

ordered_json RpcServer::on_initialize(const json& params) {
  ServiceConfig config = base_;
  if (params.is_object() && params.contains("workspaceRoot")) {
    if (!params["workspaceRoot"].is_string()) throw InvalidParams("workspaceRoot must be a string");
    config.workspace_root = params["workspaceRoot"].get<std::string>();
  }
  if (config.workspace_root.empty()) throw InvalidParams("workspaceRoot is required");
  if (params.is_object() && params.contains("config")) {
    apply_config_json(config, params["config"]);
  }
  auto service = std::make_shared<ExplainService>(std::move(config), factory_);
  const ScanSummary summary = service->rescan();
  drain();
  service_ = std::move(service);
  ordered_json result;
  result["serverVersion"] = kServerVersion;
  result["indexedFiles"] = summary.indexed_files;
  result["skippedFiles"] = summary.skipped_files;
  return result;
}

ExplainRequest RpcServer::parse_explain_params(const json& params) const {
  if (!params.is_object()) throw InvalidParams("params must be an object");
  if (!params.contains("file") || !params["file"].is_string()) {
    throw InvalidParams("file must be a string");
  }
  if (!params.contains("selection")) throw InvalidParams("selection is required");
  const json& selection = params["selection"];
  const Position start = parse_position(selection, "start");
  const Position end = parse_position(selection, "end");
  std::optional<std::string> model;
  if (params.contains("model") && !params["model"].is_null()) {
    if (!params["model"].is_string()) throw InvalidParams("model must be a string");
    model = params["model"].get<std::string>();
  }
  std::optional<BackendKind> backend;
  if (params.contains("backend") && !params["backend"].is_null()) {
    if (!params["backend"].is_string()) throw InvalidParams("backend must be a string");
    backend = parse_backend_kind(params["backend"].get<std::string>());
    if (!backend) throw InvalidParams("backend must be one of live, mock, replay");
  }
  return service_->make_request(params["file"].get<std::string>(), start, end, model, backend);
}

void RpcServer::reap_finished() {
  std::erase_if(workers_, [](Worker& w) {
    if (!w.done->load()) return false;
    w.thread.join();
    return true;
  });
}

void RpcServer::drain() {
  for (auto& worker : workers_) {
    if (worker.thread.joinable()) worker.thread.join();
  }
  workers_.clear();
}

void RpcServer::start_explain(const json& id, ExplainRequest request) {
  reap_finished();
  const std::string key = id.dump();
  std::stop_source source;
  {
    std::lock_guard lock(inflight_mutex_);
    inflight_[key] = source;
  }
  auto done = std::make_shared<std::atomic<bool>>(false);
  auto service = service_;
  std::jthread thread([this, id, key, source, done, service, request = std::move(request)] {
    try {
      const ExplanationResult result = service->handle_explain(request, source.get_token());
      ordered_json body;
      body["text"] = result.text;
      body["model"] = result.model;
      body["cached"] = result.cached;
      body["latencyMs"] = result.latency_ms;
      respond(id, std::move(body));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Cancelled) {
        respond_error(id, rpc::kRequestCancelled, "request cancelled");
      } else {
        respond_domain_error(id, e);
      }
    } catch (const std::exception& e) {
      respond_error(id, rpc::kInternalError, e.what());
    }
    {
      std::lock_guard lock(inflight_mutex_);
      inflight_.erase(key);
    }
    done->store(true);
  });
  workers_.push_back({std::move(thread), std::move(done)});
}

void RpcServer::cancel(const json& id) {
  std::lock_guard lock(inflight_mutex_);
  if (auto it = inflight_.find(id.dump()); it != inflight_.end()) it->second.request_stop();
}

void RpcServer::dispatch(const json& message) {
  if (!message.is_object() || message.value("jsonrpc", "") != "2.0" ||
      !message.contains("method") || !message["method"].is_string()) {
    const json id = message.is_object() && message.contains("id") ? message["id"] : json(nullptr);
    respond_error(id, rpc::kInvalidRequest, "invalid JSON-RPC 2.0 request");
    return;
  }
  const std::string method = message["method"].get<std::string>();
  const bool is_request = message.contains("id");
  const json id = is_request ? message["id"] : json(nullptr);
  const json params = message.contains("params") ? message["params"] : json::object();

  try {
    if (method == "exit") {
      finished_ = true;
      exit_code_ = 0;
      return;
    }
    if (method == "$/cancelRequest") {
      if (params.is_object() && params.contains("id")) cancel(params["id"]);
      return;
    }
    if (method == "shutdown") {
      drain();
      if (is_request) respond(id, nullptr);
      finished_ = true;
      exit_code_ = 0;
      return;
    }
    if (method == "initialize") {
      auto result = on_initialize(params);
      if (is_request) respond(id, std::move(result));
      return;
    }
    const bool known = method == "explain" || method == "buildPrompt" || method == "didChange";
    if (!known) {
      if (is_request) respond_error(id, rpc::kMethodNotFound, "method not found: " + method);
      return;
    }
    if (!service_) {
      if (is_request) respond_error(id, rpc::kServerNotInitialized, "server not initialized");
      return;
    }
    if (method == "didChange") {
      if (!params.is_object() || !params.contains("file") || !params["file"].is_string()) return;
      std::optional<std::string> content;
      if (params.contains("content") && params["content"].is_string()) {
        content = params["content"].get<std::string>();
      }
      service_->did_change(params["file"].get<std::string>(), content);
      return;
    }
    if (!is_request) return;
    ExplainRequest request = parse_explain_params(params);
    if (method == "buildPrompt") {
      const PromptBundle prompt = service_->build_prompt_for(request);
      ordered_json result;
      result["system"] = prompt.system_message;
      result["user"] = prompt.user_message;
      respond(id, std::move(result));
      return;
    }
    start_explain(id, std::move(request));
  } catch (const InvalidParams& e) {
    if (is_request) respond_error(id, rpc::kInvalidParams, e.what());
  } catch (const Error& e) {
    if (is_request) respond_domain_error(id, e);
  } catch (const std::exception& e) {
    if (is_request) respond_error(id, rpc::kInternalError, e.what());
  }
}

int RpcServer::run(std::istream& in, std::ostream& out) {
  out_ = &out;
  finished_ = false;
  exit_code_ = 1;
  while (!finished_) {
    std::optional<std::string> body;
    try {
      body = rpc::read_message(in);
    } catch (const std::exception& e) {
      respond_error(nullptr, rpc::kParseError, e.what());
      break;
    }
    if (!body) break;
    const json message = json::parse(*body, nullptr, false);
    if (message.is_discarded()) {
      respond_error(nullptr, rpc::kParseError, "parse error");
      continue;
    }
    dispatch(message);
  }
  drain();
  return exit_code_;
}

}  // namespace gptutor
