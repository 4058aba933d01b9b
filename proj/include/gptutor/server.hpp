#pragma once

#include "gptutor/config.hpp"
#include "gptutor/error.hpp"
#include "gptutor/service.hpp"

#include "json.hpp"

#include <atomic>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

namespace gptutor {

namespace rpc {

inline constexpr int kParseError = -32700;
inline constexpr int kInvalidRequest = -32600;
inline constexpr int kMethodNotFound = -32601;
inline constexpr int kInvalidParams = -32602;
inline constexpr int kInternalError = -32603;
inline constexpr int kServerNotInitialized = -32002;
inline constexpr int kRequestCancelled = -32800;

// Structured code carried in error objects for domain failures.
int error_code_for(ErrorCode code) noexcept;

// Reads one Content-Length framed body. nullopt on clean EOF; throws std::runtime_error on a
// malformed header block or short body.
std::optional<std::string> read_message(std::istream& in);
void write_message(std::ostream& out, const std::string& body);

}  // namespace rpc

// JSON-RPC 2.0 over a byte stream pair. Methods: initialize, buildPrompt, explain, shutdown;
// notifications: didChange, $/cancelRequest, exit.
class RpcServer {
 public:
  explicit RpcServer(ServiceConfig base, BackendFactory factory = default_backend_factory());
  ~RpcServer();

  RpcServer(const RpcServer&) = delete;
  RpcServer& operator=(const RpcServer&) = delete;

  // Returns the process exit status: 0 after shutdown/exit, 1 on EOF without shutdown.
  int run(std::istream& in, std::ostream& out);

 private:
  struct Worker {
    std::jthread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };

  void dispatch(const nlohmann::json& message);
  void respond(const nlohmann::json& id, nlohmann::ordered_json result);
  void respond_error(const nlohmann::json& id, int code, const std::string& message,
                     std::optional<nlohmann::ordered_json> data = std::nullopt);
  void respond_domain_error(const nlohmann::json& id, const Error& error);

  nlohmann::ordered_json on_initialize(const nlohmann::json& params);
  ExplainRequest parse_explain_params(const nlohmann::json& params) const;
  void start_explain(const nlohmann::json& id, ExplainRequest request);
  void cancel(const nlohmann::json& id);
  void drain();
  void reap_finished();

  ServiceConfig base_;
  BackendFactory factory_;
  std::shared_ptr<ExplainService> service_;
  std::ostream* out_ = nullptr;
  std::mutex out_mutex_;
  std::mutex inflight_mutex_;
  std::map<std::string, std::stop_source> inflight_;
  std::vector<Worker> workers_;
  bool finished_ = false;
  int exit_code_ = 1;
};

}  // namespace gptutor
