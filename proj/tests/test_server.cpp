#include "gptutor/server.hpp"

#include "fakes.hpp"
#include "session.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace gptutor;
using nlohmann::json;
using gptutor::support::TempDir;

namespace {

struct Session {
  int exit_code = -1;
  std::string raw;
  std::vector<json> responses;
};

Session run_session(const std::string& input, BackendFactory factory = default_backend_factory()) {
  RpcServer server(ServiceConfig{}, std::move(factory));
  std::istringstream in(input);
  std::ostringstream out;
  Session s;
  s.exit_code = server.run(in, out);
  s.raw = out.str();
  for (const auto& body : support::unframe(s.raw)) s.responses.push_back(json::parse(body));
  return s;
}

json request(int id, const std::string& method, json params = json::object()) {
  return {{"jsonrpc", "2.0"}, {"id", id}, {"method", method}, {"params", std::move(params)}};
}

json notification(const std::string& method, json params = json::object()) {
  return {{"jsonrpc", "2.0"}, {"method", method}, {"params", std::move(params)}};
}

json initialize(int id = 1) {
  return request(id, "initialize", {{"workspaceRoot", support::fixture("attendee").string()}});
}

json selection_params(json extra = json::object()) {
  json p = {{"file", "main.py"},
            {"selection", {{"start", {{"line", 3}, {"character", 15}}}, {"end", {{"line", 3}, {"character", 28}}}}}};
  for (auto& [k, v] : extra.items()) p[k] = v;
  return p;
}

const json* by_id(const Session& s, int id) {
  for (const auto& r : s.responses) {
    if (r.contains("id") && r["id"] == id) return &r;
  }
  return nullptr;
}

std::string session_input() {
  std::ifstream in(support::fixture("sessions/attendee.requests.jsonl"));
  std::string line;
  std::string out;
  const std::string root = support::fixture("attendee").string();
  while (std::getline(in, line)) {
    if (!line.empty()) out += support::frame(support::replace_all(line, "${WORKSPACE}", root));
  }
  return out;
}

}  // namespace

TEST(Framing, RoundTrip) {
  std::stringstream stream;
  rpc::write_message(stream, "{\"a\":1}");
  rpc::write_message(stream, "ü");
  EXPECT_EQ(stream.str(), "Content-Length: 7\r\n\r\n{\"a\":1}Content-Length: 2\r\n\r\nü");
  EXPECT_EQ(rpc::read_message(stream), "{\"a\":1}");
  EXPECT_EQ(rpc::read_message(stream), "ü");
  EXPECT_EQ(rpc::read_message(stream), std::nullopt);
}

TEST(Framing, MalformedHeaders) {
  std::istringstream no_length("Content-Type: x\r\n\r\n{}");
  EXPECT_THROW(rpc::read_message(no_length), std::runtime_error);
  std::istringstream short_body("Content-Length: 10\r\n\r\n{}");
  EXPECT_THROW(rpc::read_message(short_body), std::runtime_error);
  std::istringstream garbage("nonsense\r\n\r\n");
  EXPECT_THROW(rpc::read_message(garbage), std::runtime_error);
}

TEST(RpcServer, InitializeReportsCounts) {
  const Session s = run_session(support::frame_all({initialize(), request(2, "shutdown")}));
  ASSERT_NE(by_id(s, 1), nullptr);
  const json& result = (*by_id(s, 1))["result"];
  EXPECT_EQ(result["indexedFiles"], 2);
  EXPECT_EQ(result["skippedFiles"], 0);
  EXPECT_EQ(result["serverVersion"], std::string(kServerVersion));
  EXPECT_TRUE((*by_id(s, 2))["result"].is_null());
  EXPECT_EQ(s.exit_code, 0);
}

TEST(RpcServer, ExplainBeforeInitialize) {
  const Session s = run_session(support::frame_all({request(1, "explain", selection_params()), request(2, "shutdown")}));
  const json& error = (*by_id(s, 1))["error"];
  EXPECT_EQ(error["code"], -32002);
  EXPECT_EQ(error["message"], "server not initialized");
}

TEST(RpcServer, StandardErrors) {
  const std::string input = support::frame_all({initialize(), request(2, "hover"),
                                                request(3, "explain", {{"file", 5}}),
                                                request(4, "buildPrompt", selection_params({{"backend", "psychic"}}))}) +
                            support::frame("{not json") + support::frame_all({request(5, "shutdown")});
  const Session s = run_session(input);
  EXPECT_EQ((*by_id(s, 2))["error"]["code"], -32601);
  EXPECT_EQ((*by_id(s, 3))["error"]["code"], -32602);
  EXPECT_EQ((*by_id(s, 4))["error"]["code"], -32602);
  bool parse_error = false;
  for (const auto& r : s.responses) parse_error |= r.contains("error") && r["error"]["code"] == -32700;
  EXPECT_TRUE(parse_error);
  EXPECT_EQ(s.exit_code, 0);
}

TEST(RpcServer, DomainErrorsAreStructured) {
  const Session s = run_session(support::frame_all(
      {initialize(), request(2, "buildPrompt", selection_params({{"file", "missing.py"}})),
       request(3, "explain", selection_params({{"file", "../x.py"}, {"backend", "mock"}})),
       request(4, "buildPrompt", selection_params({{"selection", {{"start", {{"line", 1}, {"character", 0}}},
                                                                   {"end", {{"line", 1}, {"character", 0}}}}}})),
       request(5, "shutdown")}));
  EXPECT_EQ((*by_id(s, 2))["error"]["code"], rpc::error_code_for(ErrorCode::FileNotFound));
  EXPECT_EQ((*by_id(s, 2))["error"]["data"]["error"], "FileNotFound");
  EXPECT_EQ((*by_id(s, 3))["error"]["data"]["error"], "OutsideWorkspace");
  EXPECT_EQ((*by_id(s, 4))["error"]["data"]["error"], "NoToken");
}

TEST(RpcServer, BuildPromptCallsNoBackend) {
  auto counting = std::make_shared<support::CountingBackend>();
  const Session s = run_session(support::frame_all({initialize(), request(2, "buildPrompt", selection_params()),
                                                    request(3, "shutdown")}),
                                support::fixed_factory(counting));
  const json& result = (*by_id(s, 2))["result"];
  const std::string golden = support::read_text(support::fixture("golden/attendee.prompt"));
  EXPECT_EQ(result["system"].get<std::string>() + "\n---\n" + result["user"].get<std::string>() + "\n", golden);
  EXPECT_EQ(counting->calls.load(), 0);
}

TEST(RpcServer, ExplainReturnsBackendAnswer) {
  auto counting = std::make_shared<support::CountingBackend>();
  const Session s = run_session(
      support::frame_all({initialize(), request(2, "explain", selection_params({{"backend", "mock"}})),
                          request(3, "shutdown")}),
      support::fixed_factory(counting));
  ASSERT_NE(by_id(s, 2), nullptr);
  EXPECT_EQ((*by_id(s, 2))["result"]["text"], "MOCK-EXPLANATION 86c6fb607ca2 python");
  EXPECT_EQ((*by_id(s, 2))["result"]["cached"], false);
  EXPECT_EQ((*by_id(s, 2))["result"]["model"], "gpt-3.5-turbo");
  EXPECT_EQ(counting->calls.load(), 1);
}

TEST(RpcServer, CancelRequestAbortsInFlightExplain) {
  auto blocking = std::make_shared<support::BlockingBackend>();
  const Session s = run_session(
      support::frame_all({initialize(), request(7, "explain", selection_params()),
                          notification("$/cancelRequest", {{"id", 7}}), request(8, "shutdown")}),
      support::fixed_factory(blocking));
  ASSERT_NE(by_id(s, 7), nullptr);
  EXPECT_EQ((*by_id(s, 7))["error"]["code"], -32800);
  EXPECT_TRUE((*by_id(s, 8))["result"].is_null());
}

TEST(RpcServer, DidChangeReindexesFile) {
  TempDir dir;
  support::copy_attendee(dir);
  const Session s = run_session(support::frame_all(
      {request(1, "initialize", {{"workspaceRoot", dir.path().string()}}),
       notification("didChange", {{"file", "attendeeManager.py"}, {"content", "x = 1\n"}}),
       request(2, "buildPrompt", selection_params()), request(3, "shutdown")}));
  const auto single = parse_golden(support::read_text(support::fixture("golden/attendee_single_file.prompt")));
  EXPECT_EQ((*by_id(s, 2))["result"]["user"], single.user_message);
}

TEST(RpcServer, ExitStatus) {
  EXPECT_EQ(run_session(support::frame_all({initialize()})).exit_code, 1);
  EXPECT_EQ(run_session("").exit_code, 1);
  EXPECT_EQ(run_session(support::frame_all({notification("exit")})).exit_code, 0);
}

TEST(RpcServer, GoldenSessionIsReproducible) {
  const std::string input = session_input();
  const Session first = run_session(input);
  const Session second = run_session(input);
  EXPECT_EQ(first.exit_code, 0);
  EXPECT_EQ(support::mask_latency(first.raw), support::mask_latency(second.raw));
  EXPECT_EQ(support::mask_latency(first.raw), support::read_text(support::fixture("sessions/attendee.responses")));
}
