#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "gptutor/gateway.hpp"

#include <atomic>
#include <regex>

namespace gptutor {
namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  static const std::regex pattern(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch match;
  if (!std::regex_match(url, match, pattern)) {
    throw TransportError(TransportError::Kind::Network, "unsupported URL: " + url);
  }
  return {match[1].str(), match[2].matched ? match[2].str() : "/"};
}

class HttplibTransport : public Transport {
 public:
  HttpResponse post(const HttpRequest& request, std::stop_token stop) override {
    const SplitUrl url = split_url(request.url);
    httplib::Client client(url.origin);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());

    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [name, value] : request.headers) {
      if (name == "Content-Type") {
        content_type = value;
      } else {
        headers.emplace(name, value);
      }
    }
    std::stop_callback abort(stop, [&client] { client.stop(); });
    auto result = client.Post(url.path, headers, request.body, content_type,
                              [&stop](uint64_t, uint64_t) { return !stop.stop_requested(); });
    if (stop.stop_requested()) throw TransportError(TransportError::Kind::Cancelled, "cancelled");
    if (!result) {
      const auto error = result.error();
      const auto kind = error == httplib::Error::ConnectionTimeout || error == httplib::Error::Read
                            ? TransportError::Kind::Timeout
                            : TransportError::Kind::Network;
      throw TransportError(kind, httplib::to_string(error));
    }
    return {result->status, result->body};
  }
};

}  // namespace

std::shared_ptr<Transport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

}  // namespace gptutor
