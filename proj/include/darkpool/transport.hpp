#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace darkpool {

// Negative statuses are transport-level failures; positive ones are HTTP.
inline constexpr int kConnectionFailed = -1;
inline constexpr int kTimedOut = -2;
inline constexpr int kTooManyRedirects = -3;

struct TransportResponse {
  int status = kConnectionFailed;
  std::string final_url;  // after redirects; empty means same as requested
  std::string body;
  std::optional<std::string> content_type;
  std::string error;

  bool ok() const { return status >= 200 && status < 300; }
  bool connection_failed() const { return status < 0; }
};

// HTTP(S) GET boundary. Implementations must be safe to call concurrently.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual TransportResponse get(const std::string& url) = 0;
};

// In-memory fixture transport. Unknown URLs fail at connection level.
class MapTransport : public Transport {
 public:
  void add(std::string url, TransportResponse response);
  void add_ok(std::string url, std::string body, std::string content_type = "text/plain");

  TransportResponse get(const std::string& url) override;

  std::vector<std::string> requests() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, TransportResponse> responses_;
  std::vector<std::string> requests_;
};

// Serves "<scheme>://<host>/<path>" from "<root>/<host>/<path>", with "/"
// mapped to index.html. A missing host directory is a connection failure,
// a missing file inside it is a 404. Scheme is ignored.
class DirectoryTransport : public Transport {
 public:
  explicit DirectoryTransport(std::filesystem::path root) : root_(std::move(root)) {}
  TransportResponse get(const std::string& url) override;

 private:
  std::filesystem::path root_;
};

struct HttpTransportOptions {
  std::chrono::milliseconds timeout{20000};
  std::string user_agent = "darkpool-research-crawler/1.0 (+ad safety research)";
  std::size_t max_body_bytes = 16u << 20;
  int max_redirects = 5;
  // host -> "ip:port". Requests for the host connect there, keeping the
  // original Host header. Used to serve fixtures from a local server.
  std::map<std::string, std::string> host_overrides;
  bool verify_tls = true;
};

// Real network transport backed by cpp-httplib.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(HttpTransportOptions options) : options_(std::move(options)) {}
  TransportResponse get(const std::string& url) override;

 private:
  TransportResponse get_once(const std::string& url);
  HttpTransportOptions options_;
};

}  // namespace darkpool
