#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "darkpool/domain.hpp"
#include "darkpool/transport.hpp"

namespace darkpool {

namespace {

struct SplitUrl {
  std::string scheme;
  std::string host;  // as written, may include port
  std::string path;
};

std::optional<SplitUrl> split_url(const std::string& url) {
  auto sep = url.find("://");
  if (sep == std::string::npos) return std::nullopt;
  SplitUrl out;
  out.scheme = to_lower(url.substr(0, sep));
  auto rest = url.substr(sep + 3);
  auto slash = rest.find('/');
  out.host = rest.substr(0, slash);
  out.path = slash == std::string::npos ? "/" : rest.substr(slash);
  if (out.scheme != "http" && out.scheme != "https") return std::nullopt;
  return out;
}

std::string resolve_location(const SplitUrl& base, const std::string& location) {
  if (location.find("://") != std::string::npos) return location;
  if (location.rfind("//", 0) == 0) return base.scheme + ":" + location;
  if (!location.empty() && location.front() == '/') {
    return base.scheme + "://" + base.host + location;
  }
  auto dir = base.path.substr(0, base.path.rfind('/') + 1);
  return base.scheme + "://" + base.host + dir + location;
}

}  // namespace

TransportResponse HttpTransport::get(const std::string& url) {
  std::string current = url;
  for (int hop = 0; hop <= options_.max_redirects; ++hop) {
    TransportResponse r = get_once(current);
    if (r.status >= 300 && r.status < 400 && !r.final_url.empty()) {
      current = r.final_url;
      continue;
    }
    r.final_url = current;
    return r;
  }
  TransportResponse r;
  r.status = kTooManyRedirects;
  r.final_url = current;
  r.error = "more than " + std::to_string(options_.max_redirects) + " redirects";
  return r;
}

// One request without redirect following. For 3xx responses final_url holds
// the resolved Location target.
TransportResponse HttpTransport::get_once(const std::string& url) {
  TransportResponse out;
  auto parts = split_url(url);
  if (!parts) {
    out.error = "unsupported url " + url;
    return out;
  }
  const std::string host = normalize_domain(parts->host);
  std::string connect_to = parts->host;
  if (auto it = options_.host_overrides.find(host); it != options_.host_overrides.end()) {
    connect_to = it->second;
  }

  httplib::Client client(parts->scheme + "://" + connect_to);
  if (!client.is_valid()) {
    out.error = "cannot create client for " + url;
    return out;
  }
  const auto timeout_s = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(
      options_.timeout - timeout_s);
  client.set_connection_timeout(timeout_s.count(), timeout_us.count());
  client.set_read_timeout(timeout_s.count(), timeout_us.count());
  client.set_follow_location(false);
  client.enable_server_certificate_verification(options_.verify_tls);

  httplib::Headers headers = {{"User-Agent", options_.user_agent}, {"Host", parts->host}};
  std::string body;
  bool truncated = false;
  auto res = client.Get(parts->path, headers, [&](const char* data, size_t len) {
    if (body.size() + len > options_.max_body_bytes) {
      body.append(data, options_.max_body_bytes - body.size());
      truncated = true;
      return false;
    }
    body.append(data, len);
    return true;
  });
  if (!res) {
    if (truncated) {
      out.status = 200;
      out.body = std::move(body);
      out.error = "body truncated";
      return out;
    }
    out.status = res.error() == httplib::Error::ConnectionTimeout ? kTimedOut : kConnectionFailed;
    out.error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = std::move(body);
  if (res->has_header("Content-Type")) out.content_type = res->get_header_value("Content-Type");
  if (out.status >= 300 && out.status < 400 && res->has_header("Location")) {
    out.final_url = resolve_location(*parts, res->get_header_value("Location"));
  }
  return out;
}

}  // namespace darkpool
