#include "darkpool/transport.hpp"

#include <fstream>
#include <sstream>

#include "darkpool/domain.hpp"

namespace darkpool {

void MapTransport::add(std::string url, TransportResponse response) {
  std::lock_guard lock(mu_);
  responses_[std::move(url)] = std::move(response);
}

void MapTransport::add_ok(std::string url, std::string body, std::string content_type) {
  TransportResponse r;
  r.status = 200;
  r.body = std::move(body);
  r.content_type = std::move(content_type);
  add(std::move(url), std::move(r));
}

TransportResponse MapTransport::get(const std::string& url) {
  std::lock_guard lock(mu_);
  requests_.push_back(url);
  if (auto it = responses_.find(url); it != responses_.end()) return it->second;
  TransportResponse r;
  r.status = kConnectionFailed;
  r.error = "no route to " + url;
  return r;
}

std::vector<std::string> MapTransport::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

namespace {

std::string content_type_for(const std::filesystem::path& p) {
  auto ext = to_lower(p.extension().string());
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".json") return "application/json";
  if (ext == ".png") return "image/png";
  return "text/plain";
}

}  // namespace

TransportResponse DirectoryTransport::get(const std::string& url) {
  TransportResponse r;
  std::string host = url_host(url);
  if (host.empty()) {
    r.error = "bad url " + url;
    return r;
  }
  const auto host_dir = root_ / host;
  if (!std::filesystem::is_directory(host_dir)) {
    r.status = kConnectionFailed;
    r.error = "unreachable host " + host;
    return r;
  }
  std::string_view rest(url);
  rest.remove_prefix(rest.find("://") + 3);
  auto slash = rest.find('/');
  std::string path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  if (auto q = path.find_first_of("?#"); q != std::string::npos) path.resize(q);
  if (path.empty() || path.back() == '/') path += "index.html";
  if (path.find("..") != std::string::npos) {
    r.status = 404;
    return r;
  }

  const auto file = host_dir / path.substr(1);
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    r.status = 404;
    r.content_type = "text/html";
    r.body = "<html><body>not found</body></html>";
    return r;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  r.status = 200;
  r.body = ss.str();
  r.content_type = content_type_for(file);
  return r;
}

}  // namespace darkpool
