#include "darkpool/domain.hpp"

#include <algorithm>
#include <iterator>
#include <cctype>

namespace darkpool {

namespace {

// Multi-label public suffixes seen in ad-tech transparency files. Anything
// not listed is treated as a single-label TLD.
constexpr std::string_view kMultiLabelSuffixes[] = {
    "ac.uk",  "co.uk",  "gov.uk", "ltd.uk", "me.uk",  "net.uk", "org.uk",
    "plc.uk", "com.au", "net.au", "org.au", "edu.au", "gov.au", "co.nz",
    "net.nz", "org.nz", "co.jp",  "ne.jp",  "or.jp",  "ac.jp",  "co.kr",
    "or.kr",  "com.br", "net.br", "org.br", "com.mx", "com.ar", "com.co",
    "com.tr", "com.cn", "net.cn", "org.cn", "com.hk", "com.tw", "com.sg",
    "com.my", "com.ph", "com.vn", "com.pk", "com.ng", "com.eg", "com.sa",
    "co.in",  "net.in", "org.in", "co.za",  "co.id",  "co.il",  "co.th",
    "com.ua", "com.pl", "blogspot.com",
};

bool is_multi_label_suffix(std::string_view s) {
  return std::find(std::begin(kMultiLabelSuffixes), std::end(kMultiLabelSuffixes), s) !=
         std::end(kMultiLabelSuffixes);
}

bool looks_like_ipv4(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.';
  });
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool icontains(std::string_view haystack, std::string_view needle) {
  return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

std::string normalize_domain(std::string_view raw) {
  std::string_view s = trim(raw);
  if (auto scheme = s.find("://"); scheme != std::string_view::npos) {
    s.remove_prefix(scheme + 3);
  }
  if (auto end = s.find_first_of("/?#"); end != std::string_view::npos) {
    s = s.substr(0, end);
  }
  if (auto at = s.rfind('@'); at != std::string_view::npos) {
    s.remove_prefix(at + 1);
  }
  if (auto colon = s.find(':'); colon != std::string_view::npos) {
    s = s.substr(0, colon);
  }
  while (!s.empty() && s.back() == '.') s.remove_suffix(1);
  return to_lower(trim(s));
}

std::string registrable_domain(std::string_view host) {
  std::string h = normalize_domain(host);
  if (h.empty() || looks_like_ipv4(h)) return h;

  auto last_dot = h.rfind('.');
  if (last_dot == std::string::npos) return h;
  auto second_dot = h.rfind('.', last_dot - 1);
  if (second_dot == std::string::npos || last_dot == 0) return h;

  std::string_view two_labels = std::string_view(h).substr(second_dot + 1);
  if (!is_multi_label_suffix(two_labels)) {
    return h.substr(second_dot + 1);
  }
  if (second_dot == 0) return h;
  auto third_dot = h.rfind('.', second_dot - 1);
  return third_dot == std::string::npos ? h : h.substr(third_dot + 1);
}

std::string url_host(std::string_view url) {
  auto scheme = url.find("://");
  if (scheme == std::string_view::npos) return {};
  return normalize_domain(url);
}

}  // namespace darkpool
