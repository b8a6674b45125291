#pragma once

#include <string>
#include <string_view>

namespace darkpool {

// Lowercases, trims whitespace, drops any scheme, userinfo, port, path and
// trailing dot. Idempotent: normalize_domain(normalize_domain(x)) == normalize_domain(x).
std::string normalize_domain(std::string_view raw);

// Reduces a hostname to its registrable domain (public suffix + one label),
// e.g. "sub.a.co.uk" -> "a.co.uk", "www.a.com" -> "a.com". Uses a built-in
// table of common multi-label public suffixes; single-label TLDs are assumed
// otherwise. IP literals and single-label hosts are returned unchanged.
std::string registrable_domain(std::string_view host);

// Host portion of an absolute URL, normalized. Empty when the URL has no host.
std::string url_host(std::string_view url);

// Case-insensitive ASCII helpers shared by the parsers.
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::string_view trim(std::string_view s);
bool icontains(std::string_view haystack, std::string_view needle);

}  // namespace darkpool
