#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace darkpool {

enum class Relationship { kDirect, kReseller };

std::string_view relationship_name(Relationship r);
std::optional<Relationship> parse_relationship(std::string_view token);

struct AdsTxtRecord {
  std::string ad_system_domain;  // lowercase hostname as written
  std::string seller_account_id;  // byte-exact
  Relationship relationship = Relationship::kDirect;
  std::optional<std::string> certification_authority_id;
  std::size_t source_line = 0;  // 1-based

  bool operator==(const AdsTxtRecord&) const = default;
};

struct AdsTxtVariable {
  std::string key;  // as written; compare with iequals()
  std::string value;
  std::size_t source_line = 0;

  bool operator==(const AdsTxtVariable&) const = default;
};

struct SkippedLine {
  std::size_t line = 0;
  std::string reason;

  bool operator==(const SkippedLine&) const = default;
};

struct AdsTxtFile {
  std::string publisher_domain;
  std::vector<AdsTxtRecord> records;
  std::vector<AdsTxtVariable> variables;
  std::vector<SkippedLine> skipped_lines;
  // Lines that were blank or comment-only; together with the three lists
  // above this accounts for every input line.
  std::size_t blank_or_comment_lines = 0;

  std::size_t total_lines() const {
    return records.size() + variables.size() + skipped_lines.size() + blank_or_comment_lines;
  }

  // Values of all variables whose key matches case-insensitively.
  std::vector<std::string> variable_values(std::string_view key) const;

  bool operator==(const AdsTxtFile&) const = default;
};

// Parses an ads.txt body. Malformed lines are skipped and reported, never
// fatal. Throws Error(kWrongContentType) when the body is clearly not an
// ads.txt document: HTML (leading '<'), binary content, or a content type
// supplied by the fetcher that marks it as HTML.
AdsTxtFile parse_ads_txt(std::string_view publisher_domain, std::string_view body,
                         std::optional<std::string_view> content_type = std::nullopt);

// Renders records and variables back to ads.txt text. Skipped lines are not
// reproduced.
std::string render_ads_txt(const AdsTxtFile& file);

}  // namespace darkpool
