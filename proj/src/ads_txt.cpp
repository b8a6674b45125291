#include "darkpool/ads_txt.hpp"

#include <algorithm>
#include <cctype>

#include "darkpool/domain.hpp"
#include "darkpool/error.hpp"

namespace darkpool {

namespace {

bool has_whitespace(std::string_view s) {
  return std::any_of(s.begin(), s.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
}

bool is_variable_key(std::string_view key) {
  return !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

std::string_view strip_bom(std::string_view body) {
  if (body.size() >= 3 && static_cast<unsigned char>(body[0]) == 0xEF &&
      static_cast<unsigned char>(body[1]) == 0xBB && static_cast<unsigned char>(body[2]) == 0xBF) {
    body.remove_prefix(3);
  }
  return body;
}

void reject_non_ads_txt(std::string_view body, std::optional<std::string_view> content_type) {
  if (content_type && icontains(*content_type, "html")) {
    throw Error(ErrorCode::kWrongContentType,
                "ads.txt served with content type " + std::string(*content_type));
  }
  std::string_view leading = trim(body);
  if (!leading.empty() && leading.front() == '<') {
    throw Error(ErrorCode::kWrongContentType, "ads.txt body looks like HTML");
  }
  if (body.find('\0') != std::string_view::npos) {
    throw Error(ErrorCode::kWrongContentType, "ads.txt body contains binary data");
  }
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos
                                                                              : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::string_view relationship_name(Relationship r) {
  return r == Relationship::kDirect ? "DIRECT" : "RESELLER";
}

std::optional<Relationship> parse_relationship(std::string_view token) {
  if (iequals(token, "DIRECT")) return Relationship::kDirect;
  if (iequals(token, "RESELLER")) return Relationship::kReseller;
  return std::nullopt;
}

std::vector<std::string> AdsTxtFile::variable_values(std::string_view key) const {
  std::vector<std::string> out;
  for (const auto& v : variables) {
    if (iequals(v.key, key)) out.push_back(v.value);
  }
  return out;
}

AdsTxtFile parse_ads_txt(std::string_view publisher_domain, std::string_view body,
                         std::optional<std::string_view> content_type) {
  body = strip_bom(body);
  reject_non_ads_txt(body, content_type);

  AdsTxtFile file;
  file.publisher_domain = normalize_domain(publisher_domain);

  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto newline = body.find('\n', pos);
    std::string_view raw = body.substr(pos, newline == body.npos ? body.npos : newline - pos);
    pos = newline == body.npos ? body.size() : newline + 1;
    ++line_number;

    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::string_view line = trim(raw);
    if (line.empty()) {
      ++file.blank_or_comment_lines;
      continue;
    }

    auto eq = line.find('=');
    auto comma = line.find(',');
    if (eq != std::string_view::npos && (comma == std::string_view::npos || eq < comma)) {
      std::string_view key = trim(line.substr(0, eq));
      std::string_view value = trim(line.substr(eq + 1));
      if (!is_variable_key(key) || value.empty()) {
        file.skipped_lines.push_back({line_number, "malformed variable"});
      } else {
        file.variables.push_back({std::string(key), std::string(value), line_number});
      }
      continue;
    }

    auto fields = split_fields(line);
    if (fields.size() < 3) {
      file.skipped_lines.push_back({line_number, "fewer than 3 fields"});
      continue;
    }
    if (fields[0].empty() || has_whitespace(fields[0])) {
      file.skipped_lines.push_back({line_number, "invalid ad system domain"});
      continue;
    }
    if (fields[1].empty()) {
      file.skipped_lines.push_back({line_number, "empty seller account id"});
      continue;
    }
    // Extension data after ';' in the relationship field is permitted by the
    // IAB grammar and ignored here.
    std::string_view rel_token = trim(fields[2].substr(0, fields[2].find(';')));
    auto relationship = parse_relationship(rel_token);
    if (!relationship) {
      file.skipped_lines.push_back({line_number, "unknown relationship"});
      continue;
    }

    AdsTxtRecord record;
    record.ad_system_domain = normalize_domain(fields[0]);
    record.seller_account_id = std::string(fields[1]);
    record.relationship = *relationship;
    if (fields.size() >= 4) {
      std::string_view caid = trim(fields[3].substr(0, fields[3].find(';')));
      if (!caid.empty()) record.certification_authority_id = std::string(caid);
    }
    record.source_line = line_number;
    if (record.ad_system_domain.empty()) {
      file.skipped_lines.push_back({line_number, "invalid ad system domain"});
      continue;
    }
    file.records.push_back(std::move(record));
  }
  return file;
}

std::string render_ads_txt(const AdsTxtFile& file) {
  std::string out;
  for (const auto& v : file.variables) {
    out += v.key + "=" + v.value + "\n";
  }
  for (const auto& r : file.records) {
    out += r.ad_system_domain + ", " + r.seller_account_id + ", " +
           std::string(relationship_name(r.relationship));
    if (r.certification_authority_id) out += ", " + *r.certification_authority_id;
    out += "\n";
  }
  return out;
}

}  // namespace darkpool
