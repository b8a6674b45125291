#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace darkpool {

// Structured intermediate form of an evidence report, rendered either as
// plain text or as a paginated PDF.
struct ReportSection {
  std::string heading;
  std::vector<std::string> paragraphs;

  bool operator==(const ReportSection&) const = default;
};

struct ReportLayout {
  std::string title;
  std::string branding_line;
  std::vector<ReportSection> sections;

  bool operator==(const ReportLayout&) const = default;
};

void to_json(nlohmann::json& j, const ReportSection& s);
void to_json(nlohmann::json& j, const ReportLayout& r);

std::string render_report_text(const ReportLayout& report);

// Minimal PDF 1.4 with the standard Helvetica font: wrapped text, 54 lines
// per US-letter page. Output is byte-deterministic for a given layout.
std::string render_report_pdf(const ReportLayout& report);

// Greedy word wrap; words longer than `width` are hard-split.
std::vector<std::string> wrap_text(const std::string& text, std::size_t width);

}  // namespace darkpool
