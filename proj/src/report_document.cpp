#include "darkpool/report_document.hpp"

#include <cstdio>
#include <sstream>

namespace darkpool {

namespace {

constexpr std::size_t kWrapWidth = 92;
constexpr std::size_t kLinesPerPage = 54;

struct Line {
  std::string text;
  bool bold = false;
};

std::vector<Line> layout_lines(const ReportLayout& report) {
  std::vector<Line> lines;
  for (const auto& l : wrap_text(report.title, kWrapWidth)) lines.push_back({l, true});
  for (const auto& l : wrap_text(report.branding_line, kWrapWidth)) lines.push_back({l, false});
  for (const auto& section : report.sections) {
    lines.push_back({"", false});
    for (const auto& l : wrap_text(section.heading, kWrapWidth)) lines.push_back({l, true});
    for (const auto& p : section.paragraphs) {
      for (const auto& l : wrap_text(p, kWrapWidth)) lines.push_back({l, false});
    }
  }
  return lines;
}

std::string pdf_escape(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    if (c == '(' || c == ')' || c == '\\') {
      out += '\\';
      out += static_cast<char>(c);
    } else if (c < 32 || c > 126) {
      out += '?';
    } else {
      out += static_cast<char>(c);
    }
  }
  return out;
}

}  // namespace

void to_json(nlohmann::json& j, const ReportSection& s) {
  j = nlohmann::json{{"heading", s.heading}, {"paragraphs", s.paragraphs}};
}

void to_json(nlohmann::json& j, const ReportLayout& r) {
  j = nlohmann::json{{"title", r.title}, {"branding_line", r.branding_line}, {"sections", r.sections}};
}

std::vector<std::string> wrap_text(const std::string& text, std::size_t width) {
  std::vector<std::string> lines;
  std::istringstream words(text);
  std::string word, line;
  while (words >> word) {
    while (word.size() > width) {
      if (!line.empty()) lines.push_back(std::exchange(line, {}));
      lines.push_back(word.substr(0, width));
      word.erase(0, width);
    }
    if (line.empty()) {
      line = word;
    } else if (line.size() + 1 + word.size() <= width) {
      line += ' ' + word;
    } else {
      lines.push_back(std::exchange(line, word));
    }
  }
  if (!line.empty()) lines.push_back(line);
  return lines;
}

std::string render_report_text(const ReportLayout& report) {
  std::string out = report.title + "\n" + report.branding_line + "\n";
  for (const auto& section : report.sections) {
    out += "\n" + section.heading + "\n" + std::string(section.heading.size(), '-') + "\n";
    for (const auto& p : section.paragraphs) {
      for (const auto& l : wrap_text(p, kWrapWidth)) out += l + "\n";
    }
  }
  return out;
}

std::string render_report_pdf(const ReportLayout& report) {
  const auto lines = layout_lines(report);
  std::vector<std::vector<Line>> pages;
  for (std::size_t i = 0; i < lines.size(); i += kLinesPerPage) {
    pages.emplace_back(lines.begin() + static_cast<std::ptrdiff_t>(i),
                       lines.begin() + static_cast<std::ptrdiff_t>(std::min(lines.size(), i + kLinesPerPage)));
  }
  if (pages.empty()) pages.emplace_back();

  // Objects: 1 catalog, 2 page tree, 3 regular font, 4 bold font, then a
  // (page, content) pair per page.
  std::vector<std::string> objects;
  std::string kids;
  for (std::size_t p = 0; p < pages.size(); ++p) {
    kids += std::to_string(5 + 2 * p) + " 0 R ";
  }
  objects.push_back("<< /Type /Catalog /Pages 2 0 R >>");
  objects.push_back("<< /Type /Pages /Kids [" + kids + "] /Count " + std::to_string(pages.size()) + " >>");
  objects.push_back("<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>");
  objects.push_back("<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica-Bold >>");
  for (std::size_t p = 0; p < pages.size(); ++p) {
    std::string stream = "BT\n/F1 10 Tf\n13 TL\n54 750 Td\n";
    bool bold = false;
    for (const auto& line : pages[p]) {
      if (line.bold != bold) {
        stream += line.bold ? "/F2 10 Tf\n" : "/F1 10 Tf\n";
        bold = line.bold;
      }
      stream += "(" + pdf_escape(line.text) + ") Tj T*\n";
    }
    stream += "ET\n";
    objects.push_back("<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] /Resources << /Font << /F1 3 0 R /F2 4 0 R >> >> /Contents " +
                      std::to_string(6 + 2 * p) + " 0 R >>");
    objects.push_back("<< /Length " + std::to_string(stream.size()) + " >>\nstream\n" + stream + "endstream");
  }

  std::string out = "%PDF-1.4\n";
  std::vector<std::size_t> offsets;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    offsets.push_back(out.size());
    out += std::to_string(i + 1) + " 0 obj\n" + objects[i] + "\nendobj\n";
  }
  const std::size_t xref = out.size();
  out += "xref\n0 " + std::to_string(objects.size() + 1) + "\n0000000000 65535 f \n";
  for (auto off : offsets) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%010zu 00000 n \n", off);
    out += buf;
  }
  out += "trailer\n<< /Size " + std::to_string(objects.size() + 1) + " /Root 1 0 R >>\nstartxref\n" +
         std::to_string(xref) + "\n%%EOF\n";
  return out;
}

}  // namespace darkpool
