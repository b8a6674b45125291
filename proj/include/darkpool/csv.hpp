#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace darkpool::csv {

using Row = std::vector<std::string>;

// RFC 4180 quoting: fields containing a comma, quote or newline are quoted.
std::string escape(std::string_view field);
std::string format_row(const Row& row);

// Parses a whole document. Lines beginning with '#' (outside quotes) are
// metadata and skipped, as are blank lines.
std::vector<Row> parse(std::string_view text);

}  // namespace darkpool::csv
