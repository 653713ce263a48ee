#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace chartnl {

using CsvRow = std::vector<std::string>;

/// RFC-4180 reader: quoted fields may contain commas, doubled quotes and
/// line breaks. Accepts LF or CRLF record separators; a trailing line break
/// does not produce an empty record.
std::vector<CsvRow> parse_csv(std::string_view text);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string csv_field(std::string_view field);

/// Header plus rows joined with '\n'; no line break after the last record.
std::string write_csv(const CsvRow& header, const std::vector<CsvRow>& rows);

}  // namespace chartnl
