#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace riskdp {

/// A CSV cell. std::monostate prints as an empty field.
using CsvCell = std::variant<std::monostate, std::int64_t, double, std::string>;

/// Shortest-safe round-trip text for a double: 17 significant digits.
std::string format_double(double value);

/// RFC-4180 field quoting: fields with commas, quotes or line breaks are
/// quoted and inner quotes doubled.
std::string csv_escape(std::string_view field);

std::string format_cell(const CsvCell& cell);

/// Writes one record terminated by a single LF.
void write_csv_record(std::ostream& os, const std::vector<std::string>& fields);
void write_csv_record(std::ostream& os, const std::vector<CsvCell>& cells);

}  // namespace riskdp
