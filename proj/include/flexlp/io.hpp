#pragma once

#include "flexlp/linalg.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace flexlp {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
/// Strict parse of a finite real; `where` names the cell in error messages.
double parse_double(std::string_view text, const std::string& where);

/// A rectangular table of named numeric columns with an optional leading
/// non-numeric time column ("date", "time" or "period").
struct SeriesTable {
  std::string time_name;
  std::vector<std::string> time;
  DataMatrix data;
};

SeriesTable read_series_csv(std::istream& in, const std::string& source);
SeriesTable read_series_csv(const std::string& path);
void write_series_csv(std::ostream& out, const SeriesTable& table);

/// Splits one CSV line on commas; no quoting (column names and numbers only).
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace flexlp
