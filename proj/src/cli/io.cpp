#include "flexlp/io.hpp"

#include "flexlp/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

namespace flexlp {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& where) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw DataError(where + ": '" + std::string(text) + "' is not a number");
  if (!std::isfinite(v)) throw DataError(where + ": non-finite value");
  return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    std::string_view cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
    out.emplace_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

SeriesTable read_series_csv(std::istream& in, const std::string& source) {
  SeriesTable t;
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty file");
  std::vector<std::string> header = split_csv_line(line);
  std::set<std::string> seen;
  for (const auto& h : header) {
    if (h.empty()) throw DataError(source + ": empty column name in header");
    if (!seen.insert(h).second) throw DataError(source + ": duplicate column '" + h + "'");
  }
  std::size_t first = 0;
  if (header[0] == "date" || header[0] == "time" || header[0] == "period") {
    t.time_name = header[0];
    first = 1;
  }
  t.data.names.assign(header.begin() + static_cast<std::ptrdiff_t>(first), header.end());
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " cells, found " + std::to_string(cells.size()));
    if (first) t.time.push_back(cells[0]);
    std::vector<double> r;
    for (std::size_t c = first; c < cells.size(); ++c)
      r.push_back(parse_double(cells[c], source + ":" + std::to_string(line_no) + " column '" + header[c] + "'"));
    rows.push_back(std::move(r));
  }
  t.data.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.data.names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < rows[i].size(); ++c)
      t.data.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  return t;
}

SeriesTable read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_series_csv(in, path);
}

void write_series_csv(std::ostream& out, const SeriesTable& t) {
  bool first = true;
  if (!t.time_name.empty()) {
    out << t.time_name;
    first = false;
  }
  for (const auto& n : t.data.names) {
    if (!first) out << ',';
    out << n;
    first = false;
  }
  out << '\n';
  for (Eigen::Index i = 0; i < t.data.values.rows(); ++i) {
    first = true;
    if (!t.time_name.empty()) {
      out << t.time[static_cast<std::size_t>(i)];
      first = false;
    }
    for (Eigen::Index c = 0; c < t.data.values.cols(); ++c) {
      if (!first) out << ',';
      out << format_double(t.data.values(i, c));
      first = false;
    }
    out << '\n';
  }
}

}  // namespace flexlp
