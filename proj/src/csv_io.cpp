#include "mdmnet/csv_io.hpp"

#include "mdmnet/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mdm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& v) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(v);
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable out;
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (!have_header) {
      for (std::size_t c = 0; c < fields.size(); ++c) {
        if (fields[c].empty()) throw ParseError("empty column name", lineno, static_cast<int>(c + 1));
        out.header.emplace_back(fields[c]);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != out.header.size())
      throw ParseError("expected " + std::to_string(out.header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       lineno);
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c)
      if (!parse_double(fields[c], row[c]))
        throw ParseError("not a finite number: '" + std::string(fields[c]) + "'", lineno, static_cast<int>(c + 1));
    rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError("missing header row", lineno + 1);
  out.data.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(out.header.size()));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t c = 0; c < rows[t].size(); ++c) out.data(t, c) = rows[t][c];
  return out;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  return read_csv(in);
}

std::vector<std::string> default_header(int n) {
  std::vector<std::string> h;
  for (int i = 1; i <= n; ++i) h.push_back("node" + std::to_string(i));
  return h;
}

void write_csv(std::ostream& out, const TimeSeriesMatrix& data, const std::vector<std::string>& header) {
  const auto names = header.empty() ? default_header(static_cast<int>(data.cols())) : header;
  if (static_cast<Eigen::Index>(names.size()) != data.cols()) throw InvalidArgument("header and data differ in width");
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << '\n';
  for (Eigen::Index t = 0; t < data.rows(); ++t) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) out << (c ? "," : "") << format_double(data(t, c));
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const TimeSeriesMatrix& data, const std::vector<std::string>& header) {
  std::ostringstream s;
  write_csv(s, data, header);
  write_text_file(path, s.str());
}

void write_columns(std::ostream& out, const std::vector<std::string>& names,
                   const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size()) throw InvalidArgument("column names and columns differ in count");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw InvalidArgument("columns differ in length");
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << '\n';
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out << (c ? "," : "");
      if (!std::isnan(columns[c][t])) out << format_double(columns[c][t]);
    }
    out << '\n';
  }
}

Dag read_edge_list(std::istream& in, int n) {
  if (n < 1 || n > kMaxNodes) throw InvalidArgument("node count out of range");
  Dag dag(n);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto arrow = s.find("->");
    if (arrow == std::string_view::npos) throw ParseError("expected 'i -> j'", lineno);
    int from = 0, to = 0;
    const auto lhs = trim(s.substr(0, arrow)), rhs = trim(s.substr(arrow + 2));
    const auto a = std::from_chars(lhs.data(), lhs.data() + lhs.size(), from);
    const auto b = std::from_chars(rhs.data(), rhs.data() + rhs.size(), to);
    if (a.ec != std::errc() || a.ptr != lhs.data() + lhs.size() || b.ec != std::errc() ||
        b.ptr != rhs.data() + rhs.size())
      throw ParseError("expected integer node labels", lineno);
    if (from < 1 || from > n || to < 1 || to > n || from == to) throw ParseError("node label out of range", lineno);
    dag.set_parents(to - 1, dag.parents(to - 1).with(from - 1));
  }
  return dag;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << text;
  if (!out) throw InvalidArgument("write failed for " + path);
}

}  // namespace mdm
