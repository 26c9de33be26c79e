#pragma once

// Text formats shared by the CLI and the bindings: comma-separated time
// series with one header row, and `i -> j` edge lists.

#include "mdmnet/dag.hpp"
#include "mdmnet/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mdm {

struct CsvTable {
  std::vector<std::string> header;
  TimeSeriesMatrix data;
};

/// Header row then T rows of numbers. Blank lines are skipped, fields are
/// trimmed and CRLF endings accepted. Throws ParseError with the 1-based line
/// and column of the offending cell.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Default column names node1..nodeN.
std::vector<std::string> default_header(int n);

/// Values are written with round-trip precision.
void write_csv(std::ostream& out, const TimeSeriesMatrix& data, const std::vector<std::string>& header = {});
void write_csv_file(const std::string& path, const TimeSeriesMatrix& data, const std::vector<std::string>& header = {});

/// Named columns of equal length, for plot series.
void write_columns(std::ostream& out, const std::vector<std::string>& names,
                   const std::vector<std::vector<double>>& columns);

/// Parses `i -> j` lines (1-based labels) into a graph on n nodes. Blank
/// lines and lines starting with '#' are ignored.
Dag read_edge_list(std::istream& in, int n);

/// Opens a file for reading or writing; throws InvalidArgument on failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mdm
