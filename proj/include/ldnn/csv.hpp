#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ldnn {

// Shortest representation that round-trips a double exactly.
std::string format_double(double x);

// Writes content to a sibling temp file, then renames it into place, so
// readers never observe a partial file.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// Commented header block carried by every CSV this tool writes:
//   # schema=<name>.v<N>
//   # key=value ...
// followed by the column row.
struct CsvMeta {
  std::string schema;
  std::vector<std::pair<std::string, std::string>> entries;
};

std::string csv_header_block(const CsvMeta& meta, const std::vector<std::string>& columns);

// Parsed CSV: meta entries from '#' lines, then the column row, then data.
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string meta_value(const std::string& key) const;        // "" when absent
  int column_index(const std::string& name) const;             // throws when absent
};

CsvTable read_csv(const std::string& path);

}  // namespace ldnn
