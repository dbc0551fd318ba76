#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "liouville/errors.hpp"

namespace liouville {

// Shortest-faithful decimal form of a double: %.17g always round-trips, and
// identical doubles print identically, which the byte-determinism contract
// of the CSV outputs relies on.
inline std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_sig(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Comma-separated writer: '.' decimal point, LF line endings, header first.
// Cells must not contain commas (ours are numbers and short words).
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : path_(path) {
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("csv: cannot open " + path);
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_.put(',');
      out_ << cells[i];
    }
    out_.put('\n');
  }

  void close() {
    out_.close();
    if (out_.fail()) throw IoError("csv: write failed for " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace liouville
