#include "homdip/io_util.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "homdip/errors.hpp"

namespace homdip {

std::string format_g9(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

std::string format_roundtrip(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(const std::string& path, const std::vector<CsvColumn>& columns) {
  if (columns.empty()) {
    throw ConfigError("write_csv: no columns");
  }
  const std::size_t rows = columns.front().values.size();
  for (const auto& c : columns) {
    if (c.values.size() != rows) {
      throw ConfigError("write_csv: ragged columns");
    }
  }
  std::ostringstream out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) out << ',';
    out << columns[c].header;
  }
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out << ',';
      out << format_g9(columns[c].values[r]);
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw ConfigError("cannot open for writing: " + path);
  }
  f << content;
  if (!f) {
    throw ConfigError("write failed: " + path);
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw ConfigError("cannot open: " + path);
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace homdip
