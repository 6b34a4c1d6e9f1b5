#pragma once

#include <string>
#include <vector>

namespace homdip {

// Locale-independent decimal formatting via std::to_chars.
std::string format_g9(double v);        // 9 significant digits, CSV payload
std::string format_roundtrip(double v); // shortest exact round-trip, manifests

struct CsvColumn {
  std::string header;
  std::vector<double> values;
};

// Writes `header\n` then rows of comma-joined format_g9 values.
void write_csv(const std::string& path, const std::vector<CsvColumn>& columns);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace homdip
