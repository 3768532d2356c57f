#pragma once

#include <string>
#include <vector>

namespace vbs {

// Minimal deterministic CSV writing/reading for the emitted artifacts.
// Numbers are formatted with "%.12g", which round-trips every value the
// harness emits and keeps reruns byte-identical.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(const std::vector<std::string>& cells);
  void add_number_row(const std::vector<double>& cells);

  const std::string& text() const { return text_; }
  void write_file(const std::string& path) const;

  static std::string format_number(double v);

 private:
  std::size_t columns_;
  std::string text_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  double number(std::size_t row, const std::string& column) const;
  std::size_t column_index(const std::string& column) const;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

}  // namespace vbs
