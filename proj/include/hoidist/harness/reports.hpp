#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace harness {

// RFC-4180 CSV: header row, CRLF line endings, quoting where needed.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& cells);
    const std::vector<std::string>& columns() const { return columns_; }

  private:
    void emit(const std::vector<std::string>& cells);
    std::ofstream out_;
    std::vector<std::string> columns_;
};

std::string fmt(double v);
std::string fmt(int64_t v);

// Minimal reader used by tests and the report validators.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace harness
