#pragma once

// Plain CSV tables with a header row.

#include <filesystem>
#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace sli {

class Table {
 public:
  explicit Table(std::vector<std::string> columns);

  void add_row(std::vector<double> values);
  void add_row(std::initializer_list<double> values) { add_row(std::vector<double>(values)); }

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }

  /// Numbers in shortest round-trip form; non-finite values as nan/inf/-inf.
  void write_csv(std::ostream& out) const;
  void save_csv(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace sli
