#ifndef MSFAVAR_PANEL_IO_HPP
#define MSFAVAR_PANEL_IO_HPP

#include "msfavar/core.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace msfavar {

/// Comma-separated panel: header row "date,<series...>", dates formatted
/// YYYYQn, empty cells undefined (NaN).
TimeSeriesPanel read_panel_csv(std::istream& in, const std::string& origin = "<stream>");
TimeSeriesPanel read_panel_csv(const std::string& path);
void write_panel_csv(std::ostream& out, const TimeSeriesPanel& panel);
void write_panel_csv(const std::string& path, const TimeSeriesPanel& panel);

/// Minimal delimited-table writer; numbers are written round-trip exact.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  CsvWriter& header(const std::vector<std::string>& names);
  CsvWriter& cell(const std::string& text);
  CsvWriter& cell(double value);
  CsvWriter& cell(long long value);
  CsvWriter& cell(int value) { return cell(static_cast<long long>(value)); }
  CsvWriter& cell(std::size_t value) { return cell(static_cast<long long>(value)); }
  CsvWriter& blank();
  void end_row();

 private:
  std::ostream& out_;
  bool first_ = true;
};

/// Opens a file for writing or throws IoError.
std::ofstream open_output(const std::string& path);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace msfavar

#endif
