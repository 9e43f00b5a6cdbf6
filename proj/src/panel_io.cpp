#include "msfavar/panel_io.hpp"

#include "msfavar/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace msfavar {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

TimeSeriesPanel read_panel_csv(std::istream& in, const std::string& origin) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) have_header = true;
  }
  if (!have_header) throw ParseError(0, origin + ": empty file");

  auto header = split_csv_line(trim(line));
  if (header.size() < 2) throw ParseError(line_no, origin + ": header needs a date column and at least one series");
  TimeSeriesPanel panel;
  panel.series_names.assign(header.begin() + 1, header.end());
  for (const auto& n : panel.series_names) {
    if (n.empty()) throw ParseError(line_no, origin + ": empty series name in header");
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty()) continue;
    auto cells = split_csv_line(t);
    if (cells.size() != header.size()) {
      throw ParseError(line_no, origin + ": expected " + std::to_string(header.size()) + " cells, found " +
                                    std::to_string(cells.size()));
    }
    try {
      panel.dates.push_back(Quarter::parse(cells[0]));
    } catch (const ValidationError& e) {
      throw ParseError(line_no, origin + ": " + e.what());
    }
    std::vector<double> row;
    row.reserve(cells.size() - 1);
    for (std::size_t j = 1; j < cells.size(); ++j) {
      const std::string& c = cells[j];
      if (c.empty() || c == "NA" || c == "NaN" || c == "nan") {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      try {
        row.push_back(parse_double(c, panel.series_names[j - 1]));
      } catch (const ValidationError& e) {
        throw ParseError(line_no, origin + ": " + e.what());
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(line_no, origin + ": no data rows");

  panel.values.set_size(rows.size(), panel.series_names.size());
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t j = 0; j < rows[t].size(); ++j) panel.values(t, j) = rows[t][j];
  panel.validate(true);
  return panel;
}

TimeSeriesPanel read_panel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_panel_csv(in, path);
}

void write_panel_csv(std::ostream& out, const TimeSeriesPanel& panel) {
  CsvWriter w(out);
  std::vector<std::string> header{"date"};
  header.insert(header.end(), panel.series_names.begin(), panel.series_names.end());
  w.header(header);
  for (std::size_t t = 0; t < panel.dates.size(); ++t) {
    w.cell(panel.dates[t].to_string());
    for (arma::uword j = 0; j < panel.values.n_cols; ++j) {
      double v = panel.values(t, j);
      if (std::isfinite(v)) {
        w.cell(v);
      } else {
        w.blank();
      }
    }
    w.end_row();
  }
}

void write_panel_csv(const std::string& path, const TimeSeriesPanel& panel) {
  auto out = open_output(path);
  write_panel_csv(out, panel);
}

CsvWriter& CsvWriter::header(const std::vector<std::string>& names) {
  for (const auto& n : names) cell(n);
  end_row();
  return *this;
}

CsvWriter& CsvWriter::cell(const std::string& text) {
  if (!first_) out_ << ',';
  out_ << text;
  first_ = false;
  return *this;
}

CsvWriter& CsvWriter::cell(double value) { return cell(format_double(value)); }

CsvWriter& CsvWriter::cell(long long value) { return cell(std::to_string(value)); }

CsvWriter& CsvWriter::blank() { return cell(std::string()); }

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  auto out = open_output(path);
  out << content;
}

}  // namespace msfavar
