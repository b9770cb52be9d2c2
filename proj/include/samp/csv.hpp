#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "samp/common.hpp"

namespace samp {

// Header-indexed CSV table. The reader copes with quoted fields, embedded
// commas/newlines, CRLF endings, and a UTF-8 BOM, which is as much of RFC 4180
// as feed data in the wild actually needs.
class CsvTable {
 public:
  static CsvTable read_file(const std::string& path);
  static CsvTable parse(const std::string& text, const std::string& origin);

  std::size_t num_rows() const { return rows_.size(); }
  bool has_column(const std::string& name) const {
    return col_index_.count(name) > 0;
  }

  // Throws SchemaError when the column is absent.
  std::size_t column(const std::string& name) const;

  const std::string& cell(std::size_t row, std::size_t col) const {
    return rows_[row][col];
  }
  const std::string& cell(std::size_t row, const std::string& name) const {
    return rows_[row][column(name)];
  }

  double num(std::size_t row, std::size_t col) const;
  double num(std::size_t row, const std::string& name) const {
    return num(row, column(name));
  }
  long long integer(std::size_t row, const std::string& name) const;

  const std::vector<std::string>& header() const { return header_; }
  const std::string& origin() const { return origin_; }

 private:
  std::string origin_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::unordered_map<std::string, std::size_t> col_index_;
};

// Minimal writer. Fields are quoted only when they need to be.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(std::vector<std::string> row);
  void write_file(const std::string& path) const;
  std::string to_string() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Shortest round-trippable decimal representation helpers. `full` keeps every
// bit (max_digits10); `sig` trims to n significant digits for report tables.
std::string format_full(double v);
std::string format_sig(double v, int digits);

}  // namespace samp
