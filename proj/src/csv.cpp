#include "samp/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace samp {

namespace {

std::string read_whole_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

CsvTable CsvTable::read_file(const std::string& path) {
  return parse(read_whole_file(path), path);
}

CsvTable CsvTable::parse(const std::string& text, const std::string& origin) {
  CsvTable t;
  t.origin_ = origin;

  std::size_t i = 0;
  const std::size_t n = text.size();
  if (n >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB &&
      static_cast<unsigned char>(text[2]) == 0xBF) {
    i = 3;  // skip BOM
  }

  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool any_field = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    any_field = true;
  };
  auto end_record = [&] {
    if (!any_field && record.empty() && field.empty()) return;  // blank line
    end_field();
    if (t.header_.empty()) {
      t.header_ = std::move(record);
    } else {
      if (record.size() != t.header_.size()) {
        throw SchemaError(origin + ": row " + std::to_string(t.rows_.size() + 2) +
                          " has " + std::to_string(record.size()) +
                          " fields, header has " + std::to_string(t.header_.size()));
      }
      t.rows_.push_back(std::move(record));
    }
    record.clear();
    any_field = false;
  };

  while (i < n) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      // swallow; \n handles the record break
    } else if (c == '\n') {
      end_record();
    } else {
      field.push_back(c);
    }
    ++i;
  }
  if (in_quotes) throw SchemaError(origin + ": unterminated quoted field");
  if (any_field || !field.empty() || !record.empty()) end_record();

  if (t.header_.empty()) throw SchemaError(origin + ": empty file");
  for (std::size_t c = 0; c < t.header_.size(); ++c) {
    t.col_index_[t.header_[c]] = c;
  }
  return t;
}

std::size_t CsvTable::column(const std::string& name) const {
  auto it = col_index_.find(name);
  if (it == col_index_.end()) {
    throw SchemaError(origin_ + ": missing column '" + name + "'");
  }
  return it->second;
}

double CsvTable::num(std::size_t row, std::size_t col) const {
  const std::string& s = rows_[row][col];
  if (s.empty()) {
    throw SchemaError(origin_ + ": empty numeric field in column '" +
                      header_[col] + "' row " + std::to_string(row + 2));
  }
  if (s == "inf" || s == "+inf" || s == "Infinity") return kInf;
  if (s == "-inf" || s == "-Infinity") return -kInf;
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end != s.c_str() + s.size()) {
    throw SchemaError(origin_ + ": bad number '" + s + "' in column '" +
                      header_[col] + "' row " + std::to_string(row + 2));
  }
  return v;
}

long long CsvTable::integer(std::size_t row, const std::string& name) const {
  double v = num(row, name);
  long long r = static_cast<long long>(std::llround(v));
  if (std::abs(v - static_cast<double>(r)) > 1e-9) {
    throw SchemaError(origin_ + ": expected integer in column '" + name +
                      "' row " + std::to_string(row + 2));
  }
  return r;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) {
    throw ValidationError("csv row width mismatch");
  }
  rows_.push_back(std::move(row));
}

namespace {
void write_field(std::ostream& out, const std::string& f) {
  if (f.find_first_of(",\"\n\r") == std::string::npos) {
    out << f;
    return;
  }
  out << '"';
  for (char c : f) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

void write_record(std::ostream& out, const std::vector<std::string>& rec) {
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (i) out << ',';
    write_field(out, rec[i]);
  }
  out << '\n';
}
}  // namespace

std::string CsvWriter::to_string() const {
  std::ostringstream out;
  write_record(out, header_);
  for (const auto& r : rows_) write_record(out, r);
  return out.str();
}

void CsvWriter::write_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << to_string();
}

std::string format_full(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

std::string format_sig(double v, int digits) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream ss;
  ss.precision(digits);
  ss << v;
  return ss.str();
}

}  // namespace samp
