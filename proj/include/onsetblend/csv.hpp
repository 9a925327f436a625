#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "onsetblend/errors.hpp"

namespace onsetblend {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

// Line-oriented CSV reader with a strict header and 1-based line numbers for
// error reporting.
class CsvReader {
 public:
  CsvReader(const std::string& path, const std::string& expected_header)
      : path_(path), in_(path) {
    if (!in_) throw Error(Errc::io_error, "cannot open " + path);
    std::string header;
    if (!std::getline(in_, header))
      throw Error(Errc::malformed_row, path + ": empty file");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != expected_header)
      throw Error(Errc::malformed_row,
                  path + ": expected header '" + expected_header + "', got '" + header + "'");
    line_number_ = 1;
  }

  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_number_;
      if (line.empty() || line == "\r") continue;
      fields = split_csv(line);
      return true;
    }
    return false;
  }

  std::size_t line_number() const { return line_number_; }

  [[noreturn]] void fail(Errc code, const std::string& what) const {
    throw Error(code, path_ + ":" + std::to_string(line_number_) + ": " + what);
  }

  double parse_double(const std::string& field) const {
    try {
      std::size_t pos = 0;
      double v = std::stod(field, &pos);
      if (pos != field.size()) fail(Errc::malformed_row, "trailing characters in '" + field + "'");
      return v;
    } catch (const Error&) {
      throw;
    } catch (...) {
      fail(Errc::malformed_row, "not a number: '" + field + "'");
    }
  }

  long parse_long(const std::string& field) const {
    try {
      std::size_t pos = 0;
      long v = std::stol(field, &pos);
      if (pos != field.size()) fail(Errc::malformed_row, "trailing characters in '" + field + "'");
      return v;
    } catch (const Error&) {
      throw;
    } catch (...) {
      fail(Errc::malformed_row, "not an integer: '" + field + "'");
    }
  }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t line_number_ = 0;
};

inline std::string fmt_fixed(double v, int places) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", places, v);
  return buf;
}

inline std::string fmt_sig(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

// Writes the full content to <path>.tmp and renames into place.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write " + tmp);
    out << content;
    if (!out) throw Error(Errc::io_error, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::io_error, "rename " + tmp + " -> " + path + ": " + ec.message());
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace onsetblend
