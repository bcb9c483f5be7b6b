#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "subtext/errors.hpp"

// Fixed CSV dialect shared by every reader/writer in the project:
// comma separator, double-quote escaping, LF record ends on output,
// CRLF tolerated on input. Quoted fields may span lines.
namespace subtext::csv {

using Row = std::vector<std::string>;

// Quotes the field iff it contains a comma, quote, CR or LF.
std::string escape_field(std::string_view field);

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path);  // throws PathUnwritable

  void write_row(const Row& row);
  std::size_t rows_written() const { return rows_; }
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  std::size_t rows_ = 0;
};

// Strict RFC-4180 reader. Throws CsvMalformed on a stray quote in an
// unquoted field, bytes after a closing quote, or EOF inside quotes.
class Reader {
 public:
  explicit Reader(const std::filesystem::path& path);  // throws FileUnreadable
  static Reader from_string(std::string data);

  // One record, or nullopt at end of input. Physical line number of the
  // record start is available afterwards via row_start_line().
  std::optional<Row> next();
  std::size_t row_start_line() const { return row_start_line_; }

 private:
  Reader() = default;

  std::string data_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t row_start_line_ = 1;
};

std::vector<Row> read_all(const std::filesystem::path& path);

}  // namespace subtext::csv
