#include "subtext/csv.hpp"

#include <sstream>

namespace subtext::csv {

std::string escape_field(std::string_view field) {
  bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

Writer::Writer(const std::filesystem::path& path) {
  std::error_code ec;
  auto parent = path.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw PathUnwritable(path.string());
}

void Writer::write_row(const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out_.put(',');
    out_ << escape_field(row[i]);
  }
  out_.put('\n');
  ++rows_;
}

Reader::Reader(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileUnreadable(path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  data_ = std::move(buf).str();
}

Reader Reader::from_string(std::string data) {
  Reader r;
  r.data_ = std::move(data);
  return r;
}

std::optional<Row> Reader::next() {
  if (pos_ >= data_.size()) return std::nullopt;
  row_start_line_ = line_;

  Row row;
  std::string field;
  bool quoted = false;
  bool done = false;
  while (!done) {
    if (pos_ >= data_.size()) {
      if (quoted)
        throw CsvMalformed("unterminated quoted field at line " +
                           std::to_string(row_start_line_));
      break;
    }
    char c = data_[pos_++];
    if (quoted) {
      if (c == '"') {
        if (pos_ < data_.size() && data_[pos_] == '"') {
          field.push_back('"');
          ++pos_;
        } else {
          quoted = false;
          // Only a separator or record end may follow a closing quote.
          if (pos_ < data_.size() && data_[pos_] != ',' &&
              data_[pos_] != '\n' && data_[pos_] != '\r')
            throw CsvMalformed("stray bytes after closing quote at line " +
                               std::to_string(line_));
        }
      } else {
        if (c == '\n') ++line_;
        field.push_back(c);
      }
    } else {
      switch (c) {
        case ',':
          row.push_back(std::move(field));
          field.clear();
          break;
        case '\r':
          if (pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
          ++line_;
          done = true;
          break;
        case '\n':
          ++line_;
          done = true;
          break;
        case '"':
          if (!field.empty())
            throw CsvMalformed("quote inside unquoted field at line " +
                               std::to_string(line_));
          quoted = true;
          break;
        default:
          field.push_back(c);
      }
    }
  }
  row.push_back(std::move(field));
  return row;
}

std::vector<Row> read_all(const std::filesystem::path& path) {
  Reader reader(path);
  std::vector<Row> rows;
  while (auto row = reader.next()) rows.push_back(std::move(*row));
  return rows;
}

}  // namespace subtext::csv
