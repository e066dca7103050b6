#include "csv.hpp"

#include <istream>
#include <iterator>

#include "affectfuse/error.hpp"

namespace affectfuse::detail {

std::vector<CsvRecord> read_csv(std::istream& in) {
  std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::size_t pos = 0;
  if (data.starts_with("\xEF\xBB\xBF")) pos = 3;

  std::vector<CsvRecord> records;
  CsvRecord record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    // A bare empty line is not a record.
    if (!(record.size() == 1 && record.front().empty())) records.push_back(std::move(record));
    record.clear();
  };

  while (pos < data.size()) {
    const char c = data[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < data.size() && data[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
          continue;
        }
        in_quotes = false;
      } else {
        field.push_back(c);
      }
      ++pos;
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) {
          throw ParseError(records.size(), "unexpected quote inside unquoted field");
        }
        in_quotes = true;
        field_was_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (pos + 1 < data.size() && data[pos + 1] == '\n') ++pos;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        if (field_was_quoted) {
          throw ParseError(records.size(), "characters after closing quote");
        }
        field.push_back(c);
    }
    ++pos;
  }
  if (in_quotes) throw ParseError(records.size(), "unterminated quoted field");
  if (!field.empty() || field_was_quoted || !record.empty()) end_record();
  return records;
}

}  // namespace affectfuse::detail
