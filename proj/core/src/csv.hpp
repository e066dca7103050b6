#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace affectfuse::detail {

using CsvRecord = std::vector<std::string>;

// RFC-4180 reader: comma separated, double-quote quoting with "" escapes,
// CRLF or LF line endings, embedded newlines allowed inside quotes. A UTF-8
// byte order mark at the start is skipped. Throws ParseError with the
// zero-based record index on an unterminated quote or stray quote.
std::vector<CsvRecord> read_csv(std::istream& in);

}  // namespace affectfuse::detail
