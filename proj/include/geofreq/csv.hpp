#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace geofreq::csv {

struct Dialect {
  char delimiter = ',';
  char decimal = '.';
};

/// Splits one record. Fields may be wrapped in double quotes; a doubled quote
/// inside a quoted field is a literal quote. Embedded newlines are not supported.
std::vector<std::string> split(std::string_view line, char delimiter);

/// Reads the next non-empty line, stripping a trailing CR. Returns false at EOF.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no);

std::optional<double> parse_double(std::string_view text, char decimal = '.');
std::optional<long long> parse_int(std::string_view text);

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

std::string trim(std::string_view text);

/// Writes delimited rows; quotes fields that contain the delimiter or quotes.
class Writer {
 public:
  explicit Writer(std::ostream& out, char delimiter = ',') : out_(out), delim_(delimiter) {}

  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
  char delim_;
};

}  // namespace geofreq::csv
