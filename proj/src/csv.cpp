#include "geofreq/csv.hpp"

#include <charconv>
#include <cmath>

namespace geofreq::csv {

std::vector<std::string> split(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      line.erase(0, 3);
    }
    if (!trim(line).empty()) return true;
  }
  return false;
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t");
  return std::string(text.substr(first, last - first + 1));
}

std::optional<double> parse_double(std::string_view text, char decimal) {
  std::string buf = trim(text);
  if (buf.empty()) return std::nullopt;
  if (decimal != '.') {
    for (auto& c : buf) {
      if (c == decimal) c = '.';
    }
  }
  const char* begin = buf.data();
  if (*begin == '+') ++begin;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, buf.data() + buf.size(), value);
  if (ec != std::errc{} || ptr != buf.data() + buf.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<long long> parse_int(std::string_view text) {
  const std::string buf = trim(text);
  if (buf.empty()) return std::nullopt;
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{} || ptr != buf.data() + buf.size()) {
    // Accept integral values written as reals, e.g. "3.0".
    const auto d = parse_double(buf);
    if (d && std::floor(*d) == *d && std::abs(*d) < 9.0e15) return static_cast<long long>(*d);
    return std::nullopt;
  }
  return value;
}

std::string format_double(double value) {
  if (value == 0.0) return "0";  // folds -0 into 0
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void Writer::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << delim_;
    const auto& f = fields[i];
    if (f.find(delim_) != std::string::npos || f.find('"') != std::string::npos) {
      out_ << '"';
      for (char c : f) {
        if (c == '"') out_ << '"';
        out_ << c;
      }
      out_ << '"';
    } else {
      out_ << f;
    }
  }
  out_ << '\n';
}

}  // namespace geofreq::csv
