#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace topdog::csv {

// Minimal reader for the flat, unquoted CSV files used throughout the toolkit.
// Fields never contain commas or quotes; trailing '\r' is stripped.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Returns false at end of input. Blank lines are skipped.
  bool next(std::vector<std::string_view>& fields);

  std::size_t line_number() const noexcept { return line_number_; }
  const std::string& line() const noexcept { return line_; }

 private:
  std::istream& in_;
  std::string line_;
  std::size_t line_number_ = 0;
};

void split(std::string_view line, std::vector<std::string_view>& fields);

template <typename Int>
std::optional<Int> parse_int(std::string_view text) {
  Int value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
  return value;
}

std::optional<double> parse_double(std::string_view text);

// Shortest representation that round-trips through parse_double.
std::string format_double(double value);

}  // namespace topdog::csv
