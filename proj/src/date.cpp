#include "tvbg/date.hpp"

#include <charconv>

#include <fmt/format.h>

#include "tvbg/errors.hpp"

namespace tvbg {
namespace {

int parse_int(std::string_view text, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError(fmt::format("invalid date '{}'", whole));
  }
  return value;
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
  std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                  std::chrono::day{day}};
  if (!ymd.ok()) {
    throw FormatError(fmt::format("invalid calendar date {}-{}-{}", year, month, day));
  }
  days_ = std::chrono::sys_days{ymd};
}

Date Date::parse_iso(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw FormatError(fmt::format("expected YYYY-MM-DD, got '{}'", text));
  }
  return Date(parse_int(text.substr(0, 4), text), parse_int(text.substr(5, 2), text),
              parse_int(text.substr(8, 2), text));
}

Date Date::parse_mdy(std::string_view text) {
  auto first = text.find('/');
  auto second = first == std::string_view::npos ? first : text.find('/', first + 1);
  if (second == std::string_view::npos || text.find('/', second + 1) != std::string_view::npos) {
    throw FormatError(fmt::format("expected M/D/YY, got '{}'", text));
  }
  int month = parse_int(text.substr(0, first), text);
  int day = parse_int(text.substr(first + 1, second - first - 1), text);
  auto year_text = text.substr(second + 1);
  if (year_text.size() != 2) {
    throw FormatError(fmt::format("expected two-digit year in '{}'", text));
  }
  return Date(2000 + parse_int(year_text, text), month, day);
}

std::string Date::iso() const {
  std::chrono::year_month_day ymd{days_};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

}  // namespace tvbg
