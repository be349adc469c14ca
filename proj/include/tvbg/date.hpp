#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace tvbg {

/// Calendar day. Arithmetic is in whole days.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
  Date(int year, unsigned month, unsigned day);

  /// Strict YYYY-MM-DD.
  static Date parse_iso(std::string_view text);
  /// JHU column header form M/D/YY, interpreted as 20YY.
  static Date parse_mdy(std::string_view text);

  std::string iso() const;
  std::chrono::sys_days sys_days() const { return days_; }

  friend Date operator+(Date d, int n) { return Date{d.days_ + std::chrono::days{n}}; }
  friend Date operator-(Date d, int n) { return Date{d.days_ - std::chrono::days{n}}; }
  friend int operator-(Date a, Date b) { return static_cast<int>((a.days_ - b.days_).count()); }
  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace tvbg
