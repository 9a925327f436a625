#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace onsetblend {

namespace detail {

// Howard Hinnant's civil-calendar algorithms (days relative to 1970-01-01).
constexpr std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097LL + static_cast<std::int64_t>(doe) - 719468;
}

struct CivilDate {
  int year;
  unsigned month;
  unsigned day;
};

constexpr CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {static_cast<int>(y + (m <= 2)), m, d};
}

constexpr bool is_leap_year(int y) {
  return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0);
}

constexpr unsigned days_in_month(int y, unsigned m) {
  constexpr unsigned lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap_year(y)) return 29;
  return lengths[m - 1];
}

}  // namespace detail

// Calendar date stored as a day count since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::int32_t serial) : serial_(serial) {}

  static constexpr Date from_ymd(int year, unsigned month, unsigned day) {
    return Date(static_cast<std::int32_t>(detail::days_from_civil(year, month, day)));
  }

  // Strict ISO-8601 YYYY-MM-DD.
  static std::optional<Date> parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto digits = [&](std::size_t pos, std::size_t len, int& out) {
      out = 0;
      for (std::size_t i = pos; i < pos + len; ++i) {
        if (text[i] < '0' || text[i] > '9') return false;
        out = out * 10 + (text[i] - '0');
      }
      return true;
    };
    int y = 0, m = 0, d = 0;
    if (!digits(0, 4, y) || !digits(5, 2, m) || !digits(8, 2, d)) return std::nullopt;
    if (m < 1 || m > 12) return std::nullopt;
    if (d < 1 || d > static_cast<int>(detail::days_in_month(y, static_cast<unsigned>(m))))
      return std::nullopt;
    return from_ymd(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
  }

  std::string to_string() const {
    const auto c = detail::civil_from_days(serial_);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", c.year, c.month, c.day);
    return buf;
  }

  constexpr std::int32_t serial() const { return serial_; }
  int year() const { return detail::civil_from_days(serial_).year; }
  unsigned month() const { return detail::civil_from_days(serial_).month; }
  unsigned day() const { return detail::civil_from_days(serial_).day; }

  // 1-based day within the calendar year.
  int day_of_year() const {
    const int y = year();
    return static_cast<int>(serial_ - detail::days_from_civil(y, 1, 1)) + 1;
  }

  // 0 = Monday .. 6 = Sunday. 1970-01-01 was a Thursday.
  int weekday() const {
    return static_cast<int>(((serial_ % 7) + 7 + 3) % 7);
  }

  constexpr Date operator+(int days) const { return Date(serial_ + days); }
  constexpr Date operator-(int days) const { return Date(serial_ - days); }
  constexpr int operator-(Date other) const { return serial_ - other.serial_; }
  Date& operator+=(int days) { serial_ += days; return *this; }
  Date& operator++() { ++serial_; return *this; }

  friend constexpr auto operator<=>(Date, Date) = default;

 private:
  std::int32_t serial_ = 0;
};

// "MM-DD" month-day pair, e.g. a climatological date applied to any year.
struct MonthDay {
  unsigned month = 1;
  unsigned day = 1;

  static std::optional<MonthDay> parse(std::string_view text) {
    if (text.size() != 5 || text[2] != '-') return std::nullopt;
    auto digit = [&](char c) { return c >= '0' && c <= '9'; };
    if (!digit(text[0]) || !digit(text[1]) || !digit(text[3]) || !digit(text[4]))
      return std::nullopt;
    const unsigned m = static_cast<unsigned>((text[0] - '0') * 10 + (text[1] - '0'));
    const unsigned d = static_cast<unsigned>((text[3] - '0') * 10 + (text[4] - '0'));
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    return MonthDay{m, d};
  }

  Date in_year(int year) const { return Date::from_ymd(year, month, day); }

  std::string to_string() const {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02u-%02u", month, day);
    return buf;
  }

  friend constexpr auto operator<=>(MonthDay, MonthDay) = default;
};

}  // namespace onsetblend
