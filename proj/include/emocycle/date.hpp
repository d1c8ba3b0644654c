#pragma once

#include <chrono>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>

#include <fmt/format.h>

#include "emocycle/error.hpp"

namespace emocycle {

using Date = std::chrono::sys_days;

inline std::optional<Date> try_parse_date(std::string_view text) {
  // Strict YYYY-MM-DD.
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto field = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int v = 0;
    auto first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, v);
    if (ec != std::errc{} || ptr != first + len) return std::nullopt;
    return v;
  };
  auto y = field(0, 4);
  auto m = field(5, 2);
  auto d = field(8, 2);
  if (!y || !m || !d) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{*y},
                                  std::chrono::month{static_cast<unsigned>(*m)},
                                  std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

inline Date parse_date(std::string_view text) {
  if (auto d = try_parse_date(text)) return *d;
  throw ValidationError(fmt::format("invalid date '{}', expected YYYY-MM-DD", text));
}

inline Date make_date(int y, unsigned m, unsigned d) {
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                  std::chrono::day{d}};
  if (!ymd.ok()) throw ValidationError(fmt::format("invalid date {}-{}-{}", y, m, d));
  return Date{ymd};
}

inline std::chrono::year_month_day ymd_of(Date d) { return std::chrono::year_month_day{d}; }

inline std::string format_date(Date d) {
  auto ymd = ymd_of(d);
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

// Monday = 0 ... Sunday = 6.
inline int weekday_index(Date d) {
  return static_cast<int>(std::chrono::weekday{d}.iso_encoding()) - 1;
}

// January = 0 ... December = 11.
inline int month_index(Date d) { return static_cast<int>(static_cast<unsigned>(ymd_of(d).month())) - 1; }

inline bool is_leap_day(Date d) {
  auto ymd = ymd_of(d);
  return ymd.month() == std::chrono::February && ymd.day() == std::chrono::day{29};
}

// Day of year on a 365-day calendar, Jan 1 = 0 ... Dec 31 = 364. February 29
// shares the index of February 28.
inline int day_of_year_noleap(Date d) {
  static constexpr int kCumulative[12] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
  auto ymd = ymd_of(d);
  int m = static_cast<int>(static_cast<unsigned>(ymd.month())) - 1;
  int day = static_cast<int>(static_cast<unsigned>(ymd.day()));
  if (m == 1 && day == 29) day = 28;
  return kCumulative[m] + day - 1;
}

inline std::string month_day_label(int noleap_doy) {
  auto d = Date{std::chrono::year{2001} / std::chrono::January / 1} + std::chrono::days{noleap_doy};
  auto ymd = ymd_of(d);
  return fmt::format("{:02d}-{:02d}", static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()));
}

// Inclusive calendar window.
struct DateWindow {
  Date first;
  Date last;

  bool contains(Date d) const { return first <= d && d <= last; }
  bool overlaps(Date a, Date b) const { return a <= last && first <= b; }
  friend bool operator==(const DateWindow&, const DateWindow&) = default;
};

// "2011-03-09..2011-03-15"
inline DateWindow parse_window(std::string_view text) {
  auto sep = text.find("..");
  if (sep == std::string_view::npos)
    throw ValidationError(fmt::format("invalid date window '{}', expected FIRST..LAST", text));
  DateWindow w{parse_date(text.substr(0, sep)), parse_date(text.substr(sep + 2))};
  if (w.last < w.first)
    throw ValidationError(fmt::format("date window '{}' ends before it starts", text));
  return w;
}

inline std::string format_window(const DateWindow& w) {
  return format_date(w.first) + ".." + format_date(w.last);
}

}  // namespace emocycle
