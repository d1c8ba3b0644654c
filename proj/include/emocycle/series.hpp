#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "emocycle/date.hpp"

namespace emocycle {

inline constexpr double kGap = std::numeric_limits<double>::quiet_NaN();

inline bool is_gap(double v) { return std::isnan(v); }

// Calendar-indexed daily values. Day i is start + i. Gap days (no data, or
// masked out) hold NaN and never enter a statistic.
struct DailySeries {
  Date start{};
  std::vector<double> values;

  DailySeries() = default;
  DailySeries(Date s, std::vector<double> v) : start(s), values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
  Date date_at(std::size_t i) const { return start + std::chrono::days{static_cast<long>(i)}; }
  Date end() const { return date_at(values.empty() ? 0 : values.size() - 1); }
  bool is_gap(std::size_t i) const { return emocycle::is_gap(values[i]); }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (double v : values) n += !emocycle::is_gap(v);
    return n;
  }

  std::span<const double> span() const { return values; }
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population (divide by count)
  std::size_t count = 0;
};

// Mean and population standard deviation over non-gap entries.
inline MeanStd mean_std(std::span<const double> v) {
  MeanStd r;
  double sum = 0.0;
  for (double x : v)
    if (!is_gap(x)) {
      sum += x;
      ++r.count;
    }
  if (r.count == 0) return r;
  r.mean = sum / static_cast<double>(r.count);
  double ss = 0.0;
  for (double x : v)
    if (!is_gap(x)) ss += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(r.count));
  return r;
}

// Values with every February 29 removed. The result is no longer
// calendar-contiguous, so only the plain sample vector is returned.
inline std::vector<double> drop_leap_days(const DailySeries& s) {
  std::vector<double> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!is_leap_day(s.date_at(i))) out.push_back(s.values[i]);
  return out;
}

}  // namespace emocycle
