#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "emocycle/date.hpp"
#include "emocycle/error.hpp"
#include "emocycle/series.hpp"

namespace emocycle {

// Day value as a percentage of the mean of the preceding `window` days.
struct RateSeries {
  DailySeries values;
  std::vector<double> baseline;  // trailing mean, NaN where undefined
  DailySeries rate;              // percent, gap where undefined
};

inline RateSeries spike_rates(const DailySeries& y, std::size_t window = 7) {
  if (window == 0) throw ValidationError("spike baseline window must be positive");
  RateSeries r{y, std::vector<double>(y.size(), kGap), DailySeries(y.start, std::vector<double>(y.size(), kGap))};
  for (std::size_t t = window; t < y.size(); ++t) {
    double sum = 0.0;
    bool ok = true;
    for (std::size_t j = t - window; j < t; ++j) {
      if (y.is_gap(j)) {
        ok = false;
        break;
      }
      sum += y.values[j];
    }
    if (!ok) continue;
    double mean = sum / static_cast<double>(window);
    r.baseline[t] = mean;
    if (mean == 0.0 || y.is_gap(t)) continue;
    r.rate.values[t] = 100.0 * y.values[t] / mean;
  }
  return r;
}

struct Spike {
  Date date;
  std::string emotion;
  double rate;       // percent of the trailing baseline
  int duration;      // days from the peak while above the return threshold
};

struct SpikeReport {
  std::vector<Spike> entries;  // descending by rate
};

struct SpikeOptions {
  double threshold = 150.0;         // percent
  double return_threshold = 110.0;  // percent of the pre-peak baseline
};

// Local maxima of the rate series above `threshold`. Duration counts the
// consecutive days, starting at the peak, whose value stays above
// `return_threshold` percent of the baseline measured before the peak.
inline SpikeReport detect_spikes(const RateSeries& rates, std::string_view emotion,
                                 SpikeOptions options = {}) {
  SpikeReport report;
  const auto& r = rates.rate.values;
  const std::size_t n = r.size();
  for (std::size_t t = 0; t < n; ++t) {
    if (is_gap(r[t]) || !(r[t] > options.threshold)) continue;
    bool left = t == 0 || is_gap(r[t - 1]) || r[t] >= r[t - 1];
    bool right = t + 1 == n || is_gap(r[t + 1]) || r[t] > r[t + 1];
    if (!left || !right) continue;
    const double base = rates.baseline[t];
    int duration = 0;
    for (std::size_t u = t; u < n; ++u) {
      if (rates.values.is_gap(u)) break;
      if (!(100.0 * rates.values.values[u] / base > options.return_threshold)) break;
      ++duration;
    }
    report.entries.push_back({rates.rate.date_at(t), std::string(emotion), r[t], duration});
  }
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const Spike& a, const Spike& b) { return a.rate > b.rate; });
  return report;
}

enum class Direction { Up, Down, None };

inline std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Up: return "up";
    case Direction::Down: return "down";
    case Direction::None: return "none";
  }
  return "?";
}

struct CalendarEntry {
  int month;  // 1..12
  int day;    // 1..31
  std::string emotion;
  double mean_rate;  // percent of the temporal average
  double std_rate;   // across years
  std::size_t years;
  Direction direction;
};

struct CalendarDateReport {
  std::vector<CalendarEntry> entries;  // flagged dates, calendar order
  std::vector<CalendarEntry> all;      // every month-day, calendar order
};

struct CalendarOptions {
  double high = 110.0;
  double low = 90.0;
  double std_max = 15.0;
  std::size_t min_years = 3;
  std::vector<DateWindow> exclusions;
};

// Dates that sit systematically above or below the temporal average every
// year. Each occurrence of a month-day contributes 100 * y / mean(y); the
// date is flagged when the mean over years crosses high/low and the spread
// across years stays under std_max. February 29 is ignored.
inline CalendarDateReport calendar_report(const DailySeries& y, std::string_view emotion,
                                          const CalendarOptions& options = {}) {
  auto excluded = [&](Date d) {
    for (const auto& w : options.exclusions)
      if (w.contains(d)) return true;
    return false;
  };
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (!y.is_gap(i)) {
      sum += y.values[i];
      ++count;
    }
  if (count == 0) throw AnalysisError("calendar report on an all-gap series");
  const double average = sum / static_cast<double>(count);
  if (!(average > 0.0)) throw AnalysisError("calendar rates need a positive temporal average");

  std::vector<std::vector<double>> samples(365);
  for (std::size_t i = 0; i < y.size(); ++i) {
    Date d = y.date_at(i);
    if (y.is_gap(i) || is_leap_day(d) || excluded(d)) continue;
    samples[static_cast<std::size_t>(day_of_year_noleap(d))].push_back(100.0 * y.values[i] / average);
  }
  std::size_t fewest = samples[0].size();
  for (const auto& s : samples) fewest = std::min(fewest, s.size());
  if (fewest < options.min_years)
    throw AnalysisError(fmt::format("calendar report needs {} years for every date, some have {}",
                                    options.min_years, fewest));

  CalendarDateReport report;
  for (int doy = 0; doy < 365; ++doy) {
    const auto& s = samples[static_cast<std::size_t>(doy)];
    auto ms = mean_std(s);
    auto md = ymd_of(Date{std::chrono::year{2001} / std::chrono::January / 1} + std::chrono::days{doy});
    Direction dir = Direction::None;
    if (ms.std < options.std_max) {
      if (ms.mean > options.high) dir = Direction::Up;
      else if (ms.mean < options.low) dir = Direction::Down;
    }
    CalendarEntry e{static_cast<int>(static_cast<unsigned>(md.month())),
                    static_cast<int>(static_cast<unsigned>(md.day())),
                    std::string(emotion), ms.mean, ms.std, s.size(), dir};
    report.all.push_back(e);
    if (dir != Direction::None) report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace emocycle
