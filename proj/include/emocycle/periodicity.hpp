#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "emocycle/date.hpp"
#include "emocycle/error.hpp"
#include "emocycle/series.hpp"

namespace emocycle {

// How phase labels map onto the calendar.
enum class PhaseAnchor {
  SeriesStart,  // phase = day index mod L, any L
  Weekday,      // L = 7, Monday first
  Month,        // L = 12 over calendar-month means, January first
  DayOfYear,    // L = 365 with February 29 removed, January 1 first
};

inline int anchor_period(PhaseAnchor a, int series_start_period = 0) {
  switch (a) {
    case PhaseAnchor::Weekday: return 7;
    case PhaseAnchor::Month: return 12;
    case PhaseAnchor::DayOfYear: return 365;
    case PhaseAnchor::SeriesStart: return series_start_period;
  }
  return 0;
}

inline std::string_view to_string(PhaseAnchor a) {
  switch (a) {
    case PhaseAnchor::SeriesStart: return "series-start";
    case PhaseAnchor::Weekday: return "weekday";
    case PhaseAnchor::Month: return "month";
    case PhaseAnchor::DayOfYear: return "day-of-year";
  }
  return "?";
}

inline std::vector<std::string> phase_labels(PhaseAnchor a, int period) {
  static constexpr const char* kWeekdays[7] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
  static constexpr const char* kMonths[12] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                              "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  std::vector<std::string> out;
  for (int l = 0; l < period; ++l) {
    switch (a) {
      case PhaseAnchor::Weekday: out.emplace_back(kWeekdays[l]); break;
      case PhaseAnchor::Month: out.emplace_back(kMonths[l]); break;
      case PhaseAnchor::DayOfYear: out.push_back(month_day_label(l)); break;
      case PhaseAnchor::SeriesStart: out.push_back(std::to_string(l)); break;
    }
  }
  return out;
}

// Per-cycle periodicities p^m(l). Cycles are laid end to end from the first
// usable unit of the series; `first_phase` is the calendar phase of position
// 0, so cycle[m][j] belongs to phase (first_phase + j) mod L.
struct CycleSet {
  int period = 0;
  PhaseAnchor anchor = PhaseAnchor::SeriesStart;
  int first_phase = 0;
  std::vector<std::vector<double>> cycles;
  std::vector<Date> cycle_starts;
  std::size_t candidates = 0;  // complete cycles before any were dropped
  std::size_t dropped_excluded = 0;
  std::size_t dropped_zero_sum = 0;
  std::vector<DateWindow> exclusions;
  std::vector<std::string> warnings;
};

struct PeriodProfile {
  int period = 0;
  PhaseAnchor anchor = PhaseAnchor::SeriesStart;
  std::vector<std::string> labels;
  std::vector<double> p;  // averaged periodicity
  std::vector<double> s;  // ensemble deviation
  std::size_t cycles = 0;
  std::vector<DateWindow> exclusions;
};

// Exclusion windows used by default: the week around 2011-03-11 for the
// weekly profile, November 2010 to October 2011 for the yearly profiles.
inline std::vector<DateWindow> default_weekly_exclusions() {
  return {{make_date(2011, 3, 9), make_date(2011, 3, 15)}};
}

inline std::vector<DateWindow> default_yearly_exclusions() {
  return {{make_date(2010, 11, 1), make_date(2011, 10, 31)}};
}

namespace detail {

struct CycleUnit {
  double value;  // NaN for a gap
  Date first;
  Date last;
};

inline CycleSet partition_cycles(const std::vector<CycleUnit>& units, int period, PhaseAnchor anchor,
                                 int first_phase, std::span<const DateWindow> exclusions) {
  if (period < 1) throw ValidationError(fmt::format("cycle length must be positive, got {}", period));
  CycleSet set;
  set.period = period;
  set.anchor = anchor;
  set.first_phase = first_phase;
  set.exclusions.assign(exclusions.begin(), exclusions.end());
  const std::size_t L = static_cast<std::size_t>(period);
  for (std::size_t begin = 0; begin + L <= units.size(); begin += L) {
    ++set.candidates;
    const Date first = units[begin].first;
    const Date last = units[begin + L - 1].last;
    bool skip = false;
    for (const auto& w : exclusions) skip = skip || w.overlaps(first, last);
    double sum = 0.0;
    for (std::size_t j = 0; j < L; ++j) {
      skip = skip || is_gap(units[begin + j].value);
      sum += units[begin + j].value;
    }
    if (skip) {
      ++set.dropped_excluded;
      continue;
    }
    if (sum == 0.0) {
      ++set.dropped_zero_sum;
      set.warnings.push_back(fmt::format("cycle starting {} sums to zero; dropped", format_date(first)));
      continue;
    }
    std::vector<double> pm(L);
    for (std::size_t j = 0; j < L; ++j) pm[j] = static_cast<double>(L) * units[begin + j].value / sum;
    set.cycles.push_back(std::move(pm));
    set.cycle_starts.push_back(first);
  }
  if (set.cycles.empty())
    throw AnalysisError(fmt::format("no complete {}-unit cycles left ({} candidates, {} excluded, {} zero-sum)",
                                    period, set.candidates, set.dropped_excluded, set.dropped_zero_sum));
  return set;
}

inline std::vector<CycleUnit> daily_units(const DailySeries& y, bool drop_leap_days) {
  std::vector<CycleUnit> units;
  units.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    Date d = y.date_at(i);
    if (drop_leap_days && is_leap_day(d)) continue;
    units.push_back({y.values[i], d, d});
  }
  return units;
}

// Mean of each complete calendar month; partial months at either end are
// skipped, a month with no valid day is a gap.
inline std::vector<CycleUnit> monthly_units(const DailySeries& y) {
  std::vector<CycleUnit> units;
  std::size_t i = 0;
  while (i < y.size() && static_cast<unsigned>(ymd_of(y.date_at(i)).day()) != 1) ++i;
  while (i < y.size()) {
    auto ymd = ymd_of(y.date_at(i));
    auto last_day = std::chrono::year_month_day_last{ymd.year(), std::chrono::month_day_last{ymd.month()}};
    std::size_t len = static_cast<unsigned>(last_day.day());
    if (i + len > y.size()) break;
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t j = i; j < i + len; ++j)
      if (!y.is_gap(j)) {
        sum += y.values[j];
        ++n;
      }
    units.push_back({n ? sum / static_cast<double>(n) : kGap, y.date_at(i), y.date_at(i + len - 1)});
    i += len;
  }
  return units;
}

inline int phase_of(PhaseAnchor anchor, int period, Date d, std::size_t index) {
  switch (anchor) {
    case PhaseAnchor::Weekday: return weekday_index(d);
    case PhaseAnchor::Month: return month_index(d);
    case PhaseAnchor::DayOfYear: return day_of_year_noleap(d);
    case PhaseAnchor::SeriesStart: return static_cast<int>(index % static_cast<std::size_t>(period));
  }
  return 0;
}

}  // namespace detail

// Splits y into complete cycles of length L and normalizes each so its
// phases average to 1. Cycles touching a gap or an exclusion window are
// dropped whole, as is the incomplete tail.
inline CycleSet cycle_periodicities(const DailySeries& y, PhaseAnchor anchor, int period = 0,
                                    std::span<const DateWindow> exclusions = {}) {
  const int L = anchor_period(anchor, period);
  if (anchor != PhaseAnchor::SeriesStart && period != 0 && period != L)
    throw ValidationError(fmt::format("{} anchor implies period {}, got {}", to_string(anchor), L, period));
  std::vector<detail::CycleUnit> units;
  switch (anchor) {
    case PhaseAnchor::Month: units = detail::monthly_units(y); break;
    case PhaseAnchor::DayOfYear: units = detail::daily_units(y, true); break;
    default: units = detail::daily_units(y, false); break;
  }
  if (units.empty()) throw AnalysisError("series has no usable units for cycle estimation");
  int first_phase = 0;
  switch (anchor) {
    case PhaseAnchor::Weekday: first_phase = weekday_index(units.front().first); break;
    case PhaseAnchor::Month: first_phase = month_index(units.front().first); break;
    case PhaseAnchor::DayOfYear: first_phase = day_of_year_noleap(units.front().first); break;
    case PhaseAnchor::SeriesStart: first_phase = 0; break;
  }
  return detail::partition_cycles(units, L, anchor, first_phase, exclusions);
}

// Index-only variant for a bare sequence: phase 0 is the first element.
inline CycleSet cycle_periodicities(std::span<const double> y, int period) {
  DailySeries s(Date{}, std::vector<double>(y.begin(), y.end()));
  return cycle_periodicities(s, PhaseAnchor::SeriesStart, period);
}

// Averaged periodicity p(l) and ensemble deviation s(l) over M cycles.
inline PeriodProfile profile(const CycleSet& set) {
  if (set.cycles.empty()) throw AnalysisError("profile needs at least one cycle");
  const std::size_t L = static_cast<std::size_t>(set.period);
  PeriodProfile out;
  out.period = set.period;
  out.anchor = set.anchor;
  out.labels = phase_labels(set.anchor, set.period);
  out.cycles = set.cycles.size();
  out.exclusions = set.exclusions;
  std::vector<double> sum(L, 0.0), sum_sq(L, 0.0);
  for (const auto& c : set.cycles) {
    if (c.size() != L) throw ValidationError("cycles differ in length");
    for (std::size_t j = 0; j < L; ++j) {
      sum[j] += c[j];
      sum_sq[j] += c[j] * c[j];
    }
  }
  const double M = static_cast<double>(set.cycles.size());
  out.p.assign(L, 0.0);
  out.s.assign(L, 0.0);
  for (std::size_t j = 0; j < L; ++j) {
    std::size_t phase = (static_cast<std::size_t>(set.first_phase) + j) % L;
    double mean = sum[j] / M;
    out.p[phase] = mean;
    out.s[phase] = std::sqrt(std::max(0.0, sum_sq[j] / M - mean * mean));
  }
  return out;
}

inline PeriodProfile profile(const std::vector<std::vector<double>>& cycles) {
  if (cycles.empty()) throw AnalysisError("profile needs at least one cycle");
  CycleSet set;
  set.period = static_cast<int>(cycles.front().size());
  set.cycles = cycles;
  return profile(set);
}

// y(t) / p(phase(t)). Days inside exclusion windows are divided like any
// other; February 29 takes the February 28 factor.
inline DailySeries remove_cycle(const DailySeries& y, const PeriodProfile& prof) {
  if (prof.period < 1 || prof.p.size() != static_cast<std::size_t>(prof.period))
    throw ValidationError("malformed period profile");
  DailySeries out(y.start, y.values);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y.is_gap(i)) continue;
    int phase = detail::phase_of(prof.anchor, prof.period, y.date_at(i), i);
    double p = prof.p[static_cast<std::size_t>(phase)];
    if (!(p > 0.0))
      throw AnalysisError(fmt::format("periodicity for phase {} is {}; cannot divide",
                                      prof.labels.empty() ? std::to_string(phase) : prof.labels[phase], p));
    out.values[i] = y.values[i] / p;
  }
  return out;
}

inline PeriodProfile weekly_profile(const DailySeries& y, std::span<const DateWindow> exclusions) {
  return profile(cycle_periodicities(y, PhaseAnchor::Weekday, 7, exclusions));
}

struct YearlyProfiles {
  PeriodProfile monthly;  // L = 12 over calendar-month means
  PeriodProfile daily;    // L = 365, leap days removed
};

inline YearlyProfiles yearly_profiles(const DailySeries& y, std::span<const DateWindow> exclusions) {
  return {profile(cycle_periodicities(y, PhaseAnchor::Month, 12, exclusions)),
          profile(cycle_periodicities(y, PhaseAnchor::DayOfYear, 365, exclusions))};
}

inline YearlyProfiles yearly_profiles(const DailySeries& y) {
  auto ex = default_yearly_exclusions();
  return yearly_profiles(y, ex);
}

}  // namespace emocycle
