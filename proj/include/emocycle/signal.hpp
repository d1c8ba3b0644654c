#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "emocycle/corpus.hpp"
#include "emocycle/dictionary.hpp"
#include "emocycle/error.hpp"
#include "emocycle/series.hpp"

namespace emocycle {

// X^k(t): sum of the daily counts of every term of one emotion.
inline std::vector<std::uint64_t> aggregate_emotion(const CountMatrix& counts,
                                                    const EmotionDictionary& dict,
                                                    std::string_view emotion) {
  const auto& entry = dict.at(emotion);
  std::vector<std::uint64_t> out(counts.days, 0);
  for (const auto& term : entry.terms) {
    auto idx = counts.term_index(term);
    if (!idx) throw ValidationError(fmt::format("term '{}' of '{}' missing from counts", term, emotion));
    const auto& s = counts.per_term[*idx];
    for (std::size_t t = 0; t < counts.days; ++t) out[t] += s[t];
  }
  return out;
}

// Z_raw(t) = X^k(t) / X(t); days without documents become gaps.
inline DailySeries normalize(Date start, std::span<const std::uint64_t> emotion_counts,
                             std::span<const std::uint64_t> totals) {
  if (emotion_counts.size() != totals.size())
    throw ValidationError(fmt::format("emotion counts ({}) and totals ({}) differ in length",
                                      emotion_counts.size(), totals.size()));
  DailySeries out(start, std::vector<double>(totals.size(), kGap));
  for (std::size_t t = 0; t < totals.size(); ++t)
    if (totals[t] > 0)
      out.values[t] = static_cast<double>(emotion_counts[t]) / static_cast<double>(totals[t]);
  return out;
}

struct Standardized {
  DailySeries z;
  double mean = 0.0;
  double std = 0.0;
};

// z-score over non-gap days with the population standard deviation.
inline Standardized standardize(const DailySeries& raw) {
  auto ms = mean_std(raw.values);
  if (ms.count < 2)
    throw AnalysisError(fmt::format("standardization needs at least 2 non-gap days, got {}", ms.count));
  if (ms.std == 0.0 || ms.std < 1e-13 * std::abs(ms.mean)) throw AnalysisError("constant series");
  Standardized out{DailySeries(raw.start, raw.values), ms.mean, ms.std};
  for (double& v : out.z.values)
    if (!is_gap(v)) v = (v - ms.mean) / ms.std;
  return out;
}

struct MomentSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;
  double skewness = std::numeric_limits<double>::quiet_NaN();
  double excess_kurtosis = std::numeric_limits<double>::quiet_NaN();
  bool normal = false;  // |skewness| < 0.5 and |excess kurtosis| < 1
};

inline MomentSummary moments(std::span<const double> v) {
  MomentSummary m;
  m.count = v.size();
  if (v.empty()) return m;
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  m.mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : v) {
    double d = x - m.mean;
    double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m.std = std::sqrt(m2);
  if (m2 > 0.0) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    m.normal = std::abs(m.skewness) < 0.5 && std::abs(m.excess_kurtosis) < 1.0;
  }
  return m;
}

struct DailyDifferences {
  std::vector<Date> dates;  // day t of each difference Z(t) - Z(t-1)
  std::vector<double> values;
  MomentSummary summary;
};

inline DailyDifferences daily_differences(const DailySeries& z) {
  if (z.size() < 3) throw AnalysisError("daily differences need a series of at least 3 days");
  DailyDifferences out;
  for (std::size_t t = 1; t < z.size(); ++t) {
    if (z.is_gap(t) || z.is_gap(t - 1)) continue;
    out.dates.push_back(z.date_at(t));
    out.values.push_back(z.values[t] - z.values[t - 1]);
  }
  if (out.values.size() < 2)
    throw AnalysisError(fmt::format("need at least 2 consecutive valid day pairs, got {}", out.values.size()));
  out.summary = moments(out.values);
  return out;
}

// One emotion carried through aggregation, normalization and standardization.
struct EmotionSeries {
  std::string emotion;
  std::vector<std::uint64_t> raw;  // X^k(t)
  DailySeries normalized;          // Z_raw^k(t)
  DailySeries standardized;        // Z^k(t)
  double mean_raw = 0.0;
  double std_raw = 0.0;

  Date start() const { return normalized.start; }
  std::size_t size() const { return raw.size(); }
};

inline EmotionSeries build_emotion_series(const CountMatrix& counts, const EmotionDictionary& dict,
                                          std::string_view emotion) {
  EmotionSeries s;
  s.emotion = std::string(emotion);
  s.raw = aggregate_emotion(counts, dict, emotion);
  s.normalized = normalize(counts.start, s.raw, counts.totals);
  auto st = standardize(s.normalized);
  s.standardized = std::move(st.z);
  s.mean_raw = st.mean;
  s.std_raw = st.std;
  return s;
}

}  // namespace emocycle
