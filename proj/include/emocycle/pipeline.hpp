#pragma once

#include <optional>
#include <string>
#include <vector>

#include "emocycle/events.hpp"
#include "emocycle/memory.hpp"
#include "emocycle/periodicity.hpp"
#include "emocycle/series.hpp"
#include "emocycle/signal.hpp"

namespace emocycle {

struct AnalysisSettings {
  std::vector<DateWindow> weekly_exclusions = default_weekly_exclusions();
  std::vector<DateWindow> yearly_exclusions = default_yearly_exclusions();
  bool weekly_first = true;
  std::size_t min_yearly_cycles = 3;  // below this the yearly profile is reported but not removed
  std::size_t spike_window = 7;
  SpikeOptions spikes;
  CalendarOptions calendar{110.0, 90.0, 15.0, 3, default_yearly_exclusions()};
  YearlyAcfOptions yearly_acf;
  std::size_t acf_max_lag = 365;
  CovEstimator estimator = CovEstimator::Biased;
  AcfFitOptions acf_fit;
  WelchOptions welch;
  FitRange psd_range = kDefaultPsdRange;
};

struct CycleAnalysis {
  PeriodProfile weekly;
  std::optional<YearlyProfiles> yearly;
  bool yearly_removed = false;
  DailySeries removed;           // weekly and daily-scale yearly cycles divided out
  DailySeries calendar_input;    // weekly and monthly-scale yearly cycles divided out
  std::vector<std::string> notes;
};

// Estimates the weekly and yearly profiles of a positive series and divides
// them out in the configured order.
inline CycleAnalysis analyze_cycles(const DailySeries& y, const AnalysisSettings& settings = {}) {
  CycleAnalysis out;
  out.weekly = weekly_profile(y, settings.weekly_exclusions);
  try {
    out.yearly = yearly_profiles(y, settings.yearly_exclusions);
  } catch (const AnalysisError& e) {
    out.notes.push_back(fmt::format("yearly profiles skipped: {}", e.what()));
  }
  if (out.yearly && std::min(out.yearly->daily.cycles, out.yearly->monthly.cycles) < settings.min_yearly_cycles) {
    out.notes.push_back(fmt::format("yearly profiles use {} cycles (< {}); not removed",
                                    std::min(out.yearly->daily.cycles, out.yearly->monthly.cycles),
                                    settings.min_yearly_cycles));
  } else if (out.yearly) {
    out.yearly_removed = true;
  }
  auto chain = [&](const PeriodProfile* yearly) {
    if (!yearly) return remove_cycle(y, out.weekly);
    if (settings.weekly_first) return remove_cycle(remove_cycle(y, out.weekly), *yearly);
    return remove_cycle(remove_cycle(y, *yearly), out.weekly);
  };
  out.removed = chain(out.yearly_removed ? &out.yearly->daily : nullptr);
  out.calendar_input = chain(out.yearly_removed ? &out.yearly->monthly : nullptr);
  return out;
}

struct MemoryAnalysis {
  DailySeries z;  // standardized input
  CorrelationEstimate acf;
  std::optional<YearlyAcf> yearly;
  SpectralEstimate welch;
  MemoryFit alpha;
  MemoryFit beta;
  std::vector<std::string> notes;
};

// ACF, Welch PSD and both exponents of a (cycle-removed) series.
inline MemoryAnalysis analyze_memory(const DailySeries& y, const AnalysisSettings& settings = {}) {
  MemoryAnalysis out;
  out.z = standardize(y).z;
  const std::size_t lag = std::min(settings.acf_max_lag, out.z.size() - 1);
  out.acf = autocovariance(out.z.span(), lag, settings.estimator);
  out.alpha = fit_acf_exponent(out.acf, settings.acf_fit);
  if (out.z.size() >= settings.yearly_acf.segment) {
    try {
      out.yearly = yearly_acf(out.z, settings.yearly_acf);
    } catch (const AnalysisError& e) {
      out.notes.push_back(fmt::format("yearly ACF skipped: {}", e.what()));
    }
  }
  auto samples = drop_leap_days(out.z);
  out.welch = psd_welch(samples, settings.welch);
  out.beta = fit_psd_exponent(out.welch, settings.psd_range);
  return out;
}

struct EmotionAnalysis {
  std::string emotion;
  CycleAnalysis cycles;
  RateSeries rates;
  SpikeReport spikes;
  std::optional<CalendarDateReport> calendar;
  std::optional<MemoryAnalysis> memory;  // empty when an exponent fit failed
  std::vector<std::string> notes;
};

// cycles -> remove-cycles -> spikes/calendar -> acf/psd/fit on one positive
// daily series (normally Z_raw of one emotion).
inline EmotionAnalysis analyze_emotion(const DailySeries& y, std::string_view emotion,
                                       const AnalysisSettings& settings = {}) {
  EmotionAnalysis out;
  out.emotion = std::string(emotion);
  out.cycles = analyze_cycles(y, settings);
  out.notes = out.cycles.notes;
  out.rates = spike_rates(out.cycles.removed, settings.spike_window);
  out.spikes = detect_spikes(out.rates, emotion, settings.spikes);
  try {
    out.calendar = calendar_report(out.cycles.calendar_input, emotion, settings.calendar);
  } catch (const AnalysisError& e) {
    out.notes.push_back(fmt::format("calendar report skipped: {}", e.what()));
  }
  try {
    out.memory = analyze_memory(out.cycles.removed, settings);
    out.notes.insert(out.notes.end(), out.memory->notes.begin(), out.memory->notes.end());
  } catch (const AnalysisError& e) {
    out.notes.push_back(fmt::format("memory analysis skipped: {}", e.what()));
  }
  return out;
}

}  // namespace emocycle
