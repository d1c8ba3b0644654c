#include <gtest/gtest.h>

#include <cmath>

#include "emocycle/nulls.hpp"
#include "emocycle/periodicity.hpp"

using namespace emocycle;

namespace {

const std::vector<double> kWeekly{0.8, 0.9, 1.0, 1.0, 1.0, 1.1, 1.2};
const Date kStart = make_date(2006, 11, 1);
const Date kEnd = make_date(2016, 10, 31);

std::size_t ten_years() { return static_cast<std::size_t>((kEnd - kStart).count()) + 1; }

DailySeries constant(std::size_t n, double v = 1.0, Date start = kStart) {
  return DailySeries(start, std::vector<double>(n, v));
}

DailySeries weekly_fgn(double noise, std::uint64_t seed, std::size_t n) {
  SynthSpec spec;
  spec.length = n;
  spec.hurst = 0.75;
  spec.weekly = kWeekly;
  spec.noise_scale = noise;
  spec.seed = seed;
  return synthesize(spec);
}

}  // namespace

TEST(CyclePeriodicities, AnalyticTwoCycles) {
  std::vector<double> y{1, 2, 2, 1};
  auto set = cycle_periodicities(y, 2);
  ASSERT_EQ(set.cycles.size(), 2u);
  EXPECT_NEAR(set.cycles[0][0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(set.cycles[0][1], 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(set.cycles[1][0], 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(set.cycles[1][1], 2.0 / 3.0, 1e-15);
}

TEST(CyclePeriodicities, ConstantSeriesAllOnes) {
  for (int L : {2, 5, 7, 30}) {
    auto set = cycle_periodicities(std::vector<double>(100, 3.5), L);
    for (const auto& c : set.cycles)
      for (double v : c) EXPECT_DOUBLE_EQ(v, 1.0);
  }
}

TEST(CyclePeriodicities, EachCycleAveragesToOne) {
  auto y = weekly_fgn(0.1, 3, 700);
  auto set = cycle_periodicities(y, PhaseAnchor::Weekday);
  for (const auto& c : set.cycles) {
    double s = 0.0;
    for (double v : c) s += v;
    EXPECT_NEAR(s / 7.0, 1.0, 1e-10);
  }
}

TEST(CyclePeriodicities, TenYearsWeeklyKeeps520) {
  auto y = constant(ten_years());
  auto ex = default_weekly_exclusions();
  auto set = cycle_periodicities(y, PhaseAnchor::Weekday, 7, ex);
  EXPECT_EQ(set.cycles.size(), 520u);
  EXPECT_EQ(set.candidates, 521u);
  EXPECT_EQ(set.dropped_excluded, 1u);
  EXPECT_EQ(weekly_profile(y, ex).cycles, 520u);
}

TEST(CyclePeriodicities, IncompleteTailDropped) {
  auto set = cycle_periodicities(std::vector<double>(20, 1.0), 7);
  EXPECT_EQ(set.cycles.size(), 2u);
}

TEST(CyclePeriodicities, ZeroSumCycleDroppedWithWarning) {
  std::vector<double> y{0, 0, 1, 2, 3, 4};
  auto set = cycle_periodicities(y, 2);
  EXPECT_EQ(set.cycles.size(), 2u);
  EXPECT_EQ(set.dropped_zero_sum, 1u);
  EXPECT_FALSE(set.warnings.empty());
}

TEST(CyclePeriodicities, NoCompleteCycleIsError) {
  EXPECT_THROW(cycle_periodicities(std::vector<double>(5, 1.0), 7), AnalysisError);
}

TEST(CyclePeriodicities, GapDropsItsCycle) {
  std::vector<double> y{1, 2, kGap, 1, 3, 3};
  auto set = cycle_periodicities(y, 2);
  EXPECT_EQ(set.cycles.size(), 2u);
}

TEST(Profile, AnalyticMeanAndDeviation) {
  auto prof = profile(std::vector<std::vector<double>>{{2.0 / 3.0, 4.0 / 3.0}, {4.0 / 3.0, 2.0 / 3.0}});
  EXPECT_NEAR(prof.p[0], 1.0, 1e-15);
  EXPECT_NEAR(prof.p[1], 1.0, 1e-15);
  EXPECT_NEAR(prof.s[0], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(prof.s[1], std::sqrt(10.0 / 9.0 - 1.0), 1e-12);
  EXPECT_EQ(prof.cycles, 2u);
}

TEST(Profile, IdenticalCyclesZeroDeviation) {
  std::vector<std::vector<double>> cycles(9, {0.5, 1.5, 1.0});
  auto prof = profile(cycles);
  for (double s : prof.s) EXPECT_EQ(s, 0.0);
  EXPECT_DOUBLE_EQ(prof.p[1], 1.5);
}

TEST(Profile, NoisyRecoveryOver200Cycles) {
  auto y = weekly_fgn(0.1, 12, 7 * 200);
  auto prof = weekly_profile(y, {});
  EXPECT_EQ(prof.cycles, 200u);
  for (int l = 0; l < 7; ++l) EXPECT_NEAR(prof.p[l], kWeekly[l], 0.03) << prof.labels[l];
}

TEST(Profile, WeekdayLabelsMondayFirst) {
  auto prof = weekly_profile(constant(70), {});
  EXPECT_EQ(prof.labels.front(), "Mon");
  EXPECT_EQ(prof.labels.back(), "Sun");
}

TEST(Profile, NoiselessInjectionRecoveredExactly) {
  SynthSpec spec;
  spec.length = 7 * 60 + 3;
  spec.weekly = kWeekly;
  spec.noise_scale = 0.0;
  auto y = inject(std::vector<double>(spec.length, 0.0), spec);
  auto prof = weekly_profile(y, {});
  for (int l = 0; l < 7; ++l) {
    EXPECT_NEAR(prof.p[l], kWeekly[l], 1e-12);
    EXPECT_NEAR(prof.s[l], 0.0, 1e-7);
  }
}

TEST(Profile, PositiveAndNonNegativeDeviation) {
  auto prof = weekly_profile(weekly_fgn(0.2, 5, 7 * 50), {});
  for (int l = 0; l < 7; ++l) {
    EXPECT_GT(prof.p[l], 0.0);
    EXPECT_GE(prof.s[l], 0.0);
  }
}

TEST(Profile, JackknifeStability) {
  auto y = weekly_fgn(0.1, 21, 7 * 150);
  auto set = cycle_periodicities(y, PhaseAnchor::Weekday);
  auto full = profile(set);
  const double M = static_cast<double>(set.cycles.size());
  double worst = 0.0;
  for (std::size_t drop = 0; drop < set.cycles.size(); drop += 10) {
    auto less = set;
    less.cycles.erase(less.cycles.begin() + static_cast<long>(drop));
    auto p = profile(less);
    for (int l = 0; l < 7; ++l) worst = std::max(worst, std::abs(p.p[l] - full.p[l]));
  }
  // removing one of M cycles moves a mean by |p^m - p| / (M - 1)
  EXPECT_LT(worst, 1.0 / (M - 1.0));
  EXPECT_GT(worst, 0.0);
}

TEST(RemoveCycle, PureCycleBecomesConstant) {
  DailySeries y(Date{}, {1, 2, 1, 2});
  auto prof = profile(std::vector<std::vector<double>>{{2.0 / 3.0, 4.0 / 3.0}});
  auto out = remove_cycle(y, prof);
  for (double v : out.values) EXPECT_NEAR(v, 1.5, 1e-15);
}

TEST(RemoveCycle, UnitProfileIsIdentity) {
  auto y = weekly_fgn(0.1, 2, 100);
  PeriodProfile prof;
  prof.period = 7;
  prof.anchor = PhaseAnchor::Weekday;
  prof.p.assign(7, 1.0);
  EXPECT_EQ(remove_cycle(y, prof).values, y.values);
}

TEST(RemoveCycle, ZeroPhaseIsError) {
  PeriodProfile prof;
  prof.period = 2;
  prof.p = {0.0, 2.0};
  EXPECT_THROW(remove_cycle(DailySeries(Date{}, {1, 1}), prof), AnalysisError);
}

TEST(RemoveCycle, ReestimatedProfileIsFlat) {
  auto y = weekly_fgn(0.1, 33, 7 * 520);
  auto removed = remove_cycle(y, weekly_profile(y, {}));
  auto again = weekly_profile(removed, {});
  for (int l = 0; l < 7; ++l) EXPECT_NEAR(again.p[l], 1.0, 0.02);
}

TEST(RemoveCycle, ExcludedDaysStillDivided) {
  auto y = weekly_fgn(0.0, 1, ten_years());
  auto ex = default_weekly_exclusions();
  auto out = remove_cycle(y, weekly_profile(y, ex));
  auto i = static_cast<std::size_t>((make_date(2011, 3, 11) - kStart).count());
  EXPECT_NEAR(out.values[i], 1.0, 1e-9);
}

TEST(Yearly, NineCyclesFromTenYears) {
  auto y = constant(ten_years(), 2.0);
  auto yp = yearly_profiles(y);
  EXPECT_EQ(yp.daily.cycles, 9u);
  EXPECT_EQ(yp.monthly.cycles, 9u);
  EXPECT_EQ(yp.daily.p.size(), 365u);
  EXPECT_EQ(yp.monthly.p.size(), 12u);
  for (double p : yp.daily.p) EXPECT_NEAR(p, 1.0, 1e-12);
  for (double p : yp.monthly.p) EXPECT_NEAR(p, 1.0, 1e-12);
  EXPECT_EQ(yp.monthly.labels.front(), "Jan");
}

TEST(Yearly, ElevatedJulyRecovered) {
  auto y = constant(ten_years());
  for (std::size_t i = 0; i < y.size(); ++i)
    if (month_index(y.date_at(i)) == 6) y.values[i] = 1.2;
  auto yp = yearly_profiles(y);
  const double expect = 1.2 * 12.0 / 12.2;
  EXPECT_NEAR(yp.monthly.p[6], expect, 1e-12);
  EXPECT_NEAR(yp.monthly.p[5], 12.0 / 12.2, 1e-12);
  // daily scale: 31 July days at 1.2 out of 365
  const double norm = 365.0 / (365.0 + 31 * 0.2);
  EXPECT_NEAR(yp.daily.p[day_of_year_noleap(make_date(2009, 7, 15))], 1.2 * norm, 1e-12);
}

TEST(Yearly, MonthlyUsesMeansNotSums) {
  // a constant series must give a flat monthly profile despite 28..31-day months
  auto yp = yearly_profiles(constant(ten_years(), 0.3), {});
  for (double p : yp.monthly.p) EXPECT_NEAR(p, 1.0, 1e-12);
}

TEST(Yearly, LeapDayTakesFebruary28Factor) {
  auto y = constant(ten_years());
  for (std::size_t i = 0; i < y.size(); ++i) {
    auto d = y.date_at(i);
    if (month_index(d) == 1 && static_cast<unsigned>(ymd_of(d).day()) >= 28) y.values[i] = 2.0;
  }
  auto yp = yearly_profiles(y);
  auto out = remove_cycle(y, yp.daily);
  auto leap = static_cast<std::size_t>((make_date(2012, 2, 29) - kStart).count());
  auto feb28 = leap - 1;
  EXPECT_NEAR(out.values[leap], out.values[feb28], 1e-12);
}

TEST(Yearly, TooShortIsError) {
  EXPECT_THROW(yearly_profiles(constant(300)), AnalysisError);
}
