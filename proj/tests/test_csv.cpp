#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "emocycle/csv.hpp"

using namespace emocycle;

TEST(Csv, NumbersRoundTripExactly) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.026, 1e22, 123456789.0}) EXPECT_EQ(std::stod(format_number(v)), v);
  EXPECT_EQ(format_number(kGap), "");
  EXPECT_EQ(format_number(2.0), "2");
}

TEST(Csv, QuotingRoundTrip) {
  std::ostringstream out;
  write_csv_row(out, {"a", "b"});
  write_csv_row(out, {"comma, inside", "quote \" and\nnewline"});
  std::istringstream in(out.str());
  auto t = read_csv(in);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][0], "comma, inside");
  EXPECT_EQ(t.rows[0][1], "quote \" and\nnewline");
  EXPECT_EQ(t.column("b"), 1u);
  EXPECT_FALSE(t.column("c"));
}

TEST(Csv, RaggedRowRejected) {
  std::istringstream in("a,b\n1,2\n3\n");
  EXPECT_THROW(read_csv(in), ValidationError);
  std::istringstream open("a\n\"x\n");
  EXPECT_THROW(read_csv(open), ValidationError);
}

TEST(Csv, SeriesRoundTripWithGaps) {
  DailySeries s(make_date(2012, 2, 27), {1.5, kGap, 1.0 / 7.0, -3.0});
  std::stringstream io;
  write_series(io, s);
  auto back = read_series(io);
  EXPECT_EQ(back.start, s.start);
  ASSERT_EQ(back.size(), 4u);
  EXPECT_TRUE(back.is_gap(1));
  EXPECT_EQ(back.values[2], s.values[2]);
  EXPECT_EQ(back.values[3], -3.0);
}

TEST(Csv, SeriesMustBeContiguous) {
  std::istringstream in("date,value\n2010-01-01,1\n2010-01-03,2\n");
  EXPECT_THROW(read_series(in), ValidationError);
  std::istringstream bad("date,value\n2010-01-01,abc\n");
  EXPECT_THROW(read_series(bad), ValidationError);
  std::istringstream nocol("date,other\n2010-01-01,1\n");
  EXPECT_THROW(read_series(nocol), ValidationError);
}

TEST(Csv, CountMatrixRoundTrip) {
  CountMatrix m;
  m.start = make_date(2010, 5, 30);
  m.days = 3;
  m.terms = {"x", "y,z"};
  m.per_term = {{1, 0, 2}, {0, 0, 5}};
  m.totals = {3, 0, 9};
  std::stringstream io;
  write_count_matrix(io, m);
  auto back = read_count_matrix(io);
  EXPECT_EQ(back.start, m.start);
  EXPECT_EQ(back.terms, m.terms);
  EXPECT_EQ(back.per_term, m.per_term);
  EXPECT_EQ(back.totals, m.totals);
}

TEST(Csv, FitRoundTrip) {
  MemoryFit f;
  f.exponent = 0.5123;
  f.range = {2, 10};
  f.r2 = 0.97;
  f.points = 9;
  std::stringstream io;
  write_fit(io, f);
  EXPECT_EQ(io.str().substr(0, io.str().find('\n')), "exponent,lo,hi,r2,n_points");
  auto back = read_fit(io);
  EXPECT_EQ(back.exponent, f.exponent);
  EXPECT_EQ(back.range.hi, 10.0);
  EXPECT_EQ(back.points, 9u);
}

TEST(Csv, Headers) {
  auto header = [](auto&& write) {
    std::ostringstream out;
    write(out);
    return out.str().substr(0, out.str().find('\n'));
  };
  PeriodProfile p;
  p.period = 2;
  p.p = {1, 1};
  p.s = {0, 0};
  EXPECT_EQ(header([&](std::ostream& o) { write_profile(o, p); }), "phase_label,p,s,M");
  CorrelationEstimate c;
  c.cov = {1};
  c.rho = {1};
  EXPECT_EQ(header([&](std::ostream& o) { write_acf(o, c); }), "lag,cov,rho");
  EXPECT_EQ(header([&](std::ostream& o) { write_psd(o, SpectralEstimate{}); }), "freq,psd");
  EXPECT_EQ(header([&](std::ostream& o) { write_spikes(o, SpikeReport{}); }), "date,emotion,rate,duration");
  EXPECT_EQ(header([&](std::ostream& o) { write_calendar(o, {}); }),
            "month_day,emotion,mean_rate,std_rate,years,direction");
  EmotionSeries e;
  EXPECT_EQ(header([&](std::ostream& o) { write_emotion_series(o, e); }), "date,raw,normalized,standardized,gap");
}
