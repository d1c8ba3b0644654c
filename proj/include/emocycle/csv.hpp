#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "emocycle/corpus.hpp"
#include "emocycle/error.hpp"
#include "emocycle/events.hpp"
#include "emocycle/memory.hpp"
#include "emocycle/pca.hpp"
#include "emocycle/periodicity.hpp"
#include "emocycle/series.hpp"
#include "emocycle/signal.hpp"

namespace emocycle {

// Shortest round-trip text for a double; gaps are written as empty fields.
inline std::string format_number(double v) {
  if (is_gap(v)) return {};
  return fmt::format("{}", v);
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_field(fields[i]);
  }
  out << '\n';
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
};

// RFC 4180 style: quoted fields may hold commas, doubled quotes and newlines.
inline CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  std::size_t line = 1;
  auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    if (table.header.empty())
      table.header = std::move(row);
    else if (!(row.size() == 1 && row[0].empty()))
      table.rows.push_back(std::move(row));
    row.clear();
    any = false;
  };
  char c;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    any = true;
    switch (c) {
      case '"': quoted = true; break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        break;
      case '\r': break;
      case '\n':
        ++line;
        end_row();
        break;
      default: field.push_back(c);
    }
  }
  if (quoted) throw ValidationError(fmt::format("CSV: unterminated quoted field at line {}", line));
  if (any || !field.empty() || !row.empty()) end_row();
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    if (table.rows[r].size() != table.header.size())
      throw ValidationError(fmt::format("CSV row {} has {} fields, header has {}", r + 2, table.rows[r].size(),
                                        table.header.size()));
  return table;
}

inline double parse_number(const std::string& s, std::string_view what) {
  if (s.empty() || s == "nan") return kGap;
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(fmt::format("{}: '{}' is not a number", what, s));
  }
}

// Reads `column` of a dated CSV into a contiguous daily series. A `gap`
// column, if present, marks gaps explicitly.
inline DailySeries series_from_table(const CsvTable& table, std::string_view column = "value") {
  auto dc = table.column("date");
  auto vc = table.column(column);
  if (!dc) throw ValidationError("series CSV has no 'date' column");
  if (!vc) throw ValidationError(fmt::format("series CSV has no '{}' column", column));
  auto gc = table.column("gap");
  if (table.rows.empty()) throw ValidationError("series CSV has no rows");
  DailySeries s(parse_date(table.rows.front()[*dc]), {});
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    Date d = parse_date(row[*dc]);
    if (d != s.date_at(r))
      throw ValidationError(fmt::format("series CSV row {}: expected {} but found {}", r + 2,
                                        format_date(s.date_at(r)), row[*dc]));
    bool gap = gc && (row[*gc] == "1" || row[*gc] == "true");
    s.values.push_back(gap ? kGap : parse_number(row[*vc], fmt::format("row {} {}", r + 2, column)));
  }
  return s;
}

inline DailySeries read_series(std::istream& in, std::string_view column = "value") {
  return series_from_table(read_csv(in), column);
}

inline void write_series(std::ostream& out, const DailySeries& s) {
  out << "date,value,gap\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    out << format_date(s.date_at(i)) << ',' << format_number(s.values[i]) << ',' << (s.is_gap(i) ? 1 : 0) << '\n';
}

inline void write_emotion_series(std::ostream& out, const EmotionSeries& e) {
  out << "date,raw,normalized,standardized,gap\n";
  for (std::size_t i = 0; i < e.size(); ++i)
    out << format_date(e.normalized.date_at(i)) << ',' << e.raw[i] << ',' << format_number(e.normalized.values[i])
        << ',' << format_number(e.standardized.values[i]) << ',' << (e.normalized.is_gap(i) ? 1 : 0) << '\n';
}

inline void write_count_matrix(std::ostream& out, const CountMatrix& m) {
  std::vector<std::string> header{"date"};
  header.insert(header.end(), m.terms.begin(), m.terms.end());
  header.push_back("__total__");
  write_csv_row(out, header);
  for (std::size_t t = 0; t < m.days; ++t) {
    out << format_date(m.date_at(t));
    for (const auto& s : m.per_term) out << ',' << s[t];
    out << ',' << m.totals[t] << '\n';
  }
}

inline CountMatrix read_count_matrix(std::istream& in) {
  auto table = read_csv(in);
  if (table.header.size() < 2 || table.header.front() != "date" || table.header.back() != "__total__")
    throw ValidationError("count matrix CSV must start with 'date' and end with '__total__'");
  CountMatrix m;
  m.terms.assign(table.header.begin() + 1, table.header.end() - 1);
  m.per_term.assign(m.terms.size(), {});
  m.days = table.rows.size();
  if (m.days) m.start = parse_date(table.rows.front()[0]);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (parse_date(row[0]) != m.date_at(r))
      throw ValidationError(fmt::format("count matrix row {} breaks the contiguous calendar", r + 2));
    auto count = [&](const std::string& s) {
      try {
        std::size_t used = 0;
        auto v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return static_cast<std::uint64_t>(v);
      } catch (const std::exception&) {
        throw ValidationError(fmt::format("count matrix row {}: '{}' is not a count", r + 2, s));
      }
    };
    for (std::size_t i = 0; i < m.terms.size(); ++i) m.per_term[i].push_back(count(row[i + 1]));
    m.totals.push_back(count(row.back()));
  }
  return m;
}

inline void write_profile(std::ostream& out, const PeriodProfile& p) {
  out << "phase_label,p,s,M\n";
  for (std::size_t l = 0; l < p.p.size(); ++l)
    write_csv_row(out, {p.labels.empty() ? std::to_string(l) : p.labels[l], format_number(p.p[l]),
                        format_number(p.s[l]), std::to_string(p.cycles)});
}

inline void write_rates(std::ostream& out, const RateSeries& r) {
  out << "date,value,baseline,rate\n";
  for (std::size_t i = 0; i < r.values.size(); ++i)
    out << format_date(r.values.date_at(i)) << ',' << format_number(r.values.values[i]) << ','
        << format_number(r.baseline[i]) << ',' << format_number(r.rate.values[i]) << '\n';
}

inline void write_spikes(std::ostream& out, const SpikeReport& report) {
  out << "date,emotion,rate,duration\n";
  for (const auto& s : report.entries)
    write_csv_row(out, {format_date(s.date), s.emotion, format_number(s.rate), std::to_string(s.duration)});
}

inline void write_calendar(std::ostream& out, const std::vector<CalendarEntry>& entries) {
  out << "month_day,emotion,mean_rate,std_rate,years,direction\n";
  for (const auto& e : entries)
    write_csv_row(out, {fmt::format("{:02d}-{:02d}", e.month, e.day), e.emotion, format_number(e.mean_rate),
                        format_number(e.std_rate), std::to_string(e.years), std::string(to_string(e.direction))});
}

inline void write_acf(std::ostream& out, const CorrelationEstimate& c) {
  out << "lag,cov,rho\n";
  for (std::size_t t = 0; t < c.cov.size(); ++t)
    out << t << ',' << format_number(c.cov[t]) << ',' << format_number(c.rho[t]) << '\n';
}

inline void write_psd(std::ostream& out, const SpectralEstimate& s) {
  out << "freq,psd\n";
  for (std::size_t j = 0; j < s.freq.size(); ++j) out << format_number(s.freq[j]) << ',' << format_number(s.psd[j]) << '\n';
}

inline void write_fit(std::ostream& out, const MemoryFit& f) {
  out << "exponent,lo,hi,r2,n_points\n";
  out << format_number(f.exponent) << ',' << format_number(f.range.lo) << ',' << format_number(f.range.hi) << ','
      << format_number(f.r2) << ',' << f.points << '\n';
}

inline MemoryFit read_fit(std::istream& in) {
  auto table = read_csv(in);
  if (table.header != std::vector<std::string>{"exponent", "lo", "hi", "r2", "n_points"} || table.rows.size() != 1)
    throw ValidationError("fit CSV must have header exponent,lo,hi,r2,n_points and one row");
  const auto& r = table.rows[0];
  MemoryFit f;
  f.exponent = parse_number(r[0], "exponent");
  f.range = {parse_number(r[1], "lo"), parse_number(r[2], "hi")};
  f.r2 = parse_number(r[3], "r2");
  f.points = static_cast<std::size_t>(std::stoull(r[4]));
  return f;
}

inline void write_stationarity(std::ostream& out, const YearlyAcf& y) {
  out << "segment_start,pass,mean_difference,pooled_std,variance_ratio,reason\n";
  for (std::size_t i = 0; i < y.diagnostics.size(); ++i) {
    const auto& d = y.diagnostics[i];
    write_csv_row(out, {format_date(y.segment_starts[i]), d.pass ? "1" : "0", format_number(d.mean_difference),
                        format_number(d.pooled_std), format_number(d.variance_ratio), d.reason});
  }
}

inline std::vector<std::string> component_names(Eigen::Index k) {
  std::vector<std::string> out;
  for (Eigen::Index j = 0; j < k; ++j) out.push_back(fmt::format("pc{}", j + 1));
  return out;
}

inline void write_eigenvectors(std::ostream& out, const PcaResult& r, const std::vector<std::string>& names) {
  std::vector<std::string> header{"emotion"};
  auto pcs = component_names(r.eigenvectors.cols());
  header.insert(header.end(), pcs.begin(), pcs.end());
  write_csv_row(out, header);
  for (Eigen::Index i = 0; i < r.eigenvectors.rows(); ++i) {
    std::vector<std::string> row{names.at(static_cast<std::size_t>(i))};
    for (Eigen::Index j = 0; j < r.eigenvectors.cols(); ++j) row.push_back(format_number(r.eigenvectors(i, j)));
    write_csv_row(out, row);
  }
}

inline void write_scores(std::ostream& out, const PcaResult& r, const std::vector<Date>& block_starts) {
  std::vector<std::string> header{"block_start"};
  auto pcs = component_names(r.scores.cols());
  header.insert(header.end(), pcs.begin(), pcs.end());
  write_csv_row(out, header);
  for (Eigen::Index i = 0; i < r.scores.rows(); ++i) {
    std::vector<std::string> row{format_date(block_starts.at(static_cast<std::size_t>(i)))};
    for (Eigen::Index j = 0; j < r.scores.cols(); ++j) row.push_back(format_number(r.scores(i, j)));
    write_csv_row(out, row);
  }
}

inline void write_contribution(std::ostream& out, const PcaResult& r) {
  out << "component,eigenvalue,contribution,cumulative\n";
  for (Eigen::Index j = 0; j < r.eigenvalues.size(); ++j)
    out << "pc" << j + 1 << ',' << format_number(r.eigenvalues(j)) << ',' << format_number(r.contribution(j)) << ','
        << format_number(r.cumulative(j)) << '\n';
}

inline void write_latent(std::ostream& out, const LatentRecord& rec) {
  std::vector<std::string> header{"date"};
  for (const auto& e : rec.emotions) {
    header.push_back(e + ":intensity");
    header.push_back(e + ":probability");
  }
  write_csv_row(out, header);
  const std::size_t days = rec.intensity.empty() ? 0 : rec.intensity.front().size();
  for (std::size_t t = 0; t < days; ++t) {
    out << format_date(rec.start + std::chrono::days{static_cast<long>(t)});
    for (std::size_t k = 0; k < rec.emotions.size(); ++k)
      out << ',' << format_number(rec.intensity[k][t]) << ',' << format_number(rec.probability[k][t]);
    out << '\n';
  }
}

}  // namespace emocycle
