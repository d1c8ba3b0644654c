#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <fftw3.h>
#include <fmt/format.h>
#include <json.hpp>
#include <unicode/uversion.h>

#include "emocycle/config.hpp"
#include "emocycle/corpus.hpp"
#include "emocycle/csv.hpp"
#include "emocycle/dictionary.hpp"
#include "emocycle/error.hpp"
#include "emocycle/nulls.hpp"
#include "emocycle/pca.hpp"
#include "emocycle/pipeline.hpp"
#include "emocycle/signal.hpp"

namespace emocycle::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutEnv = "EMOCYCLE_OUT";

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {
      "ingest", "extract", "cycles", "remove-cycles", "spikes",       "calendar",     "acf",
      "psd",    "fit",     "shuffle", "synth-corpus", "synth-series", "pca",          "pipeline"};
  return names;
}

inline std::string usage() {
  std::string s =
      "usage: emocycle <command> [--config FILE] [--seed N] [--out DIR] [--strict] [options]\n"
      "       emocycle --from-manifest FILE [--out DIR]\n\ncommands:\n";
  const std::map<std::string, std::string> help = {
      {"ingest", "validate a JSON-lines corpus and report malformed records"},
      {"extract", "count dictionary terms and build the six emotion series"},
      {"cycles", "weekly, monthly-scale and daily-scale periodicity profiles"},
      {"remove-cycles", "divide the weekly and yearly profiles out of a series"},
      {"spikes", "rates against the trailing 7-day mean and spike durations"},
      {"calendar", "dates systematically above or below the temporal average"},
      {"acf", "autocovariance, autocorrelation and stationary yearly ACF"},
      {"psd", "Welch and Wiener-Khinchin power spectra"},
      {"fit", "power-law exponents of the ACF (alpha) and PSD (beta)"},
      {"shuffle", "daily/weekly/monthly surrogates and their averaged ACF"},
      {"synth-corpus", "synthetic corpus driven by latent emotion intensities"},
      {"synth-series", "synthetic fGn series with injected cycles and spikes"},
      {"pca", "six-month PCA of emotion series and trajectory smoothness"},
      {"pipeline", "extract -> cycles -> remove-cycles -> spikes/calendar -> acf/psd/fit -> pca"},
  };
  for (const auto& name : subcommands()) s += fmt::format("  {:<14}{}\n", name, help.at(name));
  s += fmt::format("\nThe output directory defaults to ${} when --out and output.dir are unset.\n", kOutEnv);
  return s;
}

inline nlohmann::ordered_json library_versions() {
  nlohmann::ordered_json v;
  v["emocycle"] = kVersion;
  v["eigen"] = fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
  v["fftw"] = std::string(fftw_version);
  v["icu"] = U_ICU_VERSION;
  v["boost"] = BOOST_LIB_VERSION;
  v["fmt"] = FMT_VERSION;
  return v;
}

// State of one stage run: resolved configuration, output sink and the
// provenance collected for the manifest.
class Stage {
 public:
  Stage(std::string name, Config config, std::filesystem::path out_dir, std::ostream& out, std::ostream& err)
      : name_(std::move(name)), config_(std::move(config)), out_dir_(std::move(out_dir)), out_(out), err_(err) {}

  const std::string& name() const { return name_; }
  const Config& config() const { return config_; }
  std::uint64_t seed() const { return config_.unsigned_integer("run.seed"); }
  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }

  void note(std::string_view prefix, const std::vector<std::string>& notes) {
    for (const auto& n : notes) err_ << "note: " << (prefix.empty() ? "" : std::string(prefix) + ": ") << n << '\n';
  }

  void record_input(const std::filesystem::path& p) { inputs_[p.string()] = sha256_file(p); }

  template <class Fn>
  void write(const std::filesystem::path& relative, Fn&& fn) {
    auto path = out_dir_ / relative;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    fn(f);
    f.close();
    if (!f) throw std::runtime_error(fmt::format("failed writing '{}'", path.string()));
    outputs_.insert(relative.generic_string());
  }

  void write_manifest(const std::vector<std::string>& arguments) {
    nlohmann::ordered_json m;
    m["tool"] = "emocycle";
    m["stage"] = name_;
    m["seed"] = seed();
    m["config_sha256"] = config_.hash();
    m["config"] = config_.serialize();
    m["arguments"] = arguments;
    m["inputs"] = nlohmann::ordered_json::array();
    for (const auto& [p, h] : inputs_) m["inputs"].push_back({{"path", p}, {"sha256", h}});
    m["outputs"] = std::vector<std::string>(outputs_.begin(), outputs_.end());
    m["versions"] = library_versions();
    std::filesystem::create_directories(out_dir_);
    std::ofstream f(out_dir_ / manifest_name(name_), std::ios::binary);
    f << m.dump(2) << '\n';
    if (!f) throw std::runtime_error("cannot write manifest");
  }

  static std::string manifest_name(std::string_view stage) { return fmt::format("{}.manifest.json", stage); }

 private:
  std::string name_;
  Config config_;
  std::filesystem::path out_dir_;
  std::ostream& out_;
  std::ostream& err_;
  std::map<std::string, std::string> inputs_;
  std::set<std::string> outputs_;
};

namespace detail {

inline std::filesystem::path require_path(Stage& st, const std::string& key, std::string_view what,
                                          std::string_view flag) {
  auto v = st.config().get(key);
  if (v.empty()) throw ValidationError(fmt::format("no {} given (use {} or set {})", what, flag, key));
  std::filesystem::path p(v);
  if (!std::filesystem::is_regular_file(p)) throw ValidationError(fmt::format("{} '{}' does not exist", what, p.string()));
  st.record_input(p);
  return p;
}

inline EmotionDictionary read_dictionary(Stage& st) {
  auto p = require_path(st, "input.dictionary", "dictionary", "--dictionary");
  std::ifstream in(p);
  return load_dictionary(in);
}

inline std::vector<Document> read_corpus(Stage& st) {
  auto p = require_path(st, "input.corpus", "corpus", "--corpus");
  std::ifstream in(p);
  auto result = ingest(in, st.config().flag("run.strict"));
  for (const auto& r : result.report.rejects)
    st.err() << fmt::format("warning: {}:{}: {}\n", p.filename().string(), r.line, r.reason);
  return std::move(result.documents);
}

inline MatchMode match_mode(const Config& c) {
  auto m = c.get("run.match");
  if (m == "substring") return MatchMode::Substring;
  if (m == "word") return MatchMode::WordBoundary;
  throw ValidationError(fmt::format("run.match must be 'substring' or 'word', got '{}'", m));
}

inline AnalysisSettings analysis_settings(const Config& c) {
  AnalysisSettings s;
  s.weekly_exclusions = c.windows("exclusions.weekly");
  s.yearly_exclusions = c.windows("exclusions.yearly");
  auto order = c.get("cycles.order");
  if (order != "weekly-first" && order != "yearly-first")
    throw ValidationError(fmt::format("cycles.order must be weekly-first or yearly-first, got '{}'", order));
  s.weekly_first = order == "weekly-first";
  s.min_yearly_cycles = c.unsigned_integer("cycles.min_yearly_cycles");
  s.spike_window = c.unsigned_integer("spikes.window");
  s.spikes = {c.number("spikes.threshold"), c.number("spikes.return_threshold")};
  s.calendar = {c.number("calendar.high"), c.number("calendar.low"), c.number("calendar.std_max"),
                c.unsigned_integer("calendar.min_years"), s.yearly_exclusions};
  s.yearly_acf.stationarity = {c.number("stationarity.mean_tolerance"), c.number("stationarity.ratio_low"),
                               c.number("stationarity.ratio_high")};
  s.acf_max_lag = c.unsigned_integer("acf.max_lag");
  auto est = c.get("acf.estimator");
  if (est != "biased" && est != "pairwise")
    throw ValidationError(fmt::format("acf.estimator must be biased or pairwise, got '{}'", est));
  s.estimator = est == "biased" ? CovEstimator::Biased : CovEstimator::Pairwise;
  s.acf_fit.range = {c.number("acf.fit_lo"), c.number("acf.fit_hi")};
  s.acf_fit.correct_mean_bias = c.flag("acf.mean_bias_correction");
  s.welch.segment = c.unsigned_integer("psd.segment");
  s.welch.overlap = c.number("psd.overlap");
  auto w = c.get("psd.window");
  if (w != "hann" && w != "rectangular")
    throw ValidationError(fmt::format("psd.window must be hann or rectangular, got '{}'", w));
  s.welch.window = w == "hann" ? Window::Hann : Window::Rectangular;
  s.psd_range = {c.number("psd.fit_lo"), c.number("psd.fit_hi")};
  for (auto r : {s.acf_fit.range, s.psd_range})
    if (!(r.lo > 0.0 && r.lo < r.hi)) throw ValidationError(fmt::format("fit range [{}, {}] is empty", r.lo, r.hi));
  return s;
}

struct NamedSeries {
  std::string name;
  DailySeries series;
};

// Series inputs: `value` column of a series CSV, or `normalized` of an
// extracted emotion series unless input.column says otherwise.
inline std::vector<NamedSeries> read_series_inputs(Stage& st) {
  auto paths = st.config().list("input.series");
  if (paths.empty()) throw ValidationError("no series given (use --input or set input.series)");
  std::vector<NamedSeries> out;
  for (const auto& s : paths) {
    std::filesystem::path p(s);
    if (!std::filesystem::is_regular_file(p)) throw ValidationError(fmt::format("series '{}' does not exist", s));
    st.record_input(p);
    std::ifstream in(p);
    auto table = read_csv(in);
    std::string column = st.config().get("input.column");
    if (column == "auto") column = table.column("value") ? "value" : "normalized";
    std::string name = p.stem().string();
    if (name.rfind("series_", 0) == 0) name = name.substr(7);
    if (paths.size() == 1 && !st.config().get("input.emotion").empty()) name = st.config().get("input.emotion");
    out.push_back({name, series_from_table(table, column)});
  }
  return out;
}

// Runs fn once per input series; with several inputs each writes into a
// subdirectory named after the series.
inline void for_each_series(Stage& st, const std::function<void(const NamedSeries&, const std::filesystem::path&)>& fn) {
  auto inputs = read_series_inputs(st);
  for (const auto& s : inputs) fn(s, inputs.size() > 1 ? std::filesystem::path(s.name) : std::filesystem::path());
}

inline void print_spike_table(std::ostream& out, const std::vector<Spike>& spikes) {
  out << fmt::format("{:<12}{:<14}{:>10}{:>10}\n", "Date", "Emotion", "Rate(%)", "Days");
  for (const auto& s : spikes)
    out << fmt::format("{:<12}{:<14}{:>10.1f}{:>10}\n", format_date(s.date), s.emotion, s.rate, s.duration);
}

inline void print_calendar_table(std::ostream& out, const std::vector<CalendarEntry>& entries) {
  out << fmt::format("{:<8}{:<14}{:>18}{:>8}{:>6}\n", "Date", "Emotion", "Rate(%)", "Dir", "Yrs");
  for (const auto& e : entries)
    out << fmt::format("{:02d}-{:02d}   {:<14}{:>18}{:>8}{:>6}\n", e.month, e.day, e.emotion,
                       fmt::format("{:.1f} +- {:.1f}", e.mean_rate, e.std_rate), to_string(e.direction), e.years);
}

inline std::vector<SpikeSpec> parse_spikes(const std::string& text) {
  std::vector<SpikeSpec> out;
  if (text.empty() || text == "none") return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = emocycle::detail::trim_copy(item);
    if (item.empty()) continue;
    SpikeSpec s{};
    char c1 = 0, c2 = 0;
    std::istringstream is(item);
    if (!(is >> s.day >> c1 >> s.multiplier >> c2 >> s.duration) || c1 != ':' || c2 != ':' || !is.eof())
      throw ValidationError(fmt::format("synth.spikes entry '{}' must be day:multiplier:duration", item));
    out.push_back(s);
  }
  return out;
}

inline SynthSpec synth_spec(const Config& c, std::uint64_t seed) {
  SynthSpec s;
  s.start = c.date("synth.start");
  s.length = c.unsigned_integer("synth.length");
  s.hurst = c.number("synth.hurst");
  s.base_level = c.number("synth.base_level");
  s.noise_scale = c.number("synth.noise_scale");
  auto weekly = c.numbers("synth.weekly");
  if (!weekly.empty()) s.weekly = weekly;
  s.spikes = parse_spikes(c.get("synth.spikes"));
  s.seed = seed;
  validate(s);
  return s;
}

inline CorpusSynthConfig corpus_config(const Config& c, const EmotionDictionary& dict) {
  CorpusSynthConfig cfg;
  cfg.start = c.date("synth_corpus.start");
  cfg.days = c.unsigned_integer("synth_corpus.days");
  cfg.docs_per_day = c.unsigned_integer("synth_corpus.docs_per_day");
  cfg.filler_tokens = c.unsigned_integer("synth_corpus.filler_tokens");
  cfg.filler_vocabulary = c.unsigned_integer("synth_corpus.filler_vocabulary");
  SynthSpec latent;
  latent.hurst = c.number("synth_corpus.hurst");
  latent.base_level = c.number("synth_corpus.intensity");
  latent.noise_scale = c.number("synth_corpus.noise_scale");
  auto weekly = c.numbers("synth_corpus.weekly");
  latent.weekly = weekly.empty() ? std::vector<double>(7, 1.0) : weekly;
  latent.start = cfg.start;
  latent.length = std::max<std::size_t>(cfg.days, 2);
  validate(latent);
  cfg.latent.assign(dict.size(), latent);
  return cfg;
}

// ---- stages -------------------------------------------------------------

inline void stage_ingest(Stage& st) {
  auto p = require_path(st, "input.corpus", "corpus", "--corpus");
  std::ifstream in(p);
  auto result = ingest(in, st.config().flag("run.strict"));
  st.write("ingest_summary.csv", [&](std::ostream& o) {
    o << "records,accepted,rejected\n"
      << result.report.records << ',' << result.report.accepted << ',' << result.report.rejects.size() << '\n';
  });
  st.write("ingest_rejects.csv", [&](std::ostream& o) {
    o << "line,reason\n";
    for (const auto& r : result.report.rejects) write_csv_row(o, {std::to_string(r.line), r.reason});
  });
  st.out() << fmt::format("{} records, {} accepted, {} rejected\n", result.report.records, result.report.accepted,
                          result.report.rejects.size());
}

struct Extracted {
  EmotionDictionary dictionary;
  CountMatrix counts;
  std::vector<EmotionSeries> series;
};

inline Extracted stage_extract(Stage& st) {
  auto dict = read_dictionary(st);
  auto docs = read_corpus(st);
  CountOptions opts{match_mode(st.config()), static_cast<unsigned>(st.config().unsigned_integer("run.threads"))};
  Extracted ex{dict, count_documents(docs, dict, opts), {}};
  if (ex.counts.empty()) throw AnalysisError("corpus has no documents");
  if (st.config().flag("filter.enabled")) {
    auto filtered = frequency_filter(dict, ex.counts.term_totals(), ex.counts.total_documents(),
                                     {st.config().number("filter.low"), st.config().number("filter.high")});
    st.write("filter_removed.csv", [&](std::ostream& o) {
      o << "emotion,term,frequency\n";
      for (const auto& r : filtered.removed) write_csv_row(o, {r.emotion, r.term, format_number(r.frequency)});
    });
    ex.dictionary = filtered.dictionary;
  }
  st.write("counts.csv", [&](std::ostream& o) { write_count_matrix(o, ex.counts); });
  auto dominance = dominance_report(ex.dictionary, ex.counts.term_totals(), st.config().number("dominance.threshold"));
  st.write("dominance.csv", [&](std::ostream& o) {
    o << "emotion,term,total,share,flagged\n";
    for (const auto& d : dominance)
      for (const auto& t : d.terms)
        write_csv_row(o, {d.emotion, t.term, std::to_string(t.total), format_number(t.share), t.flagged ? "1" : "0"});
  });
  for (const auto& d : dominance)
    for (const auto& t : d.terms)
      if (t.flagged) st.err() << fmt::format("note: '{}' carries {:.1f}% of {}\n", t.term, 100.0 * t.share, d.emotion);

  std::vector<std::vector<std::string>> moments_rows;
  for (const auto& e : ex.dictionary.emotions()) {
    auto s = build_emotion_series(ex.counts, ex.dictionary, e.name);
    st.write(fmt::format("series_{}.csv", e.name), [&](std::ostream& o) { write_emotion_series(o, s); });
    auto diff = daily_differences(s.standardized);
    const auto& m = diff.summary;
    moments_rows.push_back({e.name, std::to_string(m.count), format_number(m.mean), format_number(m.std),
                            format_number(m.skewness), format_number(m.excess_kurtosis), m.normal ? "1" : "0"});
    ex.series.push_back(std::move(s));
  }
  st.write("differences.csv", [&](std::ostream& o) {
    o << "emotion,count,mean,std,skewness,excess_kurtosis,normal\n";
    for (const auto& r : moments_rows) write_csv_row(o, r);
  });
  st.out() << fmt::format("{} documents over {} days, {} terms in {} emotions\n", ex.counts.total_documents(),
                          ex.counts.days, ex.dictionary.term_count(), ex.dictionary.size());
  return ex;
}

inline void write_cycles(Stage& st, const CycleAnalysis& c, const std::filesystem::path& dir) {
  st.write(dir / "profile_weekly.csv", [&](std::ostream& o) { write_profile(o, c.weekly); });
  if (c.yearly) {
    st.write(dir / "profile_monthly.csv", [&](std::ostream& o) { write_profile(o, c.yearly->monthly); });
    st.write(dir / "profile_daily.csv", [&](std::ostream& o) { write_profile(o, c.yearly->daily); });
  }
}

inline void stage_cycles(Stage& st) {
  auto settings = analysis_settings(st.config());
  for_each_series(st, [&](const NamedSeries& s, const std::filesystem::path& dir) {
    auto c = analyze_cycles(s.series, settings);
    st.note(s.name, c.notes);
    write_cycles(st, c, dir);
    st.out() << fmt::format("{}: weekly profile from {} cycles", s.name, c.weekly.cycles);
    if (c.yearly)
      st.out() << fmt::format(", yearly from {} (monthly) / {} (daily) cycles", c.yearly->monthly.cycles,
                              c.yearly->daily.cycles);
    st.out() << '\n';
  });
}

inline void stage_remove_cycles(Stage& st) {
  auto settings = analysis_settings(st.config());
  for_each_series(st, [&](const NamedSeries& s, const std::filesystem::path& dir) {
    auto c = analyze_cycles(s.series, settings);
    st.note(s.name, c.notes);
    st.write(dir / "removed.csv", [&](std::ostream& o) { write_series(o, c.removed); });
    st.write(dir / "removed_calendar.csv", [&](std::ostream& o) { write_series(o, c.calendar_input); });
    st.out() << fmt::format("{}: weekly{} cycle removed\n", s.name, c.yearly_removed ? " and yearly" : "");
  });
}

inline void stage_spikes(Stage& st) {
  auto settings = analysis_settings(st.config());
  std::vector<Spike> all;
  for_each_series(st, [&](const NamedSeries& s, const std::filesystem::path& dir) {
    auto rates = spike_rates(s.series, settings.spike_window);
    auto report = detect_spikes(rates, s.name, settings.spikes);
    st.write(dir / "rates.csv", [&](std::ostream& o) { write_rates(o, rates); });
    st.write(dir / "spikes.csv", [&](std::ostream& o) { write_spikes(o, report); });
    all.insert(all.end(), report.entries.begin(), report.entries.end());
  });
  std::stable_sort(all.begin(), all.end(), [](const Spike& a, const Spike& b) { return a.rate > b.rate; });
  print_spike_table(st.out(), all);
}

inline void stage_calendar(Stage& st) {
  auto settings = analysis_settings(st.config());
  std::vector<CalendarEntry> flagged;
  for_each_series(st, [&](const NamedSeries& s, const std::filesystem::path& dir) {
    auto report = calendar_report(s.series, s.name, settings.calendar);
    st.write(dir / "calendar.csv", [&](std::ostream& o) { write_calendar(o, report.entries); });
    st.write(dir / "calendar_all.csv", [&](std::ostream& o) { write_calendar(o, report.all); });
    flagged.insert(flagged.end(), report.entries.begin(), report.entries.end());
  });
  print_calendar_table(st.out(), flagged);
}

inline void stage_acf(Stage& st) {
  auto settings = analysis_settings(st.config());
  for_each_series(st, [&](const NamedSeries& s, const std::filesystem::path& dir) {
    auto z = standardize(s.series).z;
    auto acf = autocovariance(z.span(), std::min(settings.acf_max_lag, z.size() - 1), settings.estimator);
    st.write(dir / "acf.csv", [&](std::ostream& o) { write_acf(o, acf); });
    std::string yearly_note;
    if (z.size() >= settings.yearly_acf.segment) {
      try {
        auto y = yearly_acf(z, settings.yearly_acf);
        st.write(dir / "acf_yearly.csv", [&](std::ostream& o) { write_acf(o, y.averaged); });
        st.write(dir / "stationarity.csv", [&](std::ostream& o) { write_stationarity(o, y); });
        yearly_note = fmt::format(", {}/{} stationary yearly segments", y.segments_used, y.segments_total);
      } catch (const AnalysisError& e) {
        st.note(s.name, {fmt::format("yearly ACF skipped: {}", e.what())});
      }
    }
    st.out() << fmt::format("{}: ACF to lag {}{}\n", s.name, acf.max_lag(), yearly_note);
  });
}

inline void stage_psd(Stage& st) {
  auto settings = analysis_settings(st.config());
  for_each_series(st, [&](const NamedSeries& s, const std::filesystem::path& dir) {
    auto samples = drop_leap_days(standardize(s.series).z);
    auto welch = psd_welch(samples, settings.welch);
    st.write(dir / "psd_welch.csv", [&](std::ostream& o) { write_psd(o, welch); });
    auto wk = psd_wiener_khinchin(autocovariance(samples, samples.size() - 1));
    st.write(dir / "psd_wk.csv", [&](std::ostream& o) { write_psd(o, wk); });
    st.out() << fmt::format("{}: Welch PSD from {} segments, {} frequencies\n", s.name, welch.segments,
                            welch.freq.size());
  });
}

inline void stage_fit(Stage& st) {
  auto settings = analysis_settings(st.config());
  for_each_series(st, [&](const NamedSeries& s, const std::filesystem::path& dir) {
    auto m = analyze_memory(s.series, settings);
    st.note(s.name, m.notes);
    st.write(dir / "fit_acf.csv", [&](std::ostream& o) { write_fit(o, m.alpha); });
    st.write(dir / "fit_psd.csv", [&](std::ostream& o) { write_fit(o, m.beta); });
    st.out() << fmt::format("{}: alpha = {:.4f} (r2 {:.3f}, {} lags), beta = {:.4f} (r2 {:.3f}), 1 - alpha = {:.4f}\n",
                            s.name, m.alpha.exponent, m.alpha.r2, m.alpha.points, m.beta.exponent, m.beta.r2,
                            1.0 - m.alpha.exponent);
  });
}

inline void stage_shuffle(Stage& st) {
  auto settings = analysis_settings(st.config());
  SurrogateSpec spec{parse_shuffle_scheme(st.config().get("shuffle.scheme")), derive_seed(st.seed(), "shuffle"),
                     st.config().unsigned_integer("shuffle.repetitions")};
  const std::string scheme(to_string(spec.scheme));
  for_each_series(st, [&](const NamedSeries& s, const std::filesystem::path& dir) {
    const std::size_t lag = std::min(settings.acf_max_lag, s.series.size() - 1);
    auto original = autocovariance(s.series.span(), lag, settings.estimator);
    auto reps = surrogates(s.series, spec);
    auto averaged = surrogate_acf(s.series, spec, lag);
    st.write(dir / fmt::format("shuffle_{}.csv", scheme), [&](std::ostream& o) { write_series(o, reps.front()); });
    st.write(dir / "acf.csv", [&](std::ostream& o) { write_acf(o, original); });
    st.write(dir / fmt::format("acf_shuffle_{}.csv", scheme), [&](std::ostream& o) { write_acf(o, averaged); });
    st.out() << fmt::format("{}: {} shuffle x{}, correlation kept to lag {}\n", s.name, scheme, spec.repetitions,
                            preservation_horizon(original, averaged));
  });
}

inline void stage_synth_series(Stage& st) {
  auto spec = synth_spec(st.config(), derive_seed(st.seed(), "synth-series"));
  std::string warning;
  auto base = generate_fgn(spec.hurst, spec.length, derive_seed(spec.seed, "fgn"), &warning);
  if (!warning.empty()) st.err() << "warning: " << warning << '\n';
  auto series = inject(base, spec);
  st.write("synth_series.csv", [&](std::ostream& o) { write_series(o, series); });
  st.out() << fmt::format("{} days of fGn (H = {}) from {}\n", series.size(), spec.hurst, format_date(series.start));
}

inline void stage_synth_corpus(Stage& st) {
  auto dict = read_dictionary(st);
  auto cfg = corpus_config(st.config(), dict);
  std::size_t docs = 0;
  LatentRecord latent;
  st.write("corpus.jsonl", [&](std::ostream& o) {
    latent = synth_corpus_stream(cfg, dict, derive_seed(st.seed(), "synth-corpus"),
                                 [&](Date, std::span<const Document> day) {
                                   for (const auto& d : day) write_document(o, d);
                                   docs += day.size();
                                 });
  });
  st.write("latent.csv", [&](std::ostream& o) { write_latent(o, latent); });
  st.out() << fmt::format("{} documents over {} days\n", docs, cfg.days);
}

inline void run_pca(Stage& st, const std::vector<NamedSeries>& inputs) {
  std::vector<DailySeries> z;
  std::vector<std::string> names;
  for (const auto& s : inputs) {
    z.push_back(standardize(s.series).z);
    names.push_back(s.name);
  }
  auto blocks = six_month_blocks(z);
  auto r = pca_fit(blocks.values);
  st.write("pca_blocks.csv", [&](std::ostream& o) {
    std::vector<std::string> header{"block_start"};
    header.insert(header.end(), names.begin(), names.end());
    write_csv_row(o, header);
    for (Eigen::Index b = 0; b < blocks.values.rows(); ++b) {
      std::vector<std::string> row{format_date(blocks.block_starts[static_cast<std::size_t>(b)])};
      for (Eigen::Index k = 0; k < blocks.values.cols(); ++k) row.push_back(format_number(blocks.values(b, k)));
      write_csv_row(o, row);
    }
  });
  st.write("pca_eigenvectors.csv", [&](std::ostream& o) { write_eigenvectors(o, r, names); });
  st.write("pca_scores.csv", [&](std::ostream& o) { write_scores(o, r, blocks.block_starts); });
  st.write("pca_contribution.csv", [&](std::ostream& o) { write_contribution(o, r); });
  st.out() << fmt::format("PCA over {} six-month blocks: cumulative contribution", blocks.values.rows());
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(3, r.cumulative.size()); ++j)
    st.out() << fmt::format(" {:.1f}%", 100.0 * r.cumulative(j));
  st.out() << '\n';
  if (blocks.values.rows() < 3) {
    st.note("pca", {"trajectory smoothness needs at least 3 blocks; skipped"});
    return;
  }
  SurrogateSpec spec{parse_shuffle_scheme(st.config().get("pca.scheme")), derive_seed(st.seed(), "pca"),
                     st.config().unsigned_integer("pca.repetitions")};
  try {
    auto cmp = compare_smoothness(z, spec);
    st.write("pca_smoothness.csv", [&](std::ostream& o) {
      o << "series,ratio\n";
      o << "original," << format_number(cmp.original) << '\n';
      for (std::size_t i = 0; i < cmp.shuffled.size(); ++i)
        o << fmt::format("{}_{},", to_string(spec.scheme), i) << format_number(cmp.shuffled[i]) << '\n';
    });
    st.out() << fmt::format("trajectory smoothness {:.3f} vs {:.3f} for {} shuffles\n", cmp.original,
                            cmp.shuffled_mean, to_string(spec.scheme));
  } catch (const AnalysisError& e) {
    st.note("pca", {fmt::format("smoothness comparison skipped: {}", e.what())});
  }
}

inline void stage_pca(Stage& st) { run_pca(st, read_series_inputs(st)); }

inline void stage_pipeline(Stage& st) {
  auto settings = analysis_settings(st.config());
  auto ex = stage_extract(st);
  std::vector<Spike> spikes;
  std::vector<CalendarEntry> calendar;
  std::vector<std::vector<std::string>> fits;
  std::vector<NamedSeries> standardized;
  for (const auto& s : ex.series) {
    auto a = analyze_emotion(s.normalized, s.emotion, settings);
    st.note(s.emotion, a.notes);
    std::filesystem::path dir(s.emotion);
    write_cycles(st, a.cycles, dir);
    st.write(dir / "removed.csv", [&](std::ostream& o) { write_series(o, a.cycles.removed); });
    st.write(dir / "removed_calendar.csv", [&](std::ostream& o) { write_series(o, a.cycles.calendar_input); });
    st.write(dir / "rates.csv", [&](std::ostream& o) { write_rates(o, a.rates); });
    st.write(dir / "spikes.csv", [&](std::ostream& o) { write_spikes(o, a.spikes); });
    if (a.calendar) {
      st.write(dir / "calendar.csv", [&](std::ostream& o) { write_calendar(o, a.calendar->entries); });
      st.write(dir / "calendar_all.csv", [&](std::ostream& o) { write_calendar(o, a.calendar->all); });
      calendar.insert(calendar.end(), a.calendar->entries.begin(), a.calendar->entries.end());
    }
    if (a.memory) {
      const auto& m = *a.memory;
      st.write(dir / "acf.csv", [&](std::ostream& o) { write_acf(o, m.acf); });
      if (m.yearly) {
        st.write(dir / "acf_yearly.csv", [&](std::ostream& o) { write_acf(o, m.yearly->averaged); });
        st.write(dir / "stationarity.csv", [&](std::ostream& o) { write_stationarity(o, *m.yearly); });
      }
      st.write(dir / "psd_welch.csv", [&](std::ostream& o) { write_psd(o, m.welch); });
      st.write(dir / "fit_acf.csv", [&](std::ostream& o) { write_fit(o, m.alpha); });
      st.write(dir / "fit_psd.csv", [&](std::ostream& o) { write_fit(o, m.beta); });
      fits.push_back({s.emotion, format_number(m.alpha.exponent), format_number(m.alpha.r2),
                      format_number(m.beta.exponent), format_number(m.beta.r2)});
    } else {
      fits.push_back({s.emotion, "", "", "", ""});
    }
    spikes.insert(spikes.end(), a.spikes.entries.begin(), a.spikes.entries.end());
    standardized.push_back({s.emotion, s.standardized});
  }
  std::stable_sort(spikes.begin(), spikes.end(), [](const Spike& a, const Spike& b) { return a.rate > b.rate; });
  st.write("spikes.csv", [&](std::ostream& o) { write_spikes(o, SpikeReport{spikes}); });
  st.write("calendar.csv", [&](std::ostream& o) { write_calendar(o, calendar); });
  st.write("fit_summary.csv", [&](std::ostream& o) {
    o << "emotion,alpha,alpha_r2,beta,beta_r2\n";
    for (const auto& r : fits) write_csv_row(o, r);
  });
  st.out() << "\nspikes\n";
  print_spike_table(st.out(), spikes);
  st.out() << "\ncalendar dates\n";
  print_calendar_table(st.out(), calendar);
  st.out() << "\nmemory exponents\n" << fmt::format("{:<14}{:>10}{:>10}\n", "Emotion", "alpha", "beta");
  for (const auto& r : fits)
    st.out() << fmt::format("{:<14}{:>10}{:>10}\n", r[0], r[1].empty() ? "-" : fmt::format("{:.4f}", std::stod(r[1])),
                            r[3].empty() ? "-" : fmt::format("{:.4f}", std::stod(r[3])));
  st.out() << '\n';
  try {
    run_pca(st, standardized);
  } catch (const AnalysisError& e) {
    st.note("pca", {fmt::format("skipped: {}", e.what())});
  }
}

inline void dispatch(Stage& st) {
  const auto& n = st.name();
  if (n == "ingest") stage_ingest(st);
  else if (n == "extract") stage_extract(st);
  else if (n == "cycles") stage_cycles(st);
  else if (n == "remove-cycles") stage_remove_cycles(st);
  else if (n == "spikes") stage_spikes(st);
  else if (n == "calendar") stage_calendar(st);
  else if (n == "acf") stage_acf(st);
  else if (n == "psd") stage_psd(st);
  else if (n == "fit") stage_fit(st);
  else if (n == "shuffle") stage_shuffle(st);
  else if (n == "synth-corpus") stage_synth_corpus(st);
  else if (n == "synth-series") stage_synth_series(st);
  else if (n == "pca") stage_pca(st);
  else if (n == "pipeline") stage_pipeline(st);
  else throw std::logic_error("unhandled stage " + n);
}

struct Override {
  const char* flag;
  const char* key;
  const char* help;
};

inline const std::vector<Override>& overrides() {
  static const std::vector<Override> list = {
      {"--corpus", "input.corpus", "JSON-lines corpus"},
      {"--dictionary", "input.dictionary", "emotion dictionary (TSV or JSON)"},
      {"--column", "input.column", "series column to read (default: value, else normalized)"},
      {"--emotion", "input.emotion", "name for a single input series"},
      {"--threads", "run.threads", "counting threads (0 = all cores)"},
      {"--spike-threshold", "spikes.threshold", "spike rate threshold in percent"},
      {"--return-threshold", "spikes.return_threshold", "duration threshold in percent of the pre-peak baseline"},
      {"--calendar-high", "calendar.high", "calendar up threshold in percent"},
      {"--calendar-low", "calendar.low", "calendar down threshold in percent"},
      {"--calendar-std", "calendar.std_max", "calendar spread limit in percent"},
      {"--max-lag", "acf.max_lag", "largest ACF lag"},
      {"--fit-lo", "acf.fit_lo", "lower lag of the ACF fit"},
      {"--fit-hi", "acf.fit_hi", "upper lag of the ACF fit"},
      {"--psd-fit-lo", "psd.fit_lo", "lower frequency of the PSD fit"},
      {"--psd-fit-hi", "psd.fit_hi", "upper frequency of the PSD fit"},
      {"--segment", "psd.segment", "Welch segment length"},
      {"--scheme", "shuffle.scheme", "shuffle scheme: daily, weekly or monthly"},
      {"--repetitions", "shuffle.repetitions", "surrogates to average"},
      {"--hurst", "synth.hurst", "Hurst exponent for synth-series"},
      {"--length", "synth.length", "days for synth-series"},
  };
  return list;
}

}  // namespace detail

// Entry point shared by the executable and the tests. Returns the process
// exit status: 0 success, 1 invalid input or usage, 2 analysis or I/O failure.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Collective-emotion time series toolkit", "emocycle"};
  app.set_help_flag("-h,--help", "show help");
  std::string command, config_path, out_dir, manifest_path;
  std::uint64_t seed = 0;
  bool strict = false, version = false;
  std::vector<std::string> sets, series_inputs;
  std::map<std::string, std::string> flag_values;
  app.add_option("command", command, "subcommand");
  app.add_option("--config", config_path, "configuration file (INI)");
  app.add_option("--seed", seed, "root seed for every random stream");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--strict", strict, "malformed corpus records are fatal");
  app.add_option("--input", series_inputs, "series CSV (repeatable)");
  app.add_option("--set", sets, "override any config key: section.key=value (repeatable)");
  app.add_option("--from-manifest", manifest_path, "re-run the stage recorded in a manifest");
  app.add_flag("--version", version, "print version");
  for (const auto& o : detail::overrides()) app.add_option(o.flag, flag_values[o.key], o.help);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help() << '\n' << usage();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << usage();
    return 1;
  }
  if (version) {
    out << "emocycle " << kVersion << '\n';
    return 0;
  }

  try {
    Config config;
    std::string stage = command;
    if (!manifest_path.empty()) {
      std::ifstream in(manifest_path);
      if (!in) throw ValidationError(fmt::format("manifest '{}' does not exist", manifest_path));
      nlohmann::json m;
      try {
        m = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError(fmt::format("manifest '{}': {}", manifest_path, e.what()));
      }
      if (!m.contains("stage") || !m.contains("config"))
        throw ValidationError(fmt::format("manifest '{}' lacks stage or config", manifest_path));
      const auto recorded = m["stage"].get<std::string>();
      if (!stage.empty() && stage != recorded)
        throw ValidationError(fmt::format("manifest records stage '{}', not '{}'", recorded, stage));
      stage = recorded;
      config = Config::parse(m["config"].get<std::string>(), std::filesystem::current_path());
    } else if (!config_path.empty()) {
      config = Config::load(config_path);
    }
    if (stage.empty()) {
      err << usage();
      return 1;
    }
    if (std::find(subcommands().begin(), subcommands().end(), stage) == subcommands().end()) {
      err << fmt::format("error: unknown command '{}'\n", stage) << usage();
      return 1;
    }
    for (const auto& o : detail::overrides())
      if (app.count(o.flag)) config.set(o.key, flag_values[o.key]);
    if (!series_inputs.empty()) {
      std::string joined;
      for (const auto& s : series_inputs) joined += (joined.empty() ? "" : ",") + s;
      config.set("input.series", joined);
    }
    for (const auto& s : sets) config.set_assignment(s);
    if (app.count("--seed")) config.set("run.seed", std::to_string(seed));
    if (strict) config.set("run.strict", "true");
    if (!out_dir.empty()) {
      config.set("output.dir", out_dir);
    } else if (config.get("output.dir").empty()) {
      const char* env = std::getenv(kOutEnv);
      config.set("output.dir", env && *env ? env : "emocycle_out");
    }
    for (const auto& w : {"exclusions.weekly", "exclusions.yearly"}) config.windows(w);
    config.unsigned_integer("run.seed");

    Stage st(stage, config, config.get("output.dir"), out, err);
    detail::dispatch(st);
    st.write_manifest(args);
    return 0;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const AnalysisError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace emocycle::cli
