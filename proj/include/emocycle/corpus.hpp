#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "emocycle/date.hpp"
#include "emocycle/dictionary.hpp"
#include "emocycle/error.hpp"
#include "emocycle/matcher.hpp"
#include "emocycle/nulls.hpp"
#include "emocycle/rng.hpp"
#include "emocycle/unicode.hpp"

namespace emocycle {

struct Document {
  Date date;
  std::string text;
};

struct IngestReject {
  std::size_t line;
  std::string reason;
};

struct IngestReport {
  std::size_t records = 0;  // non-blank lines seen
  std::size_t accepted = 0;
  std::vector<IngestReject> rejects;
};

struct IngestResult {
  std::vector<Document> documents;
  IngestReport report;
};

// One JSON object per line with string fields "date" (YYYY-MM-DD) and
// "text". Malformed lines are reported and skipped; in strict mode the first
// one throws with its line number.
inline IngestResult ingest(std::istream& in, bool strict = false) {
  IngestResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ++result.report.records;
    std::string reason;
    try {
      auto j = nlohmann::json::parse(line);
      if (!j.is_object()) {
        reason = "record is not an object";
      } else if (!j.contains("date") || !j["date"].is_string()) {
        reason = "missing string field 'date'";
      } else if (!j.contains("text") || !j["text"].is_string()) {
        reason = "missing string field 'text'";
      } else if (auto d = try_parse_date(j["date"].get<std::string>())) {
        result.documents.push_back({*d, j["text"].get<std::string>()});
        ++result.report.accepted;
        continue;
      } else {
        reason = fmt::format("invalid date '{}'", j["date"].get<std::string>());
      }
    } catch (const nlohmann::json::exception& e) {
      reason = fmt::format("malformed JSON: {}", e.what());
    }
    if (strict) throw ValidationError(fmt::format("corpus line {}: {}", lineno, reason));
    result.report.rejects.push_back({lineno, std::move(reason)});
  }
  return result;
}

inline void write_document(std::ostream& out, const Document& d) {
  nlohmann::json j;
  j["date"] = format_date(d.date);
  j["text"] = d.text;
  out << j.dump() << '\n';
}

// Per-term daily document counts over a contiguous, zero-filled calendar.
struct CountMatrix {
  Date start{};
  std::size_t days = 0;
  std::vector<std::string> terms;                // dictionary order
  std::vector<std::vector<std::uint64_t>> per_term;  // [term][day]
  std::vector<std::uint64_t> totals;             // documents per day

  bool empty() const { return days == 0; }
  Date date_at(std::size_t i) const { return start + std::chrono::days{static_cast<long>(i)}; }

  std::optional<std::size_t> term_index(std::string_view term) const {
    auto it = std::find(terms.begin(), terms.end(), term);
    if (it == terms.end()) return std::nullopt;
    return static_cast<std::size_t>(it - terms.begin());
  }

  const std::vector<std::uint64_t>& series(std::string_view term) const {
    if (auto i = term_index(term)) return per_term[*i];
    throw ValidationError(fmt::format("term '{}' not in count matrix", term));
  }

  // Total documents containing each term over the whole range.
  std::map<std::string, std::uint64_t> term_totals() const {
    std::map<std::string, std::uint64_t> out;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      std::uint64_t s = 0;
      for (auto v : per_term[i]) s += v;
      out[terms[i]] = s;
    }
    return out;
  }

  std::uint64_t total_documents() const {
    std::uint64_t s = 0;
    for (auto v : totals) s += v;
    return s;
  }
};

struct CountOptions {
  MatchMode mode = MatchMode::Substring;
  unsigned threads = 0;  // 0 = hardware concurrency
};

// Incremental counter. A document adds one to X(t) and one to x_i(t) for each
// distinct term it contains, however often that term repeats.
class CorpusCounter {
 public:
  CorpusCounter(const EmotionDictionary& dict, MatchMode mode = MatchMode::Substring)
      : matcher_(dict.all_terms(), mode), seen_(matcher_.size(), 0) {}

  explicit CorpusCounter(TermMatcher matcher)
      : matcher_(std::move(matcher)), seen_(matcher_.size(), 0) {}

  void add(const Document& doc) { add(doc.date, doc.text); }

  void add(Date date, std::string_view text) {
    auto& day = day_counts(date);
    ++day.total;
    hits_.clear();
    matcher_.distinct_matches(canonicalize(text), hits_, seen_);
    for (auto id : hits_) ++day.terms[id];
  }

  void merge(const CorpusCounter& other) {
    for (const auto& [d, c] : other.days_) {
      auto& mine = day_counts(Date{std::chrono::days{d}});
      mine.total += c.total;
      for (std::size_t i = 0; i < c.terms.size(); ++i) mine.terms[i] += c.terms[i];
    }
  }

  CountMatrix finish() const {
    CountMatrix m;
    m.terms = matcher_.patterns();
    m.per_term.resize(m.terms.size());
    if (days_.empty()) return m;
    long first = days_.begin()->first;
    long last = days_.rbegin()->first;
    m.start = Date{std::chrono::days{first}};
    m.days = static_cast<std::size_t>(last - first + 1);
    m.totals.assign(m.days, 0);
    for (auto& s : m.per_term) s.assign(m.days, 0);
    for (const auto& [d, c] : days_) {
      auto idx = static_cast<std::size_t>(d - first);
      m.totals[idx] = c.total;
      for (std::size_t i = 0; i < c.terms.size(); ++i) m.per_term[i][idx] = c.terms[i];
    }
    return m;
  }

 private:
  struct DayCounts {
    std::uint64_t total = 0;
    std::vector<std::uint64_t> terms;
  };

  DayCounts& day_counts(Date d) {
    auto key = static_cast<long>(d.time_since_epoch().count());
    auto [it, inserted] = days_.try_emplace(key);
    if (inserted) it->second.terms.assign(matcher_.size(), 0);
    return it->second;
  }

  TermMatcher matcher_;
  std::map<long, DayCounts> days_;
  std::vector<std::uint32_t> hits_;
  std::vector<std::uint8_t> seen_;
};

// Counts in parallel over contiguous document chunks; integer sums make the
// result identical for any number of workers.
inline CountMatrix count_documents(std::span<const Document> docs, const EmotionDictionary& dict,
                                   CountOptions options = {}) {
  TermMatcher matcher(dict.all_terms(), options.mode);
  unsigned workers = options.threads;
  if (workers == 0) {
    workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, docs.size() / 1024)));
  }
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, docs.size())));
  if (workers <= 1) {
    CorpusCounter counter(matcher);
    for (const auto& d : docs) counter.add(d);
    return counter.finish();
  }
  std::vector<CorpusCounter> partial(workers, CorpusCounter(matcher));
  std::vector<std::thread> pool;
  const std::size_t chunk = (docs.size() + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      std::size_t begin = w * chunk;
      std::size_t end = std::min(docs.size(), begin + chunk);
      for (std::size_t i = begin; i < end; ++i) partial[w].add(docs[i]);
    });
  }
  for (auto& t : pool) t.join();
  for (unsigned w = 1; w < workers; ++w) partial[0].merge(partial[w]);
  return partial[0].finish();
}

// Synthetic corpus driven by latent per-emotion daily intensities. On each
// day every document independently includes one random term of emotion k
// with probability inclusion_scale * intensity_k(t), then filler tokens.
struct CorpusSynthConfig {
  Date start = make_date(2006, 11, 1);
  std::size_t days = 730;
  std::size_t docs_per_day = 100;
  // One generator per dictionary emotion, in dictionary order. start and
  // length are overridden by the corpus calendar, seed by a sub-stream of the
  // corpus seed.
  std::vector<SynthSpec> latent;
  double inclusion_scale = 1.0;
  std::size_t filler_tokens = 3;
  std::size_t filler_vocabulary = 1000;
};

struct LatentRecord {
  Date start{};
  std::vector<std::string> emotions;
  std::vector<std::vector<double>> intensity;    // [emotion][day]
  std::vector<std::vector<double>> probability;  // [emotion][day]
};

inline LatentRecord synth_latent(const CorpusSynthConfig& config, const EmotionDictionary& dict,
                                 std::uint64_t seed) {
  if (config.latent.size() != dict.size())
    throw ValidationError(fmt::format("corpus config has {} latent generators for {} emotions",
                                      config.latent.size(), dict.size()));
  if (config.days == 0) throw ValidationError("corpus must span at least one day");
  LatentRecord rec;
  rec.start = config.start;
  for (std::size_t k = 0; k < dict.size(); ++k) {
    const auto& name = dict.emotions()[k].name;
    SynthSpec spec = config.latent[k];
    spec.start = config.start;
    spec.length = std::max<std::size_t>(config.days, 2);
    spec.seed = derive_seed(seed, "latent/" + name);
    auto series = synthesize(spec);
    series.values.resize(config.days);
    std::vector<double> prob(config.days);
    for (std::size_t t = 0; t < config.days; ++t) {
      prob[t] = config.inclusion_scale * series.values[t];
      if (!(prob[t] >= 0.0 && prob[t] <= 1.0))
        throw ValidationError(fmt::format(
            "inclusion probability {} for '{}' on {} is outside [0, 1]; lower inclusion_scale", prob[t],
            name, format_date(series.date_at(t))));
    }
    rec.emotions.push_back(name);
    rec.intensity.push_back(std::move(series.values));
    rec.probability.push_back(std::move(prob));
  }
  return rec;
}

// Generates the corpus one day at a time, handing each day's documents to
// `sink(date, span<const Document>)`. Day t draws from its own seeded stream.
template <class Sink>
LatentRecord synth_corpus_stream(const CorpusSynthConfig& config, const EmotionDictionary& dict,
                                 std::uint64_t seed, Sink&& sink) {
  auto latent = synth_latent(config, dict, seed);
  const std::uint64_t doc_seed = derive_seed(seed, "documents");
  std::vector<Document> day_docs(config.docs_per_day);
  std::string text;
  for (std::size_t t = 0; t < config.days; ++t) {
    Date date = config.start + std::chrono::days{static_cast<long>(t)};
    Rng rng(derive_seed(doc_seed, t));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> filler(0, std::max<std::size_t>(config.filler_vocabulary, 1) - 1);
    for (auto& doc : day_docs) {
      text.clear();
      for (std::size_t f = 0; f < config.filler_tokens; ++f) {
        if (!text.empty()) text.push_back(' ');
        text += fmt::format("w{:04d}", filler(rng));
      }
      for (std::size_t k = 0; k < dict.size(); ++k) {
        double u = unit(rng);
        if (u < latent.probability[k][t]) {
          const auto& terms = dict.emotions()[k].terms;
          std::uniform_int_distribution<std::size_t> pick(0, terms.size() - 1);
          if (!text.empty()) text.push_back(' ');
          text += terms[pick(rng)];
        }
      }
      doc.date = date;
      doc.text = text;
    }
    sink(date, std::span<const Document>(day_docs));
  }
  return latent;
}

struct SynthCorpus {
  std::vector<Document> documents;
  LatentRecord latent;
};

inline SynthCorpus synth_corpus(const CorpusSynthConfig& config, const EmotionDictionary& dict,
                                std::uint64_t seed) {
  SynthCorpus out;
  out.documents.reserve(config.days * config.docs_per_day);
  out.latent = synth_corpus_stream(config, dict, seed, [&](Date, std::span<const Document> docs) {
    out.documents.insert(out.documents.end(), docs.begin(), docs.end());
  });
  return out;
}

}  // namespace emocycle
