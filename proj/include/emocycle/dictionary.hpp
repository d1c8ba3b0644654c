#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "emocycle/error.hpp"
#include "emocycle/unicode.hpp"

namespace emocycle {

struct EmotionEntry {
  std::string name;
  std::vector<std::string> terms;  // canonicalized, unique
};

// Emotion categories and their term lists. Order is the file order and fixes
// the column order of every downstream matrix.
class EmotionDictionary {
 public:
  EmotionDictionary() = default;

  // Canonicalizes every term, collapses duplicates within an emotion and
  // checks the cross-emotion invariants.
  explicit EmotionDictionary(std::vector<EmotionEntry> entries) {
    for (auto& e : entries) {
      std::vector<std::string> unique;
      std::unordered_set<std::string> seen;
      for (const auto& t : e.terms) {
        std::string c = canonicalize(t);
        if (c.empty())
          throw ValidationError(fmt::format("emotion '{}' has an empty term", e.name));
        if (seen.insert(c).second) unique.push_back(std::move(c));
      }
      e.terms = std::move(unique);
    }
    entries_ = std::move(entries);
    validate();
  }

  const std::vector<EmotionEntry>& emotions() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::size_t term_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.terms.size();
    return n;
  }

  // All terms in emotion order, then term order.
  std::vector<std::string> all_terms() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.insert(out.end(), e.terms.begin(), e.terms.end());
    return out;
  }

  const EmotionEntry& at(std::string_view name) const {
    for (const auto& e : entries_)
      if (e.name == name) return e;
    throw ValidationError(fmt::format("unknown emotion '{}'", name));
  }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].name == name) return i;
    return std::nullopt;
  }

  friend bool operator==(const EmotionDictionary& a, const EmotionDictionary& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i)
      if (a.entries_[i].name != b.entries_[i].name || a.entries_[i].terms != b.entries_[i].terms)
        return false;
    return true;
  }

 private:
  void validate() const {
    std::unordered_map<std::string, std::string> owner;
    std::unordered_set<std::string> names;
    for (const auto& e : entries_) {
      if (e.name.empty()) throw ValidationError("emotion with empty name");
      if (!names.insert(e.name).second)
        throw ValidationError(fmt::format("duplicate emotion '{}'", e.name));
      if (e.terms.empty())
        throw ValidationError(fmt::format("emotion '{}' has no terms", e.name));
      for (const auto& t : e.terms) {
        auto [it, inserted] = owner.emplace(t, e.name);
        if (!inserted)
          throw ValidationError(fmt::format("term '{}' appears under both '{}' and '{}'", t,
                                            it->second, e.name));
      }
    }
  }

  std::vector<EmotionEntry> entries_;
};

namespace detail {

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline EmotionDictionary parse_dictionary_json(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(fmt::format("dictionary JSON: {}", e.what()));
  }
  if (!j.is_object()) throw ValidationError("dictionary JSON must be an object of emotion -> [terms]");
  std::vector<EmotionEntry> entries;
  for (auto& [name, terms] : j.items()) {
    if (!terms.is_array())
      throw ValidationError(fmt::format("dictionary JSON: '{}' must map to a list", name));
    EmotionEntry e{name, {}};
    for (const auto& t : terms) {
      if (!t.is_string())
        throw ValidationError(fmt::format("dictionary JSON: non-string term under '{}'", name));
      e.terms.push_back(t.get<std::string>());
    }
    entries.push_back(std::move(e));
  }
  return EmotionDictionary(std::move(entries));
}

inline EmotionDictionary parse_dictionary_tsv(const std::string& text) {
  std::vector<EmotionEntry> entries;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ValidationError(fmt::format("dictionary line {}: expected 'emotion<TAB>term'", lineno));
    std::string name = trim(std::string_view(line).substr(0, tab));
    std::string term = trim(std::string_view(line).substr(tab + 1));
    if (name.empty() || term.empty())
      throw ValidationError(fmt::format("dictionary line {}: empty emotion or term", lineno));
    auto it = std::find_if(entries.begin(), entries.end(),
                           [&](const EmotionEntry& e) { return e.name == name; });
    if (it == entries.end()) {
      entries.push_back({name, {}});
      it = std::prev(entries.end());
    }
    it->terms.push_back(std::move(term));
  }
  return EmotionDictionary(std::move(entries));
}

}  // namespace detail

// Accepts `emotion<TAB>term` lines (`#` comments) or a JSON object mapping
// each emotion to its list of terms.
inline EmotionDictionary load_dictionary(std::istream& source) {
  std::string text((std::istreambuf_iterator<char>(source)), std::istreambuf_iterator<char>());
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF)
    text.erase(0, 3);
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return detail::parse_dictionary_json(text);
  return detail::parse_dictionary_tsv(text);
}

inline void write_dictionary_tsv(std::ostream& out, const EmotionDictionary& dict) {
  for (const auto& e : dict.emotions())
    for (const auto& t : e.terms) out << e.name << '\t' << t << '\n';
}

struct RemovedTerm {
  std::string emotion;
  std::string term;
  double frequency;  // documents containing the term / corpus documents
};

struct FilterResult {
  EmotionDictionary dictionary;
  std::vector<RemovedTerm> removed;
};

struct FrequencyBand {
  double low = 1e-7;
  double high = 1e-2;
};

// Drops terms whose document frequency falls outside [low, high].
inline FilterResult frequency_filter(const EmotionDictionary& dict,
                                     const std::map<std::string, std::uint64_t>& doc_counts,
                                     std::uint64_t total_documents, FrequencyBand band = {}) {
  if (!(band.low >= 0.0 && band.low < band.high && band.high <= 1.0))
    throw ValidationError(
        fmt::format("frequency band must satisfy 0 <= low < high <= 1, got [{}, {}]", band.low, band.high));
  if (total_documents == 0) throw ValidationError("frequency filter needs a non-empty corpus");
  FilterResult result;
  std::vector<EmotionEntry> kept;
  for (const auto& e : dict.emotions()) {
    EmotionEntry k{e.name, {}};
    for (const auto& t : e.terms) {
      auto it = doc_counts.find(t);
      if (it == doc_counts.end())
        throw ValidationError(fmt::format("no document count for term '{}'", t));
      double f = static_cast<double>(it->second) / static_cast<double>(total_documents);
      if (f < band.low || f > band.high)
        result.removed.push_back({e.name, t, f});
      else
        k.terms.push_back(t);
    }
    if (k.terms.empty())
      throw ValidationError(fmt::format("frequency filter would leave emotion '{}' empty", e.name));
    kept.push_back(std::move(k));
  }
  result.dictionary = EmotionDictionary(std::move(kept));
  return result;
}

struct TermShare {
  std::string term;
  std::uint64_t total;
  double share;  // NaN when the emotion total is zero
  bool flagged;
};

struct EmotionDominance {
  std::string emotion;
  std::uint64_t total;
  bool defined;  // false when no term of the emotion ever matched
  std::vector<TermShare> terms;
};

// Share of each term in its emotion's total; shares above `threshold` are
// flagged as dominant.
inline std::vector<EmotionDominance> dominance_report(
    const EmotionDictionary& dict, const std::map<std::string, std::uint64_t>& term_totals,
    double threshold = 0.3) {
  std::vector<EmotionDominance> out;
  for (const auto& e : dict.emotions()) {
    EmotionDominance d{e.name, 0, false, {}};
    for (const auto& t : e.terms) {
      auto it = term_totals.find(t);
      if (it == term_totals.end())
        throw ValidationError(fmt::format("no total for term '{}'", t));
      d.total += it->second;
    }
    d.defined = d.total > 0;
    for (const auto& t : e.terms) {
      std::uint64_t c = term_totals.at(t);
      double share = d.defined ? static_cast<double>(c) / static_cast<double>(d.total)
                               : std::numeric_limits<double>::quiet_NaN();
      d.terms.push_back({t, c, share, d.defined && share > threshold});
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace emocycle
