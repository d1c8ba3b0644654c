#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "emocycle/corpus.hpp"

using namespace emocycle;

namespace {

const Date kDay = make_date(2010, 1, 1);

EmotionDictionary small_dict() { return EmotionDictionary({{"A", {"w1", "w2"}}, {"B", {"v"}}}); }

std::uint64_t at(const CountMatrix& m, std::string_view term, std::size_t day = 0) {
  return m.series(term)[day];
}

// Brute force: canonicalize each document and test each term with find().
CountMatrix naive_counts(const std::vector<Document>& docs, const EmotionDictionary& dict) {
  CountMatrix m;
  auto [lo, hi] = std::minmax_element(docs.begin(), docs.end(),
                                      [](const Document& a, const Document& b) { return a.date < b.date; });
  m.start = lo->date;
  m.days = static_cast<std::size_t>((hi->date - lo->date).count()) + 1;
  m.terms = dict.all_terms();
  m.per_term.assign(m.terms.size(), std::vector<std::uint64_t>(m.days, 0));
  m.totals.assign(m.days, 0);
  for (const auto& d : docs) {
    auto t = static_cast<std::size_t>((d.date - m.start).count());
    ++m.totals[t];
    std::string text = canonicalize(d.text);
    for (std::size_t i = 0; i < m.terms.size(); ++i)
      if (text.find(m.terms[i]) != std::string::npos) ++m.per_term[i][t];
  }
  return m;
}

// Random documents over a tiny alphabet so overlapping and nested terms
// occur often.
std::vector<Document> random_docs(std::mt19937_64& rng, std::size_t n, std::size_t days) {
  std::uniform_int_distribution<int> len(0, 40), ch(0, 4), day(0, static_cast<int>(days) - 1);
  const char alphabet[] = {'a', 'b', 'c', ' ', 'A'};
  std::vector<Document> docs;
  for (std::size_t i = 0; i < n; ++i) {
    std::string t;
    for (int k = len(rng); k > 0; --k) t.push_back(alphabet[ch(rng)]);
    docs.push_back({kDay + std::chrono::days{day(rng)}, t});
  }
  docs.push_back({kDay, ""});
  docs.push_back({kDay + std::chrono::days{static_cast<long>(days) - 1}, "x"});
  return docs;
}

void expect_same(const CountMatrix& a, const CountMatrix& b) {
  EXPECT_EQ(a.start, b.start);
  EXPECT_EQ(a.days, b.days);
  EXPECT_EQ(a.terms, b.terms);
  EXPECT_EQ(a.per_term, b.per_term);
  EXPECT_EQ(a.totals, b.totals);
}

}  // namespace

TEST(Counting, SameWordTwiceCountsOnce) {
  std::vector<Document> docs{{kDay, "w1 and again w1"}};
  auto m = count_documents(docs, small_dict());
  EXPECT_EQ(at(m, "w1"), 1u);
  EXPECT_EQ(m.totals[0], 1u);
}

TEST(Counting, TwoDistinctWordsCountTwice) {
  std::vector<Document> docs{{kDay, "w1 then w2"}};
  auto dict = small_dict();
  auto m = count_documents(docs, dict);
  EXPECT_EQ(at(m, "w1"), 1u);
  EXPECT_EQ(at(m, "w2"), 1u);
  std::uint64_t sum = 0;
  for (const auto& t : dict.at("A").terms) sum += at(m, t);
  EXPECT_EQ(sum, 2u);
}

TEST(Counting, NonMatchingDocumentsStillCountInTotal) {
  std::vector<Document> docs(5, Document{kDay, "nothing here"});
  auto m = count_documents(docs, small_dict());
  EXPECT_EQ(m.totals[0], 5u);
  for (const auto& s : m.per_term) EXPECT_EQ(s[0], 0u);
}

TEST(Counting, EmptyCorpusEmptyMatrix) {
  std::vector<Document> docs;
  auto m = count_documents(docs, small_dict());
  EXPECT_TRUE(m.empty());
  EXPECT_EQ(m.total_documents(), 0u);
}

TEST(Counting, MissingDaysZeroFilled) {
  std::vector<Document> docs{{kDay, "w1"}, {kDay + std::chrono::days{3}, "v"}};
  auto m = count_documents(docs, small_dict());
  ASSERT_EQ(m.days, 4u);
  EXPECT_EQ(m.totals, (std::vector<std::uint64_t>{1, 0, 0, 1}));
  EXPECT_EQ(m.series("v"), (std::vector<std::uint64_t>{0, 0, 0, 1}));
}

TEST(Counting, CaseAndWidthFolded) {
  std::vector<Document> docs{{kDay, "W1"}, {kDay, "ｗ２"}};
  auto m = count_documents(docs, small_dict());
  EXPECT_EQ(at(m, "w1"), 1u);
  EXPECT_EQ(at(m, "w2"), 1u);
}

TEST(Counting, SubstringVersusWordBoundary) {
  EmotionDictionary dict(std::vector<EmotionEntry>{{"A", {"cat"}}});
  std::vector<Document> docs{{kDay, "concatenate"}, {kDay, "a cat."}};
  EXPECT_EQ(at(count_documents(docs, dict, {MatchMode::Substring, 1}), "cat"), 2u);
  EXPECT_EQ(at(count_documents(docs, dict, {MatchMode::WordBoundary, 1}), "cat"), 1u);
}

TEST(Counting, NestedAndOverlappingTerms) {
  EmotionDictionary dict(std::vector<EmotionEntry>{{"A", {"ab", "b"}}, {"B", {"abc", "bcd"}}});
  std::vector<Document> docs{{kDay, "abcd"}, {kDay, "xb"}};
  auto m = count_documents(docs, dict);
  EXPECT_EQ(at(m, "ab"), 1u);
  EXPECT_EQ(at(m, "b"), 2u);
  EXPECT_EQ(at(m, "abc"), 1u);
  EXPECT_EQ(at(m, "bcd"), 1u);
}

TEST(Counting, MatchesNaiveScanOn100Documents) {
  std::mt19937_64 rng(11);
  auto docs = random_docs(rng, 100, 5);
  EmotionDictionary dict(std::vector<EmotionEntry>{{"A", {"ab", "abc", "a"}}, {"B", {"cc", "b a"}}, {"C", {"cab", "bb"}}});
  expect_same(count_documents(docs, dict, {MatchMode::Substring, 1}), naive_counts(docs, dict));
}

TEST(Counting, MatcherEquivalencePropertyOverRandomCorpora) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> tlen(1, 4), ch(0, 3);
  const char alphabet[] = {'a', 'b', 'c', ' '};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<EmotionEntry> entries(3);
    std::set<std::string> used;
    for (int k = 0; k < 3; ++k) {
      entries[k].name = "E" + std::to_string(k);
      for (int j = 0; j < 3; ++j) {
        std::string t;
        for (int n = tlen(rng); n > 0; --n) t.push_back(alphabet[ch(rng) % 3]);
        if (used.insert(t).second) entries[k].terms.push_back(t);
      }
      if (entries[k].terms.empty()) entries[k].terms.push_back("zz" + std::to_string(k));
    }
    EmotionDictionary dict(entries);
    auto docs = random_docs(rng, 60, 3);
    expect_same(count_documents(docs, dict, {MatchMode::Substring, 1}), naive_counts(docs, dict));
  }
}

TEST(Counting, OrderIndependentAndThreadDeterministic) {
  std::mt19937_64 rng(5);
  auto docs = random_docs(rng, 5000, 20);
  EmotionDictionary dict(std::vector<EmotionEntry>{{"A", {"ab", "abc"}}, {"B", {"cc", "ba"}}});
  auto one = count_documents(docs, dict, {MatchMode::Substring, 1});
  auto four = count_documents(docs, dict, {MatchMode::Substring, 4});
  expect_same(one, four);
  std::shuffle(docs.begin(), docs.end(), rng);
  expect_same(one, count_documents(docs, dict, {MatchMode::Substring, 3}));
}

TEST(Counting, CounterMergeEqualsSinglePass) {
  std::mt19937_64 rng(8);
  auto docs = random_docs(rng, 300, 7);
  auto dict = EmotionDictionary({{"A", {"ab"}}, {"B", {"c"}}});
  CorpusCounter whole(dict), left(dict), right(dict);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    whole.add(docs[i]);
    (i % 2 ? left : right).add(docs[i]);
  }
  left.merge(right);
  expect_same(whole.finish(), left.finish());
}

TEST(Counting, MonotoneAndBounded) {
  std::mt19937_64 rng(3);
  auto docs = random_docs(rng, 200, 4);
  EmotionDictionary dict(std::vector<EmotionEntry>{{"A", {"ab", "c"}}});
  auto before = count_documents(docs, dict, {MatchMode::Substring, 1});
  docs.push_back({kDay + std::chrono::days{1}, "abc ab c"});
  auto after = count_documents(docs, dict, {MatchMode::Substring, 1});
  EXPECT_EQ(after.totals[1], before.totals[1] + 1);
  for (std::size_t i = 0; i < after.terms.size(); ++i) {
    EXPECT_LE(after.per_term[i][1], before.per_term[i][1] + 1);
    for (std::size_t t = 0; t < after.days; ++t) EXPECT_LE(after.per_term[i][t], after.totals[t]);
  }
}

TEST(Ingest, ThreeValidLines) {
  std::istringstream in(
      R"({"date":"2010-01-01","text":"a"}
{"date":"2010-01-02","text":"b"}
{"date":"2010-01-02","text":""}
)");
  auto r = ingest(in);
  EXPECT_EQ(r.documents.size(), 3u);
  EXPECT_TRUE(r.report.rejects.empty());
  EXPECT_EQ(r.documents[1].date, make_date(2010, 1, 2));
}

TEST(Ingest, LenientReportsBadDate) {
  std::istringstream in(
      R"({"date":"2010-01-01","text":"a"}
{"date":"2010-02-30","text":"b"}
{"date":"2010-01-03","text":"c"}
)");
  auto r = ingest(in);
  EXPECT_EQ(r.documents.size(), 2u);
  ASSERT_EQ(r.report.rejects.size(), 1u);
  EXPECT_EQ(r.report.rejects[0].line, 2u);
  EXPECT_EQ(r.report.records, 3u);
  EXPECT_EQ(r.report.accepted, 2u);
}

TEST(Ingest, StrictFailsWithLineNumber) {
  std::istringstream in("{\"date\":\"2010-01-01\",\"text\":\"a\"}\nnot json\n");
  try {
    ingest(in, true);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Ingest, EmptyInput) {
  std::istringstream in("");
  auto r = ingest(in);
  EXPECT_TRUE(r.documents.empty());
  EXPECT_EQ(r.report.records, 0u);
  EXPECT_TRUE(r.report.rejects.empty());
}

TEST(Ingest, MissingFieldsRejected) {
  std::istringstream in("{\"date\":\"2010-01-01\"}\n{\"text\":\"x\"}\n[1]\n");
  auto r = ingest(in);
  EXPECT_EQ(r.report.rejects.size(), 3u);
}

TEST(Ingest, WriteDocumentRoundTrip) {
  std::ostringstream out;
  write_document(out, {make_date(2012, 2, 29), "quote \" and\nnewline"});
  std::istringstream in(out.str());
  auto r = ingest(in, true);
  ASSERT_EQ(r.documents.size(), 1u);
  EXPECT_EQ(r.documents[0].text, "quote \" and\nnewline");
}

TEST(SynthCorpus, ZeroIntensityNoMatches) {
  auto dict = small_dict();
  CorpusSynthConfig cfg;
  cfg.days = 10;
  cfg.docs_per_day = 100;
  cfg.latent.assign(dict.size(), SynthSpec{});
  cfg.inclusion_scale = 0.0;
  auto c = synth_corpus(cfg, dict, 1);
  auto m = count_documents(c.documents, dict);
  EXPECT_EQ(m.total_documents(), 1000u);
  for (const auto& s : m.per_term)
    for (auto v : s) EXPECT_EQ(v, 0u);
}

TEST(SynthCorpus, ConstantHalfProbabilityConcentrates) {
  EmotionDictionary dict(std::vector<EmotionEntry>{{"A", {"alpha"}}});
  CorpusSynthConfig cfg;
  cfg.days = 3;
  cfg.docs_per_day = 10000;
  cfg.latent.assign(1, SynthSpec{});
  cfg.latent[0].base_level = 0.5;
  cfg.latent[0].noise_scale = 0.0;
  auto c = synth_corpus(cfg, dict, 99);
  auto m = count_documents(c.documents, dict);
  for (std::size_t t = 0; t < m.days; ++t) {
    double frac = static_cast<double>(m.series("alpha")[t]) / static_cast<double>(m.totals[t]);
    EXPECT_NEAR(frac, 0.5, 0.02) << "day " << t;
    EXPECT_DOUBLE_EQ(c.latent.probability[0][t], 0.5);
  }
}

TEST(SynthCorpus, DeterministicUnderSeed) {
  auto dict = small_dict();
  CorpusSynthConfig cfg;
  cfg.days = 5;
  cfg.docs_per_day = 20;
  cfg.latent.assign(dict.size(), SynthSpec{});
  for (auto& s : cfg.latent) s.base_level = 0.3;
  auto a = synth_corpus(cfg, dict, 4);
  auto b = synth_corpus(cfg, dict, 4);
  auto c = synth_corpus(cfg, dict, 5);
  ASSERT_EQ(a.documents.size(), b.documents.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.documents.size(); ++i) {
    EXPECT_EQ(a.documents[i].text, b.documents[i].text);
    differs |= a.documents[i].text != c.documents[i].text;
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(a.latent.intensity, b.latent.intensity);
}

TEST(SynthCorpus, ProbabilityOutOfRangeIsConfigError) {
  auto dict = small_dict();
  CorpusSynthConfig cfg;
  cfg.days = 5;
  cfg.latent.assign(dict.size(), SynthSpec{});
  cfg.inclusion_scale = 2.0;  // base 1 -> probability 2
  EXPECT_THROW(synth_corpus(cfg, dict, 1), ValidationError);
  cfg.inclusion_scale = 1.0;
  cfg.latent.pop_back();
  EXPECT_THROW(synth_corpus(cfg, dict, 1), ValidationError);
}
