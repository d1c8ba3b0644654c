#pragma once

#include <array>
#include <cstdint>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "emocycle/error.hpp"
#include "emocycle/unicode.hpp"

namespace emocycle {

enum class MatchMode {
  Substring,     // plain containment, for scripts without word delimiters
  WordBoundary,  // the occurrence must not touch a letter or digit on either side
};

// Aho-Corasick automaton over UTF-8 bytes with a dense transition table.
// Matching canonicalized bytes is equivalent to matching code points because
// UTF-8 is self-synchronizing.
class TermMatcher {
 public:
  TermMatcher() = default;

  explicit TermMatcher(std::vector<std::string> patterns, MatchMode mode = MatchMode::Substring)
      : patterns_(std::move(patterns)), mode_(mode) {
    nodes_.emplace_back();
    for (std::uint32_t id = 0; id < patterns_.size(); ++id) {
      const auto& p = patterns_[id];
      if (p.empty()) throw ValidationError("matcher patterns must be non-empty");
      std::int32_t cur = 0;
      for (unsigned char c : p) {
        if (nodes_[cur].next[c] < 0) {
          nodes_[cur].next[c] = static_cast<std::int32_t>(nodes_.size());
          nodes_.emplace_back();
        }
        cur = nodes_[cur].next[c];
      }
      nodes_[cur].outputs.push_back(id);
    }
    build_links();
  }

  std::size_t size() const { return patterns_.size(); }
  const std::vector<std::string>& patterns() const { return patterns_; }
  MatchMode mode() const { return mode_; }

  // Appends to `hits` the index of every pattern occurring at least once in
  // `text`, each index once. `seen` is caller-owned scratch of size() bytes,
  // all zero on entry and left all zero on return.
  void distinct_matches(std::string_view text, std::vector<std::uint32_t>& hits,
                        std::vector<std::uint8_t>& seen) const {
    const std::size_t first_hit = hits.size();
    std::int32_t state = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
      state = nodes_[state].next[static_cast<unsigned char>(text[i])];
      for (std::int32_t o = state; o > 0; o = nodes_[o].dict_link) {
        for (std::uint32_t id : nodes_[o].outputs) {
          if (seen[id]) continue;
          if (mode_ == MatchMode::WordBoundary) {
            std::size_t end = i + 1;
            std::size_t begin = end - patterns_[id].size();
            if (word_char_before(text, begin) || word_char_at(text, end)) continue;
          }
          seen[id] = 1;
          hits.push_back(id);
        }
      }
    }
    for (std::size_t h = first_hit; h < hits.size(); ++h) seen[hits[h]] = 0;
  }

  std::vector<std::uint32_t> distinct_matches(std::string_view text) const {
    std::vector<std::uint32_t> hits;
    std::vector<std::uint8_t> seen(patterns_.size(), 0);
    distinct_matches(text, hits, seen);
    return hits;
  }

 private:
  struct Node {
    Node() { next.fill(-1); }
    std::array<std::int32_t, 256> next;
    std::int32_t fail = 0;
    std::int32_t dict_link = 0;  // nearest proper suffix node with outputs (0 = none)
    std::vector<std::uint32_t> outputs;
  };

  void build_links() {
    std::queue<std::int32_t> bfs;
    for (int c = 0; c < 256; ++c) {
      std::int32_t child = nodes_[0].next[c];
      if (child < 0) {
        nodes_[0].next[c] = 0;
      } else {
        nodes_[child].fail = 0;
        nodes_[child].dict_link = 0;
        bfs.push(child);
      }
    }
    while (!bfs.empty()) {
      std::int32_t u = bfs.front();
      bfs.pop();
      for (int c = 0; c < 256; ++c) {
        std::int32_t v = nodes_[u].next[c];
        std::int32_t via_fail = nodes_[nodes_[u].fail].next[c];
        if (v < 0) {
          nodes_[u].next[c] = via_fail;
          continue;
        }
        nodes_[v].fail = via_fail;
        nodes_[v].dict_link = nodes_[via_fail].outputs.empty() ? nodes_[via_fail].dict_link : via_fail;
        bfs.push(v);
      }
    }
  }

  std::vector<std::string> patterns_;
  MatchMode mode_ = MatchMode::Substring;
  std::vector<Node> nodes_;
};

}  // namespace emocycle
