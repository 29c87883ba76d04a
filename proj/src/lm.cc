// src/lm.cc

// Copyright 2026 The ptk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ptk/lm.h"

#include <algorithm>

namespace ptk {

namespace {
constexpr double kLn10 = 2.302585092994045684;
}  // namespace

std::optional<int> NGramLM::FindWord(std::string_view word) const {
  auto it = word_index_.find(word);
  if (it == word_index_.end()) return std::nullopt;
  return it->second;
}

int NGramLM::WordIdOrUnk(std::string_view word) const {
  auto id = FindWord(word);
  return id ? *id : unk_;
}

int NGramLM::Intern(std::string_view word) {
  auto it = word_index_.find(word);
  if (it != word_index_.end()) return it->second;
  int id = static_cast<int>(words_.size());
  words_.emplace_back(word);
  word_index_.emplace(std::string(word), id);
  return id;
}

LmState NGramLM::InitialState() const {
  LmState s;
  if (order() > 1 && bos_ >= 0) s.history.push_back(bos_);
  return s;
}

std::pair<double, LmState> NGramLM::Score(const LmState& state, int word) const {
  LmState next;
  if (order() > 1) {
    next.history = state.history;
    next.history.push_back(word);
    const size_t keep = static_cast<size_t>(order() - 1);
    if (next.history.size() > keep)
      next.history.erase(next.history.begin(), next.history.end() - keep);
  }
  if (word < 0) return {kLogZero, next};
  const std::vector<int>& h = state.history;
  double backoff = 0.0;
  std::vector<int> key;
  for (size_t n = std::min(h.size(), static_cast<size_t>(order() - 1)) + 1; n >= 1; --n) {
    // n-gram of length n: last n-1 history words + word
    key.assign(h.end() - (n - 1), h.end());
    key.push_back(word);
    const auto& table = tables_[n - 1];
    auto it = table.find(key);
    if (it != table.end()) return {(backoff + it->second.log10_prob) * kLn10, next};
    if (n > 1) {
      key.pop_back();
      auto hit = tables_[n - 2].find(key);
      if (hit != tables_[n - 2].end()) backoff += hit->second.log10_backoff;
    }
  }
  return {kLogZero, next};
}

double NGramLM::UnigramScore(int word) const {
  if (word < 0 || tables_.empty()) return kLogZero;
  auto it = tables_[0].find({word});
  return it == tables_[0].end() ? kLogZero : it->second.log10_prob * kLn10;
}

NGramLM ParseArpa(std::string_view text) {
  NGramLM lm;
  std::vector<long> counts;
  int section = -1;  // -2: \data\, n >= 1: \n-grams:
  bool seen_data = false, seen_end = false;
  int line_no = 0;
  for (std::string_view raw : SplitChar(text, '\n')) {
    ++line_no;
    auto fail = [line_no](const std::string& why) {
      throw FormatError("ARPA line " + std::to_string(line_no) + ": " + why);
    };
    std::string_view line = Trim(raw);
    if (line.empty()) continue;
    if (seen_end) fail("content after \\end\\");
    if (line.front() == '\\') {
      if (line == "\\data\\") {
        if (seen_data) fail("duplicate \\data\\ section");
        seen_data = true;
        section = -2;
      } else if (line == "\\end\\") {
        seen_end = true;
      } else if (line.size() >= 9 && line.ends_with("-grams:")) {
        if (!seen_data) fail("n-gram section before \\data\\");
        long n = 0;
        try {
          n = ParseInt(line.substr(1, line.size() - 8), "n-gram order");
        } catch (const FormatError& e) {
          fail(e.what());
        }
        if (n < 1 || n > static_cast<long>(counts.size()))
          fail("section for undeclared order " + std::to_string(n));
        if (static_cast<int>(n) != section + 1 && !(section == -2 && n == 1))
          fail("n-gram sections out of order");
        section = static_cast<int>(n);
      } else {
        fail("unknown section '" + std::string(line) + "'");
      }
      continue;
    }
    if (section == -2) {
      if (!line.starts_with("ngram ")) fail("expected 'ngram N=count'");
      std::string_view spec = Trim(line.substr(6));
      size_t eq = spec.find('=');
      if (eq == std::string_view::npos) fail("expected 'ngram N=count'");
      long n = 0, c = 0;
      try {
        n = ParseInt(Trim(spec.substr(0, eq)), "order");
        c = ParseInt(Trim(spec.substr(eq + 1)), "count");
      } catch (const FormatError& e) {
        fail(e.what());
      }
      if (n != static_cast<long>(counts.size()) + 1 || c < 0) fail("bad ngram count line");
      counts.push_back(c);
      continue;
    }
    if (section < 1) fail("entry outside an n-gram section");
    auto fields = SplitWhitespace(line);
    const size_t n = static_cast<size_t>(section);
    if (fields.size() != n + 1 && fields.size() != n + 2)
      fail("expected " + std::to_string(n + 1) + " or " + std::to_string(n + 2) + " fields");
    NGramLM::Entry entry;
    try {
      entry.log10_prob = ParseDouble(fields[0], "log10 probability");
      if (fields.size() == n + 2) entry.log10_backoff = ParseDouble(fields[n + 1], "log10 backoff");
    } catch (const FormatError& e) {
      fail(e.what());
    }
    if (!std::isfinite(entry.log10_prob) || !std::isfinite(entry.log10_backoff))
      fail("non-finite score");
    std::vector<int> key;
    for (size_t k = 1; k <= n; ++k) {
      if (section > 1 && !lm.FindWord(fields[k]))
        fail("word '" + std::string(fields[k]) + "' missing from unigrams");
      key.push_back(lm.Intern(fields[k]));
    }
    if (lm.tables_.size() < n) lm.tables_.resize(n);
    if (n > 1) {
      std::vector<int> hist(key.begin(), key.end() - 1);
      if (!lm.tables_[n - 2].count(hist)) fail("n-gram history is not a listed (n-1)-gram");
    }
    if (!lm.tables_[n - 1].emplace(std::move(key), entry).second) fail("duplicate n-gram");
  }
  if (!seen_data) throw FormatError("ARPA text lacks \\data\\");
  if (!seen_end) throw FormatError("ARPA text lacks \\end\\");
  if (counts.empty()) throw FormatError("ARPA \\data\\ declares no n-grams");
  lm.tables_.resize(counts.size());
  for (size_t n = 0; n < counts.size(); ++n)
    if (static_cast<long>(lm.tables_[n].size()) != counts[n])
      throw FormatError("ARPA " + std::to_string(n + 1) + "-gram count mismatch: header says " +
                        std::to_string(counts[n]) + ", found " +
                        std::to_string(lm.tables_[n].size()));
  lm.bos_ = lm.FindWord(kSentenceBegin).value_or(-1);
  lm.eos_ = lm.FindWord(kSentenceEnd).value_or(-1);
  lm.unk_ = lm.FindWord(kUnknownWord).value_or(-1);
  return lm;
}

std::pair<double, LmState> LmScore(const NGramLM& lm, const LmState& state,
                                   std::string_view word) {
  return lm.Score(state, lm.WordIdOrUnk(word));
}

double SentenceLogProb(const NGramLM& lm, const std::vector<std::string>& words) {
  LmState state = lm.InitialState();
  double total = 0.0;
  for (const std::string& w : words) {
    auto [score, next] = LmScore(lm, state, w);
    total += score;
    state = std::move(next);
  }
  return total + lm.Score(state, lm.eos()).first;
}

LookaheadTable BuildLookahead(const NGramLM& lm, const PrefixTree& tree) {
  LookaheadTable la;
  for (const std::string& w : tree.words()) {
    int id = lm.WordIdOrUnk(w);
    if (id < 0)
      throw ConsistencyError("word '" + w + "' is not in the LM and there is no " +
                             std::string(kUnknownWord));
    la.lm_word_ids.push_back(id);
  }
  la.node_scores.assign(tree.NumNodes(), kLogZero);
  // Post-order: a node's value covers words on arcs below it; a leaf's value
  // is set from its incoming arc.
  auto visit = [&](auto&& self, int node) -> double {
    double best = kLogZero;
    for (int arc_id : tree.ArcsFrom(node)) {
      const TreeArc& arc = tree.Arc(arc_id);
      double below = self(self, arc.target);
      for (int w : arc.words) below = std::max(below, lm.UnigramScore(la.lm_word_ids[w]));
      la.node_scores[arc.target] = below;
      best = std::max(best, below);
    }
    return best;
  };
  double root = visit(visit, PrefixTree::kRoot);
  la.node_scores[PrefixTree::kRoot] = tree.words().empty() ? 0.0 : root;
  return la;
}

}  // namespace ptk
