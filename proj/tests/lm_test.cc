// tests/lm_test.cc

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

#include <cmath>

#include "doctest.h"
#include "lm_fixture.h"
#include "ptk/lm.h"

namespace ptk {

namespace {

constexpr double kLn10 = 2.302585092994045684;

constexpr const char* kUnigramArpa = R"(\data\
ngram 1=2

\1-grams:
-0.3 a
-0.5 b

\end\
)";

PrefixTree TreeOf(const std::string& lexicon_text, LabelVocabulary* vocab_out) {
  Lexicon lex = AugmentLabels(ParseLexicon(lexicon_text), AugmentMode::kEow);
  *vocab_out = BuildVocabulary(lex, Topology::kRna, AugmentMode::kEow);
  return BuildPrefixTree(lex, *vocab_out);
}

}  // namespace

TEST_CASE("parse_arpa unigram model") {
  NGramLM lm = ParseArpa(kUnigramArpa);
  CHECK(lm.order() == 1);
  CHECK(lm.NumEntries(1) == 2);
  LmState s = lm.InitialState();
  auto [score, next] = LmScore(lm, s, "a");
  CHECK(score == doctest::Approx(-0.3 * kLn10));
  CHECK(next.history.empty());
  CHECK(IsLogZero(LmScore(lm, s, "zzz").first));
}

TEST_CASE("parse_arpa errors") {
  std::string good = testing::kBigramArpa;
  auto replaced = [&](const std::string& from, const std::string& to) {
    std::string t = good;
    t.replace(t.find(from), from.size(), to);
    return t;
  };
  CHECK_NOTHROW(ParseArpa(good));
  CHECK_THROWS_AS(ParseArpa(replaced("ngram 2=4", "ngram 2=5")), FormatError);
  CHECK_THROWS_AS(ParseArpa(replaced("\\2-grams:", "\\bigrams:")), FormatError);
  CHECK_THROWS_AS(ParseArpa(replaced("-0.40 a b", "x a b")), FormatError);
  CHECK_THROWS_AS(ParseArpa(replaced("-0.40 a b", "-0.40 a q")), FormatError);
  CHECK_THROWS_AS(ParseArpa(replaced("\\end\\", "")), FormatError);
  try {
    ParseArpa(replaced("-0.40 a b", "x a b"));
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 15") != std::string::npos);
  }
}

TEST_CASE("lm_score back-off") {
  NGramLM lm = ParseArpa(testing::kBigramArpa);
  CHECK(lm.order() == 2);
  LmState s = lm.InitialState();
  auto [direct, after_a] = LmScore(lm, s, "a");
  CHECK(direct == doctest::Approx(-0.25 * kLn10));
  CHECK(after_a.history == std::vector<int>{*lm.FindWord("a")});
  auto [backed, unused] = LmScore(lm, after_a, "c");
  CHECK(backed == doctest::Approx((-0.20 - 0.90) * kLn10));
  CHECK(LmScore(lm, after_a, "c") == LmScore(lm, after_a, "c"));
  CHECK(LmScore(lm, s, "oov").first == LmScore(lm, s, "<unk>").first);
}

TEST_CASE("sentence scores match hand evaluation") {
  NGramLM lm = ParseArpa(testing::kBigramArpa);
  for (const auto& s : testing::HandScoredSentences())
    CHECK(std::abs(SentenceLogProb(lm, s.words) - s.log10_prob * kLn10) < 1e-10);
}

TEST_CASE("lookahead single word and shared prefix") {
  LabelVocabulary v;
  PrefixTree one = TreeOf("a\tx y\n", &v);
  NGramLM uni = ParseArpa(kUnigramArpa);
  LookaheadTable la = BuildLookahead(uni, one);
  for (double s : la.node_scores) CHECK(s == doctest::Approx(-0.3 * kLn10));

  PrefixTree two = TreeOf("a\tx y\nb\tx z\n", &v);
  LookaheadTable lb = BuildLookahead(uni, two);
  const TreeArc& first = two.Arc(two.ArcsFrom(PrefixTree::kRoot)[0]);
  CHECK(lb.node_scores[first.target] == doctest::Approx(-0.3 * kLn10));
  for (int arc : two.ArcsFrom(first.target)) {
    double want = two.words()[two.Arc(arc).words[0]] == "a" ? -0.3 : -0.5;
    CHECK(lb.node_scores[two.Arc(arc).target] == doctest::Approx(want * kLn10));
  }
  CHECK(lb.node_scores[PrefixTree::kRoot] == doctest::Approx(-0.3 * kLn10));

  PrefixTree missing = TreeOf("q\tx\n", &v);
  CHECK_THROWS_AS(BuildLookahead(uni, missing), ConsistencyError);
}

TEST_CASE("lookahead is admissible and telescopes") {
  NGramLM lm = ParseArpa(testing::kBigramArpa);
  LabelVocabulary v;
  PrefixTree tree = TreeOf("a\tx y z\nb\tx y\nc\tx z\nd\ty\n<unk>\tz z\n", &v);
  LookaheadTable la = BuildLookahead(lm, tree);
  const double root = la.node_scores[PrefixTree::kRoot];
  std::vector<LmState> states = {lm.InitialState()};
  for (const char* w : {"a", "b", "c", "</s>"})
    states.push_back(LmScore(lm, lm.InitialState(), w).second);
  for (const auto& [w, labels] : tree.EnumerateWords()) {
    const int lm_word = la.lm_word_ids[w];
    for (const LmState& state : states) {
      const double cond = lm.Score(state, lm_word).first;
      // Anticipated scores along the path, then the word-end correction.
      double total = root;
      int node = PrefixTree::kRoot;
      for (size_t i = 0; i < labels.size(); ++i) {
        CHECK(la.node_scores[node] >= lm.UnigramScore(lm_word));
        const TreeArc& arc = tree.Arc(*tree.FindArc(node, labels[i]));
        if (i + 1 < labels.size()) total += la.node_scores[arc.target] - la.node_scores[node];
        else total += cond - la.node_scores[node] + root;
        node = arc.target;
      }
      CHECK(std::abs((total - root) - cond) < 1e-12);
    }
  }
}

}  // namespace ptk
