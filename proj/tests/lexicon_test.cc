// tests/lexicon_test.cc

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

#include <algorithm>
#include <set>

#include "doctest.h"
#include "ptk/lexicon.h"

namespace ptk {

namespace {

Pronunciation Pron(std::initializer_list<const char*> bases) {
  Pronunciation p;
  for (const char* b : bases) p.push_back({b});
  return p;
}

}  // namespace

TEST_CASE("parse_lexicon single entry") {
  Lexicon lex = ParseLexicon("AB\ta b\n");
  CHECK(lex.NumWords() == 1);
  CHECK(lex.Inventory() == std::vector<std::string>{"a", "b"});
  CHECK(lex.entries().at("AB").front() == Pron({"a", "b"}));
}

TEST_CASE("parse_lexicon collapses duplicates and keeps variants") {
  Lexicon lex = ParseLexicon("# comment\nA\ta\nA\ta\nA\tb a\n");
  CHECK(lex.NumWords() == 1);
  CHECK(lex.entries().at("A").size() == 2);
}

TEST_CASE("parse_lexicon errors") {
  CHECK_THROWS_AS(ParseLexicon("A\t\n"), FormatError);
  CHECK_THROWS_AS(ParseLexicon("A\n"), FormatError);
  CHECK_THROWS_AS(ParseLexicon("A\t\xff\xfe\n"), FormatError);
  try {
    ParseLexicon("A\ta\nB\t\n");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find('2') != std::string::npos);
  }
}

TEST_CASE("augment_labels") {
  Lexicon lex = ParseLexicon("AB\ta b\nA\ta\n");
  Lexicon eow = AugmentLabels(lex, AugmentMode::kEow);
  const Pronunciation& ab = eow.entries().at("AB").front();
  CHECK(ab[0].Symbol() == "a");
  CHECK(ab[1].Symbol() == "b#eow");

  Lexicon se = AugmentLabels(lex, AugmentMode::kSowEow);
  CHECK(se.entries().at("A").front().front().Symbol() == "a#sow#eow");
  CHECK(se.entries().at("AB").front()[0].Symbol() == "a#sow");

  Lexicon none = AugmentLabels(lex, AugmentMode::kNone);
  CHECK(none.entries() == lex.entries());

  CHECK_THROWS_AS(AugmentLabels(eow, AugmentMode::kEow), StateError);
}

TEST_CASE("augment_labels is pure and invertible") {
  Lexicon lex = ParseLexicon("W1\ta b c\nW2\tc\nW3\tb b\n");
  for (AugmentMode m : {AugmentMode::kEow, AugmentMode::kSowEow}) {
    Lexicon x = AugmentLabels(lex, m), y = AugmentLabels(lex, m);
    CHECK(x.entries() == y.entries());
    for (const auto& [word, prons] : x.entries())
      for (size_t i = 0; i < prons.size(); ++i) {
        const Pronunciation& orig = lex.entries().at(word)[i];
        REQUIRE(prons[i].size() == orig.size());
        for (size_t j = 0; j < orig.size(); ++j) {
          CHECK(prons[i][j].base == orig[j].base);
          CHECK(prons[i][j].eow == (j + 1 == orig.size()));
          CHECK(prons[i][j].sow == (m == AugmentMode::kSowEow && j == 0));
        }
      }
  }
}

TEST_CASE("build_vocabulary sizes") {
  std::string text;
  for (int i = 0; i < 39; ++i) text += "W" + std::to_string(i) + "\tp" + std::to_string(i) + "\n";
  Lexicon lex = ParseLexicon(text);
  LabelVocabulary rna = BuildVocabulary(lex, Topology::kRna, AugmentMode::kEow);
  CHECK(rna.NumSpeechLabels() == 78);
  CHECK(rna.Size() == 79);
  CHECK(rna.Symbol(rna.SpecialId()) == kBlankSymbol);
  LabelVocabulary hmm = BuildVocabulary(lex, Topology::kHmm, AugmentMode::kSowEow);
  CHECK(hmm.Size() == 157);
  CHECK(hmm.Symbol(hmm.SpecialId()) == kSilenceSymbol);

  LabelVocabulary one = BuildVocabulary(ParseLexicon("A\ta\n"), Topology::kRna, AugmentMode::kNone);
  CHECK(one.Size() == 2);
}

TEST_CASE("vocabulary ids are dense, sorted and bijective") {
  Lexicon lex = ParseLexicon("X\tb a\n");
  LabelVocabulary v = BuildVocabulary(lex, Topology::kRna, AugmentMode::kEow);
  REQUIRE(v.Size() == 5);
  CHECK(v.Symbol(0) == "a");
  CHECK(v.Symbol(1) == "a#eow");
  CHECK(v.Symbol(2) == "b");
  CHECK(v.Symbol(3) == "b#eow");
  for (int id = 0; id < v.Size(); ++id) CHECK(v.FindSymbol(v.Symbol(id)) == id);
  CHECK_FALSE(v.Find(Phoneme{"c"}).has_value());
  CHECK_THROWS_AS(v.Id(Phoneme{"c"}), ConsistencyError);
}

TEST_CASE("build_prefix_tree shares prefixes") {
  Lexicon lex = AugmentLabels(ParseLexicon("AB\ta b\nAC\ta c\n"), AugmentMode::kEow);
  LabelVocabulary v = BuildVocabulary(lex, Topology::kRna, AugmentMode::kEow);
  PrefixTree tree = BuildPrefixTree(lex, v);
  CHECK(tree.NumNodes() == 4);
  REQUIRE(tree.ArcsFrom(PrefixTree::kRoot).size() == 1);
  const TreeArc& a = tree.Arc(tree.ArcsFrom(PrefixTree::kRoot)[0]);
  CHECK(v.Symbol(a.label) == "a");
  CHECK(a.words.empty());
  CHECK(tree.ArcsFrom(a.target).size() == 2);
  for (int arc : tree.ArcsFrom(a.target)) {
    CHECK(v.IsWordEnd(tree.Arc(arc).label));
    CHECK(tree.Arc(arc).words.size() == 1);
    CHECK(tree.IsLeaf(tree.Arc(arc).target));
  }
}

TEST_CASE("build_prefix_tree homophones share an arc") {
  Lexicon lex = AugmentLabels(ParseLexicon("TO\tt uw\nTWO\tt uw\n"), AugmentMode::kEow);
  LabelVocabulary v = BuildVocabulary(lex, Topology::kRna, AugmentMode::kEow);
  PrefixTree tree = BuildPrefixTree(lex, v);
  int word_arcs = 0;
  for (int i = 0; i < tree.NumArcs(); ++i)
    if (!tree.Arc(i).words.empty()) {
      ++word_arcs;
      CHECK(tree.Arc(i).words.size() == 2);
    }
  CHECK(word_arcs == 1);
}

TEST_CASE("build_prefix_tree degenerate and error cases") {
  Lexicon empty;
  LabelVocabulary v({"a"}, Topology::kRna, AugmentMode::kNone);
  PrefixTree tree = BuildPrefixTree(empty, v);
  CHECK(tree.NumNodes() == 1);
  CHECK(tree.NumArcs() == 0);

  Lexicon lex = ParseLexicon("B\tb\n");
  CHECK_THROWS_AS(BuildPrefixTree(lex, v), ConsistencyError);
}

TEST_CASE("prefix tree round trip") {
  Lexicon plain = ParseLexicon("A\ta b c\nB\ta b\nC\tc\nC\tc a\nD\tb b b\nE\ta b\n");
  for (AugmentMode m : {AugmentMode::kEow, AugmentMode::kSowEow}) {
    Lexicon lex = AugmentLabels(plain, m);
    LabelVocabulary v = BuildVocabulary(lex, Topology::kHmm, m);
    PrefixTree tree = BuildPrefixTree(lex, v);
    std::multiset<std::pair<std::string, std::vector<int>>> want, got;
    for (const auto& [word, prons] : lex.entries())
      for (const Pronunciation& p : prons) want.insert({word, PronunciationIds(p, v)});
    for (const auto& [w, labels] : tree.EnumerateWords()) got.insert({tree.words()[w], labels});
    CHECK(got == want);
    int labels = 0;
    for (const auto& [word, prons] : lex.entries())
      for (const Pronunciation& p : prons) labels += static_cast<int>(p.size());
    CHECK(tree.NumNodes() <= 1 + labels);
    for (int i = 0; i < tree.NumArcs(); ++i)
      CHECK(tree.Arc(i).words.empty() == !v.IsWordEnd(tree.Arc(i).label));
  }
}

}  // namespace ptk
