// tests/topology_test.cc

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
#include <random>

#include "doctest.h"
#include "ptk/topology.h"
#include "ptk/verify.h"

namespace ptk {

namespace {

TableScorer UniformScorer(int num_labels, int num_frames) {
  ContextSpace cs(num_labels, 1);
  RowMatrix table = RowMatrix::Constant(cs.Size(), num_labels, -std::log(num_labels));
  return TableScorer(cs, std::vector<RowMatrix>(num_frames, table));
}

// Vocabulary x, y (+ eow variants when requested) plus the special label.
LabelVocabulary Vocab(Topology topology, AugmentMode mode = AugmentMode::kNone) {
  return LabelVocabulary({"x", "y"}, topology, mode);
}

double LogSumPaths(const AlignmentGraph& g, const FrameScorer& scorer, Topology topology,
                   bool use_max) {
  double acc = kLogZero;
  for (const AlignmentPath& p : EnumerateAlignments(g, scorer.NumFrames())) {
    double s = PathScore(p, topology, g.special_label(), scorer);
    acc = use_max ? std::max(acc, s) : LogAdd(acc, s);
  }
  return acc;
}

}  // namespace

TEST_CASE("rna graph path counts") {
  LabelVocabulary v = Vocab(Topology::kRna);
  const int x = 0, y = 1;
  std::vector<int> one = {x};
  for (int t = 1; t <= 6; ++t)
    CHECK(CountAlignments(BuildAlignmentGraph(one, v), t) == t);
  std::vector<int> two = {x, y};
  AlignmentGraph g = BuildAlignmentGraph(two, v);
  CHECK(EnumerateAlignments(g, 4).size() == 6);
  std::vector<int> three = {x, y, x};
  CHECK(EnumerateAlignments(BuildAlignmentGraph(three, v), 2).empty());
}

TEST_CASE("hmm graph path counts") {
  LabelVocabulary v = Vocab(Topology::kHmm);
  std::vector<int> two = {0, 1};
  AlignmentGraph g = BuildAlignmentGraph(two, v);
  CHECK(CountAlignments(g, 4) == 3);
  CHECK(EnumerateAlignments(g, 4).size() == 3);
}

TEST_CASE("hmm silence is optional at the edges of a word") {
  LabelVocabulary v = Vocab(Topology::kHmm, AugmentMode::kEow);
  const int x_eow = *v.Find(Phoneme{"x", true});
  std::vector<int> a = {x_eow};
  AlignmentGraph g = BuildAlignmentGraph(a, v, SilenceMode::kOptionalAtBoundaries);
  // T = 3: x-only, sil+x, x+sil, sil+sil+x... every split of 3 frames into
  // (leading silence, x >= 1, trailing silence).
  std::vector<AlignmentPath> paths = EnumerateAlignments(g, 3);
  CHECK(paths.size() == 6);
  bool leading = false, trailing = false;
  for (const AlignmentPath& p : paths) {
    CHECK(CollapseAlignment(p, v) == a);
    leading |= p.y.front() == v.SpecialId();
    trailing |= p.y.back() == v.SpecialId();
  }
  CHECK(leading);
  CHECK(trailing);
}

TEST_CASE("special label inside the sequence is rejected") {
  LabelVocabulary v = Vocab(Topology::kRna);
  std::vector<int> a = {0, v.SpecialId()};
  CHECK_THROWS_AS(BuildAlignmentGraph(a, v), ArgumentError);
}

TEST_CASE("collapse_alignment examples") {
  LabelVocabulary rna = Vocab(Topology::kRna);
  const int b = rna.SpecialId(), x = 0, y = 1;
  CHECK(CollapseAlignment({{b, x, b, y}, {0, 1, 1, 2}}, rna) == std::vector<int>{x, y});
  CHECK(CollapseAlignment({{x, x}, {1, 2}}, rna) == std::vector<int>{x, x});
  LabelVocabulary hmm = Vocab(Topology::kHmm);
  CHECK(CollapseAlignment({{x, x, y, y}, {1, 1, 2, 2}}, hmm) == std::vector<int>{x, y});
  CHECK_THROWS_AS(CollapseAlignment({{x, y}, {1, 3}}, rna), ArgumentError);
  CHECK_THROWS_AS(CollapseAlignment({{x, y}, {1}}, rna), ArgumentError);
}

TEST_CASE("forward_score closed forms") {
  LabelVocabulary rna = Vocab(Topology::kRna);
  std::vector<int> a = {0};
  TableScorer u3 = UniformScorer(3, 3);
  CHECK(ForwardScore(BuildAlignmentGraph(a, rna), u3) == doctest::Approx(std::log(1.0 / 9)));

  LabelVocabulary hmm({"x"}, Topology::kHmm, AugmentMode::kNone);
  TableScorer u2 = UniformScorer(2, 3);
  CHECK(ForwardScore(BuildAlignmentGraph(a, hmm), u2) == doctest::Approx(std::log(1.0 / 8)));
}

TEST_CASE("forward and viterbi match enumeration on random tables") {
  std::mt19937_64 rng(7);
  for (Topology top : {Topology::kRna, Topology::kHmm})
    for (int k : {1, 2}) {
      LabelVocabulary v = Vocab(top);
      ContextSpace cs(v.Size(), k);
      std::vector<int> a = {0, 1};
      AlignmentGraph g = BuildAlignmentGraph(a, v, SilenceMode::kNone, k);
      TableScorer s = RandomTableScorer(5, cs, rng);
      CHECK(ForwardScore(g, s) == doctest::Approx(LogSumPaths(g, s, top, false)).epsilon(1e-9));
      auto [path, score] = ViterbiAlignment(g, s);
      CHECK(score == doctest::Approx(LogSumPaths(g, s, top, true)).epsilon(1e-9));
      CHECK(PathScore(path, top, g.special_label(), s) == doctest::Approx(score).epsilon(1e-12));
      CHECK(score <= ForwardScore(g, s));
    }
}

TEST_CASE("viterbi tie-break and concentrated scorer") {
  LabelVocabulary v = Vocab(Topology::kRna);
  const int b = v.SpecialId(), x = 0;
  std::vector<int> a = {x};
  AlignmentGraph g = BuildAlignmentGraph(a, v);
  auto [path, score] = ViterbiAlignment(g, UniformScorer(3, 3));
  CHECK(score == doctest::Approx(std::log(1.0 / 27)));
  CHECK(path.y == std::vector<int>{x, b, b});
  CHECK(path.s == std::vector<int>{1, 1, 1});

  ContextSpace cs(3, 1);
  std::vector<RowMatrix> tables(3, RowMatrix::Constant(cs.Size(), 3, std::log(0.01)));
  for (RowMatrix& t : tables) t.col(b).setConstant(std::log(0.98));
  tables[2].setConstant(std::log(0.01));
  tables[2].col(x).setConstant(std::log(0.98));
  auto [peaked, ps] = ViterbiAlignment(g, TableScorer(cs, tables));
  CHECK(peaked.y == std::vector<int>{b, b, x});
  CHECK(ps == doctest::Approx(3 * std::log(0.98)));
}

TEST_CASE("infeasible graphs score log-zero") {
  LabelVocabulary v = Vocab(Topology::kHmm);
  std::vector<int> a = {0, 1, 0};
  AlignmentGraph g = BuildAlignmentGraph(a, v);
  TableScorer s = UniformScorer(3, 2);
  CHECK(IsLogZero(ForwardScore(g, s)));
  auto [path, score] = ViterbiAlignment(g, s);
  CHECK(IsLogZero(score));
  CHECK(path.y.empty());
}

TEST_CASE("enumeration guard") {
  LabelVocabulary v = Vocab(Topology::kRna);
  std::vector<int> a = {0};
  CHECK_THROWS_AS(EnumerateAlignments(BuildAlignmentGraph(a, v), 20, 10), ResourceError);
}

TEST_CASE("topology oracle battery") {
  BatteryResult r = TopologyOracleBattery(1, 3);
  INFO(r.Summary());
  CHECK(r.ok());
}

}  // namespace ptk
