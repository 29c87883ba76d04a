// tests/alignment_io_test.cc

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

#include "doctest.h"
#include "ptk/alignment_io.h"

namespace ptk {

namespace {

FrameAlignment OneSegment(const char* label, int begin, int end, bool word_end) {
  FrameAlignment al;
  al.utterance = "u";
  al.segments.push_back({label, begin, end, word_end});
  return al;
}

}  // namespace

TEST_CASE("parse_alignment_file two segments") {
  auto als = ParseAlignmentFile("u1 a 0 3 0\nu1 b 4 5 1\n");
  REQUIRE(als.size() == 1);
  CHECK(als[0].utterance == "u1");
  CHECK(als[0].NumFrames() == 6);
  REQUIRE(als[0].segments.size() == 2);
  CHECK(als[0].segments[1].label == "b");
  CHECK(als[0].segments[1].word_end);
  CHECK(ParseAlignmentFile(FormatAlignment(als[0]))[0].segments.size() == 2);
}

TEST_CASE("parse_alignment_file peaky segments") {
  auto als = ParseAlignmentFile("u a 0 0 0\nu [SIL] 1 4 0\nu b 5 6 1\nu c 7 7 1\n");
  REQUIRE(als.size() == 1);
  CHECK(als[0].NumFrames() == 8);
  CHECK(als[0].segments[1].IsSilence());
}

TEST_CASE("parse_alignment_file errors") {
  CHECK_THROWS_AS(ParseAlignmentFile("u a 0 3 0\nu b 3 5 1\n"), FormatError);
  CHECK_THROWS_AS(ParseAlignmentFile("u a 0 3 0\nu b 5 5 1\n"), FormatError);
  CHECK_THROWS_AS(ParseAlignmentFile("u a 1 3 0\n"), FormatError);
  CHECK_THROWS_AS(ParseAlignmentFile("u a 3 2 0\n"), FormatError);
  CHECK_THROWS_AS(ParseAlignmentFile("u a 0 3\n"), FormatError);
  CHECK_THROWS_AS(ParseAlignmentFile("u a 0 3 2\n"), FormatError);
  try {
    ParseAlignmentFile("utt7 a 0 3 0\nutt7 b 3 5 1\n");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("utt7") != std::string::npos);
  }
}

TEST_CASE("frame_targets rna positions") {
  LabelVocabulary v({"a"}, Topology::kRna, AugmentMode::kNone);
  const int a = 0, b = v.SpecialId();
  FrameAlignment al = OneSegment("a", 0, 3, false);
  FrameTargets end = MakeFrameTargets(al, v, EmitPosition::kSegEnd, 5.0);
  CHECK(end.labels == std::vector<int>{b, b, b, a});
  CHECK(end.weights == std::vector<double>{1, 1, 1, 5});
  CHECK(MakeFrameTargets(al, v, EmitPosition::kSegBeg, 5.0).labels == std::vector<int>{a, b, b, b});
  CHECK(MakeFrameTargets(al, v, EmitPosition::kSegMid, 5.0).labels == std::vector<int>{b, a, b, b});
}

TEST_CASE("frame_targets hmm") {
  LabelVocabulary v({"a"}, Topology::kHmm, AugmentMode::kNone);
  FrameTargets t = MakeFrameTargets(OneSegment("a", 0, 3, false), v, EmitPosition::kSegEnd, 5.0);
  CHECK(t.labels == std::vector<int>{0, 0, 0, 0});
  CHECK(t.kinds == std::vector<TransitionKind>{TransitionKind::kEmit, TransitionKind::kLoop,
                                               TransitionKind::kLoop, TransitionKind::kLoop});
  CHECK(t.weights == std::vector<double>{5, 1, 1, 1});
}

TEST_CASE("frame_targets eow flags, silence and collapse") {
  auto al = ParseAlignmentFile("u [SIL] 0 1 0\nu a 2 3 0\nu b 4 6 1\nu [SIL] 7 7 0\n")[0];
  LabelVocabulary v({"a", "b"}, Topology::kRna, AugmentMode::kEow);
  FrameTargets t = MakeFrameTargets(al, v, EmitPosition::kSegEnd, 5.0);
  CHECK(t.NumFrames() == 8);
  CHECK(t.Collapse(v) == std::vector<int>{v.Id({"a"}), v.Id({"b", true})});
  int emits = 0;
  for (TransitionKind k : t.kinds) emits += k == TransitionKind::kEmit;
  CHECK(emits == 2);
  CHECK(t.labels[0] == v.SpecialId());
  CHECK(t.labels[7] == v.SpecialId());

  LabelVocabulary hmm({"a", "b"}, Topology::kHmm, AugmentMode::kEow);
  FrameTargets h = MakeFrameTargets(al, hmm, EmitPosition::kSegEnd, 1.0);
  CHECK(h.labels[0] == hmm.SpecialId());
  CHECK(h.Collapse(hmm) == std::vector<int>{hmm.Id({"a"}), hmm.Id({"b", true})});

  LabelVocabulary other({"c"}, Topology::kRna, AugmentMode::kEow);
  CHECK_THROWS_AS(MakeFrameTargets(al, other, EmitPosition::kSegEnd, 1.0), ConsistencyError);
}

TEST_CASE("make_chunks offsets") {
  CHECK(ChunkOffsets(256, 128) == std::vector<int>{0, 64, 128});
  CHECK(ChunkOffsets(100, 128) == std::vector<int>{0});
  CHECK(ChunkOffsets(192, 128) == std::vector<int>{0, 64});
  CHECK_THROWS_AS(ChunkOffsets(100, 127), ArgumentError);
}

TEST_CASE("make_chunks coverage is exhaustive") {
  for (int size : {2, 8, 128})
    for (int n = 1; n <= 512; ++n) {
      std::vector<int> cover(n, 0);
      std::vector<int> offsets = ChunkOffsets(n, size);
      bool ok = true;
      for (size_t i = 0; i < offsets.size(); ++i) {
        ok &= offsets[i] == static_cast<int>(i) * size / 2;
        for (int t = offsets[i]; t < std::min(n, offsets[i] + size); ++t) ++cover[t];
      }
      for (int t = 0; t < n; ++t) ok &= cover[t] >= 1 && cover[t] <= 2;
      ok &= offsets.back() + size >= n;
      INFO("size " << size << " frames " << n);
      CHECK(ok);
    }
}

TEST_CASE("make_chunks slices features and targets") {
  LabelVocabulary v({"a"}, Topology::kRna, AugmentMode::kNone);
  FrameTargets t = MakeFrameTargets(OneSegment("a", 0, 9, false), v, EmitPosition::kSegEnd, 5.0);
  RowMatrix x(10, 2);
  for (int i = 0; i < 10; ++i) x.row(i) << i, -i;
  std::vector<Chunk> chunks = MakeChunks("u", x, t, 4);
  REQUIRE(chunks.size() == 4);
  CHECK(chunks[3].begin == 6);
  CHECK(chunks[3].NumFrames() == 4);
  CHECK(chunks[3].features(0, 0) == 6);
  CHECK(chunks[3].targets.labels.back() == 0);
  CHECK(chunks[3].targets.weights.back() == 5);
  RowMatrix short_x(9, 2);
  CHECK_THROWS(MakeChunks("u", short_x, t, 4));
}

TEST_CASE("feature text round trip") {
  RowMatrix x(3, 2);
  x << 0.1, -2.5, 1e-7, 3, 4.25, -0.0;
  auto parsed = ParseFeatures(FormatFeatures("u1", x) + FormatFeatures("u2", x.topRows(1)));
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].first == "u1");
  CHECK(parsed[0].second == x);
  CHECK(parsed[1].second.rows() == 1);
  CHECK_THROWS_AS(ParseFeatures("u1 2 2\n1 2\n"), FormatError);
  CHECK_THROWS_AS(ParseFeatures("u1 1 2\n1 x\n"), FormatError);
}

}  // namespace ptk
