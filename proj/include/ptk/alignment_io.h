// ptk/alignment_io.h

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

#ifndef PTK_ALIGNMENT_IO_H_
#define PTK_ALIGNMENT_IO_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ptk/common.h"
#include "ptk/lexicon.h"
#include "ptk/scorer.h"

namespace ptk {

struct Segment {
  std::string label;  // base phoneme name or "[SIL]"
  int begin = 0;      // first frame
  int end = 0;        // last frame, inclusive
  bool word_end = false;

  bool IsSilence() const { return label == kSilenceSymbol; }
  int length() const { return end - begin + 1; }
};

/// External frame alignment of one utterance: contiguous segments covering
/// frames 0..T-1.
struct FrameAlignment {
  std::string utterance;
  std::vector<Segment> segments;

  int NumFrames() const { return segments.empty() ? 0 : segments.back().end + 1; }
};

/// Parses `UTT LABEL BEGIN END WORD_END` lines. Utterances are returned in
/// order of first appearance; segments are sorted by begin frame.
std::vector<FrameAlignment> ParseAlignmentFile(std::string_view text);
std::string FormatAlignment(const FrameAlignment& alignment);

enum class TransitionKind { kEmit, kBlank, kLoop };
enum class EmitPosition { kSegBeg, kSegMid, kSegEnd };

EmitPosition ParseEmitPosition(std::string_view text);
std::string_view ToString(EmitPosition pos);

/// Frame-wise supervision derived from an alignment.
struct FrameTargets {
  std::vector<int> labels;             // target label per frame
  std::vector<TransitionKind> kinds;   // emit / blank / loop
  std::vector<double> weights;         // loss weight, >= 1
  std::vector<int> segment_labels;     // segment label per frame (encoder loss)

  int NumFrames() const { return static_cast<int>(labels.size()); }
  FrameTargets Slice(int begin, int length) const;
  /// Label sequence with blanks, loops and silence dropped.
  std::vector<int> Collapse(const LabelVocabulary& vocab) const;
};

/// Label id of every segment after eow/sow flagging (silence -> special id).
std::vector<int> SegmentLabelIds(const FrameAlignment& alignment, const LabelVocabulary& vocab);

/// RNA: one emit frame per speech segment at `position`, weighted by `boost`;
/// everything else blank with weight 1. HMM: each frame targets its
/// segment's label, first frame emit (weight `boost`), the rest loops.
FrameTargets MakeFrameTargets(const FrameAlignment& alignment, const LabelVocabulary& vocab,
                              EmitPosition position, double boost);

/// A training slice of one utterance. Label context at the chunk start is
/// always the sentinel.
struct Chunk {
  std::string utterance;
  int begin = 0;
  RowMatrix features;
  FrameTargets targets;

  int NumFrames() const { return targets.NumFrames(); }
};

/// Chunks of `chunk_size` frames starting at multiples of chunk_size / 2,
/// stopping at the first chunk that reaches the end. `chunk_size` must be
/// even.
std::vector<Chunk> MakeChunks(const std::string& utterance, const RowMatrix& features,
                              const FrameTargets& targets, int chunk_size);

/// Chunk start offsets for an utterance of `num_frames` frames.
std::vector<int> ChunkOffsets(int num_frames, int chunk_size);

/// Feature text: `UTT_ID T D` header followed by T lines of D numbers. A file
/// may hold several blocks.
std::vector<std::pair<std::string, RowMatrix>> ParseFeatures(std::string_view text);
std::string FormatFeatures(const std::string& utterance, const RowMatrix& features);
/// Reads every regular file in `dir` (sorted by name) as feature text.
std::map<std::string, RowMatrix> ReadFeatureDir(const std::string& dir);

}  // namespace ptk

#endif  // PTK_ALIGNMENT_IO_H_
