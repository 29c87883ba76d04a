// src/alignment_io.cc

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

#include "ptk/alignment_io.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

namespace ptk {

std::vector<FrameAlignment> ParseAlignmentFile(std::string_view text) {
  std::vector<FrameAlignment> out;
  std::map<std::string, size_t, std::less<>> index;
  int line_no = 0;
  for (std::string_view line : SplitChar(text, '\n')) {
    ++line_no;
    auto fail = [line_no](const std::string& why) {
      throw FormatError("alignment line " + std::to_string(line_no) + ": " + why);
    };
    if (!IsValidUtf8(line)) fail("invalid UTF-8");
    auto fields = SplitWhitespace(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    if (fields.size() != 5) fail("expected UTT LABEL BEGIN END WORD_END");
    Segment seg;
    seg.label = std::string(fields[1]);
    try {
      seg.begin = static_cast<int>(ParseInt(fields[2], "begin frame"));
      seg.end = static_cast<int>(ParseInt(fields[3], "end frame"));
    } catch (const FormatError& e) {
      fail(e.what());
    }
    if (fields[4] != "0" && fields[4] != "1") fail("WORD_END must be 0 or 1");
    seg.word_end = fields[4] == "1";
    if (seg.begin < 0 || seg.end < seg.begin) fail("segment with begin > end");
    auto [it, inserted] = index.try_emplace(std::string(fields[0]), out.size());
    if (inserted) out.push_back({std::string(fields[0]), {}});
    out[it->second].segments.push_back(std::move(seg));
  }
  for (FrameAlignment& al : out) {
    std::stable_sort(al.segments.begin(), al.segments.end(),
                     [](const Segment& a, const Segment& b) { return a.begin < b.begin; });
    int expected = 0;
    for (const Segment& seg : al.segments) {
      if (seg.begin < expected)
        throw FormatError("alignment of '" + al.utterance + "': overlap at frame " +
                          std::to_string(seg.begin));
      if (seg.begin > expected)
        throw FormatError("alignment of '" + al.utterance + "': gap at frame " +
                          std::to_string(expected));
      expected = seg.end + 1;
    }
  }
  return out;
}

std::string FormatAlignment(const FrameAlignment& alignment) {
  std::ostringstream os;
  for (const Segment& seg : alignment.segments)
    os << alignment.utterance << ' ' << seg.label << ' ' << seg.begin << ' ' << seg.end << ' '
       << (seg.word_end ? 1 : 0) << '\n';
  return os.str();
}

EmitPosition ParseEmitPosition(std::string_view text) {
  if (text == "segBeg") return EmitPosition::kSegBeg;
  if (text == "segMid") return EmitPosition::kSegMid;
  if (text == "segEnd") return EmitPosition::kSegEnd;
  throw ArgumentError("unknown emit position '" + std::string(text) + "'");
}

std::string_view ToString(EmitPosition pos) {
  switch (pos) {
    case EmitPosition::kSegBeg: return "segBeg";
    case EmitPosition::kSegMid: return "segMid";
    case EmitPosition::kSegEnd: return "segEnd";
  }
  return "segEnd";
}

FrameTargets FrameTargets::Slice(int begin, int length) const {
  FrameTargets out;
  auto take = [begin, length](const auto& v) {
    return std::decay_t<decltype(v)>(v.begin() + begin, v.begin() + begin + length);
  };
  out.labels = take(labels);
  out.kinds = take(kinds);
  out.weights = take(weights);
  out.segment_labels = take(segment_labels);
  return out;
}

std::vector<int> FrameTargets::Collapse(const LabelVocabulary& vocab) const {
  std::vector<int> out;
  for (int t = 0; t < NumFrames(); ++t)
    if (kinds[t] == TransitionKind::kEmit && !vocab.IsSpecial(labels[t]))
      out.push_back(labels[t]);
  return out;
}

std::vector<int> SegmentLabelIds(const FrameAlignment& alignment, const LabelVocabulary& vocab) {
  std::vector<int> ids;
  bool word_start = true;
  for (const Segment& seg : alignment.segments) {
    if (seg.IsSilence()) {
      ids.push_back(vocab.SpecialId());
      continue;
    }
    Phoneme p{seg.label, false, false};
    if (vocab.mode() != AugmentMode::kNone) p.eow = seg.word_end;
    if (vocab.mode() == AugmentMode::kSowEow) p.sow = word_start;
    auto id = vocab.Find(p);
    if (!id)
      throw ConsistencyError("alignment of '" + alignment.utterance + "': phoneme '" +
                             seg.label + "' not in vocabulary");
    ids.push_back(*id);
    word_start = seg.word_end;
  }
  return ids;
}

FrameTargets MakeFrameTargets(const FrameAlignment& alignment, const LabelVocabulary& vocab,
                              EmitPosition position, double boost) {
  if (boost < 1.0) throw ArgumentError("loss boost must be >= 1");
  const std::vector<int> ids = SegmentLabelIds(alignment, vocab);
  const int num_frames = alignment.NumFrames();
  const int special = vocab.SpecialId();
  FrameTargets out;
  out.labels.assign(num_frames, special);
  out.kinds.assign(num_frames, TransitionKind::kBlank);
  out.weights.assign(num_frames, 1.0);
  out.segment_labels.assign(num_frames, special);
  for (size_t i = 0; i < alignment.segments.size(); ++i) {
    const Segment& seg = alignment.segments[i];
    for (int t = seg.begin; t <= seg.end; ++t) out.segment_labels[t] = ids[i];
    if (vocab.topology() == Topology::kRna) {
      if (seg.IsSilence()) continue;
      int u = seg.end;
      if (position == EmitPosition::kSegBeg) u = seg.begin;
      else if (position == EmitPosition::kSegMid) u = (seg.begin + seg.end) / 2;
      out.labels[u] = ids[i];
      out.kinds[u] = TransitionKind::kEmit;
      out.weights[u] = boost;
    } else {
      for (int t = seg.begin; t <= seg.end; ++t) {
        out.labels[t] = ids[i];
        out.kinds[t] = t == seg.begin ? TransitionKind::kEmit : TransitionKind::kLoop;
        out.weights[t] = t == seg.begin ? boost : 1.0;
      }
    }
  }
  return out;
}

std::vector<int> ChunkOffsets(int num_frames, int chunk_size) {
  if (chunk_size <= 0 || chunk_size % 2 != 0)
    throw ArgumentError("chunk size must be positive and even, got " +
                        std::to_string(chunk_size));
  std::vector<int> offsets;
  const int step = chunk_size / 2;
  for (int off = 0; off < num_frames; off += step) {
    offsets.push_back(off);
    if (off + chunk_size >= num_frames) break;
  }
  return offsets;
}

std::vector<Chunk> MakeChunks(const std::string& utterance, const RowMatrix& features,
                              const FrameTargets& targets, int chunk_size) {
  if (features.rows() != targets.NumFrames())
    throw ArgumentError("'" + utterance + "': " + std::to_string(features.rows()) +
                        " feature frames but " + std::to_string(targets.NumFrames()) +
                        " target frames");
  std::vector<Chunk> chunks;
  const int num_frames = targets.NumFrames();
  for (int off : ChunkOffsets(num_frames, chunk_size)) {
    int len = std::min(chunk_size, num_frames - off);
    Chunk c;
    c.utterance = utterance;
    c.begin = off;
    c.features = features.middleRows(off, len);
    c.targets = targets.Slice(off, len);
    chunks.push_back(std::move(c));
  }
  return chunks;
}

std::vector<std::pair<std::string, RowMatrix>> ParseFeatures(std::string_view text) {
  std::vector<std::pair<std::string, RowMatrix>> out;
  std::vector<std::string_view> lines = SplitChar(text, '\n');
  size_t i = 0;
  auto fail = [&i](const std::string& why) {
    throw FormatError("feature line " + std::to_string(i + 1) + ": " + why);
  };
  while (i < lines.size()) {
    auto header = SplitWhitespace(lines[i]);
    if (header.empty()) {
      ++i;
      continue;
    }
    if (header.size() != 3) fail("expected header 'UTT_ID T D'");
    long frames = 0, dim = 0;
    try {
      frames = ParseInt(header[1], "frame count");
      dim = ParseInt(header[2], "feature dimension");
    } catch (const FormatError& e) {
      fail(e.what());
    }
    if (frames < 0 || dim <= 0) fail("bad feature block shape");
    RowMatrix m(frames, dim);
    for (long t = 0; t < frames; ++t) {
      ++i;
      if (i >= lines.size()) fail("truncated feature block");
      auto values = SplitWhitespace(lines[i]);
      if (static_cast<long>(values.size()) != dim) fail("wrong number of feature values");
      for (long d = 0; d < dim; ++d) {
        try {
          m(t, d) = ParseDouble(values[d], "feature value");
        } catch (const FormatError& e) {
          fail(e.what());
        }
      }
    }
    out.emplace_back(std::string(header[0]), std::move(m));
    ++i;
  }
  return out;
}

std::string FormatFeatures(const std::string& utterance, const RowMatrix& features) {
  std::string out = utterance + ' ' + std::to_string(features.rows()) + ' ' +
                    std::to_string(features.cols()) + '\n';
  char buf[32];
  for (Eigen::Index t = 0; t < features.rows(); ++t) {
    for (Eigen::Index d = 0; d < features.cols(); ++d) {
      std::snprintf(buf, sizeof(buf), "%.9g", features(t, d));
      if (d > 0) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::map<std::string, RowMatrix> ReadFeatureDir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ArgumentError("'" + dir + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::map<std::string, RowMatrix> out;
  for (const fs::path& f : files) {
    for (auto& [utt, m] : ParseFeatures(ReadFile(f.string()))) {
      if (!out.emplace(utt, std::move(m)).second)
        throw FormatError("duplicate feature block for '" + utt + "'");
    }
  }
  return out;
}

}  // namespace ptk
