// ptk/topology.h

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

#ifndef PTK_TOPOLOGY_H_
#define PTK_TOPOLOGY_H_

#include <span>
#include <utility>
#include <vector>

#include "ptk/common.h"
#include "ptk/lexicon.h"
#include "ptk/scorer.h"

namespace ptk {

enum class StateKind { kLabel, kBlank, kSilence };
// kLoop: self-loop. kForward: advances the position by one. kEnter: moves
// into a blank/silence state without advancing.
enum class ArcKind { kLoop, kForward, kEnter };
enum class SilenceMode { kNone, kOptionalAtBoundaries };

/// One emitting state. `position` is the number of sequence labels emitted
/// once this state is occupied; `context` is the label history the state's
/// label is predicted from.
struct GraphState {
  int position = 0;
  int label = -1;
  StateKind kind = StateKind::kLabel;
  int context = -1;
};

struct GraphArc {
  int from = -1;
  int to = -1;
  ArcKind kind = ArcKind::kForward;
};

/// Alignment graph of a label sequence a_1^S with emissions on states.
///
/// RNA: label states L_1..L_S (no self-loop) interleaved with blank states
/// B_0..B_S (self-loop); each a_s is emitted exactly once.
/// HMM: one self-looping state per a_s, optionally with skippable silence
/// states at the sequence edges and after word-final labels.
///
/// Every accepting path is a state sequence of length T starting in an
/// initial state and ending in a final one.
class AlignmentGraph {
 public:
  Topology topology() const { return topology_; }
  const ContextSpace& contexts() const { return contexts_; }
  const std::vector<int>& labels() const { return labels_; }
  int NumStates() const { return static_cast<int>(states_.size()); }
  const GraphState& state(int i) const { return states_[i]; }
  const std::vector<GraphArc>& arcs() const { return arcs_; }
  const std::vector<int>& initial() const { return initial_; }
  const std::vector<int>& final() const { return final_; }
  bool IsFinal(int s) const { return is_final_[s]; }
  const std::vector<int>& incoming(int s) const { return incoming_[s]; }
  const std::vector<int>& outgoing(int s) const { return outgoing_[s]; }
  int special_label() const { return special_label_; }

 private:
  friend AlignmentGraph BuildAlignmentGraph(std::span<const int>, const LabelVocabulary&,
                                            SilenceMode, int, std::span<const bool>);
  int AddState(int position, int label, StateKind kind, int context);
  void AddArc(int from, int to, ArcKind kind);

  Topology topology_ = Topology::kRna;
  ContextSpace contexts_;
  std::vector<int> labels_;
  std::vector<GraphState> states_;
  std::vector<GraphArc> arcs_;
  std::vector<int> initial_;
  std::vector<int> final_;
  std::vector<bool> is_final_;
  std::vector<std::vector<int>> incoming_;
  std::vector<std::vector<int>> outgoing_;
  int special_label_ = -1;
};

/// Builds the graph for `labels` under the vocabulary's topology.
///
/// `word_ends` marks word-final positions for silence placement; when empty
/// the eow flags of the labels are used. Silence is only available for HMM.
AlignmentGraph BuildAlignmentGraph(std::span<const int> labels,
                                   const LabelVocabulary& vocab,
                                   SilenceMode silence_mode = SilenceMode::kNone,
                                   int context_order = 1,
                                   std::span<const bool> word_ends = {});

/// Frame-synchronous label sequence y and position sequence s, both length T.
struct AlignmentPath {
  std::vector<int> y;
  std::vector<int> s;
  bool operator==(const AlignmentPath&) const = default;
};

/// All accepting paths of exactly `num_frames` frames. Throws ResourceError
/// when there are more than `max_paths`.
std::vector<AlignmentPath> EnumerateAlignments(const AlignmentGraph& graph, int num_frames,
                                               long max_paths = 1000000);

/// Number of accepting paths of length `num_frames` (saturates at LONG_MAX).
long CountAlignments(const AlignmentGraph& graph, int num_frames);

/// Maps an alignment back to its label sequence: keeps y_u wherever s_u
/// advances. Throws ArgumentError on a malformed path.
std::vector<int> CollapseAlignment(const AlignmentPath& path, const LabelVocabulary& vocab);

/// log of the sum over all accepting paths of their probability. kLogZero if
/// there is no accepting path.
double ForwardScore(const AlignmentGraph& graph, const FrameScorer& scorer);

/// Best path and its log score. Among equal-scoring paths the one advancing
/// earliest wins, then the one with lower label ids. Infeasible graphs give
/// an empty path and kLogZero.
std::pair<AlignmentPath, double> ViterbiAlignment(const AlignmentGraph& graph,
                                                  const FrameScorer& scorer);

}  // namespace ptk

#endif  // PTK_TOPOLOGY_H_
