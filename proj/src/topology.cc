// src/topology.cc

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

#include "ptk/topology.h"

#include <algorithm>
#include <climits>
#include <tuple>

namespace ptk {

int AlignmentGraph::AddState(int position, int label, StateKind kind, int context) {
  states_.push_back({position, label, kind, context});
  incoming_.emplace_back();
  outgoing_.emplace_back();
  is_final_.push_back(false);
  return NumStates() - 1;
}

void AlignmentGraph::AddArc(int from, int to, ArcKind kind) {
  arcs_.push_back({from, to, kind});
  int id = static_cast<int>(arcs_.size()) - 1;
  outgoing_[from].push_back(id);
  incoming_[to].push_back(id);
}

AlignmentGraph BuildAlignmentGraph(std::span<const int> labels,
                                   const LabelVocabulary& vocab,
                                   SilenceMode silence_mode, int context_order,
                                   std::span<const bool> word_ends) {
  if (labels.empty()) throw ArgumentError("alignment graph needs a non-empty label sequence");
  if (!word_ends.empty() && word_ends.size() != labels.size())
    throw ArgumentError("word_ends length differs from label sequence length");
  for (int label : labels) {
    if (!vocab.IsValid(label)) throw ArgumentError("label id out of range");
    if (vocab.IsSpecial(label))
      throw ArgumentError("special label inside an alignment label sequence");
  }
  if (vocab.topology() == Topology::kRna && silence_mode != SilenceMode::kNone)
    throw ArgumentError("silence states are only defined for the HMM topology");

  AlignmentGraph g;
  g.topology_ = vocab.topology();
  g.contexts_ = ContextSpace(vocab.Size(), context_order);
  g.labels_.assign(labels.begin(), labels.end());
  g.special_label_ = vocab.SpecialId();
  const int num = static_cast<int>(labels.size());
  const int special = vocab.SpecialId();
  const ContextSpace& cs = g.contexts_;

  if (g.topology_ == Topology::kRna) {
    int ctx = cs.Sentinel();
    int blank = g.AddState(0, special, StateKind::kBlank, ctx);
    g.AddArc(blank, blank, ArcKind::kLoop);
    g.initial_.push_back(blank);
    int prev_label_state = -1;
    for (int s = 1; s <= num; ++s) {
      int label = labels[s - 1];
      int emit = g.AddState(s, label, StateKind::kLabel, ctx);
      g.AddArc(blank, emit, ArcKind::kForward);
      if (prev_label_state >= 0) g.AddArc(prev_label_state, emit, ArcKind::kForward);
      else g.initial_.push_back(emit);
      ctx = cs.Push(ctx, label);
      blank = g.AddState(s, special, StateKind::kBlank, ctx);
      g.AddArc(emit, blank, ArcKind::kEnter);
      g.AddArc(blank, blank, ArcKind::kLoop);
      prev_label_state = emit;
    }
    g.final_ = {prev_label_state, blank};
  } else {
    const bool silence = silence_mode == SilenceMode::kOptionalAtBoundaries;
    auto is_word_end = [&](int s) {
      return word_ends.empty() ? vocab.IsWordEnd(labels[s - 1]) : word_ends[s - 1];
    };
    int ctx = cs.Sentinel();
    std::vector<int> prev;  // states that may precede the next label state
    if (silence) {
      int sil = g.AddState(0, special, StateKind::kSilence, ctx);
      g.AddArc(sil, sil, ArcKind::kLoop);
      g.initial_.push_back(sil);
      prev.push_back(sil);
    }
    for (int s = 1; s <= num; ++s) {
      int label = labels[s - 1];
      int state = g.AddState(s, label, StateKind::kLabel, ctx);
      g.AddArc(state, state, ArcKind::kLoop);
      if (s == 1) g.initial_.push_back(state);
      for (int p : prev) g.AddArc(p, state, ArcKind::kForward);
      ctx = cs.Push(ctx, label);
      prev = {state};
      if (silence && (s == num || is_word_end(s))) {
        int sil = g.AddState(s, special, StateKind::kSilence, ctx);
        g.AddArc(state, sil, ArcKind::kEnter);
        g.AddArc(sil, sil, ArcKind::kLoop);
        prev.push_back(sil);
      }
    }
    g.final_ = prev;
  }
  for (int f : g.final_) g.is_final_[f] = true;
  return g;
}

namespace {

// Per-frame emission terms of every state: entering/looping score and, for
// HMM, the log non-loop probability of leaving the state.
struct FrameTerms {
  std::vector<double> enter;
  std::vector<double> leave;
};

std::vector<FrameTerms> ComputeFrameTerms(const AlignmentGraph& g, const FrameScorer& scorer) {
  if (!(scorer.contexts() == g.contexts()))
    throw ArgumentError("scorer context space does not match the alignment graph");
  const int num_frames = scorer.NumFrames();
  std::vector<FrameTerms> terms(num_frames);
  for (int t = 0; t < num_frames; ++t) {
    terms[t].enter.resize(g.NumStates());
    terms[t].leave.resize(g.NumStates());
    for (int i = 0; i < g.NumStates(); ++i) {
      const GraphState& st = g.state(i);
      double lp = scorer.LogProb(t, st.context, st.label);
      terms[t].enter[i] = lp;
      terms[t].leave[i] = g.topology() == Topology::kHmm ? Log1mExp(lp) : 0.0;
    }
  }
  return terms;
}

inline double ArcScore(const AlignmentGraph& g, const FrameTerms& terms, const GraphArc& arc) {
  if (g.topology() == Topology::kHmm && arc.from != arc.to)
    return terms.leave[arc.from] + terms.enter[arc.to];
  return terms.enter[arc.to];
}

}  // namespace

long CountAlignments(const AlignmentGraph& g, int num_frames) {
  if (num_frames <= 0) return 0;
  auto sat_add = [](long a, long b) { return a > LONG_MAX - b ? LONG_MAX : a + b; };
  std::vector<long> count(g.NumStates(), 0), next(g.NumStates());
  for (int s : g.initial()) count[s] = 1;
  for (int t = 1; t < num_frames; ++t) {
    std::fill(next.begin(), next.end(), 0);
    for (const GraphArc& arc : g.arcs()) next[arc.to] = sat_add(next[arc.to], count[arc.from]);
    count.swap(next);
  }
  long total = 0;
  for (int f : g.final()) total = sat_add(total, count[f]);
  return total;
}

std::vector<AlignmentPath> EnumerateAlignments(const AlignmentGraph& g, int num_frames,
                                               long max_paths) {
  long total = CountAlignments(g, num_frames);
  if (total > max_paths)
    throw ResourceError("alignment enumeration would produce " + std::to_string(total) +
                        " paths (limit " + std::to_string(max_paths) + ")");
  std::vector<AlignmentPath> out;
  out.reserve(total);
  if (num_frames <= 0) return out;
  std::vector<int> states;
  auto visit = [&](auto&& self, int state) -> void {
    states.push_back(state);
    if (static_cast<int>(states.size()) == num_frames) {
      if (g.IsFinal(state)) {
        AlignmentPath p;
        for (int st : states) {
          p.y.push_back(g.state(st).label);
          p.s.push_back(g.state(st).position);
        }
        out.push_back(std::move(p));
      }
    } else {
      for (int arc : g.outgoing(state)) self(self, g.arcs()[arc].to);
    }
    states.pop_back();
  };
  for (int s : g.initial()) visit(visit, s);
  return out;
}

std::vector<int> CollapseAlignment(const AlignmentPath& path, const LabelVocabulary& vocab) {
  if (path.y.size() != path.s.size())
    throw ArgumentError("alignment y and s sequences differ in length");
  std::vector<int> labels;
  int prev_s = 0;
  int prev_y = -1;
  for (size_t u = 0; u < path.y.size(); ++u) {
    int y = path.y[u];
    int step = path.s[u] - prev_s;
    if (!vocab.IsValid(y)) throw ArgumentError("alignment label out of range");
    if (step == 1) {
      if (vocab.IsSpecial(y))
        throw ArgumentError("alignment advances on a blank/silence frame at u=" +
                            std::to_string(u));
      labels.push_back(y);
    } else if (step == 0) {
      if (vocab.topology() == Topology::kRna) {
        if (!vocab.IsSpecial(y))
          throw ArgumentError("label emitted without advancing at u=" + std::to_string(u));
      } else if (!vocab.IsSpecial(y) && y != prev_y) {
        throw ArgumentError("HMM label changes without advancing at u=" + std::to_string(u));
      }
    } else {
      throw ArgumentError("transition sequence must advance by 0 or 1 at u=" +
                          std::to_string(u));
    }
    prev_s = path.s[u];
    prev_y = y;
  }
  return labels;
}

double ForwardScore(const AlignmentGraph& g, const FrameScorer& scorer) {
  const int num_frames = scorer.NumFrames();
  if (num_frames == 0) return kLogZero;
  std::vector<FrameTerms> terms = ComputeFrameTerms(g, scorer);
  std::vector<double> alpha(g.NumStates(), kLogZero), next(g.NumStates());
  for (int s : g.initial()) alpha[s] = terms[0].enter[s];
  for (int t = 1; t < num_frames; ++t) {
    for (int j = 0; j < g.NumStates(); ++j) {
      double acc = kLogZero;
      for (int a : g.incoming(j)) {
        const GraphArc& arc = g.arcs()[a];
        if (IsLogZero(alpha[arc.from])) continue;
        acc = LogAdd(acc, alpha[arc.from] + ArcScore(g, terms[t], arc));
      }
      next[j] = acc;
    }
    alpha.swap(next);
  }
  double total = kLogZero;
  for (int f : g.final()) total = LogAdd(total, alpha[f]);
  return total;
}

std::pair<AlignmentPath, double> ViterbiAlignment(const AlignmentGraph& g,
                                                  const FrameScorer& scorer) {
  const int num_frames = scorer.NumFrames();
  if (num_frames == 0) return {{}, kLogZero};
  std::vector<FrameTerms> terms = ComputeFrameTerms(g, scorer);
  const int n = g.NumStates();
  // beta[t][i]: best score of frames t+1..T-1 given state i at frame t.
  std::vector<std::vector<double>> beta(num_frames, std::vector<double>(n, kLogZero));
  for (int f : g.final()) beta[num_frames - 1][f] = 0.0;
  for (int t = num_frames - 2; t >= 0; --t) {
    for (int i = 0; i < n; ++i) {
      double best = kLogZero;
      for (int a : g.outgoing(i)) {
        const GraphArc& arc = g.arcs()[a];
        if (IsLogZero(beta[t + 1][arc.to])) continue;
        best = std::max(best, ArcScore(g, terms[t + 1], arc) + beta[t + 1][arc.to]);
      }
      beta[t][i] = best;
    }
  }
  // Preference among equal scores: higher position, then lower label id.
  auto prefer = [&g](int a, int b) {
    const GraphState& x = g.state(a);
    const GraphState& y = g.state(b);
    return std::make_tuple(-x.position, x.label, a) < std::make_tuple(-y.position, y.label, b);
  };
  int cur = -1;
  double best = kLogZero;
  for (int s : g.initial()) {
    double v = terms[0].enter[s] + beta[0][s];
    if (IsLogZero(beta[0][s])) continue;
    if (cur < 0 || v > best || (v == best && prefer(s, cur))) {
      cur = s;
      best = v;
    }
  }
  if (cur < 0 || IsLogZero(best)) return {{}, kLogZero};
  AlignmentPath path;
  path.y.push_back(g.state(cur).label);
  path.s.push_back(g.state(cur).position);
  for (int t = 1; t < num_frames; ++t) {
    int next = -1;
    double next_score = kLogZero;
    for (int a : g.outgoing(cur)) {
      const GraphArc& arc = g.arcs()[a];
      if (IsLogZero(beta[t][arc.to])) continue;
      double v = ArcScore(g, terms[t], arc) + beta[t][arc.to];
      if (next < 0 || v > next_score || (v == next_score && prefer(arc.to, next))) {
        next = arc.to;
        next_score = v;
      }
    }
    cur = next;
    path.y.push_back(g.state(cur).label);
    path.s.push_back(g.state(cur).position);
  }
  return {std::move(path), best};
}

}  // namespace ptk
