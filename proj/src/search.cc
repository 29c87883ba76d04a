// src/search.cc

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

#include "ptk/search.h"

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <memory>

#include "ptk/topology.h"

namespace ptk {

std::string_view ToString(DecodeMode mode) {
  return mode == DecodeMode::kFullSum ? "fullsum" : "viterbi";
}

DecodeMode ParseDecodeMode(std::string_view name) {
  if (name == "fullsum") return DecodeMode::kFullSum;
  if (name == "viterbi") return DecodeMode::kViterbi;
  throw ArgumentError("unknown decode mode '" + std::string(name) + "'");
}

void BeamConfig::Validate() const {
  if (!(beam >= 0)) throw ArgumentError("beam threshold must be >= 0");
  if (max_hyps < 1) throw ArgumentError("max hypotheses must be >= 1");
  if (!(lm_scale >= 0) || std::isinf(lm_scale)) throw ArgumentError("LM scale must be >= 0");
}

BeamConfig BeamConfig::Unpruned(DecodeMode mode, double lm_scale) {
  BeamConfig c;
  c.mode = mode;
  c.beam = std::numeric_limits<double>::infinity();
  c.max_hyps = INT_MAX;
  c.lm_scale = lm_scale;
  return c;
}

namespace {

struct HypKey {
  int node = PrefixTree::kRoot;
  int ctx = 0;
  int loop_label = -1;  // occupied HMM state's label, -1 before the first frame
  int loop_ctx = -1;    // context that label was predicted from
  std::vector<int> lm_history;
  std::vector<int> words;  // empty when histories are recombined
  auto operator<=>(const HypKey&) const = default;
};

struct Hyp {
  double score = 0.0;
  LmState lm;
  std::vector<int> words;
  std::vector<int> times;
};

using HypMap = std::map<HypKey, Hyp>;

}  // namespace

Decoder::Decoder(const PrefixTree& tree, const LabelVocabulary& vocab, const NGramLM& lm,
                 BeamConfig config)
    : tree_(tree), vocab_(vocab), lm_(lm), config_(config) {
  config_.Validate();
  lookahead_ = BuildLookahead(lm_, tree_);
}

std::vector<std::string> Decoder::WordStrings(const DecodeResult& result) const {
  std::vector<std::string> out;
  for (int w : result.words) out.push_back(tree_.words()[w]);
  return out;
}

DecodeResult Decoder::Decode(const FrameScorer& scorer) const {
  const int num_frames = scorer.NumFrames();
  if (num_frames == 0) return {};
  if (scorer.NumLabels() != vocab_.Size())
    throw ArgumentError("scorer label count does not match the vocabulary");
  const ContextSpace& cs = scorer.contexts();
  const bool hmm = vocab_.topology() == Topology::kHmm;
  const bool viterbi = config_.mode == DecodeMode::kViterbi;
  const bool merge_histories = viterbi && config_.word_end_recombination;
  const double lambda = config_.lm_scale;
  const bool use_lm = lambda > 0;
  const int special = vocab_.SpecialId();
  auto la = [&](int node) {
    return use_lm && config_.lookahead ? lookahead_.node_scores[node] : 0.0;
  };

  auto add = [&](HypMap& map, HypKey key, Hyp hyp) {
    if (!std::isfinite(hyp.score)) return;
    if (merge_histories) key.words.clear();
    auto [it, inserted] = map.try_emplace(std::move(key), std::move(hyp));
    if (inserted) return;
    Hyp& old = it->second;
    const Hyp& h = hyp;
    if (!viterbi) {
      const double merged = LogAdd(old.score, h.score);
      if (h.score > old.score) old = h;
      old.score = merged;
    } else if (h.score > old.score || (h.score == old.score && h.words < old.words)) {
      old = h;
    }
  };

  // Emission of tree arc `arc_id` at frame t with the label term already in
  // `base`; branches into continuing and word-final successors.
  auto emit = [&](HypMap& next, const HypKey& key, const Hyp& hyp, int arc_id, double base,
                  int t) {
    const TreeArc& arc = tree_.Arc(arc_id);
    HypKey k = key;
    k.ctx = cs.Push(key.ctx, arc.label);
    k.loop_label = arc.label;
    k.loop_ctx = key.ctx;
    if (!tree_.IsLeaf(arc.target)) {
      HypKey kc = k;
      kc.node = arc.target;
      Hyp hc = hyp;
      hc.score = base + (use_lm ? lambda * (la(arc.target) - la(key.node)) : 0.0);
      add(next, std::move(kc), std::move(hc));
    }
    for (int w : arc.words) {
      HypKey kw = k;
      kw.node = PrefixTree::kRoot;
      Hyp hw = hyp;
      hw.score = base;
      if (use_lm) {
        auto [lp, state] = lm_.Score(hyp.lm, lookahead_.lm_word_ids[w]);
        if (IsLogZero(lp)) continue;
        hw.score += lambda * (lp - la(key.node) + la(PrefixTree::kRoot));
        hw.lm = std::move(state);
        kw.lm_history = hw.lm.history;
      }
      hw.words.push_back(w);
      hw.times.push_back(t);
      kw.words = hw.words;
      add(next, std::move(kw), std::move(hw));
    }
  };

  std::vector<std::pair<HypKey, Hyp>> beam;
  {
    HypKey k;
    k.ctx = cs.Sentinel();
    Hyp h;
    h.score = use_lm ? lambda * la(PrefixTree::kRoot) : 0.0;
    if (use_lm) {
      h.lm = lm_.InitialState();
      k.lm_history = h.lm.history;
    }
    beam.emplace_back(std::move(k), std::move(h));
  }

  for (int t = 0; t < num_frames; ++t) {
    HypMap next;
    for (const auto& [key, hyp] : beam) {
      std::span<const double> row = scorer.LogProbs(t, key.ctx);
      double leave = 0.0;
      if (hmm) {
        if (key.loop_label >= 0) {
          const double loop = scorer.LogProb(t, key.loop_ctx, key.loop_label);
          Hyp h = hyp;
          h.score += loop;
          add(next, key, std::move(h));
          leave = Log1mExp(loop);
        }
        const bool at_boundary = key.node == PrefixTree::kRoot && key.loop_label != special;
        if (config_.hmm_silence && at_boundary) {
          HypKey k = key;
          k.loop_label = special;
          k.loop_ctx = key.ctx;
          Hyp h = hyp;
          h.score += leave + row[special];
          add(next, std::move(k), std::move(h));
        }
      } else {
        Hyp h = hyp;
        h.score += row[special];
        add(next, key, std::move(h));
      }
      for (int arc_id : tree_.ArcsFrom(key.node))
        emit(next, key, hyp, arc_id, hyp.score + leave + row[tree_.Arc(arc_id).label], t);
    }
    if (next.empty())
      throw DecodeError("search beam is empty at frame " + std::to_string(t));

    double best = kLogZero;
    for (const auto& [key, hyp] : next) best = std::max(best, hyp.score);
    beam.clear();
    for (auto& [key, hyp] : next)
      if (!(hyp.score < best - config_.beam)) beam.emplace_back(key, std::move(hyp));
    if (beam.size() > static_cast<size_t>(config_.max_hyps)) {
      std::stable_sort(beam.begin(), beam.end(), [](const auto& a, const auto& b) {
        return a.second.score > b.second.score;
      });
      beam.resize(config_.max_hyps);
    }
  }

  // Complete hypotheses, grouped by word history.
  std::map<std::vector<int>, Hyp> finals;
  for (auto& [key, hyp] : beam) {
    if (key.node != PrefixTree::kRoot || hyp.words.empty()) continue;
    Hyp h = hyp;
    if (use_lm) {
      const double end = lm_.Score(hyp.lm, lm_.eos()).first;
      if (IsLogZero(end)) continue;
      h.score += lambda * (end - la(PrefixTree::kRoot));
    }
    auto [it, inserted] = finals.try_emplace(h.words, h);
    if (inserted) continue;
    Hyp& old = it->second;
    if (!viterbi) {
      const double merged = LogAdd(old.score, h.score);
      if (h.score > old.score) old = h;
      old.score = merged;
    } else if (h.score > old.score) {
      old = h;
    }
  }
  if (finals.empty())
    throw DecodeError("no hypothesis completes a word at the last frame " +
                      std::to_string(num_frames - 1));
  const Hyp* winner = nullptr;
  for (const auto& [words, hyp] : finals)
    if (!winner || hyp.score > winner->score) winner = &hyp;
  DecodeResult result;
  result.words = winner->words;
  result.word_times = winner->times;
  result.score = winner->score;
  return result;
}

DecodeResult DecodeUtterance(const ScorerParamsd& params, const MatrixT<double>& h,
                             const PrefixTree& tree, const LabelVocabulary& vocab,
                             const NGramLM& lm, const BeamConfig& config) {
  ModelScorer scorer(params, h);
  return Decoder(tree, vocab, lm, config).Decode(scorer);
}

namespace {

std::vector<std::vector<std::vector<int>>> PronunciationsByWord(const PrefixTree& tree) {
  std::vector<std::vector<std::vector<int>>> prons(tree.words().size());
  for (auto& [word, labels] : tree.EnumerateWords()) prons[word].push_back(std::move(labels));
  return prons;
}

double ScoreWithPronunciations(const FrameScorer& scorer,
                               const std::vector<std::vector<std::vector<int>>>& prons,
                               const PrefixTree& tree, const LabelVocabulary& vocab,
                               const NGramLM& lm, std::span<const int> words, DecodeMode mode,
                               double lm_scale, bool hmm_silence) {
  const int num_frames = scorer.NumFrames();
  const SilenceMode silence = vocab.topology() == Topology::kHmm && hmm_silence
                                  ? SilenceMode::kOptionalAtBoundaries
                                  : SilenceMode::kNone;
  double acoustic = kLogZero;
  std::vector<int> labels;
  std::vector<bool> ends;
  auto combine = [&](auto&& self, size_t i) -> void {
    if (static_cast<int>(labels.size()) > num_frames) return;
    if (i == words.size()) {
      auto flags = std::make_unique<bool[]>(ends.size());
      std::copy(ends.begin(), ends.end(), flags.get());
      std::span<const bool> word_ends(flags.get(), ends.size());
      AlignmentGraph g =
          BuildAlignmentGraph(labels, vocab, silence, scorer.contexts().order(), word_ends);
      const double s = mode == DecodeMode::kFullSum ? ForwardScore(g, scorer)
                                                    : ViterbiAlignment(g, scorer).second;
      acoustic = mode == DecodeMode::kFullSum ? LogAdd(acoustic, s) : std::max(acoustic, s);
      return;
    }
    for (const std::vector<int>& p : prons[words[i]]) {
      const size_t mark = labels.size();
      labels.insert(labels.end(), p.begin(), p.end());
      ends.resize(labels.size(), false);
      ends.back() = true;
      self(self, i + 1);
      labels.resize(mark);
      ends.resize(mark);
    }
  };
  combine(combine, 0);
  if (IsLogZero(acoustic) || lm_scale == 0) return acoustic;
  LookaheadTable la = BuildLookahead(lm, tree);
  LmState state = lm.InitialState();
  double lm_total = 0.0;
  for (int w : words) {
    auto [lp, next] = lm.Score(state, la.lm_word_ids[w]);
    lm_total += lp;
    state = std::move(next);
  }
  lm_total += lm.Score(state, lm.eos()).first;
  return acoustic + lm_scale * lm_total;
}

}  // namespace

double ScoreWordSequence(const FrameScorer& scorer, const PrefixTree& tree,
                         const LabelVocabulary& vocab, const NGramLM& lm,
                         std::span<const int> words, DecodeMode mode, double lm_scale,
                         bool hmm_silence) {
  for (int w : words)
    if (w < 0 || w >= static_cast<int>(tree.words().size()))
      throw ArgumentError("word id out of range");
  if (words.empty()) throw ArgumentError("word sequence is empty");
  return ScoreWithPronunciations(scorer, PronunciationsByWord(tree), tree, vocab, lm, words, mode,
                                 lm_scale, hmm_silence);
}

DecodeResult ExhaustiveDecode(const FrameScorer& scorer, const PrefixTree& tree,
                              const LabelVocabulary& vocab, const NGramLM& lm, DecodeMode mode,
                              double lm_scale, bool hmm_silence, int max_words,
                              long max_candidates) {
  const int num_frames = scorer.NumFrames();
  if (num_frames == 0) return {};
  if (max_words < 0) max_words = num_frames;
  const auto prons = PronunciationsByWord(tree);
  const int num_words = static_cast<int>(prons.size());
  std::vector<int> shortest(num_words, INT_MAX);
  for (int w = 0; w < num_words; ++w)
    for (const auto& p : prons[w]) shortest[w] = std::min(shortest[w], static_cast<int>(p.size()));

  DecodeResult best;
  best.score = kLogZero;
  bool found = false;
  long candidates = 0;
  std::vector<int> words;
  auto search = [&](auto&& self, int length) -> void {
    if (!words.empty()) {
      if (++candidates > max_candidates)
        throw ResourceError("exhaustive search exceeds " + std::to_string(max_candidates) +
                            " word sequences");
      const double s = ScoreWithPronunciations(scorer, prons, tree, vocab, lm, words, mode,
                                               lm_scale, hmm_silence);
      if (!IsLogZero(s) && (!found || s > best.score || (s == best.score && words < best.words))) {
        best.words = words;
        best.score = s;
        found = true;
      }
    }
    if (static_cast<int>(words.size()) == max_words) return;
    for (int w = 0; w < num_words; ++w) {
      if (shortest[w] == INT_MAX || length + shortest[w] > num_frames) continue;
      words.push_back(w);
      self(self, length + shortest[w]);
      words.pop_back();
    }
  };
  search(search, 0);
  if (!found) throw DecodeError("no word sequence fits " + std::to_string(num_frames) + " frames");
  return best;
}

}  // namespace ptk
