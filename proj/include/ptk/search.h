// ptk/search.h

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

#ifndef PTK_SEARCH_H_
#define PTK_SEARCH_H_

#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ptk/lexicon.h"
#include "ptk/lm.h"
#include "ptk/model.h"
#include "ptk/scorer.h"

namespace ptk {

enum class DecodeMode { kFullSum, kViterbi };

std::string_view ToString(DecodeMode mode);
/// Accepts "fullsum" and "viterbi"; throws ArgumentError otherwise.
DecodeMode ParseDecodeMode(std::string_view name);

struct BeamConfig {
  DecodeMode mode = DecodeMode::kFullSum;
  double beam = 12.0;  // log-score margin from the best hypothesis
  int max_hyps = 512;
  double lm_scale = 0.5;
  bool lookahead = false;
  bool word_end_recombination = false;  // Viterbi mode only
  bool hmm_silence = true;  // optional silence at word boundaries (HMM)

  /// Throws ArgumentError on a negative beam or scale or max_hyps < 1.
  void Validate() const;
  /// Unbounded beam and hypothesis count.
  static BeamConfig Unpruned(DecodeMode mode, double lm_scale);
};

struct DecodeResult {
  std::vector<int> words;       // prefix-tree word ids
  std::vector<int> word_times;  // frame of each word's final label
  double score = 0.0;           // acoustic + lm_scale * LM, natural log
};

/// Time-synchronous beam search over a lexical prefix tree with n-gram
/// shallow fusion.
///
/// Hypotheses are keyed by (tree node, context, occupied HMM state, LM
/// state, word history). Full-sum mode merges equal keys by log-sum-exp;
/// Viterbi mode keeps the maximum and, with word-end recombination, merges
/// across word histories as well. After each frame hypotheses outside the
/// beam are dropped and the rest capped at max_hyps.
class Decoder {
 public:
  Decoder(const PrefixTree& tree, const LabelVocabulary& vocab, const NGramLM& lm,
          BeamConfig config);

  const BeamConfig& config() const { return config_; }
  const LookaheadTable& lookahead() const { return lookahead_; }

  /// Throws DecodeError when the beam empties or no hypothesis completes.
  DecodeResult Decode(const FrameScorer& scorer) const;

  std::vector<std::string> WordStrings(const DecodeResult& result) const;

 private:
  const PrefixTree& tree_;
  const LabelVocabulary& vocab_;
  const NGramLM& lm_;
  BeamConfig config_;
  LookaheadTable lookahead_;
};

/// Decodes encoder outputs `h` with the model's per-frame context tables.
DecodeResult DecodeUtterance(const ScorerParamsd& params, const MatrixT<double>& h,
                             const PrefixTree& tree, const LabelVocabulary& vocab,
                             const NGramLM& lm, const BeamConfig& config);

/// Score of one word sequence: over all pronunciation combinations, the
/// log-sum (full-sum) or maximum (Viterbi) of the alignment scores, plus
/// lm_scale times the sentence log-probability. kLogZero when no
/// pronunciation fits the frame count.
double ScoreWordSequence(const FrameScorer& scorer, const PrefixTree& tree,
                         const LabelVocabulary& vocab, const NGramLM& lm,
                         std::span<const int> words, DecodeMode mode, double lm_scale,
                         bool hmm_silence = true);

/// Brute-force search over all word sequences of at most `max_words` words
/// (default: frame count) whose pronunciations fit in the frames. Ties go to
/// the lexicographically smaller word-id sequence. Throws ResourceError when
/// more than `max_candidates` sequences would be scored and DecodeError when
/// none fits.
DecodeResult ExhaustiveDecode(const FrameScorer& scorer, const PrefixTree& tree,
                              const LabelVocabulary& vocab, const NGramLM& lm, DecodeMode mode,
                              double lm_scale, bool hmm_silence = true, int max_words = -1,
                              long max_candidates = 200000);

}  // namespace ptk

#endif  // PTK_SEARCH_H_
