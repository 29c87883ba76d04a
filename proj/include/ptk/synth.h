// ptk/synth.h

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

#ifndef PTK_SYNTH_H_
#define PTK_SYNTH_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ptk/alignment_io.h"
#include "ptk/scorer.h"

namespace ptk {

/// Parameters of a synthetic corpus. Words are drawn from a generated back-off
/// bigram model; every phoneme segment emits its codeword plus Gaussian noise.
struct SynthSpec {
  uint64_t seed = 0;
  int num_words = 20;
  int num_phonemes = 5;
  int min_pron_length = 2;
  int max_pron_length = 4;
  int min_frames = 2;  // frames per phoneme
  int max_frames = 6;
  int feature_dim = 8;
  double noise = 0.3;
  int num_train = 200;
  int num_dev = 50;
  int min_sentence_words = 2;
  int max_sentence_words = 4;
  double silence_prob = 0.3;  // per boundary, including both edges
  int successors = 5;         // explicit bigrams per history
  int max_retries = 1000;

  /// Throws ArgumentError when a field is out of range.
  void Validate() const;
};

/// Flat `key=value` text, '#' comments; unknown keys throw ArgumentError.
SynthSpec ParseSynthSpec(std::string_view text, SynthSpec base = {});
std::string FormatSynthSpec(const SynthSpec& spec);

struct SynthUtterance {
  std::string id;
  std::vector<std::string> words;
  FrameAlignment alignment;
  RowMatrix features;
};

struct SynthCorpus {
  std::string lexicon;  // lexicon file text
  std::string arpa;     // bigram LM text
  std::vector<std::string> phonemes;
  RowMatrix codewords;  // one row per phoneme, silence last
  std::vector<SynthUtterance> train;
  std::vector<SynthUtterance> dev;
};

/// Deterministic per seed. Throws Error when distinct pronunciations cannot
/// be drawn within max_retries.
SynthCorpus SynthGenerate(const SynthSpec& spec);

/// Writes lexicon.txt, lm.arpa, {train,dev}.ali, {train,dev}.ref and
/// {train,dev}_feats/feats.txt under `dir` (created if needed).
void WriteSynthCorpus(const SynthCorpus& corpus, const std::string& dir);

}  // namespace ptk

#endif  // PTK_SYNTH_H_
