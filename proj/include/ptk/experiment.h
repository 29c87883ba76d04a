// ptk/experiment.h

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

#ifndef PTK_EXPERIMENT_H_
#define PTK_EXPERIMENT_H_

#include <string>
#include <string_view>
#include <vector>

#include "ptk/lexicon.h"
#include "ptk/search.h"
#include "ptk/synth.h"
#include "ptk/training.h"
#include "ptk/wer.h"

namespace ptk {

struct LexiconSetup {
  Lexicon lexicon;  // augmented per mode
  LabelVocabulary vocab;
};

LexiconSetup PrepareLexicon(const Lexicon& plain, Topology topology, AugmentMode mode);

/// `UTT<TAB>score<TAB>word word ...` with the score at 6 decimals.
std::string FormatDecodeLine(std::string_view utterance, const DecodeResult& result,
                             const std::vector<std::string>& words);

struct ExperimentResult {
  std::vector<EpochRecord> epochs;
  std::string checkpoint;  // FormatModelCheckpoint text
  std::string hypotheses;  // decode lines of the dev set, in corpus order
  WerCounts wer;
  double train_seconds = 0.0;
  double decode_seconds = 0.0;
};

/// Trains on the corpus' train split, decodes its dev split with the corpus
/// LM and scores the result against the dev transcripts.
ExperimentResult RunSynthExperiment(const SynthCorpus& corpus, const TrainConfig& train_config,
                                    const BeamConfig& beam_config);

}  // namespace ptk

#endif  // PTK_EXPERIMENT_H_
