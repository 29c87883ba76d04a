// src/experiment.cc

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

#include "ptk/experiment.h"

#include <chrono>
#include <cstdio>
#include <map>

#include "ptk/lm.h"
#include "ptk/model.h"

namespace ptk {

namespace {

double SecondsSince(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<Utterance> ToUtterances(const std::vector<SynthUtterance>& synth) {
  std::vector<Utterance> out;
  out.reserve(synth.size());
  for (const SynthUtterance& u : synth) out.push_back({u.id, u.features, u.alignment});
  return out;
}

}  // namespace

LexiconSetup PrepareLexicon(const Lexicon& plain, Topology topology, AugmentMode mode) {
  LexiconSetup s;
  s.vocab = BuildVocabulary(plain, topology, mode);
  s.lexicon = mode == AugmentMode::kNone ? plain : AugmentLabels(plain, mode);
  return s;
}

std::string FormatDecodeLine(std::string_view utterance, const DecodeResult& result,
                             const std::vector<std::string>& words) {
  char score[64];
  std::snprintf(score, sizeof(score), "%.6f", result.score);
  std::string line = std::string(utterance) + '\t' + score + '\t';
  for (size_t i = 0; i < words.size(); ++i) line += (i ? " " : "") + words[i];
  return line + '\n';
}

ExperimentResult RunSynthExperiment(const SynthCorpus& corpus, const TrainConfig& train_config,
                                    const BeamConfig& beam_config) {
  train_config.Validate();
  beam_config.Validate();
  LexiconSetup lex = PrepareLexicon(ParseLexicon(corpus.lexicon), train_config.topology,
                                    train_config.augment);
  ExperimentResult r;

  auto start = std::chrono::steady_clock::now();
  Trainer trainer(train_config, lex.vocab, ToUtterances(corpus.train), ToUtterances(corpus.dev));
  TrainState state = trainer.InitialState();
  r.epochs = trainer.Train(state);
  r.checkpoint = FormatModelCheckpoint(state.params, train_config);
  r.train_seconds = SecondsSince(start);

  start = std::chrono::steady_clock::now();
  PrefixTree tree = BuildPrefixTree(lex.lexicon, lex.vocab);
  NGramLM lm = ParseArpa(corpus.arpa);
  Decoder decoder(tree, lex.vocab, lm, beam_config);
  std::map<std::string, std::vector<std::string>> refs, hyps;
  for (const SynthUtterance& u : corpus.dev) {
    ModelScorer scorer(state.params, Encode<double>(state.params, u.features));
    DecodeResult result = decoder.Decode(scorer);
    std::vector<std::string> words = decoder.WordStrings(result);
    r.hypotheses += FormatDecodeLine(u.id, result, words);
    refs[u.id] = u.words;
    hyps[u.id] = std::move(words);
  }
  r.wer = ScoreCorpus(refs, hyps);
  r.decode_seconds = SecondsSince(start);
  return r;
}

}  // namespace ptk
