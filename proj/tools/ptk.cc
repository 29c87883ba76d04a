// tools/ptk.cc

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

// Command-line front end: corpus generation, training, decoding, scoring and
// the verification batteries.
//
// Exit codes: 0 success, 1 verification or runtime failure, 2 usage or
// input format error.

#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ptk/alignment_io.h"
#include "ptk/common.h"
#include "ptk/experiment.h"
#include "ptk/lexicon.h"
#include "ptk/lm.h"
#include "ptk/model.h"
#include "ptk/search.h"
#include "ptk/synth.h"
#include "ptk/topology.h"
#include "ptk/training.h"
#include "ptk/verify.h"
#include "ptk/wer.h"

namespace {

using namespace ptk;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct LoadedModel {
  Checkpoint ck;
  Topology topology;
  AugmentMode augment;
};

LoadedModel LoadModel(const std::string& path) {
  LoadedModel m{ParseCheckpoint(ReadFile(path)), Topology::kRna, AugmentMode::kNone};
  auto get = [&](const char* key) {
    auto it = m.ck.header.find(key);
    if (it == m.ck.header.end())
      throw FormatError("checkpoint " + path + " lacks header field " + key);
    return it->second;
  };
  m.topology = ParseTopology(get("topology"));
  m.augment = ParseAugmentMode(get("augment"));
  return m;
}

LexiconSetup LoadLexicon(const std::string& path, Topology topology, AugmentMode mode,
                         int expected_labels) {
  LexiconSetup lm = PrepareLexicon(ParseLexicon(ReadFile(path)), topology, mode);
  if (expected_labels >= 0 && lm.vocab.Size() != expected_labels)
    throw ConsistencyError("lexicon yields " + std::to_string(lm.vocab.Size()) +
                           " labels but the checkpoint has " + std::to_string(expected_labels));
  return lm;
}

std::vector<Utterance> LoadUtterances(const std::string& align, const std::string& features) {
  return JoinCorpus(ParseAlignmentFile(ReadFile(align)), ReadFeatureDir(features));
}

int MakeSynth(const std::string& spec_path, const std::string& out) {
  SynthSpec spec = spec_path.empty() ? SynthSpec{} : ParseSynthSpec(ReadFile(spec_path));
  WriteSynthCorpus(SynthGenerate(spec), out);
  std::cout << "wrote synthetic corpus to " << out << '\n';
  return kExitOk;
}

struct TrainArgs {
  std::string config, lexicon, align, features, out;
  std::string dev_align, dev_features, state_out, resume;
  std::vector<std::string> overrides;
};

int Train(const TrainArgs& a) {
  TrainConfig cfg = a.config.empty() ? TrainConfig{} : ParseTrainConfig(ReadFile(a.config));
  for (const std::string& kv : a.overrides) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos) throw ArgumentError("--set expects key=value, got '" + kv + "'");
    SetConfigValue(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.Validate();
  LexiconSetup lex = LoadLexicon(a.lexicon, cfg.topology, cfg.augment, -1);
  std::vector<Utterance> train = LoadUtterances(a.align, a.features);
  std::vector<Utterance> dev;
  if (!a.dev_align.empty() || !a.dev_features.empty()) {
    if (a.dev_align.empty() || a.dev_features.empty())
      throw ArgumentError("--dev-align and --dev-features go together");
    dev = LoadUtterances(a.dev_align, a.dev_features);
  }
  Trainer trainer(cfg, lex.vocab, train, dev);
  TrainState state =
      a.resume.empty() ? trainer.InitialState() : ParseTrainState(ReadFile(a.resume));
  std::cout << "epoch\ttrain_loss\tdev_loss\tlr\n" << std::flush;
  trainer.Train(state, [&](const EpochRecord& r) {
    std::cout << FormatEpochRecord(r) << '\n' << std::flush;
    if (!a.state_out.empty()) WriteFile(a.state_out, FormatTrainState(state, cfg));
  });
  WriteFile(a.out, FormatModelCheckpoint(state.params, cfg));
  return kExitOk;
}

struct DecodeArgs {
  std::string ckpt, lexicon, lm, features, mode = "fullsum", out;
  double lm_scale = BeamConfig{}.lm_scale, beam = BeamConfig{}.beam;
  int max_hyps = BeamConfig{}.max_hyps;
  bool lookahead = false, recombine = false, no_silence = false;
};

int Decode(const DecodeArgs& a) {
  LoadedModel model = LoadModel(a.ckpt);
  const ScorerParamsd& params = model.ck.params;
  LexiconSetup lex =
      LoadLexicon(a.lexicon, model.topology, model.augment, params.dims.num_labels);
  PrefixTree tree = BuildPrefixTree(lex.lexicon, lex.vocab);
  NGramLM lm = ParseArpa(ReadFile(a.lm));
  BeamConfig cfg;
  cfg.mode = ParseDecodeMode(a.mode);
  cfg.lm_scale = a.lm_scale;
  cfg.beam = a.beam;
  cfg.max_hyps = a.max_hyps;
  cfg.lookahead = a.lookahead;
  cfg.word_end_recombination = a.recombine;
  cfg.hmm_silence = !a.no_silence;
  Decoder decoder(tree, lex.vocab, lm, cfg);
  std::string text;
  for (const auto& [utt, feats] : ReadFeatureDir(a.features)) {
    ModelScorer scorer(params, Encode<double>(params, feats));
    DecodeResult result = decoder.Decode(scorer);
    text += FormatDecodeLine(utt, result, decoder.WordStrings(result));
  }
  if (a.out.empty()) std::cout << text;
  else WriteFile(a.out, text);
  return kExitOk;
}

// Accepts plain transcripts and decoder output (`UTT<TAB>score<TAB>words`).
std::map<std::string, std::vector<std::string>> ReadHypotheses(const std::string& path) {
  std::string text = ReadFile(path);
  std::string plain;
  for (std::string_view line : SplitChar(text, '\n')) {
    auto cols = SplitChar(line, '\t');
    if (cols.size() == 3) {
      plain += std::string(cols[0]) + ' ' + std::string(cols[2]) + '\n';
    } else {
      plain += std::string(line) + '\n';
    }
  }
  return ParseTranscripts(plain);
}

int ScoreWer(const std::string& ref, const std::string& hyp) {
  WerCounts c = ScoreCorpus(ParseTranscripts(ReadFile(ref)), ReadHypotheses(hyp));
  std::cout << FormatWer(c) << '\n';
  return kExitOk;
}

int OracleCheck(const std::string& suite, uint64_t seed) {
  BatteryResult r;
  if (suite == "topology") r = TopologyOracleBattery(seed);
  else if (suite == "gradient") r = GradientBattery(seed);
  else if (suite == "search") r = SearchOracleBattery(seed);
  else if (suite == "normalization") r = NormalizationBattery(seed);
  else throw ArgumentError("unknown suite '" + suite + "'");
  std::cout << r.Summary() << '\n';
  for (const std::string& m : r.messages) std::cout << "  " << m << '\n';
  return r.ok() ? kExitOk : kExitFailure;
}

struct AlignArgs {
  std::string ckpt, lexicon, features, ref, out;
  bool no_silence = false;
};

// Viterbi alignment of each reference transcript (first pronunciation of
// every word), one `UTT<TAB>label label ...` line of frame labels each.
int Align(const AlignArgs& a) {
  LoadedModel model = LoadModel(a.ckpt);
  const ScorerParamsd& params = model.ck.params;
  LexiconSetup lex =
      LoadLexicon(a.lexicon, model.topology, model.augment, params.dims.num_labels);
  auto refs = ParseTranscripts(ReadFile(a.ref));
  std::string text;
  for (const auto& [utt, feats] : ReadFeatureDir(a.features)) {
    auto it = refs.find(utt);
    if (it == refs.end()) throw ConsistencyError("no transcript for utterance '" + utt + "'");
    std::vector<int> labels;
    std::vector<char> ends;
    for (const std::string& w : it->second) {
      auto entry = lex.lexicon.entries().find(w);
      if (entry == lex.lexicon.entries().end())
        throw ConsistencyError("word '" + w + "' is not in the lexicon");
      std::vector<int> ids = PronunciationIds(entry->second.front(), lex.vocab);
      labels.insert(labels.end(), ids.begin(), ids.end());
      ends.resize(labels.size(), 0);
      ends.back() = 1;
    }
    auto flags = std::make_unique<bool[]>(ends.size());
    for (size_t i = 0; i < ends.size(); ++i) flags[i] = ends[i];
    const SilenceMode silence = model.topology == Topology::kHmm && !a.no_silence
                                    ? SilenceMode::kOptionalAtBoundaries
                                    : SilenceMode::kNone;
    AlignmentGraph g = BuildAlignmentGraph(labels, lex.vocab, silence,
                                           params.dims.context_order,
                                           std::span<const bool>(flags.get(), ends.size()));
    ModelScorer scorer(params, Encode<double>(params, feats));
    auto [path, score] = ViterbiAlignment(g, scorer);
    if (path.y.empty())
      throw DecodeError("utterance '" + utt + "' is too short for its transcript");
    text += utt + '\t';
    for (size_t u = 0; u < path.y.size(); ++u) text += (u ? " " : "") + lex.vocab.Symbol(path.y[u]);
    text += '\n';
  }
  if (a.out.empty()) std::cout << text;
  else WriteFile(a.out, text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ptk: phoneme transducer toolkit"};
  app.require_subcommand(1);

  std::string spec_path, synth_out;
  auto* synth = app.add_subcommand("make-synth", "generate a synthetic corpus");
  synth->add_option("--spec", spec_path, "synthetic corpus spec (key=value)");
  synth->add_option("--out", synth_out, "output directory")->required();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "train a label scorer");
  train->add_option("--config", ta.config, "training config (key=value)");
  train->add_option("--lexicon", ta.lexicon, "lexicon file")->required();
  train->add_option("--align", ta.align, "training alignments")->required();
  train->add_option("--features", ta.features, "training feature directory")->required();
  train->add_option("--out", ta.out, "output checkpoint")->required();
  train->add_option("--dev-align", ta.dev_align, "dev alignments");
  train->add_option("--dev-features", ta.dev_features, "dev feature directory");
  train->add_option("--set", ta.overrides, "config override key=value (repeatable)");
  train->add_option("--state-out", ta.state_out, "write resumable state after every epoch");
  train->add_option("--resume", ta.resume, "resume from a saved state");

  DecodeArgs da;
  auto* decode = app.add_subcommand("decode", "beam-search decoding");
  decode->add_option("--ckpt", da.ckpt, "checkpoint")->required();
  decode->add_option("--lexicon", da.lexicon, "lexicon file")->required();
  decode->add_option("--lm", da.lm, "ARPA language model")->required();
  decode->add_option("--features", da.features, "feature directory")->required();
  decode->add_option("--mode", da.mode, "fullsum or viterbi")
      ->check(CLI::IsMember({"fullsum", "viterbi"}));
  decode->add_option("--lm-scale", da.lm_scale, "LM scale");
  decode->add_option("--beam", da.beam, "beam threshold (log score)");
  decode->add_option("--max-hyps", da.max_hyps, "maximum hypotheses per frame");
  decode->add_flag("--lookahead", da.lookahead, "unigram LM look-ahead");
  decode->add_flag("--word-end-recombination", da.recombine, "merge word histories (viterbi)");
  decode->add_flag("--no-silence", da.no_silence, "no silence at word boundaries (hmm)");
  decode->add_option("--out", da.out, "output file (default stdout)");

  std::string ref, hyp;
  auto* wer = app.add_subcommand("score-wer", "word error rate");
  wer->add_option("--ref", ref, "reference transcripts")->required();
  wer->add_option("--hyp", hyp, "hypotheses (transcripts or decode output)")->required();

  std::string suite;
  uint64_t seed = 0;
  auto* oracle = app.add_subcommand("oracle-check", "run a verification battery");
  oracle->add_option("--suite", suite, "topology, gradient, search or normalization")
      ->required()
      ->check(CLI::IsMember({"topology", "gradient", "search", "normalization"}));
  oracle->add_option("--seed", seed, "random seed");

  AlignArgs aa;
  auto* align = app.add_subcommand("align", "Viterbi forced alignment");
  align->add_option("--ckpt", aa.ckpt, "checkpoint")->required();
  align->add_option("--lexicon", aa.lexicon, "lexicon file")->required();
  align->add_option("--features", aa.features, "feature directory")->required();
  align->add_option("--ref", aa.ref, "reference transcripts")->required();
  align->add_flag("--no-silence", aa.no_silence, "no silence at word boundaries (hmm)");
  align->add_option("--out", aa.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) return MakeSynth(spec_path, synth_out);
    if (*train) return Train(ta);
    if (*decode) return Decode(da);
    if (*wer) return ScoreWer(ref, hyp);
    if (*oracle) return OracleCheck(suite, seed);
    if (*align) return Align(aa);
  } catch (const FormatError& e) {
    std::cerr << "ptk: format error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ArgumentError& e) {
    std::cerr << "ptk: usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConsistencyError& e) {
    std::cerr << "ptk: inconsistent input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "ptk: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
