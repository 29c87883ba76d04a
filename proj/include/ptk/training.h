// ptk/training.h

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

#ifndef PTK_TRAINING_H_
#define PTK_TRAINING_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ptk/alignment_io.h"
#include "ptk/common.h"
#include "ptk/lexicon.h"
#include "ptk/model.h"

namespace ptk {

struct TrainConfig {
  // labels and targets
  Topology topology = Topology::kRna;
  AugmentMode augment = AugmentMode::kEow;
  EmitPosition emit_position = EmitPosition::kSegEnd;
  int chunk_size = 64;
  int batch_size = 4;

  // loss
  double label_smoothing = 0.2;
  double loss_boost = 5.0;
  double focal_gamma = 1.0;
  double aux_weight = 1.0;

  // optimizer and schedule
  double learning_rate = 0.001;
  double lr_decay = 0.9;
  double min_lr = 1e-5;
  double newbob_threshold = 0.001;
  bool nesterov = true;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int epochs = 30;             // pretraining + joint training
  int pretrain_epochs = 1;     // encoder-loss only
  int constant_lr_epochs = 4;  // joint epochs before Newbob may decay
  int sampling_epochs = 0;     // extra scheduled-sampling epochs, LR reset
  double sampling_rate = 0.5;
  uint64_t seed = 0;

  // model
  int context_order = 1;
  int embed_dim = 16;
  int ffnn_dim = 64;
  int model_dim = 64;
  bool encoder_hidden = true;
  int splice = 2;

  /// Throws ArgumentError if any field is out of range.
  void Validate() const;
  int TotalEpochs() const { return epochs + sampling_epochs; }
};

/// Sets one `key=value` field; unknown keys throw ArgumentError.
void SetConfigValue(TrainConfig& config, std::string_view key, std::string_view value);
/// Flat `key=value` text; '#' comments. Later lines override earlier ones.
TrainConfig ParseTrainConfig(std::string_view text, TrainConfig base = {});
std::string FormatTrainConfig(const TrainConfig& config);

/// Loss terms of one chunk. Contexts follow `context_labels` (the targets
/// themselves unless scheduled sampling mixed in other labels), starting from
/// the sentinel at the chunk's first frame.
///
/// RNA: one label term per frame. HMM: a label term per frame; emit frames
/// after the first additionally carry the previous state's non-loop term.
/// Throws ConsistencyError if targets do not fit the topology.
std::vector<RowTerm> BuildChunkTerms(const FrameTargets& targets, const LabelVocabulary& vocab,
                                     const ContextSpace& contexts,
                                     std::span<const int> context_labels = {});

/// Frame-wise CE loss of a chunk (mean over frames of the weighted terms plus
/// the focal encoder loss); gradient added to `grad` when non-null.
double ChunkLoss(const ScorerParamsd& params, const Chunk& chunk, const LabelVocabulary& vocab,
                 const LossOptions& options, ScorerParamsd* grad,
                 std::span<const int> context_labels = {});

/// Loss options a config implies for a training phase.
LossOptions MakeLossOptions(const TrainConfig& config, const LabelVocabulary& vocab,
                            int num_frames, bool output_loss);

/// Scheduled-sampling labels: round(rate * T) frames chosen uniformly
/// without replacement get a label drawn from that frame's pass-1
/// distribution (rows of `log_probs`); other frames keep their target.
/// `resampled` receives the chosen frames in ascending order.
std::vector<int> SampleMixedLabels(const RowMatrix& log_probs, const FrameTargets& targets,
                                   double rate, std::mt19937_64& rng,
                                   std::vector<int>* resampled = nullptr);

/// Two-pass scheduled sampling: pass 1 scores with ground-truth contexts,
/// pass 2 computes the loss against the original targets with mixed
/// contexts. Gradients come from pass 2 only.
double ScheduledSamplingLoss(const ScorerParamsd& params, const Chunk& chunk,
                             const LabelVocabulary& vocab, const LossOptions& options,
                             double rate, std::mt19937_64& rng, ScorerParamsd* grad);

struct Utterance {
  std::string id;
  RowMatrix features;
  FrameAlignment alignment;
};

/// Joins alignments with their features; throws ConsistencyError if an
/// utterance's features are missing or have the wrong length.
std::vector<Utterance> JoinCorpus(const std::vector<FrameAlignment>& alignments,
                                  const std::map<std::string, RowMatrix>& features);

struct TrainState {
  ScorerParamsd params;
  ScorerParamsd moment1, moment2;
  long step = 0;
  double lr = 0.0;
  int epoch = 0;
  double best_dev_loss = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_loss = 0.0;
  double lr = 0.0;  // learning rate used during the epoch
};

/// Checkpoint text of the parameters plus config-derived header fields.
std::string FormatModelCheckpoint(const ScorerParamsd& params, const TrainConfig& config);
/// Full resumable state: parameters, optimizer moments, schedule, RNG.
std::string FormatTrainState(const TrainState& state, const TrainConfig& config);
TrainState ParseTrainState(std::string_view text);

class Trainer {
 public:
  Trainer(TrainConfig config, LabelVocabulary vocab, const std::vector<Utterance>& train,
          const std::vector<Utterance>& dev);

  const TrainConfig& config() const { return config_; }
  const LabelVocabulary& vocab() const { return vocab_; }
  const std::vector<Chunk>& chunks() const { return chunks_; }

  TrainState InitialState() const;
  /// One epoch; the phase (pretraining, joint, sampling) follows state.epoch.
  EpochRecord RunEpoch(TrainState& state) const;
  /// Runs epochs until state.epoch reaches config().TotalEpochs().
  std::vector<EpochRecord> Train(
      TrainState& state, const std::function<void(const EpochRecord&)>& on_epoch = {}) const;
  /// Mean per-frame output CE on the dev utterances (no smoothing, unit
  /// weights, no encoder loss). 0 when there is no dev data.
  double DevLoss(const ScorerParamsd& params) const;

 private:
  void ApplyUpdate(TrainState& state, const ScorerParamsd& grad) const;

  TrainConfig config_;
  LabelVocabulary vocab_;
  std::vector<Chunk> chunks_;
  std::vector<Chunk> dev_;
  int input_dim_ = 0;
};

std::string FormatEpochRecord(const EpochRecord& record);

}  // namespace ptk

#endif  // PTK_TRAINING_H_
