// src/training.cc

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

#include "ptk/training.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ptk {

void TrainConfig::Validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ArgumentError("invalid training config: " + what);
  };
  require(chunk_size > 0 && chunk_size % 2 == 0, "chunk_size must be positive and even");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(label_smoothing >= 0 && label_smoothing < 1, "label_smoothing must be in [0,1)");
  require(loss_boost >= 1, "loss_boost must be >= 1");
  require(focal_gamma >= 0, "focal_gamma must be >= 0");
  require(aux_weight >= 0, "aux_weight must be >= 0");
  require(learning_rate > 0, "learning_rate must be positive");
  require(lr_decay > 0 && lr_decay < 1, "lr_decay must be in (0,1)");
  require(min_lr >= 0, "min_lr must be >= 0");
  require(sampling_rate >= 0 && sampling_rate <= 1, "sampling_rate must be in [0,1]");
  require(epochs >= 0 && pretrain_epochs >= 0 && constant_lr_epochs >= 0 && sampling_epochs >= 0,
          "epoch counts must be >= 0");
  require(context_order == 1 || context_order == 2, "context_order must be 1 or 2");
  require(embed_dim > 0 && ffnn_dim > 0 && model_dim > 0, "model dims must be positive");
  require(splice >= 0, "splice must be >= 0");
}

void SetConfigValue(TrainConfig& c, std::string_view key, std::string_view value) {
  auto d = [&] { return ParseDouble(value, key); };
  auto i = [&] { return static_cast<int>(ParseInt(value, key)); };
  auto b = [&] {
    if (value == "1" || value == "true") return true;
    if (value == "0" || value == "false") return false;
    throw ArgumentError("bad boolean for " + std::string(key) + ": '" + std::string(value) + "'");
  };
  try {
    if (key == "topology") c.topology = ParseTopology(value);
    else if (key == "augment") c.augment = ParseAugmentMode(value);
    else if (key == "emit_position") c.emit_position = ParseEmitPosition(value);
    else if (key == "chunk_size") c.chunk_size = i();
    else if (key == "batch_size") c.batch_size = i();
    else if (key == "label_smoothing") c.label_smoothing = d();
    else if (key == "loss_boost") c.loss_boost = d();
    else if (key == "focal_gamma") c.focal_gamma = d();
    else if (key == "aux_weight") c.aux_weight = d();
    else if (key == "learning_rate") c.learning_rate = d();
    else if (key == "lr_decay") c.lr_decay = d();
    else if (key == "min_lr") c.min_lr = d();
    else if (key == "newbob_threshold") c.newbob_threshold = d();
    else if (key == "nesterov") c.nesterov = b();
    else if (key == "adam_beta1") c.adam_beta1 = d();
    else if (key == "adam_beta2") c.adam_beta2 = d();
    else if (key == "adam_epsilon") c.adam_epsilon = d();
    else if (key == "epochs") c.epochs = i();
    else if (key == "pretrain_epochs") c.pretrain_epochs = i();
    else if (key == "constant_lr_epochs") c.constant_lr_epochs = i();
    else if (key == "sampling_epochs") c.sampling_epochs = i();
    else if (key == "sampling_rate") c.sampling_rate = d();
    else if (key == "seed") c.seed = static_cast<uint64_t>(ParseInt(value, key));
    else if (key == "context_order") c.context_order = i();
    else if (key == "embed_dim") c.embed_dim = i();
    else if (key == "ffnn_dim") c.ffnn_dim = i();
    else if (key == "model_dim") c.model_dim = i();
    else if (key == "encoder_hidden") c.encoder_hidden = b();
    else if (key == "splice") c.splice = i();
    else throw ArgumentError("unknown config key '" + std::string(key) + "'");
  } catch (const FormatError& e) {
    throw ArgumentError(e.what());
  }
}

TrainConfig ParseTrainConfig(std::string_view text, TrainConfig base) {
  int line_no = 0;
  for (std::string_view line : SplitChar(text, '\n')) {
    ++line_no;
    line = Trim(line);
    if (line.empty() || line.front() == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ArgumentError("config line " + std::to_string(line_no) + ": expected key=value");
    SetConfigValue(base, Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
  return base;
}

std::string FormatTrainConfig(const TrainConfig& c) {
  std::ostringstream os;
  os << "topology=" << ToString(c.topology) << '\n'
     << "augment=" << ToString(c.augment) << '\n'
     << "emit_position=" << ToString(c.emit_position) << '\n'
     << "chunk_size=" << c.chunk_size << '\n'
     << "batch_size=" << c.batch_size << '\n'
     << "label_smoothing=" << FormatDouble(c.label_smoothing) << '\n'
     << "loss_boost=" << FormatDouble(c.loss_boost) << '\n'
     << "focal_gamma=" << FormatDouble(c.focal_gamma) << '\n'
     << "aux_weight=" << FormatDouble(c.aux_weight) << '\n'
     << "learning_rate=" << FormatDouble(c.learning_rate) << '\n'
     << "lr_decay=" << FormatDouble(c.lr_decay) << '\n'
     << "min_lr=" << FormatDouble(c.min_lr) << '\n'
     << "newbob_threshold=" << FormatDouble(c.newbob_threshold) << '\n'
     << "nesterov=" << (c.nesterov ? 1 : 0) << '\n'
     << "adam_beta1=" << FormatDouble(c.adam_beta1) << '\n'
     << "adam_beta2=" << FormatDouble(c.adam_beta2) << '\n'
     << "adam_epsilon=" << FormatDouble(c.adam_epsilon) << '\n'
     << "epochs=" << c.epochs << '\n'
     << "pretrain_epochs=" << c.pretrain_epochs << '\n'
     << "constant_lr_epochs=" << c.constant_lr_epochs << '\n'
     << "sampling_epochs=" << c.sampling_epochs << '\n'
     << "sampling_rate=" << FormatDouble(c.sampling_rate) << '\n'
     << "seed=" << c.seed << '\n'
     << "context_order=" << c.context_order << '\n'
     << "embed_dim=" << c.embed_dim << '\n'
     << "ffnn_dim=" << c.ffnn_dim << '\n'
     << "model_dim=" << c.model_dim << '\n'
     << "encoder_hidden=" << (c.encoder_hidden ? 1 : 0) << '\n'
     << "splice=" << c.splice << '\n';
  return os.str();
}

std::vector<RowTerm> BuildChunkTerms(const FrameTargets& targets, const LabelVocabulary& vocab,
                                     const ContextSpace& contexts,
                                     std::span<const int> context_labels) {
  const int n = targets.NumFrames();
  if (context_labels.empty()) context_labels = targets.labels;
  if (static_cast<int>(context_labels.size()) != n)
    throw ArgumentError("context label sequence length differs from chunk length");
  const int special = vocab.SpecialId();
  std::vector<RowTerm> terms;
  terms.reserve(2 * n);
  int ctx = contexts.Sentinel();

  if (vocab.topology() == Topology::kRna) {
    for (int t = 0; t < n; ++t) {
      const int label = targets.labels[t];
      const bool blank_kind = targets.kinds[t] == TransitionKind::kBlank;
      if (targets.kinds[t] == TransitionKind::kLoop || blank_kind != (label == special))
        throw ConsistencyError("RNA targets: frame " + std::to_string(t) +
                               " kind does not match its label");
      terms.push_back({t, ctx, label, targets.weights[t], TermKind::kLabel});
      if (context_labels[t] != special) ctx = contexts.Push(ctx, context_labels[t]);
    }
    return terms;
  }

  int cur_label = -1;  // label of the occupied state
  int cur_ctx = ctx;   // context that label was predicted from
  for (int t = 0; t < n; ++t) {
    const int label = targets.labels[t];
    const double w = targets.weights[t];
    if (targets.kinds[t] == TransitionKind::kBlank)
      throw ConsistencyError("HMM targets contain a blank frame");
    const bool enter = t == 0 || targets.kinds[t] == TransitionKind::kEmit;
    if (!enter) {
      if (label != cur_label)
        throw ConsistencyError("HMM targets: loop frame " + std::to_string(t) +
                               " changes label");
      terms.push_back({t, cur_ctx, label, w, TermKind::kLabel});
      continue;
    }
    if (cur_label >= 0) terms.push_back({t, cur_ctx, cur_label, w, TermKind::kNonLoop});
    terms.push_back({t, ctx, label, w, TermKind::kLabel});
    cur_label = label;
    cur_ctx = ctx;
    if (context_labels[t] != special) ctx = contexts.Push(ctx, context_labels[t]);
  }
  return terms;
}

LossOptions MakeLossOptions(const TrainConfig& config, const LabelVocabulary& vocab,
                            int num_frames, bool output_loss) {
  LossOptions opt;
  // Smoothing applies to the RNA output loss only.
  opt.label_smoothing =
      output_loss && vocab.topology() == Topology::kRna ? config.label_smoothing : 0.0;
  opt.aux_weight = config.aux_weight;
  opt.focal_gamma = config.focal_gamma;
  opt.normalizer = std::max(1, num_frames);
  return opt;
}

double ChunkLoss(const ScorerParamsd& params, const Chunk& chunk, const LabelVocabulary& vocab,
                 const LossOptions& options, ScorerParamsd* grad,
                 std::span<const int> context_labels) {
  std::vector<RowTerm> terms =
      BuildChunkTerms(chunk.targets, vocab, params.contexts(), context_labels);
  return EvaluateLoss<double>(params, chunk.features, terms, chunk.targets.segment_labels,
                              options, grad);
}

std::vector<int> SampleMixedLabels(const RowMatrix& log_probs, const FrameTargets& targets,
                                   double rate, std::mt19937_64& rng,
                                   std::vector<int>* resampled) {
  if (rate < 0 || rate > 1) throw ArgumentError("sampling rate must be in [0,1]");
  const int n = targets.NumFrames();
  std::vector<int> mixed = targets.labels;
  const int count = static_cast<int>(std::floor(rate * n + 0.5));
  std::vector<int> frames(n);
  std::iota(frames.begin(), frames.end(), 0);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(frames[i], frames[pick(rng)]);
  }
  frames.resize(count);
  std::sort(frames.begin(), frames.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t : frames) {
    const double u = unit(rng);
    double cum = 0.0;
    int choice = static_cast<int>(log_probs.cols()) - 1;
    for (int j = 0; j < log_probs.cols(); ++j) {
      cum += std::exp(log_probs(t, j));
      if (u < cum) {
        choice = j;
        break;
      }
    }
    // Tail short of 1: last label with non-zero mass.
    if (cum <= u)
      while (choice > 0 && IsLogZero(log_probs(t, choice))) --choice;
    mixed[t] = choice;
  }
  if (resampled) *resampled = frames;
  return mixed;
}

double ScheduledSamplingLoss(const ScorerParamsd& params, const Chunk& chunk,
                             const LabelVocabulary& vocab, const LossOptions& options,
                             double rate, std::mt19937_64& rng, ScorerParamsd* grad) {
  const int n = chunk.NumFrames();
  std::vector<RowTerm> terms = BuildChunkTerms(chunk.targets, vocab, params.contexts());
  // Pass 1: the distribution of each frame's label term under ground truth.
  MatrixT<double> h = Encode<double>(params, chunk.features);
  RowMatrix dist(n, vocab.Size());
  for (const RowTerm& term : terms) {
    if (term.kind != TermKind::kLabel) continue;
    dist.row(term.frame) = ScoreStep<double>(params, h.row(term.frame), term.context);
  }
  std::vector<int> mixed = SampleMixedLabels(dist, chunk.targets, rate, rng);
  return ChunkLoss(params, chunk, vocab, options, grad, mixed);
}

std::vector<Utterance> JoinCorpus(const std::vector<FrameAlignment>& alignments,
                                  const std::map<std::string, RowMatrix>& features) {
  std::vector<Utterance> out;
  for (const FrameAlignment& al : alignments) {
    auto it = features.find(al.utterance);
    if (it == features.end())
      throw ConsistencyError("no features for utterance '" + al.utterance + "'");
    if (it->second.rows() != al.NumFrames())
      throw ConsistencyError("utterance '" + al.utterance + "': " +
                             std::to_string(it->second.rows()) + " feature frames vs " +
                             std::to_string(al.NumFrames()) + " aligned frames");
    out.push_back({al.utterance, it->second, al});
  }
  return out;
}

std::string FormatModelCheckpoint(const ScorerParamsd& params, const TrainConfig& config) {
  CheckpointHeader extra{{"topology", std::string(ToString(config.topology))},
                         {"augment", std::string(ToString(config.augment))},
                         {"nesterov", config.nesterov ? "1" : "0"}};
  return FormatCheckpoint(params, extra);
}

std::string FormatTrainState(const TrainState& state, const TrainConfig& config) {
  std::string out = FormatModelCheckpoint(state.params, config);
  for (auto [name, m] : state.moment1.Tensors())
    if (m->size() > 0) out += FormatTensor("opt.m." + std::string(name), *m);
  for (auto [name, m] : state.moment2.Tensors())
    if (m->size() > 0) out += FormatTensor("opt.v." + std::string(name), *m);
  std::ostringstream rng;
  rng << state.rng;
  out += "state step=" + std::to_string(state.step) + " lr=" + FormatDouble(state.lr) +
         " epoch=" + std::to_string(state.epoch) +
         " best_dev=" + FormatDouble(state.best_dev_loss) + '\n';
  out += "rng " + rng.str() + '\n';
  return out;
}

TrainState ParseTrainState(std::string_view text) {
  Checkpoint ck = ParseCheckpoint(text);
  TrainState st;
  st.params = ck.params;
  st.moment1 = st.params.ZerosLike();
  st.moment2 = st.params.ZerosLike();
  auto take = [&ck](const std::string& prefix, ScorerParamsd& target) {
    for (auto& [name, m] : target.Tensors()) {
      if (m->size() == 0) continue;
      auto it = ck.extra_tensors.find(prefix + std::string(name));
      if (it == ck.extra_tensors.end())
        throw FormatError("train state lacks tensor " + prefix + std::string(name));
      if (it->second.rows() != m->rows() || it->second.cols() != m->cols())
        throw FormatError("train state tensor " + prefix + std::string(name) + " has wrong shape");
      *m = it->second;
    }
  };
  take("opt.m.", st.moment1);
  take("opt.v.", st.moment2);
  bool have_state = false, have_rng = false;
  for (const std::string& line : ck.trailing_lines) {
    auto fields = SplitWhitespace(line);
    if (fields.empty()) continue;
    if (fields[0] == "state") {
      for (size_t i = 1; i < fields.size(); ++i) {
        size_t eq = fields[i].find('=');
        if (eq == std::string_view::npos) throw FormatError("bad state field");
        std::string_view key = fields[i].substr(0, eq), value = fields[i].substr(eq + 1);
        if (key == "step") st.step = ParseInt(value, key);
        else if (key == "lr") st.lr = ParseDouble(value, key);
        else if (key == "epoch") st.epoch = static_cast<int>(ParseInt(value, key));
        else if (key == "best_dev") st.best_dev_loss = ParseDouble(value, key);
        else throw FormatError("unknown state field '" + std::string(key) + "'");
      }
      have_state = true;
    } else if (fields[0] == "rng") {
      std::istringstream is(std::string(Trim(std::string_view(line).substr(3))));
      is >> st.rng;
      if (!is) throw FormatError("bad rng state");
      have_rng = true;
    } else {
      throw FormatError("unexpected line in train state: '" + line + "'");
    }
  }
  if (!have_state || !have_rng) throw FormatError("train state lacks state/rng lines");
  return st;
}

Trainer::Trainer(TrainConfig config, LabelVocabulary vocab, const std::vector<Utterance>& train,
                 const std::vector<Utterance>& dev)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
  config_.Validate();
  if (vocab_.topology() != config_.topology || vocab_.mode() != config_.augment)
    throw ConsistencyError("vocabulary does not match the training config");
  if (train.empty()) throw ArgumentError("training corpus is empty");
  input_dim_ = static_cast<int>(train.front().features.cols());
  // Loss boosting belongs to the RNA output loss.
  const double boost = config_.topology == Topology::kRna ? config_.loss_boost : 1.0;
  for (const Utterance& u : train) {
    if (u.features.cols() != input_dim_)
      throw ConsistencyError("utterance '" + u.id + "' has a different feature dimension");
    FrameTargets targets = MakeFrameTargets(u.alignment, vocab_, config_.emit_position, boost);
    for (Chunk& c : MakeChunks(u.id, u.features, targets, config_.chunk_size))
      chunks_.push_back(std::move(c));
  }
  for (const Utterance& u : dev) {
    for (const Utterance& t : train)
      if (t.id == u.id) throw ArgumentError("utterance '" + u.id + "' is in both train and dev");
    Chunk c;
    c.utterance = u.id;
    c.features = u.features;
    c.targets = MakeFrameTargets(u.alignment, vocab_, config_.emit_position, 1.0);
    dev_.push_back(std::move(c));
  }
}

TrainState Trainer::InitialState() const {
  ModelDims dims;
  dims.num_labels = vocab_.Size();
  dims.context_order = config_.context_order;
  dims.input_dim = input_dim_;
  dims.embed_dim = config_.embed_dim;
  dims.ffnn_dim = config_.ffnn_dim;
  dims.model_dim = config_.model_dim;
  dims.encoder_hidden = config_.encoder_hidden;
  dims.splice = config_.splice;
  TrainState st;
  st.params = InitParams<double>(config_.seed, dims);
  st.moment1 = st.params.ZerosLike();
  st.moment2 = st.params.ZerosLike();
  st.lr = config_.learning_rate;
  st.rng.seed(config_.seed + 1);
  return st;
}

double Trainer::DevLoss(const ScorerParamsd& params) const {
  double total = 0.0;
  long frames = 0;
  LossOptions opt;  // plain CE, unit weights, no encoder loss
  for (const Chunk& c : dev_) {
    total += ChunkLoss(params, c, vocab_, opt, nullptr);
    frames += c.NumFrames();
  }
  return frames > 0 ? total / static_cast<double>(frames) : 0.0;
}

void Trainer::ApplyUpdate(TrainState& st, const ScorerParamsd& grad) const {
  const double b1 = config_.adam_beta1, b2 = config_.adam_beta2;
  st.step += 1;
  const double t = static_cast<double>(st.step);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c1_next = 1.0 - std::pow(b1, t + 1.0);
  const double c2 = 1.0 - std::pow(b2, t);
  auto params = st.params.Tensors();
  auto m1 = st.moment1.Tensors();
  auto m2 = st.moment2.Tensors();
  auto g = grad.Tensors();
  for (size_t i = 0; i < params.size(); ++i) {
    auto& p = *params[i].second;
    if (p.size() == 0) continue;
    auto& m = *m1[i].second;
    auto& v = *m2[i].second;
    const auto& gi = *g[i].second;
    m = b1 * m + (1.0 - b1) * gi;
    v = b2 * v + (1.0 - b2) * gi.cwiseProduct(gi);
    MatrixT<double> mhat;
    if (config_.nesterov)
      mhat = (b1 / c1_next) * m + ((1.0 - b1) / c1) * gi;
    else
      mhat = m / c1;
    p.array() -= st.lr * mhat.array() / ((v.array() / c2).sqrt() + config_.adam_epsilon);
  }
}

EpochRecord Trainer::RunEpoch(TrainState& st) const {
  const int epoch = st.epoch;
  const bool pretrain = epoch < config_.pretrain_epochs;
  const bool sampling = epoch >= config_.epochs;
  if (sampling && epoch == config_.epochs) {
    st.lr = config_.learning_rate;
    st.best_dev_loss = std::numeric_limits<double>::infinity();
  }

  std::vector<int> order(chunks_.size());
  std::iota(order.begin(), order.end(), 0);
  for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    std::swap(order[i], order[pick(st.rng)]);
  }

  EpochRecord rec;
  rec.epoch = epoch;
  rec.lr = st.lr;
  double loss_sum = 0.0;
  const size_t batch = static_cast<size_t>(config_.batch_size);
  for (size_t start = 0, b = 0; start < order.size(); start += batch, ++b) {
    const size_t end = std::min(order.size(), start + batch);
    ScorerParamsd grad = st.params.ZerosLike();
    double batch_loss = 0.0;
    for (size_t k = start; k < end; ++k) {
      const Chunk& chunk = chunks_[order[k]];
      LossOptions opt = MakeLossOptions(config_, vocab_, chunk.NumFrames(), !pretrain);
      double loss;
      if (pretrain) {
        // Encoder pretraining: only the encoder loss, no output terms.
        loss = EvaluateLoss<double>(st.params, chunk.features, {}, chunk.targets.segment_labels,
                                    opt, &grad);
      } else if (sampling) {
        loss = ScheduledSamplingLoss(st.params, chunk, vocab_, opt, config_.sampling_rate, st.rng,
                                     &grad);
      } else {
        loss = ChunkLoss(st.params, chunk, vocab_, opt, &grad);
      }
      if (!std::isfinite(loss))
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(b) + " (utterance '" + chunk.utterance + "')");
      batch_loss += loss;
    }
    const double scale = 1.0 / static_cast<double>(end - start);
    for (auto& [name, m] : grad.Tensors()) *m *= scale;
    ApplyUpdate(st, grad);
    loss_sum += batch_loss;
  }
  rec.train_loss = chunks_.empty() ? 0.0 : loss_sum / static_cast<double>(chunks_.size());
  rec.dev_loss = DevLoss(st.params);
  if (!std::isfinite(rec.dev_loss))
    throw TrainingError("non-finite dev loss at epoch " + std::to_string(epoch));

  // Newbob: decay when the relative dev improvement falls below threshold.
  const int joint_epoch = epoch - config_.pretrain_epochs;
  const bool scheduled = sampling || (!pretrain && joint_epoch >= config_.constant_lr_epochs);
  if (!pretrain) {
    if (scheduled && std::isfinite(st.best_dev_loss) &&
        (st.best_dev_loss - rec.dev_loss) < config_.newbob_threshold * std::abs(st.best_dev_loss))
      st.lr = std::max(config_.min_lr, st.lr * config_.lr_decay);
    st.best_dev_loss = std::min(st.best_dev_loss, rec.dev_loss);
  }
  st.epoch += 1;
  return rec;
}

std::vector<EpochRecord> Trainer::Train(
    TrainState& st, const std::function<void(const EpochRecord&)>& on_epoch) const {
  std::vector<EpochRecord> records;
  while (st.epoch < config_.TotalEpochs()) {
    records.push_back(RunEpoch(st));
    if (on_epoch) on_epoch(records.back());
  }
  return records;
}

std::string FormatEpochRecord(const EpochRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d\t%.6f\t%.6f\t%.6g", r.epoch, r.train_loss, r.dev_loss, r.lr);
  return buf;
}

}  // namespace ptk
