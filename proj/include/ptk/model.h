// ptk/model.h

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

// The trainable label scorer.
//
//   h_t   = enc(x_{t-w..t+w})                 (affine, optional tanh layer)
//   f_c   = tanh(tanh(emb(c) W1 + b1) W2 + b2)  (context FFNN, width Dh)
//   p(.|c, h_t) = softmax((f_c + h_t) Wo + bo)
//
// emb(c) concatenates one embedding row per context slot; the sentinel row
// (index V) is identically zero and never updated. An auxiliary softmax head
// on h_t carries the encoder loss.
//
// All math is templated on the scalar type; matrices are row-major with one
// frame or context per row.

#ifndef PTK_MODEL_H_
#define PTK_MODEL_H_

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ptk/common.h"
#include "ptk/scorer.h"

namespace ptk {

template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ModelDims {
  int num_labels = 0;      // V
  int context_order = 1;   // k
  int input_dim = 0;       // Din
  int embed_dim = 16;      // De
  int ffnn_dim = 64;       // width of the first FFNN layer
  int model_dim = 64;      // Dh, shared by encoder output and FFNN output
  bool encoder_hidden = false;
  int splice = 0;          // w: neighbouring frames on each side fed to the encoder

  int EncoderInputDim() const { return input_dim * (2 * splice + 1); }
  bool operator==(const ModelDims&) const = default;
};

template <typename Scalar>
struct ScorerParams {
  using Matrix = MatrixT<Scalar>;

  ModelDims dims;
  Matrix enc_w, enc_b;                // Din (2w + 1) x Dh, 1 x Dh
  Matrix enc_hidden_w, enc_hidden_b;  // Dh x Dh, 1 x Dh (empty when disabled)
  Matrix embedding;                   // (V + 1) x De, last row is the sentinel
  Matrix ffnn1_w, ffnn1_b;            // k*De x F, 1 x F
  Matrix ffnn2_w, ffnn2_b;            // F x Dh, 1 x Dh
  Matrix out_w, out_b;                // Dh x V, 1 x V
  Matrix aux_w, aux_b;                // Dh x V, 1 x V

  ContextSpace contexts() const { return ContextSpace(dims.num_labels, dims.context_order); }

  /// Named tensors in checkpoint order, including empty ones.
  std::vector<std::pair<std::string_view, Matrix*>> Tensors() {
    return {{"encoder.w", &enc_w},         {"encoder.b", &enc_b},
            {"encoder.hidden.w", &enc_hidden_w}, {"encoder.hidden.b", &enc_hidden_b},
            {"embedding", &embedding},     {"ffnn.1.w", &ffnn1_w},
            {"ffnn.1.b", &ffnn1_b},        {"ffnn.2.w", &ffnn2_w},
            {"ffnn.2.b", &ffnn2_b},        {"output.w", &out_w},
            {"output.b", &out_b},          {"aux.w", &aux_w},
            {"aux.b", &aux_b}};
  }
  std::vector<std::pair<std::string_view, const Matrix*>> Tensors() const {
    std::vector<std::pair<std::string_view, const Matrix*>> out;
    for (auto [name, m] : const_cast<ScorerParams*>(this)->Tensors()) out.emplace_back(name, m);
    return out;
  }

  /// Same shapes, all zeros.
  ScorerParams ZerosLike() const {
    ScorerParams z = *this;
    for (auto& [name, m] : z.Tensors()) m->setZero();
    return z;
  }

  long NumParameters() const {
    long n = 0;
    for (auto [name, m] : Tensors()) n += m->size();
    return n;
  }
};

using ScorerParamsd = ScorerParams<double>;

/// Uniform init in [-r, r] with r = 1/sqrt(fan-in) (r = 1 for the embedding,
/// whose input is one-hot). Deterministic given the seed.
template <typename Scalar>
ScorerParams<Scalar> InitParams(uint64_t seed, const ModelDims& dims) {
  if (dims.context_order != 1 && dims.context_order != 2)
    throw ArgumentError("context order must be 1 or 2, got " +
                        std::to_string(dims.context_order));
  if (dims.num_labels < 2 || dims.input_dim <= 0 || dims.embed_dim <= 0 ||
      dims.ffnn_dim <= 0 || dims.model_dim <= 0 || dims.splice < 0)
    throw ArgumentError("model dimensions must be positive (and V >= 2)");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto fill = [&](MatrixT<Scalar>& m, int rows, int cols, double fan_in) {
    m.resize(rows, cols);
    const double r = 1.0 / std::sqrt(fan_in);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = static_cast<Scalar>(r * unit(rng));
  };
  const int v = dims.num_labels, dh = dims.model_dim;
  ScorerParams<Scalar> p;
  p.dims = dims;
  const int din = dims.EncoderInputDim();
  fill(p.enc_w, din, dh, din);
  fill(p.enc_b, 1, dh, din);
  if (dims.encoder_hidden) {
    fill(p.enc_hidden_w, dh, dh, dh);
    fill(p.enc_hidden_b, 1, dh, dh);
  }
  fill(p.embedding, v + 1, dims.embed_dim, 1.0);
  p.embedding.row(v).setZero();
  const int in1 = dims.context_order * dims.embed_dim;
  fill(p.ffnn1_w, in1, dims.ffnn_dim, in1);
  fill(p.ffnn1_b, 1, dims.ffnn_dim, in1);
  fill(p.ffnn2_w, dims.ffnn_dim, dh, dims.ffnn_dim);
  fill(p.ffnn2_b, 1, dh, dims.ffnn_dim);
  fill(p.out_w, dh, v, dh);
  fill(p.out_b, 1, v, dh);
  fill(p.aux_w, dh, v, dh);
  fill(p.aux_b, 1, v, dh);
  return p;
}

namespace internal {

template <typename Derived>
void LogSoftmaxRows(Eigen::MatrixBase<Derived>& z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    auto row = z.row(i);
    const auto mx = row.maxCoeff();
    row.array() -= mx;
    row.array() -= std::log(row.array().exp().sum());
  }
}

/// Stacks frames t-w..t+w into row t; frames past either edge are zero.
template <typename Scalar>
MatrixT<Scalar> SpliceFrames(const MatrixT<Scalar>& x, int w) {
  if (w == 0) return x;
  const Eigen::Index n = x.rows(), d = x.cols();
  MatrixT<Scalar> out = MatrixT<Scalar>::Zero(n, d * (2 * w + 1));
  for (Eigen::Index t = 0; t < n; ++t)
    for (int o = -w; o <= w; ++o) {
      const Eigen::Index src = t + o;
      if (src >= 0 && src < n) out.block(t, (o + w) * d, 1, d) = x.row(src);
    }
  return out;
}

template <typename Scalar>
struct EncoderForward {
  MatrixT<Scalar> input;   // spliced features
  MatrixT<Scalar> hidden;  // tanh layer output, empty when disabled
  MatrixT<Scalar> h;
};

template <typename Scalar>
EncoderForward<Scalar> RunEncoder(const ScorerParams<Scalar>& p, const MatrixT<Scalar>& x) {
  if (x.cols() != p.dims.input_dim)
    throw ArgumentError("feature dimension " + std::to_string(x.cols()) +
                        " does not match model input dimension " +
                        std::to_string(p.dims.input_dim));
  EncoderForward<Scalar> f;
  f.input = SpliceFrames(x, p.dims.splice);
  MatrixT<Scalar> a = f.input * p.enc_w;
  a.rowwise() += p.enc_b.row(0);
  if (p.dims.encoder_hidden) {
    f.hidden = a.array().tanh().matrix();
    f.h = f.hidden * p.enc_hidden_w;
    f.h.rowwise() += p.enc_hidden_b.row(0);
  } else {
    f.h = std::move(a);
  }
  return f;
}

template <typename Scalar>
MatrixT<Scalar> EmbedContexts(const ScorerParams<Scalar>& p, std::span<const int> contexts) {
  const ContextSpace cs = p.contexts();
  const int de = p.dims.embed_dim;
  MatrixT<Scalar> e(static_cast<Eigen::Index>(contexts.size()), cs.order() * de);
  for (size_t r = 0; r < contexts.size(); ++r) {
    if (!cs.IsValid(contexts[r]))
      throw ArgumentError("context id " + std::to_string(contexts[r]) + " out of range");
    std::vector<int> slots = cs.Slots(contexts[r]);
    for (size_t k = 0; k < slots.size(); ++k)
      e.block(r, k * de, 1, de) = p.embedding.row(slots[k]);
  }
  return e;
}

template <typename Scalar>
struct ContextForward {
  MatrixT<Scalar> e, a1, a2;
};

template <typename Scalar>
ContextForward<Scalar> RunContextNet(const ScorerParams<Scalar>& p, std::span<const int> contexts) {
  ContextForward<Scalar> f;
  f.e = EmbedContexts(p, contexts);
  MatrixT<Scalar> pre1 = f.e * p.ffnn1_w;
  pre1.rowwise() += p.ffnn1_b.row(0);
  f.a1 = pre1.array().tanh().matrix();
  MatrixT<Scalar> pre2 = f.a1 * p.ffnn2_w;
  pre2.rowwise() += p.ffnn2_b.row(0);
  f.a2 = pre2.array().tanh().matrix();
  return f;
}

}  // namespace internal

/// Encoder outputs, one row per frame. Length preserving.
template <typename Scalar>
MatrixT<Scalar> Encode(const ScorerParams<Scalar>& p, const MatrixT<Scalar>& features) {
  return internal::RunEncoder(p, features).h;
}

/// Log distribution over V labels for encoder frame `h_t` and context `ctx`.
template <typename Scalar>
MatrixT<Scalar> ScoreStep(const ScorerParams<Scalar>& p,
                          const Eigen::Ref<const MatrixT<Scalar>>& h_t, int ctx) {
  const int c[1] = {ctx};
  auto f = internal::RunContextNet(p, std::span<const int>(c, 1));
  MatrixT<Scalar> z = (f.a2 + h_t) * p.out_w + p.out_b;
  internal::LogSoftmaxRows(z);
  return z;
}

/// All (V + 1) contexts at once for k = 1; row c matches ScoreStep(h_t, c).
template <typename Scalar>
MatrixT<Scalar> ScoreAllContexts(const ScorerParams<Scalar>& p,
                                 const Eigen::Ref<const MatrixT<Scalar>>& h_t) {
  if (p.dims.context_order != 1)
    throw ArgumentError("batched context scoring is only supported for k = 1");
  std::vector<int> all(p.dims.num_labels + 1);
  for (int c = 0; c <= p.dims.num_labels; ++c) all[c] = c;
  auto f = internal::RunContextNet(p, std::span<const int>(all));
  f.a2.rowwise() += h_t.row(0);
  MatrixT<Scalar> z = f.a2 * p.out_w;
  z.rowwise() += p.out_b.row(0);
  internal::LogSoftmaxRows(z);
  return z;
}

/// HMM loop / non-loop split of the previous state: loop = row[prev_label],
/// non-loop = log(1 - exp(loop)). A loop probability of exactly one yields a
/// kLogZero non-loop score.
inline std::pair<double, double> HmmTransitionSplit(std::span<const double> row, int prev_label) {
  if (prev_label < 0 || prev_label >= static_cast<int>(row.size()))
    throw ArgumentError("previous label id out of range");
  const double loop = row[prev_label];
  return {loop, Log1mExp(loop)};
}

enum class TermKind {
  kLabel,    // -log p(label | ctx, h_t), optionally label-smoothed
  kNonLoop,  // -log(1 - p(label | ctx, h_t))
};

/// One loss contribution on one (frame, context) row.
struct RowTerm {
  int frame = 0;
  int context = 0;
  int label = 0;
  double weight = 1.0;
  TermKind kind = TermKind::kLabel;
};

struct LossOptions {
  double label_smoothing = 0.0;
  double aux_weight = 0.0;       // 0 disables the encoder loss
  double focal_gamma = 1.0;
  double normalizer = 1.0;       // total is divided by this
};

/// Weighted loss over `terms` plus the focal encoder loss on `aux_labels`
/// (one label per frame, or empty). If `grad` is non-null the exact gradient
/// is added to it. The sentinel embedding row never receives gradient.
template <typename Scalar>
Scalar EvaluateLoss(const ScorerParams<Scalar>& p, const MatrixT<Scalar>& features,
                    std::span<const RowTerm> terms, std::span<const int> aux_labels,
                    const LossOptions& opt, ScorerParams<Scalar>* grad) {
  using Matrix = MatrixT<Scalar>;
  const int v = p.dims.num_labels;
  const int num_frames = static_cast<int>(features.rows());
  auto enc = internal::RunEncoder(p, features);

  // Distinct contexts share one FFNN evaluation.
  std::vector<int> ctx_ids;
  std::unordered_map<int, int> ctx_row;
  std::vector<int> term_ctx(terms.size());
  for (size_t i = 0; i < terms.size(); ++i) {
    const RowTerm& term = terms[i];
    if (term.frame < 0 || term.frame >= num_frames)
      throw ArgumentError("loss term frame out of range");
    if (term.label < 0 || term.label >= v) throw ArgumentError("loss term label out of range");
    auto [it, inserted] = ctx_row.try_emplace(term.context, static_cast<int>(ctx_ids.size()));
    if (inserted) ctx_ids.push_back(term.context);
    term_ctx[i] = it->second;
  }
  auto cf = internal::RunContextNet(p, std::span<const int>(ctx_ids));

  const Eigen::Index n = static_cast<Eigen::Index>(terms.size());
  Matrix s(n, p.dims.model_dim);
  for (Eigen::Index r = 0; r < n; ++r)
    s.row(r) = cf.a2.row(term_ctx[r]) + enc.h.row(terms[r].frame);
  Matrix z = s * p.out_w;
  z.rowwise() += p.out_b.row(0);
  internal::LogSoftmaxRows(z);  // z now holds log-probabilities

  const Scalar eps = static_cast<Scalar>(opt.label_smoothing);
  const Scalar norm = static_cast<Scalar>(opt.normalizer);
  Scalar total = 0;
  Matrix dz;
  if (grad) dz.setZero(n, v);
  for (Eigen::Index r = 0; r < n; ++r) {
    const RowTerm& term = terms[r];
    const Scalar w = static_cast<Scalar>(term.weight);
    const Scalar lp = z(r, term.label);
    if (term.kind == TermKind::kLabel) {
      Scalar loss = -(1 - eps) * lp;
      if (eps != 0) loss -= eps / v * z.row(r).sum();
      total += w * loss;
      if (grad) {
        dz.row(r) = z.row(r).array().exp().matrix();
        dz.row(r).array() -= eps / v;
        dz(r, term.label) -= 1 - eps;
        dz.row(r) *= w / norm;
      }
    } else {
      const Scalar nl = static_cast<Scalar>(Log1mExp(static_cast<double>(lp)));
      total += -w * nl;
      if (grad) {
        const Scalar ratio = std::exp(lp - nl);  // p / (1 - p)
        dz.row(r) = -ratio * z.row(r).array().exp().matrix();
        dz(r, term.label) += ratio;
        dz.row(r) *= w / norm;
      }
    }
  }
  total /= norm;

  Matrix dh;
  if (grad) dh.setZero(num_frames, p.dims.model_dim);

  if (opt.aux_weight > 0 && !aux_labels.empty()) {
    if (static_cast<int>(aux_labels.size()) != num_frames)
      throw ArgumentError("encoder-loss labels must cover every frame");
    Matrix za = enc.h * p.aux_w;
    za.rowwise() += p.aux_b.row(0);
    internal::LogSoftmaxRows(za);
    const Scalar gamma = static_cast<Scalar>(opt.focal_gamma);
    const Scalar aw = static_cast<Scalar>(opt.aux_weight);
    Scalar aux_total = 0;
    Matrix dza;
    if (grad) dza.setZero(num_frames, v);
    for (int t = 0; t < num_frames; ++t) {
      const int y = aux_labels[t];
      if (y < 0 || y >= v) throw ArgumentError("encoder-loss label out of range");
      const Scalar lp = za(t, y);
      const Scalar prob = std::exp(lp);
      const Scalar focal = std::pow(1 - prob, gamma);
      aux_total += -focal * lp;
      if (grad) {
        // d/dz_j [-(1-p)^g log p] = [g (1-p)^(g-1) p log p - (1-p)^g] (delta_jy - p_j)
        Scalar coef = -focal;
        if (gamma != 0 && prob < 1) coef += gamma * std::pow(1 - prob, gamma - 1) * prob * lp;
        dza.row(t) = -coef * za.row(t).array().exp().matrix();
        dza(t, y) += coef;
        dza.row(t) *= aw / norm;
      }
    }
    total += aw * aux_total / norm;
    if (grad) {
      grad->aux_w.noalias() += enc.h.transpose() * dza;
      grad->aux_b.row(0) += dza.colwise().sum();
      dh.noalias() += dza * p.aux_w.transpose();
    }
  }

  if (!grad) return total;

  grad->out_w.noalias() += s.transpose() * dz;
  grad->out_b.row(0) += dz.colwise().sum();
  Matrix ds = dz * p.out_w.transpose();
  Matrix da2 = Matrix::Zero(cf.a2.rows(), cf.a2.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    dh.row(terms[r].frame) += ds.row(r);
    da2.row(term_ctx[r]) += ds.row(r);
  }
  Matrix dpre2 = (da2.array() * (1 - cf.a2.array().square())).matrix();
  grad->ffnn2_w.noalias() += cf.a1.transpose() * dpre2;
  grad->ffnn2_b.row(0) += dpre2.colwise().sum();
  Matrix dpre1 = ((dpre2 * p.ffnn2_w.transpose()).array() * (1 - cf.a1.array().square())).matrix();
  grad->ffnn1_w.noalias() += cf.e.transpose() * dpre1;
  grad->ffnn1_b.row(0) += dpre1.colwise().sum();
  Matrix de = dpre1 * p.ffnn1_w.transpose();
  const ContextSpace cs = p.contexts();
  const int emb = p.dims.embed_dim;
  for (size_t c = 0; c < ctx_ids.size(); ++c) {
    std::vector<int> slots = cs.Slots(ctx_ids[c]);
    for (size_t k = 0; k < slots.size(); ++k)
      if (slots[k] != v) grad->embedding.row(slots[k]) += de.block(c, k * emb, 1, emb);
  }

  Matrix da0;
  if (p.dims.encoder_hidden) {
    grad->enc_hidden_w.noalias() += enc.hidden.transpose() * dh;
    grad->enc_hidden_b.row(0) += dh.colwise().sum();
    da0 = ((dh * p.enc_hidden_w.transpose()).array() * (1 - enc.hidden.array().square())).matrix();
  } else {
    da0 = std::move(dh);
  }
  grad->enc_w.noalias() += enc.input.transpose() * da0;
  grad->enc_b.row(0) += da0.colwise().sum();
  return total;
}

/// A labelled training row for Backward().
struct ScoredSample {
  int frame = 0;    // row of the feature matrix
  int context = 0;
  int target = 0;
  double weight = 1.0;
};

/// Gradient of sum_i w_i * CE_eps(target_i | context_i, x_frame_i), shaped
/// like the parameters.
template <typename Scalar>
ScorerParams<Scalar> Backward(const ScorerParams<Scalar>& p, const MatrixT<Scalar>& features,
                              std::span<const ScoredSample> batch, double label_smoothing = 0.0) {
  std::vector<RowTerm> terms;
  terms.reserve(batch.size());
  for (const ScoredSample& s : batch)
    terms.push_back({s.frame, s.context, s.target, s.weight, TermKind::kLabel});
  ScorerParams<Scalar> grad = p.ZerosLike();
  LossOptions opt;
  opt.label_smoothing = label_smoothing;
  EvaluateLoss<Scalar>(p, features, terms, {}, opt, &grad);
  return grad;
}

/// FrameScorer over a model and precomputed encoder outputs. For k = 1 each
/// frame's full (V + 1) x V table is computed on first use in one batched
/// pass; for k = 2 rows are computed per context and memoized.
class ModelScorer : public FrameScorer {
 public:
  ModelScorer(const ScorerParamsd& params, MatrixT<double> h);

  int NumFrames() const override { return static_cast<int>(h_.rows()); }
  const ContextSpace& contexts() const override { return contexts_; }
  std::span<const double> LogProbs(int t, int ctx) const override;

 private:
  const ScorerParamsd& params_;
  MatrixT<double> h_;
  ContextSpace contexts_;
  mutable std::vector<RowMatrix> tables_;
  mutable std::vector<bool> have_table_;
  mutable std::vector<std::unordered_map<int, std::vector<double>>> rows_;
};

// Checkpoints: line 1 `PTK1 k=<k> V=<V> De=<De> Dh=<Dh> Din=<Din> splice=<w>` followed by
// optional extra key=value tokens, then one `name rows cols` block per
// non-empty tensor with row-major values at 17 significant digits.

using CheckpointHeader = std::map<std::string, std::string>;

std::string FormatTensor(std::string_view name, const MatrixT<double>& m);
std::string FormatCheckpoint(const ScorerParamsd& params, const CheckpointHeader& extra = {});

struct Checkpoint {
  ScorerParamsd params;
  CheckpointHeader header;  // every key=value token of line 1
  std::map<std::string, MatrixT<double>> extra_tensors;  // blocks not part of params
  std::vector<std::string> trailing_lines;               // non-tensor lines after params
};

Checkpoint ParseCheckpoint(std::string_view text);

}  // namespace ptk

#endif  // PTK_MODEL_H_
