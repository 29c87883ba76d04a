// ptk/scorer.h

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

#ifndef PTK_SCORER_H_
#define PTK_SCORER_H_

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ptk/common.h"

namespace ptk {

/// Encodes label histories of length k (k = 1 or 2) as dense integer ids.
///
/// Each history slot holds a label id in [0, V) or the sentinel V ("no label
/// yet"). For k = 1 the id is the last label itself, so contexts 0..V-1 are
/// labels and V is the sentinel. For k = 2 the id is older * (V + 1) + last.
class ContextSpace {
 public:
  ContextSpace() = default;
  ContextSpace(int num_labels, int order) : num_labels_(num_labels), order_(order) {
    if (order != 1 && order != 2)
      throw ArgumentError("context order must be 1 or 2, got " + std::to_string(order));
    if (num_labels < 1) throw ArgumentError("need at least one label");
  }

  int num_labels() const { return num_labels_; }
  int order() const { return order_; }
  int Size() const { return order_ == 1 ? num_labels_ + 1 : (num_labels_ + 1) * (num_labels_ + 1); }
  int Sentinel() const { return Size() - 1; }
  bool IsValid(int ctx) const { return ctx >= 0 && ctx < Size(); }

  int Push(int ctx, int label) const {
    return order_ == 1 ? label : Last(ctx) * (num_labels_ + 1) + label;
  }
  /// Most recent slot (label id or sentinel V).
  int Last(int ctx) const { return order_ == 1 ? ctx : ctx % (num_labels_ + 1); }
  /// Older slot; only meaningful for k = 2.
  int Older(int ctx) const { return order_ == 1 ? num_labels_ : ctx / (num_labels_ + 1); }
  /// Slot values oldest first, length == order().
  std::vector<int> Slots(int ctx) const {
    if (order_ == 1) return {ctx};
    return {Older(ctx), Last(ctx)};
  }

  bool operator==(const ContextSpace&) const = default;

 private:
  int num_labels_ = 0;
  int order_ = 1;
};

/// Per-frame label scores conditioned on a label context: the interface the
/// alignment DP and the search read from. LogProbs(t, ctx) is a normalized
/// log distribution over all V labels.
///
/// Implementations may cache lazily and are then not safe for concurrent use.
class FrameScorer {
 public:
  virtual ~FrameScorer() = default;
  virtual int NumFrames() const = 0;
  virtual const ContextSpace& contexts() const = 0;
  virtual std::span<const double> LogProbs(int t, int ctx) const = 0;

  int NumLabels() const { return contexts().num_labels(); }
  double LogProb(int t, int ctx, int label) const { return LogProbs(t, ctx)[label]; }
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Scorer over explicit tables: one (contexts x V) log-probability matrix per
/// frame.
class TableScorer : public FrameScorer {
 public:
  TableScorer(ContextSpace contexts, std::vector<RowMatrix> tables);

  int NumFrames() const override { return static_cast<int>(tables_.size()); }
  const ContextSpace& contexts() const override { return contexts_; }
  std::span<const double> LogProbs(int t, int ctx) const override;

  const RowMatrix& table(int t) const { return tables_[t]; }

 private:
  ContextSpace contexts_;
  std::vector<RowMatrix> tables_;
};

}  // namespace ptk

#endif  // PTK_SCORER_H_
