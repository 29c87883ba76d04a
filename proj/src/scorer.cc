// src/scorer.cc

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

#include "ptk/scorer.h"

namespace ptk {

TableScorer::TableScorer(ContextSpace contexts, std::vector<RowMatrix> tables)
    : contexts_(contexts), tables_(std::move(tables)) {
  for (size_t t = 0; t < tables_.size(); ++t)
    if (tables_[t].rows() != contexts_.Size() || tables_[t].cols() != contexts_.num_labels())
      throw ArgumentError("score table " + std::to_string(t) + " must be " +
                          std::to_string(contexts_.Size()) + "x" +
                          std::to_string(contexts_.num_labels()));
}

std::span<const double> TableScorer::LogProbs(int t, int ctx) const {
  if (t < 0 || t >= NumFrames()) throw ArgumentError("frame index out of range");
  if (!contexts_.IsValid(ctx)) throw ArgumentError("context id out of range");
  const RowMatrix& m = tables_[t];
  return {m.data() + static_cast<size_t>(ctx) * m.cols(), static_cast<size_t>(m.cols())};
}

}  // namespace ptk
