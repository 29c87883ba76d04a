// ptk/verify.h

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

// Randomized property batteries: brute-force oracles for the alignment DP and
// the search, normalization checks and finite-difference gradient checks.

#ifndef PTK_VERIFY_H_
#define PTK_VERIFY_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ptk/lexicon.h"
#include "ptk/scorer.h"
#include "ptk/topology.h"

namespace ptk {

struct BatteryResult {
  std::string suite;
  long checks = 0;
  long failures = 0;
  double max_error = 0.0;  // largest relative error seen, suite specific
  double seconds = 0.0;
  std::vector<std::string> messages;  // first failures

  bool ok() const { return failures == 0 && checks > 0; }
  void Fail(std::string message);
  std::string Summary() const;
};

/// Random normalized tables, logits ~ N(0, sharpness^2).
TableScorer RandomTableScorer(int num_frames, const ContextSpace& contexts, std::mt19937_64& rng,
                              double sharpness = 1.0);

/// Log score of one path computed directly from (y, s), without the graph.
/// `labels` is the sequence the path spells; the special label is context
/// transparent; for HMM a change of label or position leaves the previous
/// state through its non-loop probability.
double PathScore(const AlignmentPath& path, Topology topology, int special_label,
                 const FrameScorer& scorer);

/// Forward / Viterbi / path counts against brute-force enumeration for every
/// (topology, S <= 3, S <= T <= 6, V in 2..4) with `tables` random scorers.
BatteryResult TopologyOracleBattery(uint64_t seed, int tables = 20);

/// Row sums of model distributions and of the HMM loop split.
BatteryResult NormalizationBattery(uint64_t seed, int samples = 1000);

/// Analytic gradients against central differences over random small models
/// and losses. Fails a block whose relative error reaches 1e-4.
BatteryResult GradientBattery(uint64_t seed, int configs = 50);

/// Unpruned Viterbi decoding against exhaustive search over random tiny
/// lexicons, scorers and bigram LMs; also full-sum >= Viterbi per winner.
BatteryResult SearchOracleBattery(uint64_t seed, int trials = 100);

}  // namespace ptk

#endif  // PTK_VERIFY_H_
