// ptk/wer.h

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

#ifndef PTK_WER_H_
#define PTK_WER_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ptk {

struct WerCounts {
  long substitutions = 0;
  long insertions = 0;
  long deletions = 0;
  long reference_words = 0;

  long Errors() const { return substitutions + insertions + deletions; }
  /// Errors / reference words; 0 for an empty reference.
  double Rate() const;
  WerCounts& operator+=(const WerCounts& other);
  bool operator==(const WerCounts&) const = default;
};

/// Levenshtein alignment with unit costs. Among optimal alignments the
/// backtrace prefers substitution, then deletion, then insertion.
WerCounts EditDistance(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);

/// `UTT word word ...` per line; an utterance id alone means an empty
/// transcript. Duplicate ids throw FormatError.
std::map<std::string, std::vector<std::string>> ParseTranscripts(std::string_view text);

/// Corpus totals over the reference utterances; a missing hypothesis counts
/// as empty. Hypotheses without a reference throw ConsistencyError.
WerCounts ScoreCorpus(const std::map<std::string, std::vector<std::string>>& ref,
                      const std::map<std::string, std::vector<std::string>>& hyp);

std::string FormatWer(const WerCounts& counts);

}  // namespace ptk

#endif  // PTK_WER_H_
