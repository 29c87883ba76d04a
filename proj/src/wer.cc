// src/wer.cc

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

#include "ptk/wer.h"

#include <algorithm>
#include <cstdio>

#include "ptk/common.h"

namespace ptk {

double WerCounts::Rate() const {
  return reference_words > 0 ? static_cast<double>(Errors()) / reference_words : 0.0;
}

WerCounts& WerCounts::operator+=(const WerCounts& o) {
  substitutions += o.substitutions;
  insertions += o.insertions;
  deletions += o.deletions;
  reference_words += o.reference_words;
  return *this;
}

WerCounts EditDistance(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  const size_t n = ref.size(), m = hyp.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1));
  for (size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i)
    for (size_t j = 1; j <= m; ++j)
      d[i][j] = std::min({d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1), d[i - 1][j] + 1,
                          d[i][j - 1] + 1});
  WerCounts c;
  c.reference_words = static_cast<long>(n);
  size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const int sub = ref[i - 1] == hyp[j - 1] ? 0 : 1;
      if (d[i][j] == d[i - 1][j - 1] + sub) {
        c.substitutions += sub;
        --i, --j;
        continue;
      }
    }
    if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

std::map<std::string, std::vector<std::string>> ParseTranscripts(std::string_view text) {
  std::map<std::string, std::vector<std::string>> out;
  int line_no = 0;
  for (std::string_view line : SplitChar(text, '\n')) {
    ++line_no;
    auto fields = SplitWhitespace(line);
    if (fields.empty()) continue;
    std::vector<std::string> words(fields.begin() + 1, fields.end());
    if (!out.emplace(std::string(fields[0]), std::move(words)).second)
      throw FormatError("transcript line " + std::to_string(line_no) + ": duplicate utterance '" +
                        std::string(fields[0]) + "'");
  }
  return out;
}

WerCounts ScoreCorpus(const std::map<std::string, std::vector<std::string>>& ref,
                      const std::map<std::string, std::vector<std::string>>& hyp) {
  for (const auto& [utt, words] : hyp)
    if (!ref.count(utt)) throw ConsistencyError("hypothesis for unknown utterance '" + utt + "'");
  WerCounts total;
  static const std::vector<std::string> kEmpty;
  for (const auto& [utt, words] : ref) {
    auto it = hyp.find(utt);
    total += EditDistance(words, it == hyp.end() ? kEmpty : it->second);
  }
  return total;
}

std::string FormatWer(const WerCounts& c) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "WER %.2f%% [ %ld / %ld, %ld ins, %ld del, %ld sub ]",
                100.0 * c.Rate(), c.Errors(), c.reference_words, c.insertions, c.deletions,
                c.substitutions);
  return buf;
}

}  // namespace ptk
