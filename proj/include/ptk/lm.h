// ptk/lm.h

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

#ifndef PTK_LM_H_
#define PTK_LM_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ptk/common.h"
#include "ptk/lexicon.h"

namespace ptk {

inline constexpr std::string_view kSentenceBegin = "<s>";
inline constexpr std::string_view kSentenceEnd = "</s>";
inline constexpr std::string_view kUnknownWord = "<unk>";

/// Word history, truncated to order - 1 ids. Compared by value.
struct LmState {
  std::vector<int> history;
  auto operator<=>(const LmState&) const = default;
};

/// Back-off n-gram model read from ARPA text. Scores are natural-log.
class NGramLM {
 public:
  struct Entry {
    double log10_prob = 0.0;
    double log10_backoff = 0.0;
  };

  int order() const { return static_cast<int>(tables_.size()); }
  const std::vector<std::string>& words() const { return words_; }
  std::optional<int> FindWord(std::string_view word) const;
  /// Word id, or the unknown-word id, or -1 if neither exists.
  int WordIdOrUnk(std::string_view word) const;
  int bos() const { return bos_; }
  int eos() const { return eos_; }
  int unk() const { return unk_; }
  size_t NumEntries(int n) const { return tables_[n - 1].size(); }

  /// State holding just the sentence-begin symbol.
  LmState InitialState() const;
  /// Katz back-off score of `word` after `state`, and the successor state.
  /// A negative word id scores kLogZero.
  std::pair<double, LmState> Score(const LmState& state, int word) const;
  /// Unigram log-probability (natural log) of a word id, kLogZero if absent.
  double UnigramScore(int word) const;

  const std::map<std::vector<int>, Entry>& table(int n) const { return tables_[n - 1]; }

 private:
  friend NGramLM ParseArpa(std::string_view text);
  int Intern(std::string_view word);

  std::vector<std::map<std::vector<int>, Entry>> tables_;
  std::vector<std::string> words_;
  std::map<std::string, int, std::less<>> word_index_;
  int bos_ = -1, eos_ = -1, unk_ = -1;
};

NGramLM ParseArpa(std::string_view text);

/// Convenience wrapper mapping the word through the symbol table.
std::pair<double, LmState> LmScore(const NGramLM& lm, const LmState& state,
                                   std::string_view word);

/// Joint natural-log probability of a sentence, including sentence end.
double SentenceLogProb(const NGramLM& lm, const std::vector<std::string>& words);

class PrefixTree;

/// Unigram look-ahead: per tree node, the best unigram score of any word
/// reachable below it (root: best over all words). Natural log.
struct LookaheadTable {
  std::vector<double> node_scores;
  std::vector<int> lm_word_ids;  // tree word id -> LM word id
};

/// Throws ConsistencyError if a tree word is neither in the LM nor mappable
/// to an unknown-word symbol.
LookaheadTable BuildLookahead(const NGramLM& lm, const PrefixTree& tree);

}  // namespace ptk

#endif  // PTK_LM_H_
