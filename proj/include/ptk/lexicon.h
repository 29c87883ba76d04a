// ptk/lexicon.h

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

#ifndef PTK_LEXICON_H_
#define PTK_LEXICON_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ptk/common.h"

namespace ptk {

/// A phoneme label, optionally marked as word-final (eow) and/or word-initial
/// (sow). Ordering is by base name, then sow, then eow.
struct Phoneme {
  std::string base;
  bool eow = false;
  bool sow = false;

  /// Printable symbol: "a", "a#eow", "a#sow", "a#sow#eow".
  std::string Symbol() const;

  bool operator==(const Phoneme& other) const = default;
  bool operator<(const Phoneme& other) const;
};

using Pronunciation = std::vector<Phoneme>;

inline constexpr std::string_view kBlankSymbol = "<b>";
inline constexpr std::string_view kSilenceSymbol = "[SIL]";

/// The closed output alphabet of the scorer: every speech label variant the
/// augmentation mode allows, plus one special label (blank for RNA, silence
/// for HMM) which always takes the last id.
class LabelVocabulary {
 public:
  LabelVocabulary() = default;
  LabelVocabulary(std::vector<std::string> base_phonemes, Topology topology,
                  AugmentMode mode);

  int Size() const { return static_cast<int>(speech_.size()) + 1; }
  int NumSpeechLabels() const { return static_cast<int>(speech_.size()); }
  int NumBasePhonemes() const { return static_cast<int>(bases_.size()); }
  int SpecialId() const { return static_cast<int>(speech_.size()); }
  bool IsSpecial(int id) const { return id == SpecialId(); }
  bool IsValid(int id) const { return id >= 0 && id < Size(); }

  Topology topology() const { return topology_; }
  AugmentMode mode() const { return mode_; }
  const std::vector<std::string>& base_phonemes() const { return bases_; }

  /// Speech label for `id`; throws ArgumentError for the special label.
  const Phoneme& Label(int id) const;
  std::string Symbol(int id) const;
  bool IsWordEnd(int id) const { return !IsSpecial(id) && Label(id).eow; }

  std::optional<int> Find(const Phoneme& phoneme) const;
  /// As Find but throws ConsistencyError when absent.
  int Id(const Phoneme& phoneme) const;
  /// Looks up a printable symbol, including the special label's.
  std::optional<int> FindSymbol(std::string_view symbol) const;

 private:
  Topology topology_ = Topology::kRna;
  AugmentMode mode_ = AugmentMode::kNone;
  std::vector<std::string> bases_;
  std::vector<Phoneme> speech_;
  std::map<Phoneme, int> index_;
};

/// Word -> pronunciation variants. Words are kept sorted; a word's id is its
/// rank in that order. Variants keep first-seen order with duplicates dropped.
class Lexicon {
 public:
  void Add(const std::string& word, Pronunciation pronunciation);

  const std::map<std::string, std::vector<Pronunciation>>& entries() const {
    return entries_;
  }
  AugmentMode mode() const { return mode_; }
  void set_mode(AugmentMode mode) { mode_ = mode; }

  size_t NumWords() const { return entries_.size(); }
  std::vector<std::string> Words() const;
  /// Sorted set of base phoneme names appearing in any pronunciation.
  std::vector<std::string> Inventory() const;

 private:
  std::map<std::string, std::vector<Pronunciation>> entries_;
  AugmentMode mode_ = AugmentMode::kNone;
};

/// Parses `WORD<TAB>phon1 phon2 ...` lines; '#' starts a comment line.
Lexicon ParseLexicon(std::string_view text);

/// Rewrites every pronunciation with eow (and sow) flags. Throws StateError
/// if `lexicon` is already augmented.
Lexicon AugmentLabels(const Lexicon& lexicon, AugmentMode mode);

/// Vocabulary built from the lexicon's base inventory, with every variant of
/// every base phoneme the mode allows.
LabelVocabulary BuildVocabulary(const Lexicon& lexicon, Topology topology,
                                AugmentMode mode);

/// Label ids of a pronunciation; throws ConsistencyError for unknown labels.
std::vector<int> PronunciationIds(const Pronunciation& pronunciation,
                                  const LabelVocabulary& vocab);

struct TreeArc {
  int label = -1;
  int target = -1;
  std::vector<int> words;  // lexicon word ids ending on this arc
};

/// Lexical prefix tree over label ids. Node 0 is the root. Each node has at
/// most one outgoing arc per label. Word identities sit on the arc carrying
/// a pronunciation's last label; with eow/sow_eow augmentation those are
/// exactly the eow arcs and lead to leaves.
class PrefixTree {
 public:
  static constexpr int kRoot = 0;

  int NumNodes() const { return static_cast<int>(node_arcs_.size()); }
  int NumArcs() const { return static_cast<int>(arcs_.size()); }
  /// Outgoing arc ids of `node`, sorted by label.
  const std::vector<int>& ArcsFrom(int node) const { return node_arcs_[node]; }
  const TreeArc& Arc(int arc) const { return arcs_[arc]; }
  std::optional<int> FindArc(int node, int label) const;
  bool IsLeaf(int node) const { return node_arcs_[node].empty(); }

  const std::vector<std::string>& words() const { return words_; }

  /// All (word id, label sequence) pairs spelled by root-to-word-end paths.
  std::vector<std::pair<int, std::vector<int>>> EnumerateWords() const;

 private:
  friend PrefixTree BuildPrefixTree(const Lexicon&, const LabelVocabulary&);
  int AddNode();

  std::vector<std::vector<int>> node_arcs_;
  std::vector<TreeArc> arcs_;
  std::vector<std::string> words_;
};

PrefixTree BuildPrefixTree(const Lexicon& lexicon, const LabelVocabulary& vocab);

}  // namespace ptk

#endif  // PTK_LEXICON_H_
