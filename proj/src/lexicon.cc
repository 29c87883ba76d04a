// src/lexicon.cc

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

#include "ptk/lexicon.h"

#include <algorithm>
#include <set>
#include <tuple>

namespace ptk {

std::string Phoneme::Symbol() const {
  std::string s = base;
  if (sow) s += "#sow";
  if (eow) s += "#eow";
  return s;
}

bool Phoneme::operator<(const Phoneme& other) const {
  return std::tie(base, sow, eow) < std::tie(other.base, other.sow, other.eow);
}

LabelVocabulary::LabelVocabulary(std::vector<std::string> base_phonemes,
                                 Topology topology, AugmentMode mode)
    : topology_(topology), mode_(mode) {
  std::sort(base_phonemes.begin(), base_phonemes.end());
  base_phonemes.erase(std::unique(base_phonemes.begin(), base_phonemes.end()),
                      base_phonemes.end());
  bases_ = std::move(base_phonemes);
  for (const std::string& base : bases_) {
    if (base.empty()) throw ArgumentError("empty phoneme name");
    speech_.push_back({base, false, false});
    if (mode != AugmentMode::kNone) speech_.push_back({base, true, false});
    if (mode == AugmentMode::kSowEow) {
      speech_.push_back({base, false, true});
      speech_.push_back({base, true, true});
    }
  }
  // Already in (base, sow, eow) order by construction.
  for (int i = 0; i < static_cast<int>(speech_.size()); ++i)
    index_.emplace(speech_[i], i);
}

const Phoneme& LabelVocabulary::Label(int id) const {
  if (id < 0 || id >= NumSpeechLabels())
    throw ArgumentError("label id " + std::to_string(id) + " is not a speech label");
  return speech_[id];
}

std::string LabelVocabulary::Symbol(int id) const {
  if (IsSpecial(id))
    return std::string(topology_ == Topology::kRna ? kBlankSymbol : kSilenceSymbol);
  return Label(id).Symbol();
}

std::optional<int> LabelVocabulary::Find(const Phoneme& phoneme) const {
  auto it = index_.find(phoneme);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int LabelVocabulary::Id(const Phoneme& phoneme) const {
  auto id = Find(phoneme);
  if (!id)
    throw ConsistencyError("label '" + phoneme.Symbol() + "' not in vocabulary");
  return *id;
}

std::optional<int> LabelVocabulary::FindSymbol(std::string_view symbol) const {
  if (symbol == Symbol(SpecialId())) return SpecialId();
  Phoneme p;
  std::string_view rest = symbol;
  auto strip = [&rest](std::string_view suffix) {
    if (rest.size() > suffix.size() && rest.ends_with(suffix)) {
      rest.remove_suffix(suffix.size());
      return true;
    }
    return false;
  };
  p.eow = strip("#eow");
  p.sow = strip("#sow");
  p.base = std::string(rest);
  return Find(p);
}

void Lexicon::Add(const std::string& word, Pronunciation pronunciation) {
  if (pronunciation.empty())
    throw ArgumentError("empty pronunciation for '" + word + "'");
  auto& variants = entries_[word];
  if (std::find(variants.begin(), variants.end(), pronunciation) == variants.end())
    variants.push_back(std::move(pronunciation));
}

std::vector<std::string> Lexicon::Words() const {
  std::vector<std::string> words;
  words.reserve(entries_.size());
  for (const auto& [word, prons] : entries_) words.push_back(word);
  return words;
}

std::vector<std::string> Lexicon::Inventory() const {
  std::set<std::string> bases;
  for (const auto& [word, prons] : entries_)
    for (const Pronunciation& pron : prons)
      for (const Phoneme& p : pron) bases.insert(p.base);
  return {bases.begin(), bases.end()};
}

Lexicon ParseLexicon(std::string_view text) {
  Lexicon lexicon;
  int line_no = 0;
  for (std::string_view line : SplitChar(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto fail = [line_no](const std::string& why) {
      throw FormatError("lexicon line " + std::to_string(line_no) + ": " + why);
    };
    if (!IsValidUtf8(line)) fail("invalid UTF-8");
    if (Trim(line).empty() || line.front() == '#') continue;
    size_t tab = line.find('\t');
    if (tab == std::string_view::npos) fail("expected WORD<TAB>phonemes");
    std::string_view word = Trim(line.substr(0, tab));
    if (word.empty() || SplitWhitespace(word).size() != 1) fail("bad word field");
    Pronunciation pron;
    for (std::string_view phon : SplitWhitespace(line.substr(tab + 1))) {
      if (phon.find('#') != std::string_view::npos)
        fail("phoneme '" + std::string(phon) + "' contains reserved '#'");
      if (phon == kBlankSymbol || phon == kSilenceSymbol)
        fail("special label '" + std::string(phon) + "' in pronunciation");
      pron.push_back({std::string(phon), false, false});
    }
    if (pron.empty()) fail("empty pronunciation");
    lexicon.Add(std::string(word), std::move(pron));
  }
  return lexicon;
}

Lexicon AugmentLabels(const Lexicon& lexicon, AugmentMode mode) {
  if (lexicon.mode() != AugmentMode::kNone)
    throw StateError("lexicon is already augmented (" +
                     std::string(ToString(lexicon.mode())) + ")");
  Lexicon out;
  out.set_mode(mode);
  for (const auto& [word, prons] : lexicon.entries()) {
    for (Pronunciation pron : prons) {
      if (mode != AugmentMode::kNone) pron.back().eow = true;
      if (mode == AugmentMode::kSowEow) pron.front().sow = true;
      out.Add(word, std::move(pron));
    }
  }
  return out;
}

LabelVocabulary BuildVocabulary(const Lexicon& lexicon, Topology topology,
                                AugmentMode mode) {
  return LabelVocabulary(lexicon.Inventory(), topology, mode);
}

std::vector<int> PronunciationIds(const Pronunciation& pronunciation,
                                  const LabelVocabulary& vocab) {
  std::vector<int> ids;
  ids.reserve(pronunciation.size());
  for (const Phoneme& p : pronunciation) ids.push_back(vocab.Id(p));
  return ids;
}

int PrefixTree::AddNode() {
  node_arcs_.emplace_back();
  return NumNodes() - 1;
}

std::optional<int> PrefixTree::FindArc(int node, int label) const {
  for (int arc : node_arcs_[node])
    if (arcs_[arc].label == label) return arc;
  return std::nullopt;
}

std::vector<std::pair<int, std::vector<int>>> PrefixTree::EnumerateWords() const {
  std::vector<std::pair<int, std::vector<int>>> out;
  std::vector<int> prefix;
  auto visit = [&](auto&& self, int node) -> void {
    for (int arc_id : node_arcs_[node]) {
      const TreeArc& arc = arcs_[arc_id];
      prefix.push_back(arc.label);
      for (int w : arc.words) out.emplace_back(w, prefix);
      self(self, arc.target);
      prefix.pop_back();
    }
  };
  visit(visit, kRoot);
  return out;
}

PrefixTree BuildPrefixTree(const Lexicon& lexicon, const LabelVocabulary& vocab) {
  PrefixTree tree;
  tree.AddNode();
  tree.words_ = lexicon.Words();
  int word_id = 0;
  for (const auto& [word, prons] : lexicon.entries()) {
    for (const Pronunciation& pron : prons) {
      std::vector<int> ids = PronunciationIds(pron, vocab);
      int node = PrefixTree::kRoot;
      int last_arc = -1;
      for (int label : ids) {
        auto arc = tree.FindArc(node, label);
        if (!arc) {
          int target = tree.AddNode();
          tree.arcs_.push_back({label, target, {}});
          arc = tree.NumArcs() - 1;
          auto& out = tree.node_arcs_[node];
          auto pos = std::lower_bound(out.begin(), out.end(), label,
                                      [&tree](int a, int l) {
                                        return tree.arcs_[a].label < l;
                                      });
          out.insert(pos, *arc);
        }
        last_arc = *arc;
        node = tree.arcs_[*arc].target;
      }
      auto& words = tree.arcs_[last_arc].words;
      if (std::find(words.begin(), words.end(), word_id) == words.end())
        words.push_back(word_id);
    }
    ++word_id;
  }
  return tree;
}

}  // namespace ptk
