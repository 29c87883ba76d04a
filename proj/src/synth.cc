// src/synth.cc

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

#include "ptk/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "ptk/lexicon.h"

namespace ptk {

void SynthSpec::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ArgumentError(std::string("invalid synth spec: ") + what);
  };
  require(num_words >= 1, "num_words must be >= 1");
  require(num_phonemes >= 2, "num_phonemes must be >= 2");
  require(min_pron_length >= 1 && max_pron_length >= min_pron_length, "bad pronunciation lengths");
  require(min_frames >= 1 && max_frames >= min_frames, "bad frames-per-phoneme range");
  require(feature_dim >= 1, "feature_dim must be >= 1");
  require(noise >= 0, "noise must be >= 0");
  require(num_train >= 1 && num_dev >= 0, "bad utterance counts");
  require(min_sentence_words >= 1 && max_sentence_words >= min_sentence_words,
          "bad sentence length range");
  require(silence_prob >= 0 && silence_prob <= 1, "silence_prob must be in [0,1]");
  require(successors >= 1, "successors must be >= 1");
  require(max_retries >= 1, "max_retries must be >= 1");
}

SynthSpec ParseSynthSpec(std::string_view text, SynthSpec s) {
  int line_no = 0;
  for (std::string_view line : SplitChar(text, '\n')) {
    ++line_no;
    line = Trim(line);
    if (line.empty() || line.front() == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ArgumentError("synth spec line " + std::to_string(line_no) + ": expected key=value");
    std::string_view key = Trim(line.substr(0, eq)), value = Trim(line.substr(eq + 1));
    auto i = [&] { return static_cast<int>(ParseInt(value, key)); };
    try {
      if (key == "seed") s.seed = static_cast<uint64_t>(ParseInt(value, key));
      else if (key == "num_words") s.num_words = i();
      else if (key == "num_phonemes") s.num_phonemes = i();
      else if (key == "min_pron_length") s.min_pron_length = i();
      else if (key == "max_pron_length") s.max_pron_length = i();
      else if (key == "min_frames") s.min_frames = i();
      else if (key == "max_frames") s.max_frames = i();
      else if (key == "feature_dim") s.feature_dim = i();
      else if (key == "noise") s.noise = ParseDouble(value, key);
      else if (key == "num_train") s.num_train = i();
      else if (key == "num_dev") s.num_dev = i();
      else if (key == "min_sentence_words") s.min_sentence_words = i();
      else if (key == "max_sentence_words") s.max_sentence_words = i();
      else if (key == "silence_prob") s.silence_prob = ParseDouble(value, key);
      else if (key == "successors") s.successors = i();
      else if (key == "max_retries") s.max_retries = i();
      else throw ArgumentError("unknown synth spec key '" + std::string(key) + "'");
    } catch (const FormatError& e) {
      throw ArgumentError(e.what());
    }
  }
  return s;
}

std::string FormatSynthSpec(const SynthSpec& s) {
  std::ostringstream os;
  os << "seed=" << s.seed << "\nnum_words=" << s.num_words << "\nnum_phonemes=" << s.num_phonemes
     << "\nmin_pron_length=" << s.min_pron_length << "\nmax_pron_length=" << s.max_pron_length
     << "\nmin_frames=" << s.min_frames << "\nmax_frames=" << s.max_frames
     << "\nfeature_dim=" << s.feature_dim << "\nnoise=" << FormatDouble(s.noise)
     << "\nnum_train=" << s.num_train << "\nnum_dev=" << s.num_dev
     << "\nmin_sentence_words=" << s.min_sentence_words
     << "\nmax_sentence_words=" << s.max_sentence_words
     << "\nsilence_prob=" << FormatDouble(s.silence_prob) << "\nsuccessors=" << s.successors
     << "\nmax_retries=" << s.max_retries << '\n';
  return os.str();
}

namespace {

// Back-off bigram over word ids 0..W-1 plus end-of-sentence id W. History id
// W stands for sentence begin. Listed successors get 0.8 q + 0.2 u, all
// others back off to 0.2 u.
struct BigramModel {
  std::vector<double> unigram;                     // over W + 1 tokens
  std::vector<std::map<int, double>> successors;   // per history, W + 1 of them

  double Prob(int history, int token) const {
    auto it = successors[history].find(token);
    return it != successors[history].end() ? it->second : 0.2 * unigram[token];
  }
};

constexpr double kListedMass = 0.8;

BigramModel MakeBigram(int num_words, int num_successors, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  BigramModel m;
  m.unigram.resize(num_words + 1);
  double total = 0.0;
  for (int w = 0; w < num_words; ++w) total += (m.unigram[w] = weight(rng));
  m.unigram[num_words] = total / 3.0;
  total += m.unigram[num_words];
  for (double& u : m.unigram) u /= total;

  m.successors.resize(num_words + 1);
  for (int h = 0; h <= num_words; ++h) {
    const bool begin = h == num_words;
    std::vector<int> pool;
    for (int t = 0; t < num_words + (begin ? 0 : 1); ++t) pool.push_back(t);
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(std::min<size_t>(pool.size(), num_successors));
    std::sort(pool.begin(), pool.end());
    std::vector<double> q(pool.size());
    double qsum = 0.0;
    for (double& x : q) qsum += (x = weight(rng));
    for (size_t i = 0; i < pool.size(); ++i)
      m.successors[h][pool[i]] = kListedMass * q[i] / qsum + (1 - kListedMass) * m.unigram[pool[i]];
  }
  return m;
}

std::string Log10(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.7f", std::log10(p));
  return buf;
}

std::string FormatBigramArpa(const BigramModel& m, const std::vector<std::string>& words) {
  const int num_words = static_cast<int>(words.size());
  auto name = [&](int token) {
    return token == num_words ? std::string("</s>") : words[token];
  };
  size_t num_bigrams = 0;
  for (const auto& s : m.successors) num_bigrams += s.size();
  const std::string backoff = Log10(1 - kListedMass);
  std::ostringstream os;
  os << "\\data\\\nngram 1=" << num_words + 2 << "\nngram 2=" << num_bigrams << "\n\n\\1-grams:\n";
  os << Log10(m.unigram[num_words]) << "\t</s>\n";
  os << "-99\t<s>\t" << backoff << '\n';
  for (int w = 0; w < num_words; ++w)
    os << Log10(m.unigram[w]) << '\t' << words[w] << '\t' << backoff << '\n';
  os << "\n\\2-grams:\n";
  for (const auto& [t, p] : m.successors[num_words]) os << Log10(p) << "\t<s> " << name(t) << '\n';
  for (int h = 0; h < num_words; ++h)
    for (const auto& [t, p] : m.successors[h])
      os << Log10(p) << '\t' << words[h] << ' ' << name(t) << '\n';
  os << "\n\\end\\\n";
  return os.str();
}

int Draw(const std::vector<double>& probs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = unit(rng), cum = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

SynthCorpus SynthGenerate(const SynthSpec& spec) {
  spec.Validate();
  std::mt19937_64 rng(spec.seed);
  SynthCorpus c;
  for (int i = 0; i < spec.num_phonemes; ++i)
    c.phonemes.push_back(spec.num_phonemes <= 26 ? std::string(1, static_cast<char>('a' + i))
                                                 : "p" + std::to_string(i));
  std::vector<std::string> words;
  const int width = static_cast<int>(std::to_string(spec.num_words - 1).size());
  for (int w = 0; w < spec.num_words; ++w) {
    std::string id = std::to_string(w);
    words.push_back("w" + std::string(width - id.size(), '0') + id);
  }

  // Distinct pronunciations without immediate phoneme repeats.
  std::uniform_int_distribution<int> pron_len(spec.min_pron_length, spec.max_pron_length);
  std::uniform_int_distribution<int> phone(0, spec.num_phonemes - 1);
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> prons;
  int retries = 0;
  while (static_cast<int>(prons.size()) < spec.num_words) {
    std::vector<int> p(pron_len(rng));
    for (size_t j = 0; j < p.size(); ++j) {
      do p[j] = phone(rng);
      while (j > 0 && p[j] == p[j - 1]);
    }
    if (seen.insert(p).second) {
      prons.push_back(std::move(p));
    } else if (++retries > spec.max_retries) {
      throw Error("could not draw " + std::to_string(spec.num_words) +
                  " distinct pronunciations within " + std::to_string(spec.max_retries) +
                  " retries");
    }
  }
  std::ostringstream lex;
  for (int w = 0; w < spec.num_words; ++w) {
    lex << words[w] << '\t';
    for (size_t j = 0; j < prons[w].size(); ++j) lex << (j ? " " : "") << c.phonemes[prons[w][j]];
    lex << '\n';
  }
  c.lexicon = lex.str();

  std::normal_distribution<double> gauss(0.0, 1.0);
  c.codewords.resize(spec.num_phonemes + 1, spec.feature_dim);
  for (int i = 0; i <= spec.num_phonemes; ++i)
    for (int d = 0; d < spec.feature_dim; ++d) c.codewords(i, d) = gauss(rng);

  BigramModel lm = MakeBigram(spec.num_words, spec.successors, rng);
  c.arpa = FormatBigramArpa(lm, words);

  std::uniform_int_distribution<int> frames(spec.min_frames, spec.max_frames);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int end_token = spec.num_words;
  auto sample_sentence = [&]() {
    for (int attempt = 0; attempt < spec.max_retries; ++attempt) {
      std::vector<int> sentence;
      int h = end_token;  // sentence begin
      while (static_cast<int>(sentence.size()) <= spec.max_sentence_words) {
        std::vector<double> probs(spec.num_words + 1);
        for (int t = 0; t <= spec.num_words; ++t) probs[t] = lm.Prob(h, t);
        int t = Draw(probs, rng);
        if (t == end_token) break;
        sentence.push_back(t);
        h = t;
      }
      const int n = static_cast<int>(sentence.size());
      if (n >= spec.min_sentence_words && n <= spec.max_sentence_words) return sentence;
    }
    throw Error("could not sample a sentence of the requested length");
  };

  auto make_utterance = [&](const std::string& id) {
    SynthUtterance u;
    u.id = id;
    u.alignment.utterance = id;
    std::vector<int> frame_class;
    auto add_segment = [&](int cls, bool word_end) {
      const int len = frames(rng);
      Segment seg;
      seg.label = cls == spec.num_phonemes ? std::string(kSilenceSymbol) : c.phonemes[cls];
      seg.begin = static_cast<int>(frame_class.size());
      seg.end = seg.begin + len - 1;
      seg.word_end = word_end;
      u.alignment.segments.push_back(seg);
      frame_class.insert(frame_class.end(), len, cls);
    };
    std::vector<int> sentence = sample_sentence();
    if (unit(rng) < spec.silence_prob) add_segment(spec.num_phonemes, false);
    for (int w : sentence) {
      u.words.push_back(words[w]);
      for (size_t j = 0; j < prons[w].size(); ++j)
        add_segment(prons[w][j], j + 1 == prons[w].size());
      if (unit(rng) < spec.silence_prob) add_segment(spec.num_phonemes, false);
    }
    u.features.resize(static_cast<Eigen::Index>(frame_class.size()), spec.feature_dim);
    for (size_t t = 0; t < frame_class.size(); ++t)
      for (int d = 0; d < spec.feature_dim; ++d)
        u.features(t, d) = c.codewords(frame_class[t], d) + spec.noise * gauss(rng);
    return u;
  };

  auto ids = [](const char* prefix, int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%04d", prefix, i);
    return std::string(buf);
  };
  for (int i = 0; i < spec.num_train; ++i) c.train.push_back(make_utterance(ids("train", i)));
  for (int i = 0; i < spec.num_dev; ++i) c.dev.push_back(make_utterance(ids("dev", i)));
  return c;
}

void WriteSynthCorpus(const SynthCorpus& corpus, const std::string& dir) {
  namespace fs = std::filesystem;
  try {
    fs::create_directories(fs::path(dir) / "train_feats");
    fs::create_directories(fs::path(dir) / "dev_feats");
  } catch (const fs::filesystem_error& e) {
    throw ResourceError(std::string("cannot create corpus directory: ") + e.what());
  }
  auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };
  WriteFile(path("lexicon.txt"), corpus.lexicon);
  WriteFile(path("lm.arpa"), corpus.arpa);
  auto write_set = [&](const std::vector<SynthUtterance>& set, const char* name) {
    std::string ali, ref, feats;
    for (const SynthUtterance& u : set) {
      ali += FormatAlignment(u.alignment);
      ref += u.id;
      for (const std::string& w : u.words) ref += ' ' + w;
      ref += '\n';
      feats += FormatFeatures(u.id, u.features);
    }
    const std::string n(name);
    WriteFile(path((n + ".ali").c_str()), ali);
    WriteFile(path((n + ".ref").c_str()), ref);
    WriteFile((fs::path(dir) / (n + "_feats") / "feats.txt").string(), feats);
  };
  write_set(corpus.train, "train");
  write_set(corpus.dev, "dev");
}

}  // namespace ptk
