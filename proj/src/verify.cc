// src/verify.cc

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

#include "ptk/verify.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

#include "ptk/alignment_io.h"
#include "ptk/lm.h"
#include "ptk/model.h"
#include "ptk/search.h"
#include "ptk/training.h"

namespace ptk {

void BatteryResult::Fail(std::string message) {
  ++failures;
  if (messages.size() < 20) messages.push_back(std::move(message));
}

std::string BatteryResult::Summary() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s: %ld checks, %ld failures, max error %.3g, %.2f s",
                suite.c_str(), checks, failures, max_error, seconds);
  return buf;
}

TableScorer RandomTableScorer(int num_frames, const ContextSpace& contexts, std::mt19937_64& rng,
                              double sharpness) {
  std::normal_distribution<double> gauss(0.0, sharpness);
  std::vector<RowMatrix> tables;
  for (int t = 0; t < num_frames; ++t) {
    RowMatrix m(contexts.Size(), contexts.num_labels());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = gauss(rng);
      const double mx = m.row(i).maxCoeff();
      m.row(i).array() -= mx + std::log((m.row(i).array() - mx).exp().sum());
    }
    tables.push_back(std::move(m));
  }
  return TableScorer(contexts, std::move(tables));
}

double PathScore(const AlignmentPath& path, Topology topology, int special_label,
                 const FrameScorer& scorer) {
  const ContextSpace& cs = scorer.contexts();
  int ctx = cs.Sentinel();
  double score = 0.0;
  if (topology == Topology::kRna) {
    int prev_s = 0;
    for (size_t u = 0; u < path.y.size(); ++u) {
      score += scorer.LogProb(static_cast<int>(u), ctx, path.y[u]);
      if (path.s[u] > prev_s) ctx = cs.Push(ctx, path.y[u]);
      prev_s = path.s[u];
    }
    return score;
  }
  int used_ctx = ctx;  // context the occupied state's label was scored with
  for (size_t u = 0; u < path.y.size(); ++u) {
    const int t = static_cast<int>(u);
    const int y = path.y[u];
    if (u > 0 && path.s[u] == path.s[u - 1] && y == path.y[u - 1]) {
      score += scorer.LogProb(t, used_ctx, y);
      continue;
    }
    if (u > 0) score += std::log1p(-std::exp(scorer.LogProb(t, used_ctx, path.y[u - 1])));
    score += scorer.LogProb(t, ctx, y);
    used_ctx = ctx;
    if (y != special_label) ctx = cs.Push(ctx, y);
  }
  return score;
}

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

long Binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double RelErr(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return a == b ? 0.0 : std::abs(a - b) / scale;
}

std::vector<std::string> BaseNames(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.emplace_back(1, static_cast<char>('a' + i));
  return names;
}

}  // namespace

BatteryResult TopologyOracleBattery(uint64_t seed, int tables) {
  BatteryResult r;
  r.suite = "topology";
  const auto start = Clock::now();
  std::mt19937_64 rng(seed);
  for (Topology topo : {Topology::kRna, Topology::kHmm}) {
    for (int v = 2; v <= 4; ++v) {
      LabelVocabulary vocab(BaseNames(v - 1), topo, AugmentMode::kNone);
      std::uniform_int_distribution<int> pick(0, vocab.NumSpeechLabels() - 1);
      for (int num = 1; num <= 3; ++num) {
        for (int frames = num; frames <= 6; ++frames) {
          for (int trial = 0; trial < tables; ++trial) {
            std::vector<int> labels(num);
            for (int& l : labels) l = pick(rng);
            const bool silence = topo == Topology::kHmm && trial % 2 == 1;
            const int order = 1 + trial % 4 / 2;
            std::vector<char> ends(num);
            for (char& e : ends) e = static_cast<char>(rng() % 2);
            auto flags = std::make_unique<bool[]>(num);
            for (int i = 0; i < num; ++i) flags[i] = ends[i];
            AlignmentGraph g = BuildAlignmentGraph(
                labels, vocab,
                silence ? SilenceMode::kOptionalAtBoundaries : SilenceMode::kNone, order,
                std::span<const bool>(flags.get(), num));
            TableScorer scorer = RandomTableScorer(frames, g.contexts(), rng, 1.5);
            std::ostringstream where;
            where << ToString(topo) << " V=" << v << " S=" << num << " T=" << frames
                  << " k=" << order << (silence ? " sil" : "") << " trial " << trial;

            std::vector<AlignmentPath> paths = EnumerateAlignments(g, frames);
            if (!silence) {
              const long expect = topo == Topology::kRna ? Binomial(frames, num)
                                                         : Binomial(frames - 1, num - 1);
              ++r.checks;
              if (static_cast<long>(paths.size()) != expect ||
                  CountAlignments(g, frames) != expect)
                r.Fail(where.str() + ": " + std::to_string(paths.size()) + " paths, expected " +
                       std::to_string(expect));
            }
            double sum = 0.0, best = kLogZero;
            for (const AlignmentPath& p : paths) {
              ++r.checks;
              if (CollapseAlignment(p, vocab) != labels)
                r.Fail(where.str() + ": a path does not collapse to the labels");
              const double s = PathScore(p, topo, vocab.SpecialId(), scorer);
              sum += std::exp(s);
              best = std::max(best, s);
            }
            const double fwd = std::exp(ForwardScore(g, scorer));
            const double err = RelErr(fwd, sum);
            r.max_error = std::max(r.max_error, err);
            ++r.checks;
            if (!(err <= 1e-9))
              r.Fail(where.str() + ": forward " + FormatDouble(fwd) + " vs brute force " +
                     FormatDouble(sum));
            auto [path, vit] = ViterbiAlignment(g, scorer);
            const double verr = std::abs(vit - best) / std::max(1.0, std::abs(best));
            r.max_error = std::max(r.max_error, verr);
            ++r.checks;
            if (!(verr <= 1e-9))
              r.Fail(where.str() + ": viterbi " + FormatDouble(vit) + " vs max " +
                     FormatDouble(best));
            ++r.checks;
            if (std::find(paths.begin(), paths.end(), path) == paths.end() ||
                std::abs(PathScore(path, topo, vocab.SpecialId(), scorer) - best) >
                    1e-9 * std::max(1.0, std::abs(best)))
              r.Fail(where.str() + ": viterbi path is not an argmax path");
          }
        }
      }
    }
  }
  r.seconds = Seconds(start);
  return r;
}

BatteryResult NormalizationBattery(uint64_t seed, int samples) {
  BatteryResult r;
  r.suite = "normalization";
  const auto start = Clock::now();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  int done = 0;
  while (done < samples) {
    ModelDims dims;
    dims.num_labels = 2 + static_cast<int>(rng() % 12);
    dims.context_order = 1 + static_cast<int>(rng() % 2);
    dims.input_dim = 1 + static_cast<int>(rng() % 6);
    dims.embed_dim = 1 + static_cast<int>(rng() % 5);
    dims.ffnn_dim = 1 + static_cast<int>(rng() % 8);
    dims.model_dim = 1 + static_cast<int>(rng() % 8);
    dims.encoder_hidden = rng() % 2;
    ScorerParamsd params = InitParams<double>(rng(), dims);
    // Larger weights stress the log-softmax.
    const double scale = 1.0 + 4.0 * static_cast<double>(rng() % 4);
    params.out_w *= scale;
    MatrixT<double> x(4, dims.input_dim);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 3.0 * gauss(rng);
    MatrixT<double> h = Encode<double>(params, x);
    const ContextSpace cs = params.contexts();
    for (int rep = 0; rep < 10 && done < samples; ++rep, ++done) {
      const int t = static_cast<int>(rng() % h.rows());
      const int ctx = static_cast<int>(rng() % cs.Size());
      MatrixT<double> row = ScoreStep<double>(params, h.row(t), ctx);
      const double sum = row.array().exp().sum();
      r.max_error = std::max(r.max_error, std::abs(sum - 1.0));
      ++r.checks;
      if (!(std::abs(sum - 1.0) <= 1e-12))
        r.Fail("distribution sums to " + FormatDouble(sum));
      std::span<const double> span(row.data(), row.size());
      const int prev = static_cast<int>(rng() % dims.num_labels);
      auto [loop, nonloop] = HmmTransitionSplit(span, prev);
      const double split = std::exp(loop) + std::exp(nonloop);
      r.max_error = std::max(r.max_error, std::abs(split - 1.0));
      ++r.checks;
      if (!(std::abs(split - 1.0) <= 1e-12)) r.Fail("loop split sums to " + FormatDouble(split));
      if (dims.context_order == 1) {
        MatrixT<double> all = ScoreAllContexts<double>(params, h.row(t));
        ++r.checks;
        if ((all.row(ctx) - row).cwiseAbs().maxCoeff() > 1e-12)
          r.Fail("batched context scores differ from single-context scores");
      }
    }
  }
  r.seconds = Seconds(start);
  return r;
}

namespace {

// Random alignment over `bases` with `words` words of 1-2 phonemes, segments
// of 1-3 frames and optional silences.
FrameAlignment RandomAlignment(const std::vector<std::string>& bases, int words, bool silence,
                               std::mt19937_64& rng) {
  FrameAlignment al;
  al.utterance = "u";
  int t = 0;
  auto add = [&](const std::string& label, bool word_end) {
    const int len = 1 + static_cast<int>(rng() % 3);
    al.segments.push_back({label, t, t + len - 1, word_end});
    t += len;
  };
  if (silence && rng() % 2) add(std::string(kSilenceSymbol), false);
  for (int w = 0; w < words; ++w) {
    const int phones = 1 + static_cast<int>(rng() % 2);
    for (int p = 0; p < phones; ++p) add(bases[rng() % bases.size()], p + 1 == phones);
    if (silence && rng() % 2) add(std::string(kSilenceSymbol), false);
  }
  return al;
}

}  // namespace

BatteryResult GradientBattery(uint64_t seed, int configs) {
  BatteryResult r;
  r.suite = "gradient";
  const auto start = Clock::now();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const AugmentMode modes[] = {AugmentMode::kNone, AugmentMode::kEow, AugmentMode::kSowEow};
  const EmitPosition positions[] = {EmitPosition::kSegBeg, EmitPosition::kSegMid,
                                    EmitPosition::kSegEnd};
  for (int i = 0; i < configs; ++i) {
    const int order = 1 + i % 2;
    const double eps = (i / 2) % 2 ? 0.2 : 0.0;
    const double boost = (i / 4) % 2 ? 5.0 : 1.0;
    const Topology topo = (i / 8) % 2 ? Topology::kHmm : Topology::kRna;
    const AugmentMode mode = modes[rng() % 3];
    LabelVocabulary vocab(BaseNames(2 + static_cast<int>(rng() % 2)), topo, mode);
    FrameAlignment al = RandomAlignment(vocab.base_phonemes(), 1 + static_cast<int>(rng() % 3),
                                        rng() % 2, rng);
    FrameTargets targets = MakeFrameTargets(al, vocab, positions[rng() % 3], boost);
    const int frames = targets.NumFrames();

    ModelDims dims;
    dims.num_labels = vocab.Size();
    dims.context_order = order;
    dims.input_dim = 3;
    dims.embed_dim = 3;
    dims.ffnn_dim = 4;
    dims.model_dim = 4;
    dims.encoder_hidden = rng() % 2;
    ScorerParamsd params = InitParams<double>(rng(), dims);
    MatrixT<double> x(frames, dims.input_dim);
    for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = gauss(rng);

    std::vector<int> ctx_labels;
    if (rng() % 3 == 0) {  // mixed contexts as in scheduled sampling
      ctx_labels = targets.labels;
      for (int& l : ctx_labels)
        if (rng() % 2) l = static_cast<int>(rng() % vocab.Size());
    }
    std::vector<RowTerm> terms = BuildChunkTerms(targets, vocab, params.contexts(), ctx_labels);
    LossOptions opt;
    opt.label_smoothing = eps;
    opt.aux_weight = rng() % 2 ? 0.7 : 0.0;
    opt.focal_gamma = static_cast<double>(rng() % 3);
    opt.normalizer = frames;

    ScorerParamsd grad = params.ZerosLike();
    EvaluateLoss<double>(params, x, terms, targets.segment_labels, opt, &grad);

    std::ostringstream where;
    where << "config " << i << " (" << ToString(topo) << ", k=" << order << ", eps=" << eps
          << ", boost=" << boost << ")";
    const double step = 1e-5;
    auto p_tensors = params.Tensors();
    auto g_tensors = grad.Tensors();
    for (size_t b = 0; b < p_tensors.size(); ++b) {
      auto& m = *p_tensors[b].second;
      if (m.size() == 0) continue;
      const auto& ga = *g_tensors[b].second;
      const bool embedding = p_tensors[b].first == "embedding";
      MatrixT<double> fd = MatrixT<double>::Zero(m.rows(), m.cols());
      for (Eigen::Index row = 0; row < m.rows(); ++row) {
        if (embedding && row == dims.num_labels) continue;  // fixed sentinel
        for (Eigen::Index col = 0; col < m.cols(); ++col) {
          const double keep = m(row, col);
          m(row, col) = keep + step;
          const double up = EvaluateLoss<double>(params, x, terms, targets.segment_labels, opt,
                                                 nullptr);
          m(row, col) = keep - step;
          const double down = EvaluateLoss<double>(params, x, terms, targets.segment_labels, opt,
                                                   nullptr);
          m(row, col) = keep;
          fd(row, col) = (up - down) / (2 * step);
        }
      }
      if (embedding && !ga.row(dims.num_labels).isZero(0.0)) {
        ++r.checks;
        r.Fail(where.str() + ": sentinel embedding row received gradient");
      }
      const double denom = std::max({ga.norm(), fd.norm(), 1e-7});
      const double err = (ga - fd).norm() / denom;
      r.max_error = std::max(r.max_error, err);
      ++r.checks;
      if (!(err < 1e-4))
        r.Fail(where.str() + ": block " + std::string(p_tensors[b].first) +
               " relative error " + FormatDouble(err));
    }
  }
  r.seconds = Seconds(start);
  return r;
}

namespace {

std::string RandomBigramArpa(const std::vector<std::string>& words, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> logp(-1.5, -0.1), bo(-0.6, 0.0);
  std::vector<std::string> tokens = words;
  tokens.push_back("</s>");
  std::vector<std::pair<std::string, std::string>> bigrams;
  std::vector<std::string> histories = words;
  histories.push_back("<s>");
  for (const std::string& h : histories)
    for (const std::string& t : tokens)
      if (!(h == "<s>" && t == "</s>") && rng() % 2) bigrams.emplace_back(h, t);
  char buf[64];
  std::ostringstream os;
  os << "\\data\\\nngram 1=" << tokens.size() + 1 << "\nngram 2=" << bigrams.size()
     << "\n\n\\1-grams:\n";
  std::snprintf(buf, sizeof(buf), "%.6f\t<s>\t%.6f\n", -99.0, bo(rng));
  os << buf;
  for (const std::string& t : tokens) {
    if (t == "</s>") {
      std::snprintf(buf, sizeof(buf), "%.6f\t</s>\n", logp(rng));
    } else {
      const double p = logp(rng);
      std::snprintf(buf, sizeof(buf), "%.6f\t%s\t%.6f\n", p, t.c_str(), bo(rng));
    }
    os << buf;
  }
  os << "\n\\2-grams:\n";
  for (const auto& [h, t] : bigrams) {
    std::snprintf(buf, sizeof(buf), "%.6f\t%s %s\n", logp(rng), h.c_str(), t.c_str());
    os << buf;
  }
  os << "\n\\end\\\n";
  return os.str();
}

std::string Join(const std::vector<int>& v) {
  std::string s = "[";
  for (size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s + "]";
}

}  // namespace

BatteryResult SearchOracleBattery(uint64_t seed, int trials) {
  BatteryResult r;
  r.suite = "search";
  const auto start = Clock::now();
  std::mt19937_64 rng(seed);
  const AugmentMode modes[] = {AugmentMode::kNone, AugmentMode::kEow, AugmentMode::kSowEow};
  const double scales[] = {0.0, 0.5, 1.0};
  for (int trial = 0; trial < trials; ++trial) {
    const Topology topo = trial % 2 ? Topology::kHmm : Topology::kRna;
    const AugmentMode mode = modes[rng() % 3];
    const double lambda = scales[trial % 3];
    const bool silence = topo == Topology::kHmm && rng() % 2;
    const int num_words = 1 + static_cast<int>(rng() % 3);
    const std::vector<std::string> bases = BaseNames(2 + static_cast<int>(rng() % 2));
    std::ostringstream lex_text;
    std::vector<std::string> words;
    int shortest = 3;
    for (int w = 0; w < num_words; ++w) {
      words.push_back("w" + std::to_string(w));
      const int len = 1 + static_cast<int>(rng() % 3);
      shortest = std::min(shortest, len);
      lex_text << words.back() << '\t';
      for (int p = 0; p < len; ++p) lex_text << (p ? " " : "") << bases[rng() % bases.size()];
      lex_text << '\n';
    }
    Lexicon lex = ParseLexicon(lex_text.str());
    if (mode != AugmentMode::kNone) lex = AugmentLabels(lex, mode);
    LabelVocabulary vocab = BuildVocabulary(lex, topo, mode);
    PrefixTree tree = BuildPrefixTree(lex, vocab);
    NGramLM lm = ParseArpa(RandomBigramArpa(words, rng));
    const int frames = shortest + static_cast<int>(rng() % (9 - shortest));
    TableScorer scorer =
        RandomTableScorer(frames, ContextSpace(vocab.Size(), 1), rng, 0.5 + (rng() % 4));

    std::ostringstream where;
    where << "trial " << trial << " (" << ToString(topo) << ", " << ToString(mode)
          << ", T=" << frames << ", lambda=" << lambda << (silence ? ", silence" : "") << ")";
    try {
      BeamConfig cfg = BeamConfig::Unpruned(DecodeMode::kViterbi, lambda);
      cfg.hmm_silence = silence;
      DecodeResult got = Decoder(tree, vocab, lm, cfg).Decode(scorer);
      DecodeResult want =
          ExhaustiveDecode(scorer, tree, vocab, lm, DecodeMode::kViterbi, lambda, silence);
      ++r.checks;
      const double err = std::abs(got.score - want.score) / std::max(1.0, std::abs(want.score));
      r.max_error = std::max(r.max_error, err);
      if (got.words != want.words || !(err <= 1e-9))
        r.Fail(where.str() + ": decoder " + Join(got.words) + " " + FormatDouble(got.score) +
               ", exhaustive " + Join(want.words) + " " + FormatDouble(want.score));

      cfg.word_end_recombination = true;
      DecodeResult merged = Decoder(tree, vocab, lm, cfg).Decode(scorer);
      ++r.checks;
      if (merged.words != got.words ||
          std::abs(merged.score - got.score) > 1e-9 * std::max(1.0, std::abs(got.score)))
        r.Fail(where.str() + ": word-end recombination changed the result");

      const double full = ScoreWordSequence(scorer, tree, vocab, lm, got.words,
                                            DecodeMode::kFullSum, lambda, silence);
      const double vit = ScoreWordSequence(scorer, tree, vocab, lm, got.words,
                                           DecodeMode::kViterbi, lambda, silence);
      ++r.checks;
      if (!(full >= vit - 1e-12))
        r.Fail(where.str() + ": full-sum " + FormatDouble(full) + " < viterbi " +
               FormatDouble(vit));

      BeamConfig fcfg = BeamConfig::Unpruned(DecodeMode::kFullSum, lambda);
      fcfg.hmm_silence = silence;
      DecodeResult fgot = Decoder(tree, vocab, lm, fcfg).Decode(scorer);
      DecodeResult fwant =
          ExhaustiveDecode(scorer, tree, vocab, lm, DecodeMode::kFullSum, lambda, silence);
      ++r.checks;
      const double ferr =
          std::abs(fgot.score - fwant.score) / std::max(1.0, std::abs(fwant.score));
      r.max_error = std::max(r.max_error, ferr);
      if (fgot.words != fwant.words || !(ferr <= 1e-9))
        r.Fail(where.str() + ": full-sum decoder " + Join(fgot.words) + " " +
               FormatDouble(fgot.score) + ", exhaustive " + Join(fwant.words) + " " +
               FormatDouble(fwant.score));
    } catch (const Error& e) {
      ++r.checks;
      r.Fail(where.str() + ": " + e.what());
    }
  }
  r.seconds = Seconds(start);
  return r;
}

}  // namespace ptk
