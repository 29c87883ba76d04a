// tests/model_test.cc

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

#include <cmath>
#include <random>

#include "doctest.h"
#include "ptk/model.h"
#include "ptk/verify.h"

namespace ptk {

namespace {

ModelDims SmallDims(int k = 1, bool hidden = false, int splice = 0) {
  ModelDims d;
  d.num_labels = 4;
  d.context_order = k;
  d.input_dim = 3;
  d.embed_dim = 5;
  d.ffnn_dim = 6;
  d.model_dim = 7;
  d.encoder_hidden = hidden;
  d.splice = splice;
  return d;
}

RowMatrix RandomFeatures(int frames, int dim, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  RowMatrix x(frames, dim);
  for (int i = 0; i < frames; ++i)
    for (int j = 0; j < dim; ++j) x(i, j) = n(rng);
  return x;
}

}  // namespace

TEST_CASE("init_params is deterministic with a zero sentinel row") {
  ModelDims d = SmallDims(2, true, 1);
  ScorerParamsd a = InitParams<double>(1, d), b = InitParams<double>(1, d);
  for (auto [name, m] : a.Tensors()) {
    bool same = false;
    for (auto [other, n] : b.Tensors())
      if (other == name) same = *m == *n;
    CHECK_MESSAGE(same, name);
  }
  CHECK(a.embedding.row(d.num_labels).isZero(0));
  CHECK(a.enc_w.rows() == d.EncoderInputDim());
  CHECK_FALSE(InitParams<double>(2, d).enc_w == a.enc_w);
  ModelDims bad = d;
  bad.context_order = 3;
  CHECK_THROWS_AS(InitParams<double>(1, bad), ArgumentError);
}

TEST_CASE("every distribution is normalized") {
  for (int k : {1, 2}) {
    ScorerParamsd p = InitParams<double>(3, SmallDims(k, true));
    RowMatrix h = Encode<double>(p, RandomFeatures(4, 3, 5));
    ContextSpace cs = p.contexts();
    for (int t = 0; t < h.rows(); ++t)
      for (int c = 0; c < cs.Size(); ++c)
        CHECK(std::abs(ScoreStep<double>(p, h.row(t), c).array().exp().sum() - 1) < 1e-12);
  }
}

TEST_CASE("encode examples") {
  ModelDims d = SmallDims();
  ScorerParamsd p = InitParams<double>(0, d);
  p.enc_w.setZero();
  RowMatrix h = Encode<double>(p, RowMatrix::Zero(3, d.input_dim));
  for (int t = 0; t < 3; ++t) CHECK(h.row(t) == p.enc_b.row(0));
  CHECK(Encode<double>(p, RowMatrix(0, d.input_dim)).rows() == 0);
  CHECK_THROWS_AS(Encode<double>(p, RowMatrix::Zero(2, d.input_dim + 1)), ArgumentError);
}

TEST_CASE("encode matches a direct recomputation") {
  for (bool hidden : {false, true})
    for (int splice : {0, 2}) {
      ModelDims d = SmallDims(1, hidden, splice);
      ScorerParamsd p = InitParams<double>(4, d);
      RowMatrix x = RandomFeatures(5, d.input_dim, 9);
      RowMatrix h = Encode<double>(p, x);
      for (int t = 0; t < 5; ++t) {
        Eigen::RowVectorXd in = Eigen::RowVectorXd::Zero(d.EncoderInputDim());
        for (int o = -splice; o <= splice; ++o)
          if (t + o >= 0 && t + o < 5)
            in.segment((o + splice) * d.input_dim, d.input_dim) = x.row(t + o);
        Eigen::RowVectorXd a = in * p.enc_w + p.enc_b;
        if (hidden) a = a.array().tanh().matrix() * p.enc_hidden_w + p.enc_hidden_b;
        CHECK((a - h.row(t)).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
}

TEST_CASE("score_step with zero weights is softmax of the output bias") {
  ScorerParamsd p = InitParams<double>(0, SmallDims());
  p.out_w.setZero();
  p.out_b << 1, 2, 3, 4;
  Eigen::RowVectorXd want = p.out_b.row(0).array() - std::log(p.out_b.array().exp().sum());
  RowMatrix h = RowMatrix::Random(1, 7);
  for (int c = 0; c <= 4; ++c)
    CHECK((ScoreStep<double>(p, h, c).row(0) - want).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(ScoreStep<double>(p, h, 5), ArgumentError);
}

TEST_CASE("sentinel context uses the zero embedding") {
  ScorerParamsd p = InitParams<double>(0, SmallDims());
  RowMatrix h = RowMatrix::Random(1, 7);
  ScorerParamsd z = p;
  z.embedding.setZero();
  CHECK(ScoreStep<double>(p, h, 4) == ScoreStep<double>(z, h, 0));
}

TEST_CASE("score_all_contexts matches score_step") {
  ScorerParamsd p = InitParams<double>(6, SmallDims(1, true));
  RowMatrix h = Encode<double>(p, RandomFeatures(3, 3, 1));
  for (int t = 0; t < 3; ++t) {
    RowMatrix table = ScoreAllContexts<double>(p, h.row(t));
    CHECK(table.rows() == 5);
    CHECK(table.cols() == 4);
    for (int c = 0; c < 5; ++c)
      CHECK((table.row(c) - ScoreStep<double>(p, h.row(t), c)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(table == ScoreAllContexts<double>(p, h.row(t)));
  }
  ScorerParamsd p2 = InitParams<double>(6, SmallDims(2));
  CHECK_THROWS_AS(ScoreAllContexts<double>(p2, RowMatrix::Zero(1, 7)), ArgumentError);
}

TEST_CASE("k = 1 depends only on the last label") {
  ScorerParamsd p = InitParams<double>(2, SmallDims(1));
  ContextSpace cs = p.contexts();
  RowMatrix h = RowMatrix::Random(1, 7);
  int c1 = cs.Push(cs.Push(cs.Sentinel(), 0), 2);
  int c2 = cs.Push(cs.Push(cs.Sentinel(), 3), 2);
  CHECK(ScoreStep<double>(p, h, c1) == ScoreStep<double>(p, h, c2));
  ScorerParamsd q = InitParams<double>(2, SmallDims(2));
  ContextSpace cs2 = q.contexts();
  int d1 = cs2.Push(cs2.Push(cs2.Sentinel(), 0), 2);
  int d2 = cs2.Push(cs2.Push(cs2.Sentinel(), 3), 2);
  CHECK_FALSE(ScoreStep<double>(q, h, d1) == ScoreStep<double>(q, h, d2));
}

TEST_CASE("model scorer agrees with score_step") {
  for (int k : {1, 2}) {
    ScorerParamsd p = InitParams<double>(8, SmallDims(k));
    RowMatrix h = Encode<double>(p, RandomFeatures(3, 3, 2));
    ModelScorer s(p, h);
    for (int t = 0; t < 3; ++t)
      for (int c = 0; c < s.contexts().Size(); c += 3) {
        RowMatrix ref = ScoreStep<double>(p, h.row(t), c);
        auto row = s.LogProbs(t, c);
        for (int y = 0; y < 4; ++y) CHECK(std::abs(row[y] - ref(0, y)) < 1e-12);
      }
  }
}

TEST_CASE("hmm_transition_split") {
  std::vector<double> uniform = {std::log(0.5), std::log(0.5)};
  auto [loop, nonloop] = HmmTransitionSplit(uniform, 0);
  CHECK(loop == doctest::Approx(std::log(0.5)));
  CHECK(nonloop == doctest::Approx(std::log(0.5)));
  std::vector<double> sure = {0.0, kLogZero};
  CHECK(IsLogZero(HmmTransitionSplit(sure, 0).second));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-8, 0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> row = {u(rng), u(rng)};
    auto [l, n] = HmmTransitionSplit(row, 1);
    CHECK(std::abs(std::exp(l) + std::exp(n) - 1) < 1e-12);
  }
  CHECK_THROWS_AS(HmmTransitionSplit(uniform, 2), ArgumentError);
}

TEST_CASE("backward examples") {
  ScorerParamsd p = InitParams<double>(5, SmallDims(1, true));
  RowMatrix x = RandomFeatures(3, 3, 4);
  std::vector<ScoredSample> zero = {{0, 4, 1, 0.0}, {2, 1, 3, 0.0}};
  ScorerParamsd g0 = Backward<double>(p, x, zero, 0.2);
  for (auto [name, m] : g0.Tensors()) CHECK_MESSAGE(m->isZero(0), name);

  std::vector<ScoredSample> twice = {{1, 2, 0, 1.0}, {1, 2, 0, 1.0}};
  std::vector<ScoredSample> once = {{1, 2, 0, 2.0}};
  ScorerParamsd a = Backward<double>(p, x, twice, 0.2), b = Backward<double>(p, x, once, 0.2);
  auto ta = a.Tensors(), tb = b.Tensors();
  for (size_t i = 0; i < ta.size(); ++i)
    CHECK((*ta[i].second - *tb[i].second).cwiseAbs().maxCoeff() < 1e-12);

  std::vector<ScoredSample> sentinel = {{0, 4, 1, 1.0}};
  CHECK(Backward<double>(p, x, sentinel).embedding.row(4).isZero(0));
}

TEST_CASE("gradient battery") {
  BatteryResult r = GradientBattery(2, 10);
  INFO(r.Summary());
  CHECK(r.ok());
}

TEST_CASE("normalization battery") {
  BatteryResult r = NormalizationBattery(2, 100);
  INFO(r.Summary());
  CHECK(r.ok());
}

TEST_CASE("checkpoint round trip is bit exact") {
  ScorerParamsd p = InitParams<double>(11, SmallDims(2, true, 1));
  std::string text = FormatCheckpoint(p, {{"topology", "rna"}});
  Checkpoint ck = ParseCheckpoint(text);
  CHECK(ck.params.dims == p.dims);
  CHECK(ck.header.at("topology") == "rna");
  CHECK(FormatCheckpoint(ck.params, {{"topology", "rna"}}) == text);
  auto ta = p.Tensors(), tb = ck.params.Tensors();
  for (size_t i = 0; i < ta.size(); ++i) CHECK(*ta[i].second == *tb[i].second);
  CHECK(text.rfind("PTK1 k=2 V=4 De=5 Dh=7 Din=3", 0) == 0);
  CHECK_THROWS_AS(ParseCheckpoint("PTK1 k=1 V=4\n"), FormatError);
  CHECK_THROWS_AS(ParseCheckpoint(text.substr(0, text.size() / 2)), FormatError);
}

}  // namespace ptk
