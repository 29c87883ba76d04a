// src/model.cc

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

#include "ptk/model.h"

#include <sstream>

namespace ptk {

ModelScorer::ModelScorer(const ScorerParamsd& params, MatrixT<double> h)
    : params_(params), h_(std::move(h)), contexts_(params.contexts()) {
  if (h_.cols() != params_.dims.model_dim)
    throw ArgumentError("encoder output width does not match the model");
  if (contexts_.order() == 1) {
    tables_.resize(h_.rows());
    have_table_.assign(h_.rows(), false);
  } else {
    rows_.resize(h_.rows());
  }
}

std::span<const double> ModelScorer::LogProbs(int t, int ctx) const {
  if (t < 0 || t >= NumFrames()) throw ArgumentError("frame index out of range");
  if (!contexts_.IsValid(ctx)) throw ArgumentError("context id out of range");
  const int v = contexts_.num_labels();
  if (contexts_.order() == 1) {
    if (!have_table_[t]) {
      tables_[t] = ScoreAllContexts<double>(params_, h_.row(t));
      have_table_[t] = true;
    }
    return {tables_[t].data() + static_cast<size_t>(ctx) * v, static_cast<size_t>(v)};
  }
  auto& cache = rows_[t];
  auto it = cache.find(ctx);
  if (it == cache.end()) {
    MatrixT<double> row = ScoreStep<double>(params_, h_.row(t), ctx);
    it = cache.emplace(ctx, std::vector<double>(row.data(), row.data() + v)).first;
  }
  return it->second;
}

std::string FormatTensor(std::string_view name, const MatrixT<double>& m) {
  std::string out = std::string(name) + ' ' + std::to_string(m.rows()) + ' ' +
                    std::to_string(m.cols()) + '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ' ';
      out += FormatDouble(m(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string FormatCheckpoint(const ScorerParamsd& params, const CheckpointHeader& extra) {
  const ModelDims& d = params.dims;
  std::string out = "PTK1 k=" + std::to_string(d.context_order) +
                    " V=" + std::to_string(d.num_labels) + " De=" + std::to_string(d.embed_dim) +
                    " Dh=" + std::to_string(d.model_dim) + " Din=" + std::to_string(d.input_dim) +
                    " splice=" + std::to_string(d.splice);
  for (const auto& [key, value] : extra) {
    if (key == "k" || key == "V" || key == "De" || key == "Dh" || key == "Din" ||
        key == "splice")
      continue;
    out += ' ' + key + '=' + value;
  }
  out += '\n';
  for (auto [name, m] : params.Tensors())
    if (m->size() > 0) out += FormatTensor(name, *m);
  return out;
}

Checkpoint ParseCheckpoint(std::string_view text) {
  std::vector<std::string_view> lines = SplitChar(text, '\n');
  size_t i = 0;
  auto fail = [&i](const std::string& why) {
    throw FormatError("checkpoint line " + std::to_string(i + 1) + ": " + why);
  };
  if (lines.empty()) fail("empty checkpoint");
  Checkpoint ck;
  auto head = SplitWhitespace(lines[0]);
  if (head.empty() || head[0] != "PTK1") fail("missing PTK1 magic");
  for (size_t k = 1; k < head.size(); ++k) {
    size_t eq = head[k].find('=');
    if (eq == std::string_view::npos) fail("bad header token '" + std::string(head[k]) + "'");
    ck.header[std::string(head[k].substr(0, eq))] = std::string(head[k].substr(eq + 1));
  }
  auto header_int = [&](const char* key) {
    auto it = ck.header.find(key);
    if (it == ck.header.end()) fail(std::string("header lacks ") + key);
    try {
      return static_cast<int>(ParseInt(it->second, key));
    } catch (const FormatError& e) {
      fail(e.what());
    }
    return 0;
  };
  ModelDims dims;
  dims.context_order = header_int("k");
  dims.num_labels = header_int("V");
  dims.embed_dim = header_int("De");
  dims.model_dim = header_int("Dh");
  dims.input_dim = header_int("Din");
  dims.splice = ck.header.count("splice") ? header_int("splice") : 0;
  if (dims.splice < 0) fail("negative splice width");

  std::map<std::string, MatrixT<double>> tensors;
  for (i = 1; i < lines.size(); ++i) {
    auto fields = SplitWhitespace(lines[i]);
    if (fields.empty()) continue;
    bool is_block = fields.size() == 3;
    long rows = 0, cols = 0;
    if (is_block) {
      try {
        rows = ParseInt(fields[1], "rows");
        cols = ParseInt(fields[2], "cols");
      } catch (const FormatError&) {
        is_block = false;
      }
    }
    if (!is_block) {
      ck.trailing_lines.emplace_back(lines[i]);
      continue;
    }
    if (rows < 0 || cols < 0) fail("negative tensor shape");
    MatrixT<double> m(rows, cols);
    const std::string name(fields[0]);
    for (long r = 0; r < rows; ++r) {
      ++i;
      if (i >= lines.size()) fail("truncated tensor '" + name + "'");
      auto values = SplitWhitespace(lines[i]);
      if (static_cast<long>(values.size()) != cols) fail("wrong row width in '" + name + "'");
      for (long c = 0; c < cols; ++c) {
        try {
          m(r, c) = ParseDouble(values[c], "tensor value");
        } catch (const FormatError& e) {
          fail(e.what());
        }
      }
    }
    if (!tensors.emplace(name, std::move(m)).second) fail("duplicate tensor '" + name + "'");
  }

  ScorerParamsd& p = ck.params;
  for (auto& [name, m] : p.Tensors()) {
    auto it = tensors.find(std::string(name));
    if (it == tensors.end()) continue;
    *m = std::move(it->second);
    tensors.erase(it);
  }
  ck.extra_tensors = std::move(tensors);
  if (p.ffnn1_w.size() == 0) throw FormatError("checkpoint lacks ffnn.1.w");
  dims.ffnn_dim = static_cast<int>(p.ffnn1_w.cols());
  dims.encoder_hidden = p.enc_hidden_w.size() > 0;
  p.dims = dims;
  const int v = dims.num_labels, dh = dims.model_dim;
  auto expect = [](const MatrixT<double>& m, long rows, long cols, const char* name) {
    if (m.rows() != rows || m.cols() != cols)
      throw FormatError(std::string("checkpoint tensor ") + name + " has shape " +
                        std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                        ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  };
  expect(p.enc_w, dims.EncoderInputDim(), dh, "encoder.w");
  expect(p.enc_b, 1, dh, "encoder.b");
  if (dims.encoder_hidden) {
    expect(p.enc_hidden_w, dh, dh, "encoder.hidden.w");
    expect(p.enc_hidden_b, 1, dh, "encoder.hidden.b");
  }
  expect(p.embedding, v + 1, dims.embed_dim, "embedding");
  expect(p.ffnn1_w, dims.context_order * dims.embed_dim, dims.ffnn_dim, "ffnn.1.w");
  expect(p.ffnn1_b, 1, dims.ffnn_dim, "ffnn.1.b");
  expect(p.ffnn2_w, dims.ffnn_dim, dh, "ffnn.2.w");
  expect(p.ffnn2_b, 1, dh, "ffnn.2.b");
  expect(p.out_w, dh, v, "output.w");
  expect(p.out_b, 1, v, "output.b");
  expect(p.aux_w, dh, v, "aux.w");
  expect(p.aux_b, 1, v, "aux.b");
  if (!p.embedding.row(v).isZero(0.0))
    throw FormatError("checkpoint sentinel embedding row is not zero");
  return ck;
}

}  // namespace ptk
