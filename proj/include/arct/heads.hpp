// Copyright 2026 The ARCT Toolkit Authors. All Rights Reserved.
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

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "arct/autodiff.hpp"
#include "arct/corpus.hpp"
#include "arct/embeddings.hpp"
#include "arct/encoder.hpp"
#include "arct/error.hpp"
#include "arct/rng.hpp"

namespace arct {

enum class ModelKind { kComp, kCorr, kCompRw };

inline const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::kComp: return "comp";
    case ModelKind::kCorr: return "corr";
    case ModelKind::kCompRw: return "comp-rw";
  }
  return "?";
}

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "comp") return ModelKind::kComp;
  if (s == "corr") return ModelKind::kCorr;
  if (s == "comp-rw") return ModelKind::kCompRw;
  throw ConfigError("unknown model kind '" + s + "' (expected comp, corr or comp-rw)");
}

/// Independent warrant matching. u maps the argument [c'; r'] (or r' alone
/// for the reason-only variant) to h features, v maps each warrant to h
/// features, and the single vector z scores each (argument, warrant) pair.
struct CompParams {
  Parameter u;    // h x 4d, or h x 2d when reason_only
  Parameter b_u;  // h
  Parameter v;    // h x 2d
  Parameter b_v;  // h
  Parameter z;    // 2h
  Parameter b_z;  // 1
  std::size_t d = 0;
  std::size_t hidden = 0;
  bool reason_only = false;

  std::vector<Parameter*> parameters() { return {&u, &b_u, &v, &b_v, &z, &b_z}; }
};

/// Correlated matching: a position-specific 2 x 3h matrix scores both
/// warrants jointly.
struct CorrParams {
  Parameter u;    // h x 4d
  Parameter b_u;  // h
  Parameter v;    // h x 2d
  Parameter b_v;  // h
  Parameter z;    // 2 x 3h
  Parameter b_z;  // 2
  std::size_t d = 0;
  std::size_t hidden = 0;

  std::vector<Parameter*> parameters() { return {&u, &b_u, &v, &b_v, &z, &b_z}; }
};

/// NLI classifier over [u; v; |u - v|; u * v]: one ReLU hidden layer and a
/// 3-way output layer.
struct NliHeadParams {
  Parameter w1;  // hidden x 8d
  Parameter b1;  // hidden
  Parameter w2;  // 3 x hidden
  Parameter b2;  // 3
  std::size_t hidden = 0;

  std::vector<Parameter*> parameters() { return {&w1, &b1, &w2, &b2}; }
};

namespace detail {

// uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights.
inline Parameter fan_in_uniform(const std::string& name, Tensor::Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(-bound, bound);
  return Parameter(name, std::move(t));
}

inline Parameter zeros(const std::string& name, std::size_t n) { return Parameter(name, Tensor({n})); }

inline void require_positive(std::size_t d, std::size_t h, const char* what) {
  if (d == 0 || h == 0) throw ParameterError(std::string(what) + ": d and h must be positive");
}

}  // namespace detail

inline CompParams init_comp(std::size_t d, std::size_t h, Rng& rng, bool reason_only = false) {
  detail::require_positive(d, h, "init_comp");
  const std::size_t arg_in = reason_only ? 2 * d : 4 * d;
  CompParams p;
  p.d = d;
  p.hidden = h;
  p.reason_only = reason_only;
  p.u = detail::fan_in_uniform("head.u", {h, arg_in}, arg_in, rng);
  p.b_u = detail::zeros("head.b_u", h);
  p.v = detail::fan_in_uniform("head.v", {h, 2 * d}, 2 * d, rng);
  p.b_v = detail::zeros("head.b_v", h);
  p.z = detail::fan_in_uniform("head.z", {2 * h}, 2 * h, rng);
  p.b_z = detail::zeros("head.b_z", 1);
  return p;
}

inline CorrParams init_corr(std::size_t d, std::size_t h, Rng& rng) {
  detail::require_positive(d, h, "init_corr");
  CorrParams p;
  p.d = d;
  p.hidden = h;
  p.u = detail::fan_in_uniform("head.u", {h, 4 * d}, 4 * d, rng);
  p.b_u = detail::zeros("head.b_u", h);
  p.v = detail::fan_in_uniform("head.v", {h, 2 * d}, 2 * d, rng);
  p.b_v = detail::zeros("head.b_v", h);
  p.z = detail::fan_in_uniform("head.z", {2, 3 * h}, 3 * h, rng);
  p.b_z = detail::zeros("head.b_z", 2);
  return p;
}

inline NliHeadParams init_nli_head(std::size_t d, std::size_t hidden, Rng& rng) {
  detail::require_positive(d, hidden, "init_nli_head");
  NliHeadParams p;
  p.hidden = hidden;
  p.w1 = detail::fan_in_uniform("nli.w1", {hidden, 8 * d}, 8 * d, rng);
  p.b1 = detail::zeros("nli.b1", hidden);
  p.w2 = detail::fan_in_uniform("nli.w2", {3, hidden}, hidden, rng);
  p.b2 = detail::zeros("nli.b2", 3);
  return p;
}

/// Graph handles produced by one forward pass over an ARCT instance.
struct ArctGraph {
  Var s0;
  Var s1;
  Var scores;  // [s0; s1]
  Var yhat;
  Var loss;
};

namespace detail {

inline void check_head_dims(std::size_t head_d, const EncoderParams& enc, const char* what) {
  if (head_d != enc.d) {
    throw DimensionError(std::string(what) + ": head built for d=" + std::to_string(head_d) +
                         " but encoder has d=" + std::to_string(enc.d));
  }
}

inline Var feature(Graph& g, Parameter& w, Parameter& b, Var x, double p, Mode mode, Rng& rng) {
  return g.dropout(g.relu(g.add(g.matmul(g.param(w), x), g.param(b))), p, mode, rng);
}

inline ArctGraph finish(Graph& g, Var s0, Var s1, Var scores, int label) {
  return {s0, s1, scores, g.softmax(scores), g.softmax_cross_entropy(scores, static_cast<std::size_t>(label))};
}

}  // namespace detail

/// a = ReLU(U[c'; r'] + b_U); w_i'' = ReLU(V w_i' + b_V);
/// s_i = z . [a; w_i''] + b_z, with both scores built by the same sequence of
/// operations. With reason_only set, a = ReLU(U r' + b_U) and the claim is
/// never read.
inline ArctGraph build_comp(Graph& g, CompParams& p, EncoderParams& enc, EmbeddingTable& emb,
                            const ArctInstance& inst, double dropout_p, Mode mode, Rng& rng) {
  detail::check_head_dims(p.d, enc, "build_comp");
  Var arg;
  if (p.reason_only) {
    arg = encode_sentence(g, enc, emb, inst.reason.tokens, dropout_p, mode, rng);
  } else {
    const Var c = encode_sentence(g, enc, emb, inst.claim.tokens, dropout_p, mode, rng);
    const Var r = encode_sentence(g, enc, emb, inst.reason.tokens, dropout_p, mode, rng);
    arg = g.concat({c, r});
  }
  const Var w0 = encode_sentence(g, enc, emb, inst.warrant0.tokens, dropout_p, mode, rng);
  const Var w1 = encode_sentence(g, enc, emb, inst.warrant1.tokens, dropout_p, mode, rng);

  const Var a = detail::feature(g, p.u, p.b_u, arg, dropout_p, mode, rng);
  const Var f0 = detail::feature(g, p.v, p.b_v, w0, dropout_p, mode, rng);
  const Var f1 = detail::feature(g, p.v, p.b_v, w1, dropout_p, mode, rng);

  const Var z = g.param(p.z);
  const Var bz = g.param(p.b_z);
  const Var s0 = g.add(g.dot(z, g.concat({a, f0})), bz);
  const Var s1 = g.add(g.dot(z, g.concat({a, f1})), bz);
  return detail::finish(g, s0, s1, g.concat({s0, s1}), inst.label);
}

/// s = Z[a; w0''; w1''] + b_Z.
inline ArctGraph build_corr(Graph& g, CorrParams& p, EncoderParams& enc, EmbeddingTable& emb,
                            const ArctInstance& inst, double dropout_p, Mode mode, Rng& rng) {
  detail::check_head_dims(p.d, enc, "build_corr");
  const Var c = encode_sentence(g, enc, emb, inst.claim.tokens, dropout_p, mode, rng);
  const Var r = encode_sentence(g, enc, emb, inst.reason.tokens, dropout_p, mode, rng);
  const Var w0 = encode_sentence(g, enc, emb, inst.warrant0.tokens, dropout_p, mode, rng);
  const Var w1 = encode_sentence(g, enc, emb, inst.warrant1.tokens, dropout_p, mode, rng);

  const Var a = detail::feature(g, p.u, p.b_u, g.concat({c, r}), dropout_p, mode, rng);
  const Var f0 = detail::feature(g, p.v, p.b_v, w0, dropout_p, mode, rng);
  const Var f1 = detail::feature(g, p.v, p.b_v, w1, dropout_p, mode, rng);

  const Var s = g.add(g.matmul(g.param(p.z), g.concat({a, f0, f1})), g.param(p.b_z));
  return detail::finish(g, g.slice(s, 0, 1), g.slice(s, 1, 1), s, inst.label);
}

struct ForwardResult {
  Tensor yhat;
  double loss = 0.0;
  double s0 = 0.0;
  double s1 = 0.0;
};

inline ForwardResult read_forward(const Graph& g, const ArctGraph& out) {
  return {g.value(out.yhat), g.value(out.loss).item(), g.value(out.s0).item(), g.value(out.s1).item()};
}

inline ForwardResult comp_forward(CompParams& p, EncoderParams& enc, EmbeddingTable& emb,
                                  const ArctInstance& inst, Mode mode, Rng& rng, double dropout_p = 0.0) {
  if (p.reason_only) throw ContractError("comp_forward: parameters are reason-only, use comp_rw_forward");
  Graph g;
  return read_forward(g, build_comp(g, p, enc, emb, inst, dropout_p, mode, rng));
}

inline ForwardResult comp_rw_forward(CompParams& p, EncoderParams& enc, EmbeddingTable& emb,
                                     const ArctInstance& inst, Mode mode, Rng& rng, double dropout_p = 0.0) {
  if (!p.reason_only) throw ContractError("comp_rw_forward: parameters include the claim, use comp_forward");
  Graph g;
  return read_forward(g, build_comp(g, p, enc, emb, inst, dropout_p, mode, rng));
}

inline ForwardResult corr_forward(CorrParams& p, EncoderParams& enc, EmbeddingTable& emb,
                                  const ArctInstance& inst, Mode mode, Rng& rng, double dropout_p = 0.0) {
  Graph g;
  return read_forward(g, build_corr(g, p, enc, emb, inst, dropout_p, mode, rng));
}

struct NliGraph {
  Var u;
  Var v;
  Var features;
  Var yhat;
  Var loss;
};

inline NliGraph build_nli(Graph& g, NliHeadParams& head, EncoderParams& enc, EmbeddingTable& emb,
                          const NliInstance& inst, double dropout_p, Mode mode, Rng& rng) {
  if (head.w1.value.cols() != 8 * enc.d) {
    throw DimensionError("build_nli: head expects " + std::to_string(head.w1.value.cols()) +
                         " features but encoder gives 8d=" + std::to_string(8 * enc.d));
  }
  const Var u = encode_sentence(g, enc, emb, inst.premise.tokens, dropout_p, mode, rng);
  const Var v = encode_sentence(g, enc, emb, inst.hypothesis.tokens, dropout_p, mode, rng);
  const Var feats = g.concat({u, v, g.abs_diff(u, v), g.hadamard(u, v)});
  const Var hidden = g.relu(g.add(g.matmul(g.param(head.w1), feats), g.param(head.b1)));
  const Var scores = g.add(g.matmul(g.param(head.w2), hidden), g.param(head.b2));
  return {u, v, feats, g.softmax(scores), g.softmax_cross_entropy(scores, inst.label_index())};
}

struct NliForwardResult {
  Tensor yhat;
  double loss = 0.0;
};

inline NliForwardResult nli_forward(NliHeadParams& head, EncoderParams& enc, EmbeddingTable& emb,
                                    const NliInstance& inst, Mode mode, Rng& rng, double dropout_p = 0.0) {
  Graph g;
  const NliGraph out = build_nli(g, head, enc, emb, inst, dropout_p, mode, rng);
  return {g.value(out.yhat), g.value(out.loss).item()};
}

/// Index of the largest probability; ties go to the lowest index.
inline std::size_t predict(const Tensor& yhat) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < yhat.size(); ++i) {
    if (yhat[i] > yhat[best]) best = i;
  }
  return best;
}

/// A task model: encoder plus one of the three heads.
struct ArctModel {
  ModelKind kind = ModelKind::kComp;
  EncoderParams encoder;
  std::variant<CompParams, CorrParams> head;

  std::size_t d() const { return encoder.d; }
  std::size_t hidden() const {
    return std::visit([](const auto& h) { return h.hidden; }, head);
  }

  std::vector<Parameter*> head_parameters() {
    return std::visit([](auto& h) { return h.parameters(); }, head);
  }

  std::vector<Parameter*> parameters() {
    auto out = encoder.parameters();
    for (Parameter* p : head_parameters()) out.push_back(p);
    return out;
  }
};

inline std::variant<CompParams, CorrParams> init_head(ModelKind kind, std::size_t d, std::size_t h, Rng& rng) {
  switch (kind) {
    case ModelKind::kComp: return init_comp(d, h, rng);
    case ModelKind::kCompRw: return init_comp(d, h, rng, true);
    case ModelKind::kCorr: return init_corr(d, h, rng);
  }
  throw ContractError("init_head: unknown model kind");
}

// Encoder and head are drawn from separate streams of one seed, so a head
// initialization does not depend on where the encoder came from.
inline ArctModel init_arct_model(ModelKind kind, std::size_t d, std::size_t h, std::uint64_t seed,
                                 std::size_t input_dim = kEmbeddingDim) {
  Rng enc_rng(derive_seed(seed, 1));
  Rng head_rng(derive_seed(seed, 2));
  ArctModel m;
  m.kind = kind;
  m.encoder = init_encoder(d, enc_rng, input_dim);
  m.head = init_head(kind, d, h, head_rng);
  return m;
}

inline ArctGraph build_arct(Graph& g, ArctModel& m, EmbeddingTable& emb, const ArctInstance& inst,
                            double dropout_p, Mode mode, Rng& rng) {
  if (auto* comp = std::get_if<CompParams>(&m.head)) {
    return build_comp(g, *comp, m.encoder, emb, inst, dropout_p, mode, rng);
  }
  return build_corr(g, std::get<CorrParams>(m.head), m.encoder, emb, inst, dropout_p, mode, rng);
}

struct NliModel {
  EncoderParams encoder;
  NliHeadParams head;

  std::vector<Parameter*> parameters() {
    auto out = encoder.parameters();
    for (Parameter* p : head.parameters()) out.push_back(p);
    return out;
  }
};

struct ModelDescription {
  ModelKind kind = ModelKind::kComp;
  std::size_t d = 0;
  std::size_t h = 0;
  std::size_t input_dim = kEmbeddingDim;
  bool include_embeddings = false;
  std::size_t vocab_size = 0;
};

/// Scalar parameter count.
///   encoder      2 * (4d*input + 4d*d + 4d)   one bias vector per direction
///   U, b_U       h*4d + h  (h*2d + h for comp-rw)
///   V, b_V       h*2d + h
///   z, b_z       2h + 1    (comp, comp-rw)
///   Z, b_Z       2*3h + 2  (corr)
///   embeddings   vocab * input, only when include_embeddings
inline std::size_t count_params(const ModelDescription& m) {
  const std::size_t d = m.d, h = m.h;
  std::size_t n = 2 * (4 * d * m.input_dim + 4 * d * d + 4 * d);
  n += h * (m.kind == ModelKind::kCompRw ? 2 * d : 4 * d) + h;
  n += h * 2 * d + h;
  n += m.kind == ModelKind::kCorr ? 2 * 3 * h + 2 : 2 * h + 1;
  if (m.include_embeddings) n += m.vocab_size * m.input_dim;
  return n;
}

}  // namespace arct
