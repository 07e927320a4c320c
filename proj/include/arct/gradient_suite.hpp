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

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "arct/autodiff.hpp"
#include "arct/corpus.hpp"
#include "arct/embeddings.hpp"
#include "arct/encoder.hpp"
#include "arct/gradcheck.hpp"
#include "arct/heads.hpp"
#include "arct/rng.hpp"

// Finite-difference check of every differentiable operation and every model
// loss at toy sizes: d = 4, h = 3, a 20-entry vocabulary, sentences of at
// most 5 tokens and 300-dimensional embeddings.
namespace arct::toy {

inline constexpr std::size_t kD = 4;
inline constexpr std::size_t kH = 3;
inline constexpr std::size_t kVocab = 20;
inline constexpr std::size_t kMaxTokens = 5;

inline Vocab vocab() {
  Vocab v;
  for (std::size_t i = 1; i < kVocab; ++i) v.add("w" + std::to_string(i));
  return v;
}

inline Sentence sentence(Rng& rng, std::size_t max_tokens = kMaxTokens) {
  const std::size_t n = 1 + static_cast<std::size_t>(rng.below(max_tokens));
  std::string text;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) text += ' ';
    text += "w" + std::to_string(1 + rng.below(kVocab - 1));
  }
  return Sentence(text);
}

inline ArctInstance arct_instance(Rng& rng) {
  ArctInstance inst;
  inst.id = "toy";
  inst.claim = sentence(rng);
  inst.reason = sentence(rng);
  inst.warrant0 = sentence(rng);
  inst.warrant1 = sentence(rng);
  inst.label = static_cast<int>(rng.below(2));
  return inst;
}

inline NliInstance nli_instance(Rng& rng) {
  return {sentence(rng), sentence(rng), static_cast<NliLabel>(rng.below(3))};
}

// Random tensor with entries bounded away from zero (kinks of relu/abs).
inline Tensor random_tensor(Tensor::Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) {
    const double mag = rng.uniform(0.1, 1.0) * scale;
    v = rng.bernoulli(0.5) ? mag : -mag;
  }
  return t;
}

}  // namespace arct::toy

namespace arct {

struct GradientCase {
  std::string name;
  GradCheckResult result;
};

struct GradientSuiteReport {
  std::vector<GradientCase> cases;
  double max_rel_error = 0.0;
  double seconds = 0.0;
};

/// Runs analytic backward on `loss` once, then compares against central
/// differences over every coordinate of `params`.
inline GradCheckResult check_graph_gradient(const std::vector<Parameter*>& params,
                                            const std::function<Var(Graph&)>& loss, double h = 1e-5) {
  for (Parameter* p : params) p->zero_grad();
  Graph g;
  const Var l = loss(g);
  g.backward(l);
  g.accumulate_gradients();
  return grad_check(
      [&] {
        Graph fg;
        return fg.value(loss(fg)).item();
      },
      params, h);
}

/// With models unset only the primitive operations are checked; the random
/// points are the same as in the full run.
inline GradientSuiteReport run_gradient_suite(std::uint64_t seed = 2018, double h = 1e-5, bool models = true) {
  const auto start = std::chrono::steady_clock::now();
  GradientSuiteReport report;
  Rng rng(seed);
  auto record = [&](const std::string& name, const GradCheckResult& r) {
    report.cases.push_back({name, r});
    report.max_rel_error = std::max(report.max_rel_error, r.max_rel_error);
  };
  using toy::random_tensor;

  // Elementwise and structural operations, each reduced to a scalar by a
  // fixed random weighting.
  {
    Parameter a("a", random_tensor({3, 4}, rng)), b("b", random_tensor({4, 2}, rng));
    const Tensor w = random_tensor({3, 2}, rng);
    record("matmul", check_graph_gradient({&a, &b}, [&](Graph& g) {
             return g.sum(g.hadamard(g.matmul(g.param(a), g.param(b)), g.constant(w)));
           }, h));
  }
  {
    Parameter a("a", random_tensor({3, 4}, rng)), x("x", random_tensor({4}, rng));
    const Tensor w = random_tensor({3}, rng);
    record("matmul_vector", check_graph_gradient({&a, &x}, [&](Graph& g) {
             return g.dot(g.matmul(g.param(a), g.param(x)), g.constant(w));
           }, h));
  }
  {
    Parameter x("x", random_tensor({6}, rng)), y("y", random_tensor({6}, rng));
    const Tensor w = random_tensor({6}, rng);
    const std::vector<std::pair<std::string, Pointwise>> kinds = {
        {"sigmoid", Pointwise::kSigmoid}, {"tanh", Pointwise::kTanh}, {"hadamard", Pointwise::kHadamard},
        {"abs_diff", Pointwise::kAbsDiff}, {"add", Pointwise::kAdd}};
    for (const auto& [name, kind] : kinds) {
      record(name, check_graph_gradient({&x, &y}, [&](Graph& g) {
               return g.dot(g.pointwise(g.param(x), kind, g.param(y)), g.constant(w));
             }, h));
    }
    record("relu", check_graph_gradient({&x}, [&](Graph& g) {
             return g.dot(g.relu(g.param(x)), g.constant(w));
           }, h));
  }
  {
    Parameter a("a", random_tensor({3}, rng)), b("b", random_tensor({2}, rng));
    const Tensor w = random_tensor({5}, rng);
    record("concat", check_graph_gradient({&a, &b}, [&](Graph& g) {
             return g.dot(g.concat({g.param(a), g.param(b)}), g.constant(w));
           }, h));
    Parameter m1("m1", random_tensor({2, 3}, rng)), m2("m2", random_tensor({2, 1}, rng));
    const Tensor wm = random_tensor({2, 4}, rng);
    record("concat_columns", check_graph_gradient({&m1, &m2}, [&](Graph& g) {
             return g.sum(g.hadamard(g.concat({g.param(m1), g.param(m2)}, 1), g.constant(wm)));
           }, h));
  }
  {
    Parameter hm("h", random_tensor({4, 5}, rng));
    const Tensor w = random_tensor({5}, rng);
    const std::vector<bool> mask = {false, true, false, false};
    record("max_over_time", check_graph_gradient({&hm}, [&](Graph& g) {
             return g.dot(g.max_over_time(g.param(hm), mask), g.constant(w));
           }, h));
    Parameter r0("r0", random_tensor({3}, rng)), r1("r1", random_tensor({3}, rng));
    const Tensor w3 = random_tensor({3}, rng);
    record("stack_slice", check_graph_gradient({&r0, &r1}, [&](Graph& g) {
             const Var m = g.max_over_time(g.stack_rows(std::vector<Var>{g.param(r0), g.param(r1)}));
             return g.add(g.dot(m, g.constant(w3)), g.sum(g.slice(g.param(r1), 1, 2)));
           }, h));
  }
  {
    Parameter s("s", random_tensor({4}, rng));
    const Tensor w = random_tensor({4}, rng);
    record("softmax", check_graph_gradient({&s}, [&](Graph& g) {
             return g.dot(g.softmax(g.param(s)), g.constant(w));
           }, h));
    record("cross_entropy", check_graph_gradient({&s}, [&](Graph& g) {
             return g.cross_entropy(g.softmax(g.param(s)), 2);
           }, h));
    record("softmax_cross_entropy", check_graph_gradient({&s}, [&](Graph& g) {
             return g.softmax_cross_entropy(g.param(s), 1);
           }, h));
  }
  {
    Parameter x("x", random_tensor({8}, rng));
    const Tensor w = random_tensor({8}, rng);
    const std::uint64_t mask_seed = rng.next_u64();
    record("dropout", check_graph_gradient({&x}, [&](Graph& g) {
             Rng mask_rng(mask_seed);
             return g.dot(g.dropout(g.param(x), 0.5, Mode::kTrain, mask_rng), g.constant(w));
           }, h));
  }

  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  if (!models) {
    report.seconds = elapsed();
    return report;
  }

  // Recurrent cell and the encoder.
  Vocab vocab = toy::vocab();
  EmbeddingTable emb = random_embeddings(vocab, rng);
  emb.table.value = random_tensor({vocab.size(), kEmbeddingDim}, rng, 0.3);
  {
    EncoderParams enc = init_encoder(toy::kD, rng);
    Parameter x("x", random_tensor({kEmbeddingDim}, rng, 0.3));
    Parameter hp("h_prev", random_tensor({toy::kD}, rng)), cp("c_prev", random_tensor({toy::kD}, rng));
    const Tensor wh = random_tensor({toy::kD}, rng), wc = random_tensor({toy::kD}, rng);
    std::vector<Parameter*> params = {&enc.forward.w_x, &enc.forward.w_h, &enc.forward.b, &x, &hp, &cp};
    record("lstm_cell", check_graph_gradient(params, [&](Graph& g) {
             const LstmState s = lstm_cell(g, enc.forward, g.param(x), g.param(hp), g.param(cp));
             return g.add(g.dot(s.h, g.constant(wh)), g.dot(s.c, g.constant(wc)));
           }, h));
  }
  const std::uint64_t dropout_seed = rng.next_u64();
  {
    EncoderParams enc = init_encoder(toy::kD, rng);
    const Sentence sent = toy::sentence(rng);
    const Tensor w = random_tensor({2 * toy::kD}, rng);
    auto params = enc.parameters();
    params.push_back(&emb.table);
    record("encode_sentence", check_graph_gradient(params, [&](Graph& g) {
             Rng r(dropout_seed);
             return g.dot(encode_sentence(g, enc, emb, sent.tokens, 0.1, Mode::kTrain, r), g.constant(w));
           }, h));
  }

  // Full model losses, in train mode with a fixed dropout mask.
  for (ModelKind kind : {ModelKind::kComp, ModelKind::kCorr, ModelKind::kCompRw}) {
    ArctModel model = init_arct_model(kind, toy::kD, toy::kH, rng.next_u64());
    const ArctInstance inst = toy::arct_instance(rng);
    auto params = model.parameters();
    params.push_back(&emb.table);
    record(std::string(model_kind_name(kind)) + "_loss", check_graph_gradient(params, [&](Graph& g) {
             Rng r(dropout_seed);
             return build_arct(g, model, emb, inst, 0.1, Mode::kTrain, r).loss;
           }, h));
  }
  {
    Rng enc_rng(rng.next_u64());
    NliModel model{init_encoder(toy::kD, enc_rng), init_nli_head(toy::kD, 2 * toy::kH, enc_rng)};
    const NliInstance inst = toy::nli_instance(rng);
    auto params = model.parameters();
    params.push_back(&emb.table);
    record("nli_loss", check_graph_gradient(params, [&](Graph& g) {
             Rng r(dropout_seed);
             return build_nli(g, model.head, model.encoder, emb, inst, 0.1, Mode::kTrain, r).loss;
           }, h));
  }

  report.seconds = elapsed();
  return report;
}

inline GradientSuiteReport run_gradient_suite_ops(std::uint64_t seed = 2018) {
  return run_gradient_suite(seed, 1e-5, false);
}

}  // namespace arct
