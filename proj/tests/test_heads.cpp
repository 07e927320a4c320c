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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <vector>

#include <gtest/gtest.h>

#include "arct/arct.hpp"
#include "support/draws.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

namespace arct {
namespace {

using test::Draw;
using test::random_draw;

ForwardResult forward(Draw& d, Mode mode = Mode::kEval) {
  Rng r(0);
  Graph g;
  return read_forward(g, build_arct(g, d.model, d.emb, d.inst, 0.0, mode, r));
}

CompParams& comp(Draw& d) { return std::get<CompParams>(d.model.head); }
CorrParams& corr(Draw& d) { return std::get<CorrParams>(d.model.head); }

TEST(Comp, ZeroScorerGivesUniformPrediction) {
  Draw d = random_draw(ModelKind::kComp, 1);
  comp(d).z.value.fill(0.0);
  comp(d).b_z.value.fill(0.0);
  const ForwardResult f = forward(d);
  EXPECT_EQ(f.yhat, Tensor::vector({0.5, 0.5}));
  EXPECT_NEAR(f.loss, std::log(2.0), 1e-15);
}

TEST(Comp, SwapExchangesScoresAndKeepsLossBits) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Draw d = random_draw(ModelKind::kComp, seed);
    const ForwardResult a = forward(d);
    d.inst.swap_warrants();
    const ForwardResult b = forward(d);
    ASSERT_EQ(a.s0, b.s1) << seed;
    ASSERT_EQ(a.s1, b.s0) << seed;
    ASSERT_EQ(a.yhat[0], b.yhat[1]) << seed;
    ASSERT_EQ(a.loss, b.loss) << seed;
  }
}

TEST(Comp, ScoreZeroIgnoresWarrantOne) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Draw d = random_draw(ModelKind::kComp, seed);
    Rng r(0);
    Graph g;
    const ArctGraph out = build_arct(g, d.model, d.emb, d.inst, 0.0, Mode::kEval, r);
    g.backward(out.s0);
    const auto all = test::lookups(g);
    const std::size_t n1 = d.inst.warrant1.tokens.size();
    ASSERT_GE(all.size(), n1);
    for (std::size_t k = all.size() - n1; k < all.size(); ++k) {
      const Tensor grad = g.grad(all[k]);
      for (double v : grad.data()) ASSERT_EQ(v, 0.0);
    }
    // Replacing warrant1 leaves s0 unchanged bit for bit.
    const double s0 = g.value(out.s0).item();
    d.inst.warrant1 = Sentence("a completely different warrant");
    ASSERT_EQ(forward(d).s0, s0);
  }
}

// The argument features enter both scores identically, so they cancel in
// the softmax: the loss does not depend on the claim or reason beyond rounding.
TEST(Comp, ArgumentTermCancelsInTheLoss) {
  std::size_t live_v = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Draw d = random_draw(ModelKind::kComp, seed);
    Rng r(0);
    Graph g;
    const ArctGraph out = build_arct(g, d.model, d.emb, d.inst, 0.0, Mode::kEval, r);
    g.backward(out.loss);
    for (Parameter* p : d.model.parameters()) p->zero_grad();
    g.accumulate_gradients();
    // The two score gradients sum to zero up to rounding of the softmax.
    for (double v : comp(d).u.grad.data()) ASSERT_LT(std::fabs(v), 1e-14);
    for (double v : comp(d).b_u.grad.data()) ASSERT_LT(std::fabs(v), 1e-14);
    double norm = 0;
    for (double v : comp(d).v.grad.data()) norm += std::fabs(v);
    // ReLU units can all be off for a draw; most draws train V.
    live_v += norm > 0.0;
  }
  EXPECT_GE(live_v, 10u);
}

TEST(CompRw, ClaimIsNeverRead) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Draw d = random_draw(ModelKind::kCompRw, seed);
    EXPECT_TRUE(comp(d).reason_only);
    EXPECT_EQ(comp(d).u.value.shape(), (Tensor::Shape{3, 8}));
    const ForwardResult a = forward(d);
    d.inst.claim = Sentence("an entirely unrelated claim , with other words");
    const ForwardResult b = forward(d);
    ASSERT_EQ(a.loss, b.loss);
    ASSERT_TRUE(bit_equal(a.yhat, b.yhat));
  }
  Draw d = random_draw(ModelKind::kCompRw, 1);
  comp(d).z.value.fill(0.0);
  comp(d).b_z.value.fill(0.0);
  EXPECT_EQ(forward(d).yhat, Tensor::vector({0.5, 0.5}));
  Rng r(0);
  EXPECT_THROW(comp_forward(comp(d), d.model.encoder, d.emb, d.inst, Mode::kEval, r), ContractError);
}

TEST(Corr, ZeroScorerGivesUniformPrediction) {
  Draw d = random_draw(ModelKind::kCorr, 1);
  corr(d).z.value.fill(0.0);
  corr(d).b_z.value.fill(0.0);
  EXPECT_EQ(forward(d).yhat, Tensor::vector({0.5, 0.5}));
}

TEST(Corr, SwapChangesTheLossForGenericParameters) {
  int differs = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Draw d = random_draw(ModelKind::kCorr, 1000 + seed);
    const double a = forward(d).loss;
    d.inst.swap_warrants();
    differs += forward(d).loss != a;
  }
  EXPECT_GE(differs, 99);
}

TEST(Heads, ProbabilitiesAndLossAreWellFormed) {
  for (ModelKind kind : {ModelKind::kComp, ModelKind::kCorr, ModelKind::kCompRw}) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      Draw d = random_draw(kind, seed);
      const ForwardResult f = forward(d);
      EXPECT_LT(std::fabs(f.yhat[0] + f.yhat[1] - 1.0), 1e-12);
      EXPECT_GE(f.loss, 0.0);
    }
  }
}

TEST(Heads, DimensionMismatchFailsAtConstruction) {
  Draw d = random_draw(ModelKind::kComp, 1);
  Rng r(1);
  CompParams wrong = init_comp(5, 3, r);
  Graph g;
  EXPECT_THROW(build_comp(g, wrong, d.model.encoder, d.emb, d.inst, 0.0, Mode::kEval, r), DimensionError);
  EXPECT_EQ(g.size(), 0u);
}

TEST(Nli, FeatureBlocksAndUniformOutput) {
  Rng r(2);
  EmbeddingTable emb = random_embeddings(toy::vocab(), r, 8);
  EncoderParams enc = init_encoder(4, r, 8);
  NliHeadParams head = init_nli_head(4, 5, r);
  EXPECT_EQ(head.w1.value.shape(), (Tensor::Shape{5, 32}));
  const NliInstance same{Sentence("w1 w2 w3"), Sentence("w1 w2 w3"), NliLabel::kNeutral};
  Graph g;
  const NliGraph out = build_nli(g, head, enc, emb, same, 0.0, Mode::kEval, r);
  const Tensor feats = g.value(out.features);
  for (std::size_t i = 16; i < 24; ++i) EXPECT_EQ(feats[i], 0.0);

  head.w2.value.fill(0.0);
  const NliForwardResult f = nli_forward(head, enc, emb, same, Mode::kEval, r);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(f.yhat[i], 1.0 / 3.0);
  EXPECT_NEAR(f.loss, std::log(3.0), 1e-15);
  EXPECT_EQ(init_nli_head(4, 512, r).w1.value.shape(), (Tensor::Shape{512, 32}));
}

TEST(Predict, ArgmaxWithLowIndexTies) {
  EXPECT_EQ(predict(Tensor::vector({0.6, 0.4})), 0u);
  EXPECT_EQ(predict(Tensor::vector({0.5, 0.5})), 0u);
  EXPECT_EQ(predict(Tensor::vector({0.1, 0.2, 0.7})), 2u);
}

TEST(CountParams, MatchesShapeSum) {
  for (std::size_t h : {8u, 64u, 512u}) {
    const std::size_t comp = count_params({ModelKind::kComp, 512, h});
    const std::size_t corr = count_params({ModelKind::kCorr, 512, h});
    EXPECT_EQ(corr - comp, 4 * h + 1);
  }
  EXPECT_EQ(count_params({ModelKind::kCorr, 512, 512}) - count_params({ModelKind::kComp, 512, 512}), 2049u);
  const std::size_t comp512 = count_params({ModelKind::kComp, 512, 512});
  EXPECT_EQ(comp512, oracle::model_params(0, 512, 512));
  EXPECT_EQ(comp512, 4'904'961u);
  EXPECT_EQ(count_params({ModelKind::kCorr, 64, 16}), oracle::model_params(1, 64, 16));
  EXPECT_EQ(count_params({ModelKind::kCompRw, 640, 512}), oracle::model_params(2, 640, 512));
  EXPECT_EQ(oracle::shape_sum({{1, 2 * 512}, {1, 1}}), 1025u);
  EXPECT_EQ(count_params({ModelKind::kComp, 4, 3, 300, true, 20}), count_params({ModelKind::kComp, 4, 3}) + 6000);
  // The live model agrees with the formula.
  ArctModel m = init_arct_model(ModelKind::kCorr, 6, 5, 1, 11);
  std::size_t live = 0;
  for (Parameter* p : m.parameters()) live += p->size();
  EXPECT_EQ(live, count_params({ModelKind::kCorr, 6, 5, 11}));
}

TEST(ModelKind, Names) {
  for (ModelKind k : {ModelKind::kComp, ModelKind::kCorr, ModelKind::kCompRw}) {
    EXPECT_EQ(parse_model_kind(model_kind_name(k)), k);
  }
  EXPECT_THROW(parse_model_kind("attention"), ConfigError);
}

// Per-tensor agreement of analytic and central-difference gradients:
// ||a - n|| / (||a|| + ||n||). Coordinates whose true value is far below the
// difference quotient's roundoff are covered by the aggregate.
double tensor_agreement(std::vector<Parameter*> params, const std::function<double()>& f) {
  double worst = 0.0;
  for (Parameter* p : params) {
    double diff = 0, norm_a = 0, norm_n = 0;
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + 1e-5;
      const double up = f();
      p->value[i] = saved - 1e-5;
      const double down = f();
      p->value[i] = saved;
      const double n = (up - down) / 2e-5;
      diff += (p->grad[i] - n) * (p->grad[i] - n);
      norm_a += p->grad[i] * p->grad[i];
      norm_n += n * n;
    }
    // A gradient that vanishes up to rounding (the COMP argument term) leaves
    // only the roundoff of the quotient, about eps * |f| / h per coordinate.
    if (std::sqrt(norm_a) < 1e-12) {
      if (std::sqrt(norm_n) > 1e-8) worst = 1.0;
      continue;
    }
    worst = std::max(worst, std::sqrt(diff) / (std::sqrt(norm_a) + std::sqrt(norm_n)));
  }
  return worst;
}

TEST(Gradients, FullLossesAgreePerTensor) {
  for (ModelKind kind : {ModelKind::kComp, ModelKind::kCorr, ModelKind::kCompRw}) {
    Rng r(7);
    ArctModel model = init_arct_model(kind, 4, 3, 5, 6);
    EmbeddingTable emb = random_embeddings(toy::vocab(), r, 6);
    for (double& v : emb.table.value.data()) v *= 5.0;
    const ArctInstance inst = toy::arct_instance(r);
    auto params = model.parameters();
    params.push_back(&emb.table);
    auto loss = [&](Graph& g) {
      Rng d(3);
      return build_arct(g, model, emb, inst, 0.1, Mode::kTrain, d).loss;
    };
    for (Parameter* p : params) p->zero_grad();
    Graph g;
    g.backward(loss(g));
    g.accumulate_gradients();
    const double err = tensor_agreement(params, [&] {
      Graph k;
      return k.value(loss(k)).item();
    });
    EXPECT_LT(err, 1e-6) << model_kind_name(kind);
  }
}

TEST(Checkpoint, RoundTripAndRecord) {
  test::TempDir dir;
  for (ModelKind kind : {ModelKind::kComp, ModelKind::kCorr, ModelKind::kCompRw}) {
    ArctModel m = init_arct_model(kind, 3, 2, 9, 7);
    const auto path = dir.path() / "m.ckpt";
    save_model(m, 0xabcdef0123456789ULL, path);
    LoadedModel back = load_model(path);
    EXPECT_EQ(back.record.kind, kind);
    EXPECT_EQ(back.record.d, 3u);
    EXPECT_EQ(back.record.h, 2u);
    EXPECT_EQ(back.record.input_dim, 7u);
    EXPECT_EQ(back.record.vocab_hash, 0xabcdef0123456789ULL);
    const auto a = m.parameters(), b = back.model.parameters();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(bit_equal(a[i]->value, b[i]->value));

    std::ifstream in(path, std::ios::binary);
    std::string bytes{std::istreambuf_iterator<char>(in), {}};
    std::ofstream(dir.path() / "cut.ckpt", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
    EXPECT_THROW(load_model(dir.path() / "cut.ckpt"), CorruptionError);
    std::ofstream(dir.path() / "long.ckpt", std::ios::binary) << bytes << 'x';
    EXPECT_THROW(load_model(dir.path() / "long.ckpt"), CorruptionError);
  }
  EXPECT_THROW(ModelRecord::parse("kind=comp d=3"), FormatError);
}

}  // namespace
}  // namespace arct
