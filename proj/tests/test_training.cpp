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
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "arct/arct.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

namespace arct {
namespace {

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

EmbeddingTable embeddings_for(const DataSplits& s, std::size_t dim = 300, std::uint64_t seed = 9) {
  Vocab v;
  add_to_vocab(v, s.train);
  add_to_vocab(v, s.dev);
  add_to_vocab(v, s.test);
  Rng r(seed);
  return random_embeddings(v, r, dim);
}

TrainConfig small_config(std::uint64_t seed = 1) {
  TrainConfig c;
  c.d = 8;
  c.hidden = 8;
  c.seed = seed;
  c.max_epochs = 50;
  return c;
}

DataSplits cue_splits(std::size_t n_train = 200) {
  return {synth::cue_corpus(1, {n_train}), synth::cue_corpus(2, {100}), synth::cue_corpus(3, {100})};
}

TEST(Adam, ZeroGradientLeavesParametersAndCountsTheStep) {
  Parameter p("p", Tensor::vector({1.0, -2.0}));
  p.zero_grad();
  AdamState s;
  const std::vector<ParamGroup> groups{{{&p}, 0.002}};
  s.step(groups);
  s.step(groups);
  EXPECT_EQ(p.value, Tensor::vector({1.0, -2.0}));
  EXPECT_EQ(s.t(), 2u);
}

TEST(Adam, FirstStepByHand) {
  Parameter p("p", Tensor::vector({0.5}));
  p.grad = Tensor::vector({1.0});
  AdamState s;
  const std::vector<ParamGroup> groups{{{&p}, 0.002}};
  adam_step(s, groups);
  // m = 0.1, v = 0.001; m_hat = 1, v_hat = 1.
  EXPECT_DOUBLE_EQ(p.value[0], 0.5 - 0.002 * 1.0 / (1.0 + 1e-8));
  EXPECT_NEAR(p.value[0] - 0.5, -0.002, 1e-10);
}

TEST(Adam, SecondStepByHand) {
  Parameter p("p", Tensor::vector({0.0}));
  AdamState s;
  const std::vector<ParamGroup> groups{{{&p}, 0.01}};
  p.grad = Tensor::vector({2.0});
  s.step(groups);
  p.grad = Tensor::vector({-1.0});
  s.step(groups);
  const double m1 = 0.1 * 2.0, v1 = 0.001 * 4.0;
  const double m2 = 0.9 * m1 + 0.1 * -1.0, v2 = 0.999 * v1 + 0.001 * 1.0;
  const double step1 = 0.01 * (m1 / 0.1) / (std::sqrt(v1 / 0.001) + 1e-8);
  const double step2 = 0.01 * (m2 / (1 - 0.81)) / (std::sqrt(v2 / (1 - 0.998001)) + 1e-8);
  EXPECT_NEAR(p.value[0], -step1 - step2, 1e-15);
}

TEST(Adam, GroupRatesAndShapeErrors) {
  Parameter a("a", Tensor::vector({0.0})), b("b", Tensor::vector({0.0}));
  a.grad = Tensor::vector({1.0});
  b.grad = Tensor::vector({1.0});
  AdamState s;
  const std::vector<ParamGroup> groups{{{&a}, 0.002}, {{&b}, 0.0002}};
  s.step(groups);
  EXPECT_NEAR(a.value[0], -0.002, 1e-10);
  EXPECT_NEAR(b.value[0], -0.0002, 1e-11);
  Parameter c("c", Tensor::vector({0.0, 1.0}));
  c.grad = Tensor::vector({1.0});
  const std::vector<ParamGroup> bad{{{&c}, 0.1}};
  EXPECT_THROW(s.step(bad), DimensionError);
}

TEST(Anneal, ConstantAccuracySchedule) {
  std::vector<double> history;
  std::vector<double> rates;
  double lr = 0.002;
  for (int epoch = 0; epoch < 10; ++epoch) {
    rates.push_back(lr);
    history.push_back(0.5);
    const AnnealDecision d = anneal_update(lr, history);
    lr = d.lr;
    if (d.stop) break;
  }
  // The first epoch always counts as an improvement.
  const std::vector<double> expected = {0.002, 0.002, 4e-4, 8e-5, 1.6e-5};
  ASSERT_EQ(rates.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(rates[i], expected[i], 1e-18);
  EXPECT_NEAR(lr, 3.2e-6, 1e-19);
}

TEST(Anneal, ImprovementIsStrict) {
  const std::vector<double> up = {0.5, 0.6};
  AnnealDecision d = anneal_update(0.002, up);
  EXPECT_TRUE(d.improved);
  EXPECT_EQ(d.lr, 0.002);
  EXPECT_FALSE(d.stop);
  const std::vector<double> tie = {0.6, 0.5, 0.6};
  d = anneal_update(0.002, tie);
  EXPECT_FALSE(d.improved);
  EXPECT_DOUBLE_EQ(d.lr, 0.002 / 5);
  const std::vector<double> first = {0.1};
  EXPECT_TRUE(anneal_update(0.002, first).improved);
  EXPECT_TRUE(anneal_update(1.2e-5, tie).stop);
  EXPECT_THROW(anneal_update(0.002, std::vector<double>{}), ContractError);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.anneal_factor = 1.0;
  EXPECT_THROW(c.validate(), ParameterError);
  c = TrainConfig{};
  c.principal_lr = 0.0;
  EXPECT_THROW(c.validate(), ParameterError);
  c = TrainConfig{};
  c.dropout_p = 1.0;
  EXPECT_THROW(c.validate(), ParameterError);
  c = TrainConfig{};
  EXPECT_EQ(c.batch_size, 16u);
  EXPECT_EQ(c.dropout_p, 0.1);
  EXPECT_EQ(c.principal_lr, 0.002);
  EXPECT_EQ(c.lr_floor, 1e-5);
  EXPECT_EQ(c.anneal_factor, 5.0);
}

TEST(TrainModel, LearnsTheCueCorpus) {
  const DataSplits s = cue_splits();
  TrainConfig c = small_config();
  c.d = 16;
  c.hidden = 16;
  const TrainOutcome out = train_model(ModelKind::kComp, s, c, EncoderSource::random(), embeddings_for(s));
  EXPECT_GE(out.result.train_acc, 0.95);
  EXPECT_GE(out.result.test_acc, 0.8);
  EXPECT_LE(out.result.epochs_run, 50u);
}

TEST(TrainModel, DeterministicRunsAndCheckpoints) {
  const DataSplits s = cue_splits(64);
  const EmbeddingTable emb = embeddings_for(s, 20);
  TrainConfig c = small_config(3);
  c.max_epochs = 3;
  test::TempDir dir;
  TrainOutcome a = train_model(ModelKind::kCorr, s, c, EncoderSource::random(), emb);
  TrainOutcome b = train_model(ModelKind::kCorr, s, c, EncoderSource::random(), emb);
  EXPECT_EQ(a.result, b.result);
  save_model(a.model, a.embeddings.vocab.hash(), dir.path() / "a");
  save_model(b.model, b.embeddings.vocab.hash(), dir.path() / "b");
  EXPECT_EQ(read_bytes(dir.path() / "a"), read_bytes(dir.path() / "b"));
  c.seed = 4;
  TrainOutcome other = train_model(ModelKind::kCorr, s, c, EncoderSource::random(), emb);
  save_model(other.model, other.embeddings.vocab.hash(), dir.path() / "c");
  EXPECT_NE(read_bytes(dir.path() / "a"), read_bytes(dir.path() / "c"));
}

TEST(TrainModel, ConstantDevAccuracyStopsAfterFiveEpochs) {
  DataSplits s = cue_splits(32);
  // Identical warrants give identical COMP scores, so dev accuracy is the
  // share of label 0 whatever the parameters.
  for (auto& d : s.dev) d.warrant1 = d.warrant0;
  TrainConfig c = small_config();
  std::ostringstream log;
  const TrainOutcome out = train_model(ModelKind::kComp, s, c, EncoderSource::random(), embeddings_for(s, 12), &log);
  EXPECT_EQ(out.result.epochs_run, 5u);
  ASSERT_EQ(out.epochs.size(), 5u);
  const std::vector<double> rates = {0.002, 0.002, 4e-4, 8e-5, 1.6e-5};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(out.epochs[i].lr, rates[i], 1e-18);
  EXPECT_NEAR(out.result.final_lr, 3.2e-6, 1e-19);

  // One tab-separated line per epoch: epoch, train loss, dev accuracy, lr.
  std::istringstream lines(log.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    ++n;
    std::istringstream f(line);
    std::string epoch, loss, dev, lr;
    ASSERT_TRUE(std::getline(f, epoch, '\t') && std::getline(f, loss, '\t') && std::getline(f, dev, '\t') &&
                std::getline(f, lr));
    EXPECT_EQ(std::stoul(epoch), n);
  }
  EXPECT_EQ(n, 5u);
}

TEST(TrainModel, ScheduleAndRetainedCheckpoint) {
  const DataSplits s = cue_splits(48);
  TrainConfig c = small_config(5);
  c.max_epochs = 12;
  TrainOutcome out = train_model(ModelKind::kComp, s, c, EncoderSource::random(), embeddings_for(s, 16));
  double best = 0;
  double prev = c.principal_lr;
  for (const auto& e : out.epochs) {
    best = std::max(best, e.dev_acc);
    EXPECT_LE(e.lr, prev);
    const double k = std::log(c.principal_lr / e.lr) / std::log(5.0);
    EXPECT_NEAR(k, std::round(k), 1e-9);
    prev = e.lr;
  }
  EXPECT_EQ(out.result.dev_acc, best);
  EXPECT_EQ(accuracy(out.model, out.embeddings, s.dev), best);
}

TEST(TrainModel, FrozenPartsStayBitwiseConstant) {
  const DataSplits s = cue_splits(32);
  const EmbeddingTable emb = embeddings_for(s, 10);
  TrainConfig c = small_config(2);
  c.max_epochs = 2;
  c.tune_encoder = false;
  ArctModel init = init_arct_model(ModelKind::kComp, c.d, c.hidden, c.seed, emb.dim());
  TrainOutcome frozen = train_model(ModelKind::kComp, s, c, EncoderSource::random(), emb);
  EXPECT_TRUE(bit_equal(frozen.embeddings.table.value, emb.table.value));
  ArctModel reference = init;
  EXPECT_EQ(frozen.model.encoder.parameters().size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_TRUE(bit_equal(frozen.model.encoder.parameters()[i]->value, reference.encoder.parameters()[i]->value));
  }

  c.tune_encoder = true;
  c.freeze_embeddings = false;
  c.embedding_lr = 0.0002;
  TrainOutcome tuned = train_model(ModelKind::kComp, s, c, EncoderSource::random(), emb);
  EXPECT_FALSE(bit_equal(tuned.embeddings.table.value, emb.table.value));
  EXPECT_FALSE(bit_equal(tuned.model.encoder.forward.w_x.value, reference.encoder.forward.w_x.value));
}

TEST(TrainModel, Errors) {
  const DataSplits s = cue_splits(16);
  const EmbeddingTable emb = embeddings_for(s, 10);
  DataSplits no_dev = s;
  no_dev.dev.clear();
  EXPECT_THROW(train_model(ModelKind::kComp, no_dev, small_config(), EncoderSource::random(), emb), SizeError);
  DataSplits no_train = s;
  no_train.train.clear();
  EXPECT_THROW(train_model(ModelKind::kComp, no_train, small_config(), EncoderSource::random(), emb), SizeError);
  Rng r(1);
  EXPECT_THROW(train_model(ModelKind::kComp, s, small_config(), EncoderSource::from(init_encoder(5, r, 10)), emb),
               ConfigError);
  EXPECT_THROW(train_model(ModelKind::kComp, s, small_config(), EncoderSource::from(init_encoder(8, r, 11)), emb),
               ConfigError);
}

TEST(PretrainNli, LearnsOverlapAndTransfers) {
  const NliSplits n{synth::overlap_nli_corpus(1, 300), synth::overlap_nli_corpus(2, 150)};
  const DataSplits s = cue_splits(32);
  Vocab v;
  add_to_vocab(v, n.train);
  add_to_vocab(v, n.dev);
  add_to_vocab(v, s.train);
  add_to_vocab(v, s.dev);
  add_to_vocab(v, s.test);
  Rng r(9);
  const EmbeddingTable emb = random_embeddings(v, r);
  TrainConfig c = small_config();
  c.d = 16;
  c.nli_hidden = 16;
  test::TempDir dir;
  const auto path = dir.path() / "enc.bin";
  const PretrainOutcome p = pretrain_nli(n, c, emb, path);
  EXPECT_GT(p.dev_acc, 1.0 / 3.0 + 0.2);
  EncoderParams loaded = load_encoder(path);
  EncoderParams trained = p.model.encoder;
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_TRUE(bit_equal(loaded.parameters()[i]->value, trained.parameters()[i]->value));
  }

  c.hidden = 8;
  c.max_epochs = 2;
  EXPECT_NO_THROW(train_model(ModelKind::kComp, s, c, EncoderSource::file(path), emb));
  c.d = 8;
  EXPECT_THROW(train_model(ModelKind::kComp, s, c, EncoderSource::file(path), emb), ConfigError);
  EXPECT_THROW(pretrain_nli(NliSplits{n.train, {}}, c, emb), SizeError);
}

}  // namespace
}  // namespace arct
