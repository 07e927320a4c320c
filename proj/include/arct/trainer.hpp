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
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "arct/autodiff.hpp"
#include "arct/corpus.hpp"
#include "arct/embeddings.hpp"
#include "arct/encoder.hpp"
#include "arct/error.hpp"
#include "arct/heads.hpp"
#include "arct/optim.hpp"
#include "arct/rng.hpp"

namespace arct {

struct TrainConfig {
  double principal_lr = 0.002;
  std::optional<double> embedding_lr;  // rate for tuned embeddings; principal rate if unset
  std::size_t batch_size = 16;
  double dropout_p = 0.1;
  double lr_floor = 1e-5;
  double anneal_factor = 5.0;
  bool freeze_embeddings = true;
  bool tune_encoder = true;
  std::uint64_t seed = 0;
  std::size_t max_epochs = 100;
  std::size_t d = 512;           // encoder size per direction
  std::size_t hidden = 512;      // h
  std::size_t nli_hidden = 512;  // NLI classifier hidden layer

  void validate() const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(principal_lr)) throw ParameterError("principal_lr must be positive");
    if (embedding_lr && !positive(*embedding_lr)) throw ParameterError("embedding_lr must be positive");
    if (!positive(lr_floor)) throw ParameterError("lr_floor must be positive");
    if (!(anneal_factor > 1.0)) throw ParameterError("anneal_factor must exceed 1");
    if (batch_size == 0) throw ParameterError("batch_size must be at least 1");
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ParameterError("dropout must be in [0, 1)");
    if (d == 0 || hidden == 0 || nli_hidden == 0) throw ParameterError("model sizes must be positive");
    if (max_epochs == 0) throw ParameterError("max_epochs must be at least 1");
  }
};

struct RunResult {
  std::uint64_t seed = 0;
  double train_acc = 0.0;
  double dev_acc = 0.0;
  double test_acc = 0.0;
  std::size_t epochs_run = 0;
  double final_lr = 0.0;

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_acc = 0.0;
  double lr = 0.0;  // rate used during the epoch
};

// `epoch<TAB>train_loss<TAB>dev_acc<TAB>lr`
inline void write_epoch_line(std::ostream& out, const EpochLog& e) {
  out << e.epoch << '\t' << e.train_loss << '\t' << e.dev_acc << '\t' << e.lr << '\n';
}

namespace detail {

struct FitOutcome {
  double best_dev = 0.0;
  std::size_t epochs = 0;
  double final_lr = 0.0;
  std::vector<EpochLog> epochs_log;
};

/// Shared loop for task and NLI training: seeded shuffle per epoch, mean
/// loss per batch, one Adam step per batch, dev evaluation and annealing
/// after every epoch, best-dev parameters restored at the end.
template <class Instance, class LossFn, class DevFn>
FitOutcome fit(const std::vector<Instance>& train, std::vector<Parameter*> main_params,
               Parameter* embeddings, double embedding_lr, std::vector<Parameter*> snapshot_params,
               const TrainConfig& config, LossFn loss_fn, DevFn dev_accuracy, std::ostream* log) {
  AdamState adam;
  Rng dropout_rng(derive_seed(config.seed, 3));
  double lr = config.principal_lr;
  std::vector<double> history;
  double best = -1.0;
  std::vector<Tensor> best_values;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<Parameter*> all_trainable = main_params;
  if (embeddings) all_trainable.push_back(embeddings);

  FitOutcome out;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(config.seed, 4, epoch));
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (Parameter* p : snapshot_params) p->zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        Graph g;
        const Var loss = loss_fn(g, train[order[k]], Mode::kTrain, dropout_rng);
        const double value = g.value(loss).item();
        if (!std::isfinite(value)) {
          throw NumericalError("non-finite loss at epoch " + std::to_string(epoch));
        }
        loss_sum += value;
        g.backward(loss);
        g.accumulate_gradients(scale);
      }
      std::vector<ParamGroup> groups{{main_params, lr}};
      if (embeddings) groups.push_back({{embeddings}, embedding_lr * (lr / config.principal_lr)});
      adam.step(groups);
    }
    const double dev = dev_accuracy();
    history.push_back(dev);
    const EpochLog entry{epoch, loss_sum / static_cast<double>(train.size()), dev, lr};
    out.epochs_log.push_back(entry);
    if (log) write_epoch_line(*log, entry);
    if (dev > best) {
      best = dev;
      best_values.clear();
      for (Parameter* p : snapshot_params) best_values.push_back(p->value);
    }
    out.epochs = epoch;
    const AnnealDecision decision = anneal_update(lr, history, config.anneal_factor, config.lr_floor);
    lr = decision.lr;
    if (decision.stop) break;
  }
  for (std::size_t i = 0; i < snapshot_params.size(); ++i) snapshot_params[i]->value = best_values[i];
  out.best_dev = best;
  out.final_lr = lr;
  return out;
}

}  // namespace detail

/// Fraction of instances whose predicted warrant is the gold one (eval mode).
inline double accuracy(ArctModel& model, EmbeddingTable& emb, const std::vector<ArctInstance>& data) {
  if (data.empty()) throw SizeError("accuracy: empty data");
  Rng unused(0);
  std::size_t correct = 0;
  for (const auto& inst : data) {
    Graph g;
    const ArctGraph out = build_arct(g, model, emb, inst, 0.0, Mode::kEval, unused);
    if (predict(g.value(out.yhat)) == static_cast<std::size_t>(inst.label)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

inline double accuracy(NliModel& model, EmbeddingTable& emb, const std::vector<NliInstance>& data) {
  if (data.empty()) throw SizeError("accuracy: empty data");
  Rng unused(0);
  std::size_t correct = 0;
  for (const auto& inst : data) {
    Graph g;
    const NliGraph out = build_nli(g, model.head, model.encoder, emb, inst, 0.0, Mode::kEval, unused);
    if (predict(g.value(out.yhat)) == inst.label_index()) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

struct DataSplits {
  std::vector<ArctInstance> train;
  std::vector<ArctInstance> dev;
  std::vector<ArctInstance> test;
};

/// Where the task encoder comes from: fresh random weights, a saved
/// container, or weights already in memory.
struct EncoderSource {
  std::optional<std::filesystem::path> path;
  std::optional<EncoderParams> params;

  static EncoderSource random() { return {}; }
  static EncoderSource file(std::filesystem::path p) { return {std::move(p), std::nullopt}; }
  static EncoderSource from(EncoderParams e) { return {std::nullopt, std::move(e)}; }

  bool is_random() const { return !path && !params; }
};

struct TrainOutcome {
  RunResult result;
  ArctModel model;
  EmbeddingTable embeddings;
  std::vector<EpochLog> epochs;
};

namespace detail {

inline void check_transfer(const EncoderParams& enc, const TrainConfig& config, std::size_t emb_dim,
                           const std::string& what) {
  if (enc.d != config.d) {
    throw ConfigError(what + ": encoder has d=" + std::to_string(enc.d) + " but the configuration asks for d=" +
                      std::to_string(config.d));
  }
  if (enc.input_dim != emb_dim) {
    throw ConfigError(what + ": encoder input_dim " + std::to_string(enc.input_dim) +
                      " does not match embedding dim " + std::to_string(emb_dim));
  }
}

}  // namespace detail

/// Trains one task model. The parameters with the best dev accuracy are
/// retained; train and test accuracy are measured on them.
inline TrainOutcome train_model(ModelKind kind, const DataSplits& data, const TrainConfig& config,
                                const EncoderSource& source, const EmbeddingTable& embeddings,
                                std::ostream* log = nullptr) {
  config.validate();
  if (data.train.empty()) throw SizeError("train_model: empty train split");
  if (data.dev.empty()) throw SizeError("train_model: empty dev split");

  TrainOutcome out{{}, init_arct_model(kind, config.d, config.hidden, config.seed, embeddings.dim()), embeddings, {}};
  if (source.path) {
    out.model.encoder = load_encoder(*source.path);
    detail::check_transfer(out.model.encoder, config, embeddings.dim(), source.path->string());
  } else if (source.params) {
    out.model.encoder = *source.params;
    detail::check_transfer(out.model.encoder, config, embeddings.dim(), "encoder");
  }
  EmbeddingTable& emb = out.embeddings;
  emb.frozen = config.freeze_embeddings;
  if (!emb.frozen && config.embedding_lr) emb.learning_rate = config.embedding_lr;

  ArctModel& model = out.model;
  std::vector<Parameter*> main = model.head_parameters();
  if (config.tune_encoder) {
    for (Parameter* p : model.encoder.parameters()) main.push_back(p);
  }
  std::vector<Parameter*> snapshot = model.parameters();
  snapshot.push_back(&emb.table);

  const auto fitted = detail::fit(
      data.train, main, emb.frozen ? nullptr : &emb.table, emb.learning_rate.value_or(config.principal_lr),
      snapshot, config,
      [&](Graph& g, const ArctInstance& inst, Mode mode, Rng& rng) {
        return build_arct(g, model, emb, inst, config.dropout_p, mode, rng).loss;
      },
      [&] { return accuracy(model, emb, data.dev); }, log);

  out.epochs = fitted.epochs_log;
  out.result.seed = config.seed;
  out.result.dev_acc = fitted.best_dev;
  out.result.train_acc = accuracy(model, emb, data.train);
  out.result.test_acc = data.test.empty() ? 0.0 : accuracy(model, emb, data.test);
  out.result.epochs_run = fitted.epochs;
  out.result.final_lr = fitted.final_lr;
  return out;
}

struct NliSplits {
  std::vector<NliInstance> train;
  std::vector<NliInstance> dev;
};

struct PretrainOutcome {
  double dev_acc = 0.0;
  std::size_t epochs_run = 0;
  double final_lr = 0.0;
  NliModel model;
  std::vector<EpochLog> epochs;
};

/// Trains encoder and NLI classifier with the same loop and schedule as the
/// task models and writes the encoder container to `out_path` when given.
/// config.d sets the encoder size.
inline PretrainOutcome pretrain_nli(const NliSplits& data, const TrainConfig& config,
                                    const EmbeddingTable& embeddings,
                                    const std::optional<std::filesystem::path>& out_path = std::nullopt,
                                    std::ostream* log = nullptr) {
  config.validate();
  if (data.train.empty()) throw SizeError("pretrain_nli: empty train split");
  if (data.dev.empty()) throw SizeError("pretrain_nli: empty dev split");
  Rng enc_rng(derive_seed(config.seed, 1));
  Rng head_rng(derive_seed(config.seed, 2));
  PretrainOutcome out;
  out.model.encoder = init_encoder(config.d, enc_rng, embeddings.dim());
  out.model.head = init_nli_head(config.d, config.nli_hidden, head_rng);
  EmbeddingTable emb = embeddings;
  emb.frozen = config.freeze_embeddings;

  NliModel& model = out.model;
  std::vector<Parameter*> main = model.parameters();
  std::vector<Parameter*> snapshot = main;
  snapshot.push_back(&emb.table);
  const auto fitted = detail::fit(
      data.train, main, emb.frozen ? nullptr : &emb.table, config.embedding_lr.value_or(config.principal_lr),
      snapshot, config,
      [&](Graph& g, const NliInstance& inst, Mode mode, Rng& rng) {
        return build_nli(g, model.head, model.encoder, emb, inst, config.dropout_p, mode, rng).loss;
      },
      [&] { return accuracy(model, emb, data.dev); }, log);
  out.dev_acc = fitted.best_dev;
  out.epochs_run = fitted.epochs;
  out.final_lr = fitted.final_lr;
  out.epochs = fitted.epochs_log;
  if (out_path) save_encoder(model.encoder, *out_path);
  return out;
}

}  // namespace arct
