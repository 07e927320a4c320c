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

// Command-line front end. Everything lives in `run_cli` so tests can drive
// it with captured streams; main.cpp only forwards argv.

#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arct/arct.hpp"

namespace arct::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

namespace fs = std::filesystem;

/// Flags shared by `train` and `sweep`.
struct TrainFlags {
  std::string model = "comp";
  std::string data_dir;
  std::string encoder = "random";
  std::string embeddings;
  std::size_t emb_dim = kEmbeddingDim;
  std::string preset;
  std::size_t d = 512;
  std::size_t h = 512;
  double lr = 0.002;
  std::string emb_lr = "frozen";
  std::size_t batch = 16;
  double dropout = 0.1;
  std::size_t max_epochs = 100;
  bool freeze_encoder = false;
  std::uint64_t seed = 0;
};

namespace detail {

inline void add_train_flags(CLI::App& cmd, TrainFlags& f) {
  cmd.add_option("--model", f.model, "Task model")->check(CLI::IsMember({"comp", "corr", "comp-rw"}));
  cmd.add_option("--data", f.data_dir, "Directory holding train.tsv, dev.tsv and optionally test.tsv")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmd.add_option("--encoder", f.encoder, "'random' or a saved encoder container");
  cmd.add_option("--embeddings", f.embeddings,
                 "Text vector file (token v1 ... vN); random vectors when omitted");
  cmd.add_option("--emb-dim", f.emb_dim, "Embedding dimension")->check(CLI::PositiveNumber);
  cmd.add_option("--preset", f.preset,
                 "submission: d=2048 with embeddings tuned at 0.0002; best: d=512 with frozen embeddings")
      ->check(CLI::IsMember({"submission", "best"}));
  cmd.add_option("--d", f.d, "Encoder size per direction")->check(CLI::PositiveNumber);
  cmd.add_option("--h", f.h, "Argument and warrant projection size")->check(CLI::PositiveNumber);
  cmd.add_option("--lr", f.lr, "Principal learning rate")->check(CLI::PositiveNumber);
  cmd.add_option("--emb-lr", f.emb_lr, "Embedding learning rate, or 'frozen'");
  cmd.add_option("--batch", f.batch, "Batch size")->check(CLI::PositiveNumber);
  cmd.add_option("--dropout", f.dropout, "Dropout probability")->check(CLI::Range(0.0, 0.999999));
  cmd.add_option("--max-epochs", f.max_epochs, "Hard cap on epochs")->check(CLI::PositiveNumber);
  cmd.add_flag("--freeze-encoder", f.freeze_encoder, "Keep encoder weights fixed");
  cmd.add_option("--seed", f.seed, "Run seed");
}

// Explicit flags win over the preset.
inline TrainConfig to_config(const CLI::App& cmd, const TrainFlags& f) {
  TrainConfig c;
  c.principal_lr = f.lr;
  c.batch_size = f.batch;
  c.dropout_p = f.dropout;
  c.max_epochs = f.max_epochs;
  c.tune_encoder = !f.freeze_encoder;
  c.seed = f.seed;
  c.d = f.d;
  c.hidden = f.h;
  std::string emb_lr = f.emb_lr;
  if (f.preset == "submission") {
    if (cmd.count("--d") == 0) c.d = 2048;
    if (cmd.count("--emb-lr") == 0) emb_lr = "0.0002";
  } else if (f.preset == "best") {
    if (cmd.count("--d") == 0) c.d = 512;
    if (cmd.count("--emb-lr") == 0) emb_lr = "frozen";
  }
  if (emb_lr == "frozen") {
    c.freeze_embeddings = true;
  } else {
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(emb_lr, &used);
      if (used != emb_lr.size()) throw std::invalid_argument(emb_lr);
    } catch (const std::exception&) {
      throw ParameterError("--emb-lr must be a number or 'frozen', got '" + emb_lr + "'");
    }
    c.freeze_embeddings = false;
    c.embedding_lr = v;
  }
  c.validate();
  return c;
}

inline DataSplits load_splits(const fs::path& dir) {
  DataSplits s;
  s.train = load_arct_tsv(dir / "train.tsv");
  s.dev = load_arct_tsv(dir / "dev.tsv");
  if (fs::exists(dir / "test.tsv")) s.test = load_arct_tsv(dir / "test.tsv");
  return s;
}

// Vocabulary of every split; OOV rows are drawn from a stream of the run seed.
inline EmbeddingTable build_embeddings(const std::vector<const std::vector<ArctInstance>*>& arct,
                                       const std::vector<const std::vector<NliInstance>*>& nli,
                                       const std::string& path, std::size_t dim, std::uint64_t seed) {
  Vocab vocab;
  for (const auto* d : arct) add_to_vocab(vocab, *d);
  for (const auto* d : nli) add_to_vocab(vocab, *d);
  Rng rng(derive_seed(seed, 5));
  if (path.empty()) return random_embeddings(vocab, rng, dim);
  return load_glove(path, vocab, rng, dim);
}

// Reads a table written by save_glove, keeping its row order as the vocabulary.
inline EmbeddingTable read_sidecar(const fs::path& path) {
  auto in = arct::detail::open_input(path);
  Vocab vocab;
  std::string line;
  std::size_t dim = 0;
  while (arct::detail::read_line(in, line)) {
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw FormatError(path.string() + ": line without vectors");
    if (dim == 0) {
      for (char c : line) dim += c == ' ';
    }
    vocab.add(line.substr(0, sp));
  }
  if (dim == 0) throw FormatError(path.string() + ": empty embedding file");
  Rng unused(0);
  return load_glove(path, vocab, unused, dim);
}

inline fs::path sidecar_path(const fs::path& ckpt) { return fs::path(ckpt.string() + ".emb"); }

inline std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

inline void print_run(std::ostream& out, const RunResult& r) {
  out << "seed " << r.seed << "\ntrain_acc " << fmt(r.train_acc) << "\ndev_acc " << fmt(r.dev_acc)
      << "\ntest_acc " << fmt(r.test_acc) << "\nepochs " << r.epochs_run << "\nfinal_lr " << fmt(r.final_lr)
      << '\n';
}

inline EncoderSource encoder_source(const std::string& choice) {
  return choice == "random" ? EncoderSource::random() : EncoderSource::file(choice);
}

}  // namespace detail

/// Parses argv and runs one subcommand. Returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Warrant selection toolkit: NLI pretraining, task training and analysis", "arct"};
  // Help is long-form only: `--h` is the projection size.
  app.set_help_flag("--help", "Print this help message and exit");
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "TOML or INI file supplying flag values");
  app.require_subcommand(1);

  // pretrain-nli
  auto* pre = app.add_subcommand("pretrain-nli", "Train encoder and NLI classifier; save the encoder");
  std::string pre_train, pre_dev, pre_out, pre_emb;
  std::size_t pre_emb_dim = kEmbeddingDim;
  TrainConfig pre_cfg;
  pre->add_option("--train", pre_train, "NLI training TSV")->required()->check(CLI::ExistingFile);
  pre->add_option("--dev", pre_dev, "NLI development TSV")->required()->check(CLI::ExistingFile);
  pre->add_option("--out", pre_out, "Encoder container to write; embeddings go to <out>.emb")->required();
  pre->add_option("--embeddings", pre_emb, "Text vector file; random vectors when omitted");
  pre->add_option("--emb-dim", pre_emb_dim, "Embedding dimension")->check(CLI::PositiveNumber);
  pre->add_option("--d", pre_cfg.d, "Encoder size per direction")->check(CLI::PositiveNumber);
  pre->add_option("--hidden", pre_cfg.nli_hidden, "Classifier hidden size")->check(CLI::PositiveNumber);
  pre->add_option("--lr", pre_cfg.principal_lr, "Learning rate")->check(CLI::PositiveNumber);
  pre->add_option("--batch", pre_cfg.batch_size, "Batch size")->check(CLI::PositiveNumber);
  pre->add_option("--dropout", pre_cfg.dropout_p, "Dropout probability")->check(CLI::Range(0.0, 0.999999));
  pre->add_option("--max-epochs", pre_cfg.max_epochs, "Hard cap on epochs")->check(CLI::PositiveNumber);
  pre->add_option("--seed", pre_cfg.seed, "Run seed");

  // train
  auto* train = app.add_subcommand("train", "Train a task model and write a checkpoint");
  TrainFlags tf;
  std::string train_out;
  detail::add_train_flags(*train, tf);
  train->add_option("--out", train_out, "Checkpoint to write; embeddings go to <out>.emb");

  // eval
  auto* eval = app.add_subcommand("eval", "Accuracy of a checkpoint on a task TSV");
  std::string eval_ckpt, eval_data;
  eval->add_option("--ckpt", eval_ckpt, "Checkpoint written by train")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", eval_data, "Task TSV")->required()->check(CLI::ExistingFile);

  // perturb
  auto* perturb = app.add_subcommand("perturb", "Write a perturbed copy of a task TSV");
  std::string pert_kind, pert_in, pert_out, pert_lex;
  std::uint64_t pert_seed = 0;
  perturb->add_option("kind", pert_kind, "half or unbalanced")->required()->check(CLI::IsMember({"half", "unbalanced"}));
  perturb->add_option("--in", pert_in, "Input TSV")->required()->check(CLI::ExistingFile);
  perturb->add_option("--out", pert_out, "Output TSV")->required();
  perturb->add_option("--seed", pert_seed, "Sampling seed");
  perturb->add_option("--negation-lexicon", pert_lex, "One negation word per line; built-in list when omitted");

  // stats
  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  std::string stats_kind, stats_in, stats_lex;
  stats->add_option("kind", stats_kind, "Statistic to compute")->required()->check(CLI::IsMember({"negation"}));
  stats->add_option("--in", stats_in, "Task TSV")->required()->check(CLI::ExistingFile);
  stats->add_option("--negation-lexicon", stats_lex, "One negation word per line; built-in list when omitted");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Train one model per seed and write a report");
  TrainFlags sf;
  std::size_t sweep_runs = 10, sweep_jobs = 1;
  std::uint64_t sweep_base = 1;
  std::string sweep_out, sweep_label;
  detail::add_train_flags(*sweep, sf);
  sweep->add_option("--runs", sweep_runs, "Number of seeds")->check(CLI::PositiveNumber);
  sweep->add_option("--base-seed", sweep_base, "First seed; runs use base .. base+runs-1");
  sweep->add_option("--jobs", sweep_jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  sweep->add_option("--label", sweep_label, "Report label; the model name when omitted");
  sweep->add_option("--out", sweep_out, "Report CSV")->required();

  // compare
  auto* compare = app.add_subcommand("compare", "Compare the test accuracies of two sweep reports");
  std::string cmp_a, cmp_b, cmp_out;
  compare->add_option("--a", cmp_a, "Baseline report")->required()->check(CLI::ExistingFile);
  compare->add_option("--b", cmp_b, "Other report")->required()->check(CLI::ExistingFile);
  compare->add_option("--out", cmp_out, "Also write both sweeps and the comparison to this report");

  // report
  auto* report = app.add_subcommand("report", "Derived report artifacts");
  std::string rep_kind, rep_in, rep_out, rep_field = "test";
  std::size_t rep_bins = 10;
  report->add_option("kind", rep_kind, "Artifact to write")->required()->check(CLI::IsMember({"histogram"}));
  report->add_option("--in", rep_in, "Sweep report")->required()->check(CLI::ExistingFile);
  report->add_option("--bins", rep_bins, "Number of equal-width bins")->check(CLI::PositiveNumber);
  report->add_option("--field", rep_field, "Accuracy column")->check(CLI::IsMember({"train", "dev", "test"}));
  report->add_option("--out", rep_out, "Histogram CSV")->required();

  // gradcheck
  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of every gradient at toy sizes");
  double grad_tol = 1e-6;
  std::uint64_t grad_seed = 2018;
  grad->add_option("--tol", grad_tol, "Largest accepted relative error")->check(CLI::PositiveNumber);
  grad->add_option("--seed", grad_seed, "Seed of the random evaluation points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kUsage;
  }

  try {
    if (*pre) {
      pre_cfg.validate();
      NliSplits splits{load_nli_tsv(pre_train), load_nli_tsv(pre_dev)};
      EmbeddingTable emb = detail::build_embeddings({}, {&splits.train, &splits.dev}, pre_emb, pre_emb_dim, pre_cfg.seed);
      PretrainOutcome r = pretrain_nli(splits, pre_cfg, emb, fs::path(pre_out), &out);
      save_glove(detail::sidecar_path(pre_out), emb);
      out << "dev_acc " << detail::fmt(r.dev_acc) << "\nepochs " << r.epochs_run << "\nfinal_lr "
          << detail::fmt(r.final_lr) << '\n';
      return kOk;
    }
    if (*train) {
      const TrainConfig cfg = detail::to_config(*train, tf);
      const DataSplits splits = detail::load_splits(tf.data_dir);
      const EmbeddingTable emb = detail::build_embeddings({&splits.train, &splits.dev, &splits.test}, {}, tf.embeddings,
                                                          tf.emb_dim, cfg.seed);
      TrainOutcome r = train_model(parse_model_kind(tf.model), splits, cfg, detail::encoder_source(tf.encoder), emb, &out);
      detail::print_run(out, r.result);
      if (!train_out.empty()) {
        save_model(r.model, r.embeddings.vocab.hash(), train_out);
        save_glove(detail::sidecar_path(train_out), r.embeddings);
      }
      return kOk;
    }
    if (*eval) {
      LoadedModel m = load_model(eval_ckpt);
      EmbeddingTable emb = detail::read_sidecar(detail::sidecar_path(eval_ckpt));
      if (emb.vocab.hash() != m.record.vocab_hash) {
        throw CorruptionError("embedding sidecar does not belong to checkpoint '" + eval_ckpt + "'");
      }
      if (emb.dim() != m.record.input_dim) {
        throw CorruptionError("embedding sidecar dimension does not match checkpoint '" + eval_ckpt + "'");
      }
      const auto data = load_arct_tsv(eval_data);
      out << "accuracy " << detail::fmt(accuracy(m.model, emb, data)) << '\n';
      return kOk;
    }
    if (*perturb) {
      const auto data = load_arct_tsv(pert_in);
      Rng rng(pert_seed);
      if (pert_kind == "half") {
        save_arct_tsv(pert_out, make_half_split(data, rng));
        return kOk;
      }
      const NegationLexicon lex = pert_lex.empty() ? NegationLexicon() : load_negation_lexicon(pert_lex);
      const UnbalancedResult r = make_unbalanced(data, rng, lex);
      save_arct_tsv(pert_out, r.data);
      out << "negation_swaps " << r.n_negation_swaps << "\nrebalance_swaps " << r.n_rebalance_swaps
          << "\nshortfall " << r.shortfall << '\n';
      return kOk;
    }
    if (*stats) {
      const NegationLexicon lex = stats_lex.empty() ? NegationLexicon() : load_negation_lexicon(stats_lex);
      const NegationStats s = corpus_negation_stats(load_arct_tsv(stats_in), lex);
      auto pct = [](double x) { return detail::fmt(round2(100.0 * x)) + "%"; };
      out << "instances " << s.instances << "\ncoverage " << pct(s.coverage) << "\ncorrect_negated_position_0 "
          << pct(s.p_correct_at_0) << "\ncorrect_negated_position_1 " << pct(s.p_correct_at_1) << '\n';
      return kOk;
    }
    if (*sweep) {
      const TrainConfig cfg = detail::to_config(*sweep, sf);
      const DataSplits splits = detail::load_splits(sf.data_dir);
      const EmbeddingTable emb = detail::build_embeddings({&splits.train, &splits.dev, &splits.test}, {}, sf.embeddings,
                                                          sf.emb_dim, sweep_base);
      std::vector<std::uint64_t> seeds;
      for (std::size_t i = 0; i < sweep_runs; ++i) seeds.push_back(sweep_base + i);
      const SweepResult r = run_sweep(parse_model_kind(sf.model), splits, cfg, seeds, detail::encoder_source(sf.encoder),
                                      emb, sweep_jobs, sweep_label);
      write_report(fs::path(sweep_out), {r}, {});
      out << "runs " << r.runs.size() << "\nmean_test_acc " << detail::fmt(mean_accuracy(r.runs)) << '\n';
      return kOk;
    }
    if (*compare) {
      std::ifstream ia = arct::detail::open_input(cmp_a), ib = arct::detail::open_input(cmp_b);
      const SweepResult a = merged_sweep(read_report(ia, cmp_a), "a");
      const SweepResult b = merged_sweep(read_report(ib, cmp_b), "b");
      const ComparisonReport c = compare_sweeps(a, b);
      out << "mean_a " << detail::fmt(c.mean_a) << "\nmean_b " << detail::fmt(c.mean_b) << "\npct_difference "
          << detail::fmt(round2(c.pct_difference)) << "\np " << std::setprecision(6) << c.p << '\n';
      if (!cmp_out.empty()) write_report(fs::path(cmp_out), {a, b}, {c});
      return kOk;
    }
    if (*report) {
      std::ifstream in = arct::detail::open_input(rep_in);
      const SweepResult s = merged_sweep(read_report(in, rep_in), "all");
      const AccuracyField field = rep_field == "train" ? AccuracyField::kTrain
                                  : rep_field == "dev"  ? AccuracyField::kDev
                                                        : AccuracyField::kTest;
      const auto values = accuracies(s.runs, field);
      auto o = arct::detail::open_output(rep_out);
      write_histogram(o, histogram_bins(values, rep_bins));
      if (!o) throw IoError("write failed: '" + rep_out + "'");
      return kOk;
    }
    if (*grad) {
      const GradientSuiteReport r = run_gradient_suite(grad_seed);
      for (const auto& c : r.cases) {
        out << c.name << ' ' << std::scientific << std::setprecision(3) << c.result.max_rel_error << std::defaultfloat
            << ' ' << c.result.coordinates << '\n';
      }
      out << "max_rel_error " << std::scientific << std::setprecision(3) << r.max_rel_error << std::defaultfloat
          << "\nseconds " << detail::fmt(r.seconds) << '\n';
      if (!(r.max_rel_error < grad_tol)) {
        err << "gradient check failed: max relative error " << r.max_rel_error << " >= " << grad_tol << '\n';
        return kNumerical;
      }
      return kOk;
    }
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const SizeError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const EmptySequenceError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace arct::cli
