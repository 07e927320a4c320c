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
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "arct/arct.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

namespace arct {
namespace {

struct PctCase {
  double base, updated, expected;
};

// Random vs transfer mean accuracies and the reported differences, per encoder size.
TEST(Stats, PctChangeReproducesTransferDifferences) {
  const PctCase cases[] = {
      {0.5975, 0.5942, -0.55}, {0.6058, 0.6025, -0.54}, {0.6181, 0.6443, 4.24},
      {0.6285, 0.6260, -0.40}, {0.6310, 0.6329, 0.30},
  };
  for (const auto& c : cases) {
    EXPECT_NEAR(pct_change(c.base, c.updated), c.expected, 0.01) << c.base << " -> " << c.updated;
    EXPECT_DOUBLE_EQ(round2(pct_change(c.base, c.updated)), c.expected);
  }
  EXPECT_EQ(pct_change(0.7, 0.7), 0.0);
  EXPECT_THROW(pct_change(0.0, 0.5), DivisionError);
}

// Train and test accuracies with the reported overfit percentages:
// COMP then CORR, each on the full, half and unbalanced data.
TEST(Stats, OverfitReproducesReportedColumn) {
  const PctCase cases[] = {
      {0.8807, 0.6443, 36.69}, {0.8925, 0.6332, 40.95}, {0.9109, 0.6353, 43.38},
      {0.8155, 0.5912, 37.94}, {0.8287, 0.5649, 46.70}, {0.9368, 0.5750, 62.92},
  };
  for (const auto& c : cases) {
    EXPECT_NEAR(overfit_pct(c.base, c.updated), c.expected, 0.01) << c.base << ", " << c.updated;
  }
  EXPECT_EQ(overfit_pct(0.6, 0.6), 0.0);
  EXPECT_THROW(overfit_pct(0.9, 0.0), DivisionError);
}

TEST(Welch, HandComputedExample) {
  const std::vector<double> a = {0.60, 0.62, 0.64}, b = {0.50, 0.52, 0.54};
  const WelchResult w = welch_t_test(a, b);
  const oracle::Welch o = oracle::welch(a, b);
  // Equal variances 4e-4 and n=3: t = 0.1 / sqrt(2 * 4e-4 / 3), df = 4.
  EXPECT_NEAR(w.t, 0.1 / std::sqrt(8e-4 / 3.0), 1e-9);
  EXPECT_NEAR(w.df, 4.0, 1e-9);
  EXPECT_NEAR(w.p, o.p, 1e-6);
}

TEST(Welch, AgreesWithQuadratureOracle) {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t na = 2 + rng.below(30), nb = 2 + rng.below(30);
    const double shift = rng.uniform(-0.05, 0.05);
    const double sa = rng.uniform(0.005, 0.05), sb = rng.uniform(0.005, 0.05);
    std::vector<double> a, b;
    for (std::size_t i = 0; i < na; ++i) a.push_back(rng.normal(0.6, sa));
    for (std::size_t i = 0; i < nb; ++i) b.push_back(rng.normal(0.6 + shift, sb));
    const WelchResult w = welch_t_test(a, b);
    const oracle::Welch o = oracle::welch(a, b);
    EXPECT_NEAR(w.t, o.t, 1e-9 * std::max(1.0, std::abs(o.t)));
    EXPECT_NEAR(w.df, o.df, 1e-9 * o.df);
    EXPECT_NEAR(w.p, o.p, 1e-6) << "trial " << trial;
    EXPECT_GT(w.p, 0.0);
    EXPECT_LE(w.p, 1.0);
  }
}

TEST(Welch, SymmetryAndDegenerateInputs) {
  const std::vector<double> a = {0.61, 0.64, 0.59, 0.66}, b = {0.55, 0.57, 0.60};
  const WelchResult ab = welch_t_test(a, b), ba = welch_t_test(b, a);
  EXPECT_EQ(ab.t, -ba.t);
  EXPECT_EQ(ab.p, ba.p);
  EXPECT_EQ(ab.df, ba.df);
  const WelchResult same = welch_t_test(a, a);
  EXPECT_EQ(same.t, 0.0);
  EXPECT_DOUBLE_EQ(same.p, 1.0);
  const std::vector<double> c = {0.5, 0.5}, one = {0.5};
  EXPECT_EQ(welch_t_test(c, c).p, 1.0);
  EXPECT_THROW(welch_t_test(one, a), SizeError);
  EXPECT_THROW(welch_t_test(a, one), SizeError);
}

TEST(Welch, PValueFallsAsMeansSeparate) {
  const std::vector<double> base = {0.58, 0.61, 0.60, 0.63, 0.59, 0.62};
  double prev = 2.0;
  for (int k = 0; k <= 20; ++k) {
    std::vector<double> moved = base;
    for (double& x : moved) x += 0.002 * k;
    const double p = welch_t_test(base, moved).p;
    EXPECT_LT(p, prev) << "shift step " << k;
    prev = p;
  }
  EXPECT_LT(prev, 0.01);
}

std::vector<RunResult> runs_from(const std::vector<double>& test) {
  std::vector<RunResult> out;
  for (std::size_t i = 0; i < test.size(); ++i) out.push_back({i, 1.0 - test[i], 0.5, test[i], 3, 1e-4});
  return out;
}

TEST(MeanAccuracy, SmallCasesAndFields) {
  EXPECT_DOUBLE_EQ(mean_accuracy(runs_from({0.5, 0.7})), 0.6);
  EXPECT_EQ(mean_accuracy(runs_from({0.625})), 0.625);
  EXPECT_DOUBLE_EQ(mean_accuracy(runs_from({0.5, 0.7}), AccuracyField::kTrain), 0.4);
  EXPECT_EQ(mean_accuracy(runs_from({0.5, 0.7}), AccuracyField::kDev), 0.5);
  EXPECT_THROW(mean_accuracy(std::vector<RunResult>{}), SizeError);
}

TEST(MeanAccuracy, MatchesPairwiseSumOracle) {
  Rng rng(200);
  std::vector<double> xs;
  for (int i = 0; i < 200; ++i) xs.push_back(rng.uniform(0.5, 0.7));
  EXPECT_NEAR(mean_accuracy(runs_from(xs)), oracle::mean(xs), 1e-12);
}

std::vector<std::size_t> counts(const std::vector<HistogramBin>& bins) {
  std::vector<std::size_t> c;
  for (const auto& b : bins) c.push_back(b.count);
  return c;
}

TEST(Histogram, EdgesAndDegenerateRange) {
  const std::vector<double> two = {0.0, 1.0};
  auto bins = histogram_bins(two, 2);
  EXPECT_EQ(counts(bins), (std::vector<std::size_t>{1, 1}));
  EXPECT_EQ(bins[0].lo, 0.0);
  EXPECT_EQ(bins[1].hi, 1.0);

  const std::vector<double> flat = {0.6, 0.6, 0.6};
  for (std::size_t n : {1u, 4u, 9u}) {
    bins = histogram_bins(flat, n);
    ASSERT_EQ(bins.size(), n);
    EXPECT_EQ(bins[0].count, 3u);
    EXPECT_EQ(bins[0].hi - bins[0].lo, 1.0);
  }
  EXPECT_THROW(histogram_bins(std::vector<double>{}, 3), SizeError);
  EXPECT_THROW(histogram_bins(two, 0), ParameterError);
}

TEST(Histogram, UniformSamplesSpreadEvenly) {
  Rng rng(1000);
  std::vector<double> xs;
  for (int i = 0; i < 1000; ++i) xs.push_back(rng.uniform(0.0, 1.0));
  const auto bins = histogram_bins(xs, 10);
  std::size_t total = 0;
  for (const auto& b : bins) {
    EXPECT_GE(b.count, 60u);
    EXPECT_LE(b.count, 140u);
    total += b.count;
  }
  EXPECT_EQ(total, 1000u);
}

TEST(Histogram, CountsAlwaysSumToSampleSize) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs(1 + rng.below(40));
    for (double& x : xs) x = std::round(rng.uniform(0, 5));  // repeats and ties on edges
    const auto bins = histogram_bins(xs, 1 + rng.below(12));
    std::size_t total = 0;
    for (const auto& b : bins) total += b.count;
    EXPECT_EQ(total, xs.size());
  }
}

struct SweepFixture : ::testing::Test {
  static DataSplits splits() {
    return {synth::cue_corpus(11, {24}), synth::cue_corpus(12, {40}), synth::cue_corpus(13, {100})};
  }
  static EmbeddingTable embeddings(const DataSplits& s) {
    Vocab v;
    add_to_vocab(v, s.train);
    add_to_vocab(v, s.dev);
    add_to_vocab(v, s.test);
    Rng r(3);
    return random_embeddings(v, r, 12);
  }
  static TrainConfig config() {
    TrainConfig c;
    c.d = 6;
    c.hidden = 6;
    c.max_epochs = 3;
    return c;
  }
};

TEST_F(SweepFixture, OrderDeterminismAndDuplicates) {
  const DataSplits s = splits();
  const EmbeddingTable emb = embeddings(s);
  const SweepResult a = run_sweep(ModelKind::kComp, s, config(), {3, 1, 2}, EncoderSource::random(), emb);
  ASSERT_EQ(a.runs.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.runs[i].seed, i + 1);
  EXPECT_EQ(a.label, "comp");
  const SweepResult b = run_sweep(ModelKind::kComp, s, config(), {1, 2, 3}, EncoderSource::random(), emb, 3);
  EXPECT_EQ(a.runs, b.runs);
  EXPECT_THROW(run_sweep(ModelKind::kComp, s, config(), {1, 2, 1}, EncoderSource::random(), emb), ParameterError);
  EXPECT_THROW(run_sweep(ModelKind::kComp, s, config(), {}, EncoderSource::random(), emb), ParameterError);
}

TEST_F(SweepFixture, SeedsChangeTheOutcome) {
  const DataSplits s = splits();
  const SweepResult sw =
      run_sweep(ModelKind::kComp, s, config(), {1, 2, 3, 4, 5, 6, 7, 8}, EncoderSource::random(), embeddings(s));
  const auto xs = accuracies(sw.runs, AccuracyField::kTest);
  EXPECT_GT(oracle::sample_variance(xs), 0.0);
}

TEST(Report, RoundTripIsExact) {
  SweepResult a{"random", {{1, 0.8807, 0.6, 0.6443, 7, 1e-6}, {2, 1.0 / 3.0, 0.1 + 0.2, 0.62, 9, 1e-6}}, {}};
  SweepResult b{"transfer", {{1, 0.9, 0.7, 0.6, 4, 1e-6}, {5, 0.91, 0.71, 0.66, 5, 1e-6}}, {}};
  const ComparisonReport c = compare_sweeps(a, b);
  EXPECT_EQ(c.pct_difference, pct_change(c.mean_a, c.mean_b));
  EXPECT_EQ(c.n_a, 2u);
  std::stringstream buf;
  write_report(buf, {a, b}, {c});
  const Report rep = read_report(buf);
  ASSERT_EQ(rep.sweeps.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    const SweepResult& orig = k == 0 ? a : b;
    EXPECT_EQ(rep.sweeps[k].label, orig.label);
    ASSERT_EQ(rep.sweeps[k].runs.size(), orig.runs.size());
    for (std::size_t i = 0; i < orig.runs.size(); ++i) {
      const RunResult &x = rep.sweeps[k].runs[i], &y = orig.runs[i];
      EXPECT_EQ(x.seed, y.seed);
      EXPECT_EQ(x.train_acc, y.train_acc);
      EXPECT_EQ(x.dev_acc, y.dev_acc);
      EXPECT_EQ(x.test_acc, y.test_acc);
      EXPECT_EQ(x.epochs_run, y.epochs_run);
    }
  }
  ASSERT_EQ(rep.comparisons.size(), 1u);
  const ComparisonReport& r = rep.comparisons[0];
  EXPECT_EQ(r.label_a, "random");
  EXPECT_EQ(r.mean_a, c.mean_a);
  EXPECT_EQ(r.mean_b, c.mean_b);
  EXPECT_EQ(r.pct_difference, c.pct_difference);
  EXPECT_EQ(r.t, c.t);
  EXPECT_EQ(r.df, c.df);
  EXPECT_EQ(r.p, c.p);
}

TEST(Report, SectionsAndHeaders) {
  SweepResult a{"comp", {{1, 0.9, 0.6, 0.6, 3, 0}}, {}};
  std::stringstream buf;
  write_report(buf, {a}, {});
  EXPECT_EQ(buf.str(), "[sweeps]\nlabel,seed,train_acc,dev_acc,test_acc,epochs\ncomp,1,0.9,0.6,0.6,3\n");
  test::TempDir dir;
  write_report(dir.path() / "r.csv", {a}, {});
  const Report rep = read_report(dir.path() / "r.csv");
  EXPECT_TRUE(rep.comparisons.empty());
  EXPECT_EQ(merged_sweep(rep, "x").label, "comp");
  EXPECT_THROW(write_report(dir.path() / "missing" / "r.csv", {a}, {}), IoError);
  std::istringstream bad("[sweeps]\nlabel,seed,train_acc,dev_acc,test_acc,epochs\ncomp,1,0.9\n");
  EXPECT_THROW(read_report(bad), FormatError);
}

// Train/test pairs written as a report give the overfit column back.
TEST(Report, OverfitFromReportedRows) {
  SweepResult comp{"comp_full", {{1, 0.8807, 0.0, 0.6443, 1, 0}}, {}};
  SweepResult corr{"corr_unbal", {{1, 0.9368, 0.0, 0.5750, 1, 0}}, {}};
  std::stringstream buf;
  write_report(buf, {comp, corr}, {});
  const Report rep = read_report(buf);
  const auto overfit = [](const SweepResult& s) {
    return round2(overfit_pct(mean_accuracy(s.runs, AccuracyField::kTrain), mean_accuracy(s.runs)));
  };
  EXPECT_DOUBLE_EQ(overfit(rep.sweeps[0]), 36.69);
  EXPECT_DOUBLE_EQ(overfit(rep.sweeps[1]), 62.92);
}

}  // namespace
}  // namespace arct
