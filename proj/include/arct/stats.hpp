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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "arct/error.hpp"
#include "arct/trainer.hpp"

namespace arct {

// Rounds to two decimals, the precision of the reported tables.
inline double round2(double x) { return std::round(x * 100.0) / 100.0; }

/// Signed percentage change of `updated` relative to `base`.
inline double pct_change(double base, double updated) {
  if (base == 0.0) throw DivisionError("pct_change: base is zero");
  return 100.0 * (updated - base) / base;
}

/// 100 * (train - test) / test.
inline double overfit_pct(double train_acc, double test_acc) {
  if (test_acc == 0.0) throw DivisionError("overfit_pct: test accuracy is zero");
  return 100.0 * (train_acc - test_acc) / test_acc;
}

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

namespace detail {

inline double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Unbiased sample variance.
inline double variance(std::span<const double> xs, double m) {
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

}  // namespace detail

/// Two-sided Welch unequal-variance t-test.
///
/// t = (mean_a - mean_b) / sqrt(var_a/n_a + var_b/n_b), df from the
/// Welch-Satterthwaite formula, and p = I_x(df/2, 1/2) with
/// x = df / (df + t^2), the regularized incomplete beta function (Boost.Math),
/// which equals twice the Student-t survival function at |t|.
inline WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw SizeError("welch_t_test: each sample needs at least 2 values");
  }
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double ma = detail::mean(a), mb = detail::mean(b);
  const double qa = detail::variance(a, ma) / na;
  const double qb = detail::variance(b, mb) / nb;
  const double se2 = qa + qb;
  WelchResult r;
  if (se2 == 0.0) {
    if (ma != mb) throw ValueError("welch_t_test: both samples are constant with different means");
    r.t = 0.0;
    r.df = na + nb - 2.0;
    r.p = 1.0;
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  const double x = r.df / (r.df + r.t * r.t);
  r.p = std::clamp(boost::math::ibeta(r.df / 2.0, 0.5, x), 0.0, 1.0);
  return r;
}

enum class AccuracyField { kTrain, kDev, kTest };

inline double field_of(const RunResult& r, AccuracyField f) {
  switch (f) {
    case AccuracyField::kTrain: return r.train_acc;
    case AccuracyField::kDev: return r.dev_acc;
    case AccuracyField::kTest: return r.test_acc;
  }
  return 0.0;
}

inline std::vector<double> accuracies(std::span<const RunResult> runs, AccuracyField f) {
  std::vector<double> out;
  out.reserve(runs.size());
  for (const auto& r : runs) out.push_back(field_of(r, f));
  return out;
}

inline double mean_accuracy(std::span<const RunResult> runs, AccuracyField f = AccuracyField::kTest) {
  if (runs.empty()) throw SizeError("mean_accuracy: no runs");
  const auto xs = accuracies(runs, f);
  return detail::mean(xs);
}

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

/// Equal-width bins over [min, max]; the maximum falls in the last bin. When
/// all values are equal the width is 1 and everything lands in bin 0.
inline std::vector<HistogramBin> histogram_bins(std::span<const double> values, std::size_t n_bins) {
  if (values.empty()) throw SizeError("histogram_bins: no values");
  if (n_bins == 0) throw ParameterError("histogram_bins: need at least one bin");
  const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn_it, hi = *mx_it;
  const double width = hi > lo ? (hi - lo) / static_cast<double>(n_bins) : 1.0;
  std::vector<HistogramBin> bins(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) {
    bins[i].lo = lo + width * static_cast<double>(i);
    bins[i].hi = i + 1 == n_bins && hi > lo ? hi : lo + width * static_cast<double>(i + 1);
  }
  for (double v : values) {
    auto i = static_cast<std::size_t>((v - lo) / width);
    if (i >= n_bins) i = n_bins - 1;
    ++bins[i].count;
  }
  return bins;
}

}  // namespace arct
