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
#include <cstddef>
#include <span>
#include <vector>

#include "arct/corpus.hpp"
#include "arct/error.hpp"
#include "arct/rng.hpp"
#include "arct/text.hpp"

namespace arct {

/// Uniform sample of floor(n/2) instances without replacement, returned in
/// their original order.
inline std::vector<ArctInstance> make_half_split(const std::vector<ArctInstance>& data, Rng& rng) {
  if (data.size() < 2) {
    throw SizeError("make_half_split: need at least 2 instances, got " + std::to_string(data.size()));
  }
  std::vector<std::size_t> idx(data.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const std::size_t k = data.size() / 2;
  // Partial Fisher-Yates: the first k slots become the sample.
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  std::vector<ArctInstance> out;
  out.reserve(k);
  for (std::size_t i : idx) out.push_back(data[i]);
  return out;
}

struct UnbalancedResult {
  std::vector<ArctInstance> data;
  std::size_t n_negation_swaps = 0;
  std::size_t n_rebalance_swaps = 0;
  std::size_t shortfall = 0;  // rebalance swaps that could not be made
};

/// Moves every negation-bearing correct warrant to position 1, then moves
/// the same number of negation-free correct warrants from position 1 to
/// position 0, chosen uniformly. Moves are swap-and-flip; text is untouched.
inline UnbalancedResult make_unbalanced(const std::vector<ArctInstance>& data, Rng& rng,
                                        const NegationLexicon& lexicon = NegationLexicon()) {
  UnbalancedResult r{data};
  for (auto& d : r.data) {
    if (d.label == 0 && detect_negation(d.warrant0.tokens, lexicon)) {
      d.swap_warrants();
      ++r.n_negation_swaps;
    }
  }
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < r.data.size(); ++i) {
    const auto& d = r.data[i];
    if (d.label == 1 && !detect_negation(d.warrant1.tokens, lexicon)) candidates.push_back(i);
  }
  const std::size_t k = std::min(r.n_negation_swaps, candidates.size());
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
    r.data[candidates[i]].swap_warrants();
  }
  r.n_rebalance_swaps = k;
  r.shortfall = r.n_negation_swaps - k;
  return r;
}

}  // namespace arct
