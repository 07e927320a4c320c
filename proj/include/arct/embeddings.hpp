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

#include <charconv>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arct/autodiff.hpp"
#include "arct/corpus.hpp"
#include "arct/error.hpp"
#include "arct/rng.hpp"
#include "arct/text.hpp"

namespace arct {

inline constexpr std::size_t kEmbeddingDim = 300;
inline constexpr double kOovStddev = 0.1;

/// Word vectors for a vocabulary: one row per vocab index.
struct EmbeddingTable {
  Vocab vocab;
  Parameter table;
  bool frozen = true;
  std::optional<double> learning_rate;  // overrides the principal rate when tuned
  std::size_t coverage = 0;             // rows copied from a vector file

  std::size_t dim() const { return table.value.cols(); }
  std::size_t rows() const { return table.value.rows(); }

  std::vector<std::size_t> indices(const std::vector<std::string>& tokens) const {
    std::vector<std::size_t> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(vocab.index(t));
    return ids;
  }
};

// Every row drawn from normal(0, 0.1), in index order.
inline EmbeddingTable random_embeddings(const Vocab& vocab, Rng& rng, std::size_t dim = kEmbeddingDim) {
  Tensor m({vocab.size(), dim});
  for (double& v : m.data()) v = rng.normal(0.0, kOovStddev);
  EmbeddingTable table;
  table.vocab = vocab;
  table.table = Parameter("embeddings", std::move(m));
  return table;
}

/// Reads a text vector file (`token v1 ... vdim` per line) for the tokens of
/// vocab. Rows of tokens absent from the file are drawn from normal(0, 0.1)
/// with rng, in index order, after the file has been read. The first
/// occurrence of a token wins.
inline EmbeddingTable load_glove(const std::filesystem::path& path, const Vocab& vocab, Rng& rng,
                                 std::size_t dim = kEmbeddingDim) {
  auto in = detail::open_input(path);
  Tensor m({vocab.size(), dim});
  std::vector<char> found(vocab.size(), 0);
  std::size_t coverage = 0;
  std::string line;
  std::size_t line_no = 0;
  while (detail::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::size_t fields = 1;
    for (char c : line) fields += c == ' ';
    if (!line.empty() && line.back() == ' ') --fields;
    if (fields != dim + 1) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(dim) + " values, got " + std::to_string(fields - 1));
    }
    const auto sp = line.find(' ');
    const std::string token = line.substr(0, sp);
    if (!vocab.contains(token)) continue;
    const std::size_t row = vocab.index(token);
    if (found[row]) continue;
    const char* p = line.data() + sp + 1;
    const char* end = line.data() + line.size();
    for (std::size_t j = 0; j < dim; ++j) {
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad number in column " +
                          std::to_string(j + 2));
      }
      m.at(row, j) = v;
      p = next;
      while (p < end && *p == ' ') ++p;
    }
    found[row] = 1;
    ++coverage;
  }
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    if (found[r]) continue;
    for (std::size_t j = 0; j < dim; ++j) m.at(r, j) = rng.normal(0.0, kOovStddev);
  }
  EmbeddingTable table;
  table.vocab = vocab;
  table.table = Parameter("embeddings", std::move(m));
  table.coverage = coverage;
  return table;
}

/// Writes the table in the same text format, one row per vocab entry, with
/// round-trip precision.
inline void save_glove(const std::filesystem::path& path, const EmbeddingTable& table) {
  auto out = detail::open_output(path);
  char buf[32];
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out << table.vocab.token(r);
    for (std::size_t j = 0; j < table.dim(); ++j) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, table.table.value.at(r, j));
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(end - buf));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: '" + path.string() + "'");
}

}  // namespace arct
