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
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "arct/autodiff.hpp"
#include "arct/binary_io.hpp"
#include "arct/embeddings.hpp"
#include "arct/error.hpp"
#include "arct/rng.hpp"

namespace arct {

/// Weights of one LSTM direction. Rows of w_x, w_h and b are four
/// contiguous gate blocks of size `hidden` in the order input, forget,
/// cell candidate, output.
struct LstmDirectionParams {
  Parameter w_x;  // 4d x input_dim
  Parameter w_h;  // 4d x d
  Parameter b;    // 4d
  std::size_t hidden = 0;
  std::size_t input_dim = 0;
};

/// Bidirectional LSTM with max pooling; encodes a sentence to 2d values.
/// This is the object saved and transferred between tasks.
struct EncoderParams {
  LstmDirectionParams forward;
  LstmDirectionParams backward;
  std::size_t d = 0;
  std::size_t input_dim = 0;

  std::size_t output_dim() const { return 2 * d; }

  std::vector<Parameter*> parameters() {
    return {&forward.w_x, &forward.w_h, &forward.b, &backward.w_x, &backward.w_h, &backward.b};
  }

  std::size_t parameter_count() const { return 2 * (4 * d * input_dim + 4 * d * d + 4 * d); }
};

namespace detail {

inline LstmDirectionParams init_direction(const std::string& prefix, std::size_t d,
                                          std::size_t input_dim, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  auto uniform = [&](Tensor::Shape shape) {
    Tensor t(std::move(shape));
    for (double& v : t.data()) v = rng.uniform(-bound, bound);
    return t;
  };
  LstmDirectionParams p;
  p.hidden = d;
  p.input_dim = input_dim;
  p.w_x = Parameter(prefix + ".w_x", uniform({4 * d, input_dim}));
  p.w_h = Parameter(prefix + ".w_h", uniform({4 * d, d}));
  Tensor b({4 * d});
  for (std::size_t i = d; i < 2 * d; ++i) b[i] = 1.0;
  p.b = Parameter(prefix + ".b", std::move(b));
  return p;
}

}  // namespace detail

/// Weights uniform in [-1/sqrt(d), 1/sqrt(d)]; biases zero except the
/// forget gate block, which is 1.
inline EncoderParams init_encoder(std::size_t d, Rng& rng, std::size_t input_dim = kEmbeddingDim) {
  if (d == 0) throw ParameterError("init_encoder: d must be at least 1");
  if (input_dim == 0) throw ParameterError("init_encoder: input_dim must be at least 1");
  EncoderParams enc;
  enc.d = d;
  enc.input_dim = input_dim;
  enc.forward = detail::init_direction("encoder.fwd", d, input_dim, rng);
  enc.backward = detail::init_direction("encoder.bwd", d, input_dim, rng);
  return enc;
}

struct LstmState {
  Var h;
  Var c;
};

/// One LSTM step:
///   i, f, o = sigmoid(gates), g = tanh(gate)
///   c = f * c_prev + i * g
///   h = o * tanh(c)
inline LstmState lstm_cell(Graph& g, LstmDirectionParams& p, Var x, Var h_prev, Var c_prev) {
  const std::size_t d = p.hidden;
  if (g.value(x).shape() != Tensor::Shape{p.input_dim} || g.value(h_prev).shape() != Tensor::Shape{d} ||
      g.value(c_prev).shape() != Tensor::Shape{d}) {
    throw DimensionError("lstm_cell: expected x " + Tensor::shape_string({p.input_dim}) + " and state " +
                         Tensor::shape_string({d}) + ", got " + g.value(x).shape_string() + ", " +
                         g.value(h_prev).shape_string() + ", " + g.value(c_prev).shape_string());
  }
  const Var pre = g.add(g.add(g.matmul(g.param(p.w_x), x), g.matmul(g.param(p.w_h), h_prev)), g.param(p.b));
  const Var i = g.sigmoid(g.slice(pre, 0, d));
  const Var f = g.sigmoid(g.slice(pre, d, d));
  const Var cand = g.tanh(g.slice(pre, 2 * d, d));
  const Var o = g.sigmoid(g.slice(pre, 3 * d, d));
  const Var c = g.add(g.hadamard(f, c_prev), g.hadamard(i, cand));
  const Var h = g.hadamard(o, g.tanh(c));
  return {h, c};
}

/// Embeds the tokens, runs both directions from zero states, concatenates
/// [h_fwd(t); h_bwd(t)] per step and max-pools over time. Dropout with
/// probability dropout_p is applied to the pooled vector in train mode.
inline Var encode_sentence(Graph& g, EncoderParams& enc, EmbeddingTable& emb,
                           std::span<const std::size_t> ids, double dropout_p, Mode mode, Rng& rng) {
  if (ids.empty()) throw EmptySentenceError("encode_sentence: empty token sequence");
  if (emb.dim() != enc.input_dim) {
    throw DimensionError("encode_sentence: embedding dim " + std::to_string(emb.dim()) +
                         " does not match encoder input_dim " + std::to_string(enc.input_dim));
  }
  const std::size_t T = ids.size();
  std::vector<Var> xs;
  xs.reserve(T);
  for (std::size_t id : ids) xs.push_back(g.lookup(emb.table, id));

  const Var zero = g.constant(Tensor({enc.d}));
  std::vector<Var> fwd(T), bwd(T);
  LstmState s{zero, zero};
  for (std::size_t t = 0; t < T; ++t) {
    s = lstm_cell(g, enc.forward, xs[t], s.h, s.c);
    fwd[t] = s.h;
  }
  s = {zero, zero};
  for (std::size_t t = T; t-- > 0;) {
    s = lstm_cell(g, enc.backward, xs[t], s.h, s.c);
    bwd[t] = s.h;
  }
  std::vector<Var> steps;
  steps.reserve(T);
  for (std::size_t t = 0; t < T; ++t) steps.push_back(g.concat({fwd[t], bwd[t]}));
  const Var pooled = g.max_over_time(g.stack_rows(steps));
  return g.dropout(pooled, dropout_p, mode, rng);
}

inline Var encode_sentence(Graph& g, EncoderParams& enc, EmbeddingTable& emb,
                           const std::vector<std::string>& tokens, double dropout_p, Mode mode, Rng& rng) {
  const auto ids = emb.indices(tokens);
  return encode_sentence(g, enc, emb, std::span<const std::size_t>(ids), dropout_p, mode, rng);
}

inline constexpr char kEncoderMagic[9] = "ARCTENC1";
inline constexpr std::size_t kEncoderHeaderBytes = 16;

/// Container: "ARCTENC1", u32 input_dim, u32 d, then little-endian doubles
/// for forward w_x, w_h, b and backward w_x, w_h, b (row-major).
inline void write_encoder(std::ostream& out, const EncoderParams& enc) {
  out.write(kEncoderMagic, 8);
  binary::write_u32(out, static_cast<std::uint32_t>(enc.input_dim));
  binary::write_u32(out, static_cast<std::uint32_t>(enc.d));
  for (const auto* dir : {&enc.forward, &enc.backward}) {
    binary::write_tensor(out, dir->w_x.value);
    binary::write_tensor(out, dir->w_h.value);
    binary::write_tensor(out, dir->b.value);
  }
}

inline EncoderParams read_encoder(std::istream& in, const std::string& what = "encoder") {
  binary::expect_magic(in, kEncoderMagic, what);
  const std::uint32_t input_dim = binary::read_u32(in, what);
  const std::uint32_t d = binary::read_u32(in, what);
  if (d == 0 || input_dim == 0) throw CorruptionError(what + ": zero dimension in header");
  EncoderParams enc;
  enc.d = d;
  enc.input_dim = input_dim;
  auto read_dir = [&](const std::string& prefix) {
    LstmDirectionParams p;
    p.hidden = d;
    p.input_dim = input_dim;
    Tensor wx({4ul * d, input_dim}), wh({4ul * d, d}), b({4ul * d});
    binary::read_tensor(in, wx, what);
    binary::read_tensor(in, wh, what);
    binary::read_tensor(in, b, what);
    p.w_x = Parameter(prefix + ".w_x", std::move(wx));
    p.w_h = Parameter(prefix + ".w_h", std::move(wh));
    p.b = Parameter(prefix + ".b", std::move(b));
    return p;
  };
  enc.forward = read_dir("encoder.fwd");
  enc.backward = read_dir("encoder.bwd");
  return enc;
}

inline void save_encoder(const EncoderParams& enc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_encoder(out, enc);
  if (!out) throw IoError("write failed: '" + path.string() + "'");
}

/// Inverse of save_encoder. The file length must match the declared
/// dimensions exactly.
inline EncoderParams load_encoder(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  std::istringstream header(bytes);
  binary::expect_magic(header, kEncoderMagic, path.string());
  const std::uint64_t input_dim = binary::read_u32(header, path.string());
  const std::uint64_t d = binary::read_u32(header, path.string());
  const std::uint64_t count = 2 * (4 * d * input_dim + 4 * d * d + 4 * d);
  const std::uint64_t expected = kEncoderHeaderBytes + 8 * count;
  if (bytes.size() != expected) {
    throw CorruptionError(path.string() + ": payload is " + std::to_string(bytes.size()) +
                          " bytes, header declares " + std::to_string(expected));
  }
  std::istringstream s(bytes);
  EncoderParams enc = read_encoder(s, path.string());
  return enc;
}

}  // namespace arct
