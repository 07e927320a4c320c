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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "arct/binary_io.hpp"
#include "arct/encoder.hpp"
#include "arct/error.hpp"
#include "arct/heads.hpp"

namespace arct {

inline constexpr char kModelMagic[9] = "ARCTMDL1";

/// Textual record stored with a model checkpoint.
struct ModelRecord {
  ModelKind kind = ModelKind::kComp;
  std::size_t d = 0;
  std::size_t h = 0;
  std::size_t input_dim = 0;
  std::uint64_t vocab_hash = 0;

  std::string to_line() const {
    std::ostringstream s;
    s << "kind=" << model_kind_name(kind) << " d=" << d << " h=" << h << " input_dim=" << input_dim
      << " vocab=" << std::hex << std::setw(16) << std::setfill('0') << vocab_hash;
    return s.str();
  }

  static ModelRecord parse(const std::string& line) {
    ModelRecord r;
    std::istringstream s(line);
    std::string field;
    int seen = 0;
    while (s >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw FormatError("model record: bad field '" + field + "'");
      const std::string key = field.substr(0, eq), val = field.substr(eq + 1);
      try {
        if (key == "kind") {
          r.kind = parse_model_kind(val);
        } else if (key == "d") {
          r.d = std::stoul(val);
        } else if (key == "h") {
          r.h = std::stoul(val);
        } else if (key == "input_dim") {
          r.input_dim = std::stoul(val);
        } else if (key == "vocab") {
          r.vocab_hash = std::stoull(val, nullptr, 16);
        } else {
          continue;
        }
      } catch (const std::logic_error&) {
        throw FormatError("model record: bad value in '" + field + "'");
      }
      ++seen;
    }
    if (seen != 5) throw FormatError("model record: incomplete line '" + line + "'");
    return r;
  }
};

/// Layout: "ARCTMDL1", the record line terminated by '\n', the encoder
/// container, then the head tensors u, b_u, v, b_v, z, b_z as little-endian
/// doubles.
inline void save_model(ArctModel& model, std::uint64_t vocab_hash, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  const ModelRecord rec{model.kind, model.d(), model.hidden(), model.encoder.input_dim, vocab_hash};
  out.write(kModelMagic, 8);
  out << rec.to_line() << '\n';
  write_encoder(out, model.encoder);
  for (Parameter* p : model.head_parameters()) binary::write_tensor(out, p->value);
  if (!out) throw IoError("write failed: '" + path.string() + "'");
}

struct LoadedModel {
  ArctModel model;
  ModelRecord record;
};

inline LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  const std::string what = path.string();
  binary::expect_magic(in, kModelMagic, what);
  std::string line;
  if (!std::getline(in, line)) throw CorruptionError(what + ": missing record line");
  LoadedModel lm;
  lm.record = ModelRecord::parse(line);
  lm.model.kind = lm.record.kind;
  lm.model.encoder = read_encoder(in, what);
  if (lm.model.encoder.d != lm.record.d || lm.model.encoder.input_dim != lm.record.input_dim) {
    throw CorruptionError(what + ": encoder dimensions disagree with record");
  }
  Rng unused(0);
  lm.model.head = init_head(lm.record.kind, lm.record.d, lm.record.h, unused);
  for (Parameter* p : lm.model.head_parameters()) binary::read_tensor(in, p->value, what);
  if (in.peek() != std::char_traits<char>::eof()) throw CorruptionError(what + ": trailing bytes");
  return lm;
}

}  // namespace arct
