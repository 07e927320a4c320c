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

#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "arct/error.hpp"
#include "arct/text.hpp"

namespace arct {

/// Raw sentence text with its tokenization. Never empty.
struct Sentence {
  Sentence() = default;
  explicit Sentence(std::string raw) : text(std::move(raw)), tokens(tokenize(text)) {
    if (tokens.empty()) throw EmptySentenceError("empty sentence: '" + text + "'");
  }

  std::string text;
  std::vector<std::string> tokens;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct ArctInstance {
  std::string id;
  Sentence claim;
  Sentence reason;
  Sentence warrant0;
  Sentence warrant1;
  int label = 0;  // index of the correct warrant
  std::string debate_title;
  std::string debate_info;

  const Sentence& correct_warrant() const { return label == 0 ? warrant0 : warrant1; }

  // Exchanges the warrants and flips the label, keeping the correct text.
  void swap_warrants() {
    std::swap(warrant0, warrant1);
    label = 1 - label;
  }

  friend bool operator==(const ArctInstance&, const ArctInstance&) = default;
};

enum class NliLabel { kEntailment = 0, kNeutral = 1, kContradiction = 2 };

struct NliInstance {
  Sentence premise;
  Sentence hypothesis;
  NliLabel label = NliLabel::kEntailment;

  std::size_t label_index() const { return static_cast<std::size_t>(label); }

  friend bool operator==(const NliInstance&, const NliInstance&) = default;
};

namespace detail {

inline std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.emplace_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

inline bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

// Maps required column names to their positions in a header row.
template <std::size_t N>
std::array<std::size_t, N> locate_columns(const std::vector<std::string>& header,
                                          const std::array<const char*, N>& names,
                                          const std::string& file) {
  std::array<std::size_t, N> pos{};
  for (std::size_t i = 0; i < N; ++i) {
    std::size_t j = 0;
    while (j < header.size() && header[j] != names[i]) ++j;
    if (j == header.size()) {
      throw FormatError(file + ": missing column '" + names[i] + "'");
    }
    pos[i] = j;
  }
  return pos;
}

}  // namespace detail

inline constexpr std::array<const char*, 8> kArctColumns = {
    "#id", "warrant0", "warrant1", "correctLabelW0orW1", "reason", "claim", "debateTitle", "debateInfo"};

/// Reads a task file in the official tab-separated layout. Columns are
/// located by header name; extra columns are ignored.
inline std::vector<ArctInstance> read_arct_tsv(std::istream& in, const std::string& name = "<stream>") {
  std::string line;
  if (!detail::read_line(in, line)) throw FormatError(name + ": missing header row");
  const auto cols = detail::locate_columns(detail::split_tabs(line), kArctColumns, name);
  std::size_t needed = 0;
  for (auto c : cols) needed = std::max(needed, c + 1);

  std::vector<ArctInstance> out;
  std::size_t line_no = 1;
  while (detail::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_tabs(line);
    if (f.size() < needed) {
      throw FormatError(name + ":" + std::to_string(line_no) + ": expected at least " +
                        std::to_string(needed) + " fields, got " + std::to_string(f.size()));
    }
    ArctInstance inst;
    inst.id = f[cols[0]];
    const std::string& label = f[cols[3]];
    if (label != "0" && label != "1") {
      throw ValueError(name + ": row '" + inst.id + "' has label '" + label + "', expected 0 or 1");
    }
    inst.label = label == "0" ? 0 : 1;
    try {
      inst.warrant0 = Sentence(f[cols[1]]);
      inst.warrant1 = Sentence(f[cols[2]]);
      inst.reason = Sentence(f[cols[4]]);
      inst.claim = Sentence(f[cols[5]]);
    } catch (const EmptySentenceError& e) {
      throw EmptySentenceError(name + ": row '" + inst.id + "': " + e.what());
    }
    inst.debate_title = f[cols[6]];
    inst.debate_info = f[cols[7]];
    out.push_back(std::move(inst));
  }
  return out;
}

inline std::vector<ArctInstance> load_arct_tsv(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_arct_tsv(in, path.string());
}

inline void write_arct_tsv(std::ostream& out, const std::vector<ArctInstance>& data) {
  for (std::size_t i = 0; i < kArctColumns.size(); ++i) out << (i ? "\t" : "") << kArctColumns[i];
  out << '\n';
  for (const auto& d : data) {
    out << d.id << '\t' << d.warrant0.text << '\t' << d.warrant1.text << '\t' << d.label << '\t'
        << d.reason.text << '\t' << d.claim.text << '\t' << d.debate_title << '\t' << d.debate_info
        << '\n';
  }
}

inline void save_arct_tsv(const std::filesystem::path& path, const std::vector<ArctInstance>& data) {
  auto out = detail::open_output(path);
  write_arct_tsv(out, data);
  if (!out) throw IoError("write failed: '" + path.string() + "'");
}

inline NliLabel parse_nli_label(const std::string& s) {
  if (s == "entailment") return NliLabel::kEntailment;
  if (s == "neutral") return NliLabel::kNeutral;
  if (s == "contradiction") return NliLabel::kContradiction;
  throw ValueError("unknown NLI label '" + s + "'");
}

inline const char* nli_label_name(NliLabel l) {
  switch (l) {
    case NliLabel::kEntailment: return "entailment";
    case NliLabel::kNeutral: return "neutral";
    case NliLabel::kContradiction: return "contradiction";
  }
  return "?";
}

inline std::vector<NliInstance> read_nli_tsv(std::istream& in, const std::string& name = "<stream>") {
  static constexpr std::array<const char*, 3> kCols = {"premise", "hypothesis", "label"};
  std::string line;
  if (!detail::read_line(in, line)) throw FormatError(name + ": missing header row");
  const auto cols = detail::locate_columns(detail::split_tabs(line), kCols, name);
  std::size_t needed = 0;
  for (auto c : cols) needed = std::max(needed, c + 1);

  std::vector<NliInstance> out;
  std::size_t line_no = 1;
  while (detail::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_tabs(line);
    if (f.size() < needed) {
      throw FormatError(name + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(needed) + " fields");
    }
    NliInstance inst;
    try {
      inst.label = parse_nli_label(f[cols[2]]);
      inst.premise = Sentence(f[cols[0]]);
      inst.hypothesis = Sentence(f[cols[1]]);
    } catch (const DataError& e) {
      throw ValueError(name + ":" + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(inst));
  }
  return out;
}

inline std::vector<NliInstance> load_nli_tsv(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_nli_tsv(in, path.string());
}

inline void write_nli_tsv(std::ostream& out, const std::vector<NliInstance>& data) {
  out << "premise\thypothesis\tlabel\n";
  for (const auto& d : data) {
    out << d.premise.text << '\t' << d.hypothesis.text << '\t' << nli_label_name(d.label) << '\n';
  }
}

inline void save_nli_tsv(const std::filesystem::path& path, const std::vector<NliInstance>& data) {
  auto out = detail::open_output(path);
  write_nli_tsv(out, data);
  if (!out) throw IoError("write failed: '" + path.string() + "'");
}

struct NegationStats {
  double coverage = 0.0;        // either warrant negated
  double p_correct_at_0 = 0.0;  // warrant0 negated and correct
  double p_correct_at_1 = 0.0;  // warrant1 negated and correct
  std::size_t instances = 0;
};

inline NegationStats corpus_negation_stats(const std::vector<ArctInstance>& data,
                                           const NegationLexicon& lexicon = NegationLexicon()) {
  if (data.empty()) throw SizeError("corpus_negation_stats: empty corpus");
  std::size_t any = 0, at0 = 0, at1 = 0;
  for (const auto& d : data) {
    const bool n0 = detect_negation(d.warrant0.tokens, lexicon);
    const bool n1 = detect_negation(d.warrant1.tokens, lexicon);
    if (n0 || n1) ++any;
    if (n0 && d.label == 0) ++at0;
    if (n1 && d.label == 1) ++at1;
  }
  const auto n = static_cast<double>(data.size());
  return {static_cast<double>(any) / n, static_cast<double>(at0) / n, static_cast<double>(at1) / n,
          data.size()};
}

// Reads a custom negation lexicon: one token per line, blank lines ignored.
inline NegationLexicon load_negation_lexicon(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::set<std::string> words;
  std::string line;
  while (detail::read_line(in, line)) {
    for (auto& t : tokenize(line)) words.insert(std::move(t));
  }
  return NegationLexicon(std::move(words));
}

// Vocabulary over every token of the given corpora, in first-seen order.
inline void add_to_vocab(Vocab& vocab, const std::vector<ArctInstance>& data) {
  for (const auto& d : data) {
    for (const Sentence* s : {&d.claim, &d.reason, &d.warrant0, &d.warrant1}) {
      for (const auto& t : s->tokens) vocab.add(t);
    }
  }
}

inline void add_to_vocab(Vocab& vocab, const std::vector<NliInstance>& data) {
  for (const auto& d : data) {
    for (const auto& t : d.premise.tokens) vocab.add(t);
    for (const auto& t : d.hypothesis.tokens) vocab.add(t);
  }
}

}  // namespace arct
