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
#include <array>
#include <cctype>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "arct/error.hpp"

namespace arct {

namespace detail {

inline bool is_space(unsigned char c) { return std::isspace(c) != 0; }

// Bytes >= 0x80 are parts of UTF-8 sequences and count as word characters.
inline bool is_word_char(unsigned char c) { return c >= 0x80 || std::isalnum(c) != 0; }

inline void split_word(std::string word, std::vector<std::string>& out) {
  static constexpr std::array<std::string_view, 6> kClitics = {"'s", "'re", "'ve", "'ll", "'d", "'m"};
  if (word.size() > 3 && word.ends_with("n't")) {
    out.push_back(word.substr(0, word.size() - 3));
    out.emplace_back("n't");
    return;
  }
  const auto apos = word.find('\'');
  if (apos == std::string::npos) {
    out.push_back(std::move(word));
    return;
  }
  const std::string_view suffix = std::string_view(word).substr(apos);
  if (apos > 0 && std::find(kClitics.begin(), kClitics.end(), suffix) != kClitics.end()) {
    out.push_back(word.substr(0, apos));
    out.emplace_back(suffix);
    return;
  }
  // Any other apostrophe is ordinary punctuation.
  std::string cur;
  for (char c : word) {
    if (c == '\'') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
      out.emplace_back("'");
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
}

}  // namespace detail

/// Lowercases and splits text into tokens.
///
/// Whitespace separates tokens. Punctuation characters become tokens of their
/// own, except a hyphen between two word characters ("re-direct") and an
/// apostrophe inside a word. Words ending in "n't" are split into the stem and
/// "n't"; the clitics 's 're 've 'll 'd 'm are split off likewise. The
/// typographic apostrophe U+2019 is read as '.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::string s;
  s.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text.compare(i, 3, "\xE2\x80\x99") == 0) {
      s += '\'';
      i += 2;
      continue;
    }
    s += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
  }

  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) detail::split_word(std::move(word), out);
    word.clear();
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    const bool next_word = i + 1 < s.size() && detail::is_word_char(static_cast<unsigned char>(s[i + 1]));
    if (detail::is_space(c)) {
      flush();
    } else if (detail::is_word_char(c)) {
      word += static_cast<char>(c);
    } else if ((c == '-' || c == '\'') && !word.empty() &&
               detail::is_word_char(static_cast<unsigned char>(word.back())) && next_word) {
      word += static_cast<char>(c);
    } else {
      flush();
      out.emplace_back(1, static_cast<char>(c));
    }
  }
  flush();
  return out;
}

/// Token set used to flag negation. The default is the fixed lexicon below;
/// a custom list can be loaded (one token per line).
class NegationLexicon {
 public:
  NegationLexicon()
      : words_{"not", "n't", "no", "never", "none", "nothing", "nobody", "nowhere", "neither", "nor",
               "cannot"} {}
  explicit NegationLexicon(std::set<std::string> words) : words_(std::move(words)) {}

  bool contains(const std::string& token) const { return words_.count(token) != 0; }
  const std::set<std::string>& words() const { return words_; }

 private:
  std::set<std::string> words_;
};

inline bool detect_negation(const std::vector<std::string>& tokens,
                            const NegationLexicon& lexicon = NegationLexicon()) {
  return std::any_of(tokens.begin(), tokens.end(),
                     [&](const std::string& t) { return lexicon.contains(t); });
}

/// Dense token <-> index map. Index 0 is the out-of-vocabulary token.
class Vocab {
 public:
  static constexpr std::size_t kUnk = 0;
  static constexpr const char* kUnkToken = "<unk>";

  Vocab() { add(kUnkToken); }

  std::size_t add(const std::string& token) {
    auto [it, inserted] = index_.emplace(token, tokens_.size());
    if (inserted) tokens_.push_back(token);
    return it->second;
  }

  std::size_t index(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
  }

  bool contains(const std::string& token) const { return index_.count(token) != 0; }
  const std::string& token(std::size_t i) const { return tokens_.at(i); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // FNV-1a over the tokens in index order, newline separated.
  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& t : tokens_) {
      for (unsigned char c : t) {
        h ^= c;
        h *= 0x100000001b3ULL;
      }
      h ^= '\n';
      h *= 0x100000001b3ULL;
    }
    return h;
  }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> tokens_;
};

}  // namespace arct
