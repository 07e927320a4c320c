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
#include <atomic>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "arct/corpus.hpp"
#include "arct/error.hpp"
#include "arct/stats.hpp"
#include "arct/trainer.hpp"

namespace arct {

struct SweepResult {
  std::string label;
  std::vector<RunResult> runs;  // ordered by seed
  TrainConfig config;
};

struct ComparisonReport {
  std::string label_a;
  std::string label_b;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double pct_difference = 0.0;  // change of b relative to a
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

/// Compares test accuracies of two sweeps; a is the baseline.
inline ComparisonReport compare_sweeps(const SweepResult& a, const SweepResult& b) {
  const auto xa = accuracies(a.runs, AccuracyField::kTest);
  const auto xb = accuracies(b.runs, AccuracyField::kTest);
  ComparisonReport r;
  r.label_a = a.label;
  r.label_b = b.label;
  r.mean_a = mean_accuracy(a.runs);
  r.mean_b = mean_accuracy(b.runs);
  r.pct_difference = pct_change(r.mean_a, r.mean_b);
  const WelchResult w = welch_t_test(xa, xb);
  r.t = w.t;
  r.df = w.df;
  r.p = w.p;
  r.n_a = xa.size();
  r.n_b = xb.size();
  return r;
}

/// One training run per seed. Up to `jobs` runs execute concurrently; the
/// result order is the order of `seeds` sorted ascending, independent of
/// completion order.
inline SweepResult run_sweep(ModelKind kind, const DataSplits& data, const TrainConfig& config,
                             std::vector<std::uint64_t> seeds, const EncoderSource& source,
                             const EmbeddingTable& embeddings, std::size_t jobs = 1, std::string label = "") {
  if (seeds.empty()) throw ParameterError("run_sweep: no seeds");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ParameterError("run_sweep: duplicate seeds");
  }
  std::sort(seeds.begin(), seeds.end());
  SweepResult sweep;
  sweep.label = label.empty() ? model_kind_name(kind) : std::move(label);
  sweep.config = config;
  sweep.runs.resize(seeds.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        TrainConfig c = config;
        c.seed = seeds[i];
        sweep.runs[i] = train_model(kind, data, c, source, embeddings).result;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(jobs, 1, seeds.size());
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return sweep;
}

namespace detail {

inline std::string exact(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) throw FormatError(where + ": bad number '" + s + "'");
  return v;
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& where) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) throw FormatError(where + ": bad integer '" + s + "'");
  return v;
}

inline std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  std::string f;
  while (std::getline(s, f, ',')) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline void check_label(const std::string& label) {
  if (label.find_first_of(",\n\r") != std::string::npos) {
    throw ValueError("report label '" + label + "' contains a comma or newline");
  }
}

}  // namespace detail

inline constexpr const char* kSweepHeader = "label,seed,train_acc,dev_acc,test_acc,epochs";
inline constexpr const char* kComparisonHeader = "label_a,label_b,mean_a,mean_b,pct_difference,t,df,p";

/// Writes the `[sweeps]` section, then `[comparisons]` if there are any.
/// Reals use the shortest representation that reads back exactly.
inline void write_report(std::ostream& out, const std::vector<SweepResult>& sweeps,
                         const std::vector<ComparisonReport>& comparisons) {
  using detail::exact;
  out << "[sweeps]\n" << kSweepHeader << '\n';
  for (const auto& s : sweeps) {
    detail::check_label(s.label);
    for (const auto& r : s.runs) {
      out << s.label << ',' << r.seed << ',' << exact(r.train_acc) << ',' << exact(r.dev_acc) << ','
          << exact(r.test_acc) << ',' << r.epochs_run << '\n';
    }
  }
  if (comparisons.empty()) return;
  out << "[comparisons]\n" << kComparisonHeader << '\n';
  for (const auto& c : comparisons) {
    detail::check_label(c.label_a);
    detail::check_label(c.label_b);
    out << c.label_a << ',' << c.label_b << ',' << exact(c.mean_a) << ',' << exact(c.mean_b) << ','
        << exact(c.pct_difference) << ',' << exact(c.t) << ',' << exact(c.df) << ',' << exact(c.p) << '\n';
  }
}

inline void write_report(const std::filesystem::path& path, const std::vector<SweepResult>& sweeps,
                         const std::vector<ComparisonReport>& comparisons) {
  auto out = detail::open_output(path);
  write_report(out, sweeps, comparisons);
  if (!out) throw IoError("write failed: '" + path.string() + "'");
}

struct Report {
  std::vector<SweepResult> sweeps;  // one per label, in first-seen order
  std::vector<ComparisonReport> comparisons;
};

inline Report read_report(std::istream& in, const std::string& name = "<report>") {
  Report rep;
  enum class Section { kNone, kSweeps, kComparisons } section = Section::kNone;
  bool expect_header = false;
  std::string line;
  std::size_t line_no = 0;
  while (detail::read_line(in, line)) {
    ++line_no;
    const std::string where = name + ":" + std::to_string(line_no);
    if (line.empty()) continue;
    if (line == "[sweeps]" || line == "[comparisons]") {
      section = line == "[sweeps]" ? Section::kSweeps : Section::kComparisons;
      expect_header = true;
      continue;
    }
    if (expect_header) {
      const char* want = section == Section::kSweeps ? kSweepHeader : kComparisonHeader;
      if (line != want) throw FormatError(where + ": expected header '" + want + "'");
      expect_header = false;
      continue;
    }
    const auto f = detail::split_commas(line);
    if (section == Section::kSweeps) {
      if (f.size() != 6) throw FormatError(where + ": expected 6 fields");
      RunResult r;
      r.seed = detail::parse_u64(f[1], where);
      r.train_acc = detail::parse_double(f[2], where);
      r.dev_acc = detail::parse_double(f[3], where);
      r.test_acc = detail::parse_double(f[4], where);
      r.epochs_run = detail::parse_u64(f[5], where);
      auto it = std::find_if(rep.sweeps.begin(), rep.sweeps.end(),
                             [&](const SweepResult& s) { return s.label == f[0]; });
      if (it == rep.sweeps.end()) {
        rep.sweeps.push_back(SweepResult{f[0], {}, {}});
        it = rep.sweeps.end() - 1;
      }
      it->runs.push_back(r);
    } else if (section == Section::kComparisons) {
      if (f.size() != 8) throw FormatError(where + ": expected 8 fields");
      ComparisonReport c;
      c.label_a = f[0];
      c.label_b = f[1];
      c.mean_a = detail::parse_double(f[2], where);
      c.mean_b = detail::parse_double(f[3], where);
      c.pct_difference = detail::parse_double(f[4], where);
      c.t = detail::parse_double(f[5], where);
      c.df = detail::parse_double(f[6], where);
      c.p = detail::parse_double(f[7], where);
      rep.comparisons.push_back(c);
    } else {
      throw FormatError(where + ": data outside a section");
    }
  }
  return rep;
}

inline Report read_report(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_report(in, path.string());
}

// All runs of a report as one sample (sweep files normally hold one label).
inline SweepResult merged_sweep(const Report& rep, const std::string& fallback_label) {
  if (rep.sweeps.empty()) throw FormatError("report has no sweep rows");
  SweepResult out{rep.sweeps.size() == 1 ? rep.sweeps[0].label : fallback_label, {}, {}};
  for (const auto& s : rep.sweeps) out.runs.insert(out.runs.end(), s.runs.begin(), s.runs.end());
  return out;
}

inline void write_histogram(std::ostream& out, const std::vector<HistogramBin>& bins) {
  out << "lo,hi,count\n";
  for (const auto& b : bins) out << detail::exact(b.lo) << ',' << detail::exact(b.hi) << ',' << b.count << '\n';
}

}  // namespace arct
