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
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "arct/error.hpp"
#include "arct/rng.hpp"
#include "arct/tensor.hpp"

namespace arct {

enum class Mode { kTrain, kEval };

/// A named trainable tensor together with its accumulated gradient.
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Tensor value)
      : name(std::move(name)), value(std::move(value)), grad(Tensor::zeros_like(this->value)) {}

  void zero_grad() {
    if (grad.shape() != value.shape()) {
      grad = Tensor::zeros_like(value);
    } else {
      grad.fill(0.0);
    }
  }

  std::size_t size() const { return value.size(); }

  std::string name;
  Tensor value;
  Tensor grad;
};

using NodeId = std::size_t;

/// Handle to a node of a Graph. Only meaningful together with its graph.
struct Var {
  NodeId id = std::numeric_limits<NodeId>::max();
};

enum class Op {
  kConstant,
  kParameter,
  kLookup,
  kMatmul,
  kDot,
  kAdd,
  kHadamard,
  kAbsDiff,
  kSigmoid,
  kTanh,
  kRelu,
  kSlice,
  kConcat,
  kMaxOverTime,
  kSoftmax,
  kCrossEntropy,
  kSoftmaxCrossEntropy,
  kDropout,
  kSum,
};

enum class Pointwise { kSigmoid, kTanh, kHadamard, kAbsDiff, kAdd };

/// Reverse-mode computation graph (a tape).
///
/// Nodes are appended in creation order, which is a topological order, so
/// backward() is a single reverse sweep. A graph is single-threaded; build a
/// fresh graph per example.
class Graph {
 public:
  Var constant(Tensor value) { return push(Op::kConstant, {}, std::move(value), nullptr); }

  // Leaf bound to a parameter. Repeated calls with the same parameter return
  // the same node.
  Var param(Parameter& p) {
    if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var{it->second};
    Var v = push(Op::kParameter, {}, p.value, nullptr);
    nodes_[v.id].param = &p;
    param_nodes_.emplace(&p, v.id);
    return v;
  }

  // Leaf holding one row of a rank 2 parameter (embedding lookup). Gradients
  // flow back into that row only.
  Var lookup(Parameter& table, std::size_t row) {
    if (table.value.rank() != 2) throw DimensionError("lookup: table must be a matrix");
    if (row >= table.value.rows()) {
      throw IndexError("lookup: row " + std::to_string(row) + " out of range for table " +
                       table.value.shape_string());
    }
    const std::size_t n = table.value.cols();
    const auto src = table.value.data().subspan(row * n, n);
    Var v = push(Op::kLookup, {}, Tensor({n}, std::vector<double>(src.begin(), src.end())),
                 nullptr);
    nodes_[v.id].param = &table;
    nodes_[v.id].row = row;
    return v;
  }

  /// Matrix product. a is m x k; b is k x n (result m x n) or a length k
  /// vector (result length m).
  Var matmul(Var a, Var b) {
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    if (av.rank() != 2 || bv.rank() > 2 || av.cols() != bv.rows()) {
      throw DimensionError("matmul: cannot multiply " + av.shape_string() + " by " +
                           bv.shape_string());
    }
    if (bv.rank() == 1) return matvec(a, b);
    const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
    Tensor out({m, n});
    const double* A = av.data().data();
    const double* B = bv.data().data();
    double* C = out.data().data();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        const double aip = A[i * k + p];
        const double* brow = B + p * n;
        double* crow = C + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
      }
    }
    return push(Op::kMatmul, {a.id, b.id}, std::move(out),
                [m, k, n](Graph& g, const Node& self) {
                  Node& na = g.nodes_[self.parents[0]];
                  Node& nb = g.nodes_[self.parents[1]];
                  const double* G = self.grad.data().data();
                  const double* A = na.value.data().data();
                  const double* B = nb.value.data().data();
                  double* GA = na.grad.data().data();
                  double* GB = nb.grad.data().data();
                  for (std::size_t i = 0; i < m; ++i) {
                    const double* grow = G + i * n;
                    for (std::size_t p = 0; p < k; ++p) {
                      const double* brow = B + p * n;
                      double* gbrow = GB + p * n;
                      const double aip = A[i * k + p];
                      double acc = 0.0;
                      for (std::size_t j = 0; j < n; ++j) {
                        acc += grow[j] * brow[j];
                        gbrow[j] += aip * grow[j];
                      }
                      GA[i * k + p] += acc;
                    }
                  }
                });
  }

  // Matrix times vector: contiguous row dot products.
  Var matvec(Var a, Var x) {
    const Tensor& av = value(a);
    const Tensor& xv = value(x);
    const std::size_t m = av.rows(), k = av.cols();
    Tensor out({m});
    const double* A = av.data().data();
    const double* X = xv.data().data();
    for (std::size_t i = 0; i < m; ++i) {
      const double* row = A + i * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += row[p] * X[p];
      out[i] = acc;
    }
    return push(Op::kMatmul, {a.id, x.id}, std::move(out), [m, k](Graph& g, const Node& self) {
      Node& na = g.nodes_[self.parents[0]];
      Node& nx = g.nodes_[self.parents[1]];
      const double* G = self.grad.data().data();
      const double* A = na.value.data().data();
      const double* X = nx.value.data().data();
      double* GA = na.grad.data().data();
      double* GX = nx.grad.data().data();
      for (std::size_t i = 0; i < m; ++i) {
        const double gi = G[i];
        if (gi == 0.0) continue;
        const double* row = A + i * k;
        double* grow = GA + i * k;
        for (std::size_t p = 0; p < k; ++p) {
          grow[p] += gi * X[p];
          GX[p] += gi * row[p];
        }
      }
    });
  }

  // Inner product of two equal-length vectors; returns a scalar.
  Var dot(Var a, Var b) {
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    if (av.rank() != 1 || av.shape() != bv.shape()) {
      throw DimensionError("dot: shape mismatch " + av.shape_string() + " vs " +
                           bv.shape_string());
    }
    double s = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
    return push(Op::kDot, {a.id, b.id}, Tensor::scalar(s), [](Graph& g, const Node& self) {
      Node& na = g.nodes_[self.parents[0]];
      Node& nb = g.nodes_[self.parents[1]];
      const double gs = self.grad[0];
      for (std::size_t i = 0; i < na.value.size(); ++i) {
        na.grad[i] += gs * nb.value[i];
        nb.grad[i] += gs * na.value[i];
      }
    });
  }

  Var add(Var a, Var b) {
    Tensor out = binary_values(a, b, "add", [](double x, double y) { return x + y; });
    return push(Op::kAdd, {a.id, b.id}, std::move(out), [](Graph& g, const Node& self) {
      g.nodes_[self.parents[0]].grad += self.grad;
      g.nodes_[self.parents[1]].grad += self.grad;
    });
  }

  Var hadamard(Var a, Var b) {
    Tensor out = binary_values(a, b, "hadamard", [](double x, double y) { return x * y; });
    return push(Op::kHadamard, {a.id, b.id}, std::move(out), [](Graph& g, const Node& self) {
      Node& na = g.nodes_[self.parents[0]];
      Node& nb = g.nodes_[self.parents[1]];
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        na.grad[i] += self.grad[i] * nb.value[i];
        nb.grad[i] += self.grad[i] * na.value[i];
      }
    });
  }

  // |a - b| element-wise; the subgradient at a == b is 0.
  Var abs_diff(Var a, Var b) {
    Tensor out =
        binary_values(a, b, "abs_diff", [](double x, double y) { return std::fabs(x - y); });
    return push(Op::kAbsDiff, {a.id, b.id}, std::move(out), [](Graph& g, const Node& self) {
      Node& na = g.nodes_[self.parents[0]];
      Node& nb = g.nodes_[self.parents[1]];
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        const double diff = na.value[i] - nb.value[i];
        const double s = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        na.grad[i] += s * self.grad[i];
        nb.grad[i] -= s * self.grad[i];
      }
    });
  }

  Var sigmoid(Var x) {
    Tensor out = unary_values(x, [](double v) {
      if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
      const double e = std::exp(v);
      return e / (1.0 + e);
    });
    return push(Op::kSigmoid, {x.id}, std::move(out), [](Graph& g, const Node& self) {
      Node& nx = g.nodes_[self.parents[0]];
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        const double y = self.value[i];
        nx.grad[i] += self.grad[i] * y * (1.0 - y);
      }
    });
  }

  Var tanh(Var x) {
    Tensor out = unary_values(x, [](double v) { return std::tanh(v); });
    return push(Op::kTanh, {x.id}, std::move(out), [](Graph& g, const Node& self) {
      Node& nx = g.nodes_[self.parents[0]];
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        const double y = self.value[i];
        nx.grad[i] += self.grad[i] * (1.0 - y * y);
      }
    });
  }

  // max(0, x); the gradient at exactly 0 is 0.
  Var relu(Var x) {
    Tensor out = unary_values(x, [](double v) { return v > 0.0 ? v : 0.0; });
    return push(Op::kRelu, {x.id}, std::move(out), [](Graph& g, const Node& self) {
      Node& nx = g.nodes_[self.parents[0]];
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        if (nx.value[i] > 0.0) nx.grad[i] += self.grad[i];
      }
    });
  }

  Var pointwise(Var x, Pointwise kind, std::optional<Var> y = std::nullopt) {
    auto other = [&]() -> Var {
      if (!y) throw ContractError("pointwise: binary kind requires a second operand");
      return *y;
    };
    switch (kind) {
      case Pointwise::kSigmoid: return sigmoid(x);
      case Pointwise::kTanh: return tanh(x);
      case Pointwise::kHadamard: return hadamard(x, other());
      case Pointwise::kAbsDiff: return abs_diff(x, other());
      case Pointwise::kAdd: return add(x, other());
    }
    throw ContractError("pointwise: unknown kind");
  }

  // Contiguous range [offset, offset + length) of a vector.
  Var slice(Var x, std::size_t offset, std::size_t length) {
    const Tensor& xv = value(x);
    if (xv.rank() != 1 || length == 0 || offset + length > xv.size()) {
      throw DimensionError("slice: [" + std::to_string(offset) + ", " +
                           std::to_string(offset + length) + ") out of range for " +
                           xv.shape_string());
    }
    const auto src = xv.data().subspan(offset, length);
    return push(Op::kSlice, {x.id}, Tensor({length}, std::vector<double>(src.begin(), src.end())),
                [offset](Graph& g, const Node& self) {
                  Node& nx = g.nodes_[self.parents[0]];
                  for (std::size_t i = 0; i < self.grad.size(); ++i) {
                    nx.grad[offset + i] += self.grad[i];
                  }
                });
  }

  /// Concatenation along axis 0 (vectors, or matrix rows) or axis 1 (matrix
  /// columns). All other extents must agree.
  Var concat(std::span<const Var> parts, std::size_t axis = 0) {
    if (parts.empty()) throw DimensionError("concat: no parts");
    const Tensor& first = value(parts[0]);
    const std::size_t rank = first.rank();
    if (axis >= rank) throw DimensionError("concat: axis out of range for " + first.shape_string());
    std::vector<NodeId> ids;
    ids.reserve(parts.size());
    std::size_t total = 0;
    for (const Var& p : parts) {
      const Tensor& pv = value(p);
      bool ok = pv.rank() == rank;
      if (ok && rank == 2) ok = axis == 0 ? pv.cols() == first.cols() : pv.rows() == first.rows();
      if (!ok) {
        throw DimensionError("concat: extents disagree, " + first.shape_string() + " vs " +
                             pv.shape_string());
      }
      total += pv.shape()[axis];
      ids.push_back(p.id);
    }
    Tensor::Shape shape = first.shape();
    shape[axis] = total;
    Tensor out(shape);
    // Row-major: axis 0 is a plain append; axis 1 interleaves per row.
    const std::size_t rows = rank == 2 ? first.rows() : 1;
    std::size_t col_offset = 0, flat_offset = 0;
    for (const Var& p : parts) {
      const Tensor& pv = value(p);
      if (axis == 0) {
        std::copy(pv.data().begin(), pv.data().end(), out.data().begin() + flat_offset);
        flat_offset += pv.size();
      } else {
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < pv.cols(); ++c) out.at(r, col_offset + c) = pv.at(r, c);
        }
        col_offset += pv.cols();
      }
    }
    return push(Op::kConcat, std::move(ids), std::move(out),
                [axis, rows](Graph& g, const Node& self) {
                  std::size_t col_offset = 0, flat_offset = 0;
                  for (NodeId pid : self.parents) {
                    Node& np = g.nodes_[pid];
                    if (axis == 0) {
                      for (std::size_t i = 0; i < np.grad.size(); ++i) {
                        np.grad[i] += self.grad[flat_offset + i];
                      }
                      flat_offset += np.grad.size();
                    } else {
                      for (std::size_t r = 0; r < rows; ++r) {
                        for (std::size_t c = 0; c < np.grad.cols(); ++c) {
                          np.grad.at(r, c) += self.grad.at(r, col_offset + c);
                        }
                      }
                      col_offset += np.grad.cols();
                    }
                  }
                });
  }

  Var concat(std::initializer_list<Var> parts, std::size_t axis = 0) {
    return concat(std::span<const Var>(parts.begin(), parts.size()), axis);
  }

  // Stacks equal-length vectors into a T x k matrix.
  Var stack_rows(std::span<const Var> rows) {
    if (rows.empty()) throw EmptySequenceError("stack_rows: no rows");
    const std::size_t k = value(rows[0]).size();
    std::vector<NodeId> ids;
    std::vector<double> data;
    data.reserve(rows.size() * k);
    for (const Var& r : rows) {
      const Tensor& rv = value(r);
      if (rv.rank() != 1 || rv.size() != k) {
        throw DimensionError("stack_rows: expected vectors of length " + std::to_string(k) +
                             ", got " + rv.shape_string());
      }
      data.insert(data.end(), rv.data().begin(), rv.data().end());
      ids.push_back(r.id);
    }
    return push(Op::kConcat, std::move(ids), Tensor({rows.size(), k}, std::move(data)),
                [k](Graph& g, const Node& self) {
                  for (std::size_t t = 0; t < self.parents.size(); ++t) {
                    Node& np = g.nodes_[self.parents[t]];
                    for (std::size_t j = 0; j < k; ++j) np.grad[j] += self.grad[t * k + j];
                  }
                });
  }

  /// Per-column maximum over the unmasked rows of a T x k matrix. mask[t] ==
  /// true excludes row t; an empty mask excludes nothing. Ties go to the
  /// lowest row index, which also receives the gradient.
  Var max_over_time(Var h, const std::vector<bool>& mask = {}) {
    const Tensor& hv = value(h);
    if (hv.rank() != 2) throw DimensionError("max_over_time: expected T x k, got " + hv.shape_string());
    const std::size_t T = hv.rows(), k = hv.cols();
    if (!mask.empty() && mask.size() != T) {
      throw DimensionError("max_over_time: mask length " + std::to_string(mask.size()) +
                           " does not match T=" + std::to_string(T));
    }
    std::vector<std::size_t> argmax(k, T);
    Tensor out({k});
    for (std::size_t t = 0; t < T; ++t) {
      if (!mask.empty() && mask[t]) continue;
      for (std::size_t j = 0; j < k; ++j) {
        if (argmax[j] == T || hv.at(t, j) > out[j]) {
          out[j] = hv.at(t, j);
          argmax[j] = t;
        }
      }
    }
    if (argmax[0] == T) throw EmptySequenceError("max_over_time: every step is masked");
    return push(Op::kMaxOverTime, {h.id}, std::move(out),
                [argmax = std::move(argmax), k](Graph& g, const Node& self) {
                  Node& nh = g.nodes_[self.parents[0]];
                  for (std::size_t j = 0; j < k; ++j) nh.grad.at(argmax[j], j) += self.grad[j];
                });
  }

  // Softmax of a vector, computed with max subtraction.
  Var softmax(Var s) {
    const Tensor& sv = value(s);
    if (sv.rank() != 1) throw DimensionError("softmax: expected a vector, got " + sv.shape_string());
    Tensor out = softmax_values(sv);
    return push(Op::kSoftmax, {s.id}, std::move(out), [](Graph& g, const Node& self) {
      Node& ns = g.nodes_[self.parents[0]];
      double inner = 0.0;
      for (std::size_t i = 0; i < self.grad.size(); ++i) inner += self.grad[i] * self.value[i];
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        ns.grad[i] += self.value[i] * (self.grad[i] - inner);
      }
    });
  }

  // -log(yhat[gold]) for a probability vector yhat.
  Var cross_entropy(Var yhat, std::size_t gold) {
    const Tensor& yv = value(yhat);
    check_gold(yv, gold, "cross_entropy");
    return push(Op::kCrossEntropy, {yhat.id}, Tensor::scalar(-std::log(yv[gold])),
                [gold](Graph& g, const Node& self) {
                  Node& ny = g.nodes_[self.parents[0]];
                  ny.grad[gold] -= self.grad[0] / ny.value[gold];
                });
  }

  /// Cross entropy of softmax(scores) against gold, fused: the loss is
  /// logsumexp(scores) - scores[gold] and the gradient is softmax - onehot.
  Var softmax_cross_entropy(Var scores, std::size_t gold) {
    const Tensor& sv = value(scores);
    check_gold(sv, gold, "softmax_cross_entropy");
    // (max - s[gold]) + log1p(sum over the non-max entries of exp(s - max)):
    // the leading term is exactly 0 when gold is the arg max, which keeps the
    // loss accurate for confident predictions.
    std::size_t top = 0;
    for (std::size_t i = 1; i < sv.size(); ++i) {
      if (sv[i] > sv[top]) top = i;
    }
    const double m = sv[top];
    double rest = 0.0;
    for (std::size_t i = 0; i < sv.size(); ++i) {
      if (i != top) rest += std::exp(sv[i] - m);
    }
    const double loss = (m - sv[gold]) + std::log1p(rest);
    return push(Op::kSoftmaxCrossEntropy, {scores.id}, Tensor::scalar(loss),
                [gold](Graph& g, const Node& self) {
                  Node& ns = g.nodes_[self.parents[0]];
                  const Tensor p = softmax_values(ns.value);
                  for (std::size_t i = 0; i < p.size(); ++i) {
                    ns.grad[i] += self.grad[0] * (p[i] - (i == gold ? 1.0 : 0.0));
                  }
                });
  }

  /// Inverted dropout. Eval mode, and train mode with p == 0, return x itself.
  Var dropout(Var x, double p, Mode mode, Rng& rng) {
    if (!(p >= 0.0 && p < 1.0)) {
      throw ParameterError("dropout: p must be in [0, 1), got " + std::to_string(p));
    }
    if (mode == Mode::kEval || p == 0.0) return x;
    const Tensor& xv = value(x);
    const double keep_scale = 1.0 / (1.0 - p);
    std::vector<double> mask(xv.size());
    Tensor out = Tensor::zeros_like(xv);
    for (std::size_t i = 0; i < xv.size(); ++i) {
      mask[i] = rng.bernoulli(p) ? 0.0 : keep_scale;
      out[i] = xv[i] * mask[i];
    }
    return push(Op::kDropout, {x.id}, std::move(out),
                [mask = std::move(mask)](Graph& g, const Node& self) {
                  Node& nx = g.nodes_[self.parents[0]];
                  for (std::size_t i = 0; i < mask.size(); ++i) nx.grad[i] += self.grad[i] * mask[i];
                });
  }

  Var sum(Var x) {
    double s = 0.0;
    for (double v : value(x).data()) s += v;
    return push(Op::kSum, {x.id}, Tensor::scalar(s), [](Graph& g, const Node& self) {
      Node& nx = g.nodes_[self.parents[0]];
      for (std::size_t i = 0; i < nx.grad.size(); ++i) nx.grad[i] += self.grad[0];
    });
  }

  const Tensor& value(Var v) const { return node(v).value; }

  // Gradient of the last backward() root with respect to v; zero for nodes
  // that do not feed it.
  Tensor grad(Var v) const {
    const Node& n = node(v);
    return n.grad.empty() ? Tensor::zeros_like(n.value) : n.grad;
  }

  Op op(Var v) const { return node(v).op; }
  const std::vector<NodeId>& parents(Var v) const { return node(v).parents; }
  std::size_t size() const { return nodes_.size(); }

  /// Reverse sweep from a scalar node. Replaces the gradients of any previous
  /// sweep.
  void backward(Var loss) {
    const Node& root = node(loss);
    if (root.value.size() != 1) {
      throw ContractError("backward: loss must be scalar, got shape " + root.value.shape_string());
    }
    std::vector<char> reach(loss.id + 1, 0);
    reach[loss.id] = 1;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      if (!reach[i]) continue;
      for (NodeId p : nodes_[i].parents) reach[p] = 1;
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      Node& n = nodes_[i];
      if (i < reach.size() && reach[i]) {
        n.grad = Tensor::zeros_like(n.value);
      } else {
        n.grad = Tensor();
      }
    }
    nodes_[loss.id].grad[0] = 1.0;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      if (reach[i] && nodes_[i].backward) nodes_[i].backward(*this, nodes_[i]);
    }
  }

  // Gradients of the parameter leaves (not lookups), keyed by node id.
  std::map<NodeId, Tensor> gradients() const {
    std::map<NodeId, Tensor> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      if (n.op == Op::kParameter) out.emplace(i, grad(Var{i}));
    }
    return out;
  }

  /// Adds scale * gradient into Parameter::grad for every parameter leaf and
  /// embedding row reached by the last backward().
  void accumulate_gradients(double scale = 1.0) const {
    for (const Node& n : nodes_) {
      if (n.param == nullptr || n.grad.empty()) continue;
      Parameter& p = *n.param;
      if (p.grad.shape() != p.value.shape()) p.grad = Tensor::zeros_like(p.value);
      if (n.op == Op::kParameter) {
        for (std::size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += scale * n.grad[i];
      } else {
        const std::size_t cols = p.value.cols();
        double* dst = p.grad.data().data() + n.row * cols;
        for (std::size_t i = 0; i < cols; ++i) dst[i] += scale * n.grad[i];
      }
    }
  }

 private:
  struct Node;
  using BackwardFn = std::function<void(Graph&, const Node&)>;

  struct Node {
    Op op;
    std::vector<NodeId> parents;
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    Parameter* param = nullptr;
    std::size_t row = 0;
  };

  const Node& node(Var v) const {
    if (v.id >= nodes_.size()) throw IndexError("graph: unknown node " + std::to_string(v.id));
    return nodes_[v.id];
  }

  Var push(Op op, std::vector<NodeId> parents, Tensor value, BackwardFn backward) {
    nodes_.push_back(Node{op, std::move(parents), std::move(value), Tensor(), std::move(backward)});
    return Var{nodes_.size() - 1};
  }

  template <class F>
  Tensor unary_values(Var x, F f) const {
    Tensor out = value(x);
    for (double& v : out.data()) v = f(v);
    return out;
  }

  template <class F>
  Tensor binary_values(Var a, Var b, const char* name, F f) const {
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    Tensor::require_same_shape(av, bv, name);
    Tensor out = Tensor::zeros_like(av);
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i], bv[i]);
    return out;
  }

  static Tensor softmax_values(const Tensor& s) {
    double m = s[0];
    for (double v : s.data()) m = std::max(m, v);
    Tensor out = Tensor::zeros_like(s);
    double z = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      out[i] = std::exp(s[i] - m);
      z += out[i];
    }
    for (double& v : out.data()) v /= z;
    return out;
  }

  static void check_gold(const Tensor& t, std::size_t gold, const char* op) {
    if (t.rank() != 1) throw DimensionError(std::string(op) + ": expected a vector");
    if (gold >= t.size()) {
      throw IndexError(std::string(op) + ": gold index " + std::to_string(gold) +
                       " out of range for " + std::to_string(t.size()) + " classes");
    }
  }

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, NodeId> param_nodes_;
};

}  // namespace arct
