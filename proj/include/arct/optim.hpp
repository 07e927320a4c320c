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
#include <span>
#include <unordered_map>
#include <vector>

#include "arct/autodiff.hpp"
#include "arct/error.hpp"

namespace arct {

/// Parameters sharing one learning rate.
struct ParamGroup {
  std::vector<Parameter*> params;
  double lr = 0.0;
};

/// Adam with bias correction (beta1 0.9, beta2 0.999, eps 1e-8). Gradients
/// are read from Parameter::grad.
class AdamState {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  // One optimizer step over every group; t advances once per call.
  void step(std::span<const ParamGroup> groups) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (const ParamGroup& group : groups) {
      for (Parameter* p : group.params) {
        if (p->grad.shape() != p->value.shape()) {
          throw DimensionError("adam: gradient of '" + p->name + "' has shape " + p->grad.shape_string() +
                               ", parameter has " + p->value.shape_string());
        }
        Moments& mom = moments_[p];
        if (mom.m.shape() != p->value.shape()) {
          mom.m = Tensor::zeros_like(p->value);
          mom.v = Tensor::zeros_like(p->value);
        }
        double* theta = p->value.data().data();
        const double* g = p->grad.data().data();
        double* m = mom.m.data().data();
        double* v = mom.v.data().data();
        for (std::size_t i = 0; i < p->value.size(); ++i) {
          m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
          v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
          const double mhat = m[i] / c1;
          const double vhat = v[i] / c2;
          theta[i] -= group.lr * mhat / (std::sqrt(vhat) + kEps);
        }
      }
    }
  }

  std::size_t t() const { return t_; }

  const Tensor* first_moment(const Parameter& p) const {
    auto it = moments_.find(&p);
    return it == moments_.end() ? nullptr : &it->second.m;
  }

 private:
  struct Moments {
    Tensor m;
    Tensor v;
  };
  std::unordered_map<const Parameter*, Moments> moments_;
  std::size_t t_ = 0;
};

inline void adam_step(AdamState& state, std::span<const ParamGroup> groups) { state.step(groups); }

struct AnnealDecision {
  double lr = 0.0;
  bool stop = false;
  bool improved = false;
};

/// Called once per finished epoch with every dev accuracy so far. An epoch
/// improves only if its accuracy is strictly above all earlier ones;
/// otherwise the rate is divided by `factor`. Training stops once the rate
/// falls below `floor`.
inline AnnealDecision anneal_update(double current_lr, std::span<const double> dev_history,
                                    double factor = 5.0, double floor = 1e-5) {
  if (dev_history.empty()) throw ContractError("anneal_update: empty dev history");
  bool improved = true;
  const double latest = dev_history.back();
  for (std::size_t i = 0; i + 1 < dev_history.size(); ++i) {
    if (dev_history[i] >= latest) improved = false;
  }
  AnnealDecision d;
  d.improved = improved;
  d.lr = improved ? current_lr : current_lr / factor;
  d.stop = d.lr < floor;
  return d;
}

}  // namespace arct
