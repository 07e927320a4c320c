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
#include <span>
#include <string>
#include <vector>

#include "arct/autodiff.hpp"
#include "arct/error.hpp"

namespace arct {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst_name;  // parameter holding the worst coordinate
  std::size_t worst_index = 0;
};

inline double relative_error(double analytic, double numeric) {
  return std::fabs(analytic - numeric) /
         std::max(1e-8, std::fabs(analytic) + std::fabs(numeric));
}

/// Central-difference check of `analytic` against f at theta.
inline GradCheckResult grad_check(const std::function<double(std::span<const double>)>& f,
                                  std::vector<double> theta, std::span<const double> analytic,
                                  double h = 1e-5) {
  if (!(h > 0.0)) throw ParameterError("grad_check: step must be positive");
  if (analytic.size() != theta.size()) {
    throw DimensionError("grad_check: analytic gradient has " + std::to_string(analytic.size()) +
                         " entries for " + std::to_string(theta.size()) + " parameters");
  }
  GradCheckResult result;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + h;
    const double up = f(theta);
    theta[i] = saved - h;
    const double down = f(theta);
    theta[i] = saved;
    const double err = relative_error(analytic[i], (up - down) / (2.0 * h));
    if (err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst_index = i;
    }
    ++result.coordinates;
  }
  return result;
}

/// Checks Parameter::grad (already filled with the analytic gradient) against
/// central differences of f, which must evaluate the loss from the current
/// parameter values. Every coordinate of every parameter is perturbed in place
/// and restored.
inline GradCheckResult grad_check(const std::function<double()>& f,
                                  std::span<Parameter* const> params, double h = 1e-5) {
  if (!(h > 0.0)) throw ParameterError("grad_check: step must be positive");
  GradCheckResult result;
  for (Parameter* p : params) {
    if (p->grad.shape() != p->value.shape()) {
      throw DimensionError("grad_check: parameter '" + p->name + "' has no gradient");
    }
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = f();
      p->value[i] = saved - h;
      const double down = f();
      p->value[i] = saved;
      const double err = relative_error(p->grad[i], (up - down) / (2.0 * h));
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_name = p->name;
        result.worst_index = i;
      }
      ++result.coordinates;
    }
  }
  return result;
}

}  // namespace arct
