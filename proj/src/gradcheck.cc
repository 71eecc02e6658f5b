// Copyright 2026 The cacovid Authors
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

#include "cacovid/gradcheck.h"

#include <algorithm>
#include <cmath>

namespace cacovid::diffcore {

ParamMap CentralDifference(const ScalarFn& fn, const ParamMap& params,
                           double step) {
  ParamMap probe = params;
  ParamMap numeric;
  for (auto& [name, tensor] : probe) {
    Tensor g(tensor.shape());
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      const double saved = tensor[i];
      tensor[i] = saved + step;
      const double up = fn(probe);
      tensor[i] = saved - step;
      const double down = fn(probe);
      tensor[i] = saved;
      g[i] = (up - down) / (2.0 * step);
    }
    numeric.emplace(name, std::move(g));
  }
  return numeric;
}

GradCheckResult CompareGradients(const Gradients& analytic,
                                 const ParamMap& numeric, double floor) {
  GradCheckResult r;
  double diff2 = 0.0;
  double a2 = 0.0;
  double n2 = 0.0;
  for (const auto& [name, num] : numeric) {
    auto it = analytic.find(name);
    if (it == analytic.end()) {
      throw GraphError("no analytic gradient for '" + name + "'");
    }
    const Tensor& ana = it->second;
    if (ana.shape() != num.shape()) {
      throw GraphError("gradient shape mismatch for '" + name + "'");
    }
    double d = 0.0, a = 0.0, n = 0.0;
    for (std::size_t i = 0; i < num.size(); ++i) {
      d += (ana[i] - num[i]) * (ana[i] - num[i]);
      a += ana[i] * ana[i];
      n += num[i] * num[i];
    }
    diff2 += d;
    a2 += a;
    n2 += n;
    const double scale = std::max(std::sqrt(a), std::sqrt(n));
    const double err = scale < floor ? 0.0 : std::sqrt(d) / scale;
    if (err >= r.worst_tensor_error) {
      r.worst_tensor_error = err;
      r.worst_tensor = name;
    }
  }
  r.analytic_norm = std::sqrt(a2);
  r.numeric_norm = std::sqrt(n2);
  const double scale = std::max(r.analytic_norm, r.numeric_norm);
  r.relative_error = scale < floor ? 0.0 : std::sqrt(diff2) / scale;
  return r;
}

}  // namespace cacovid::diffcore
