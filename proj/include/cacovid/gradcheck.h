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

#ifndef CACOVID_GRADCHECK_H_
#define CACOVID_GRADCHECK_H_

#include <functional>
#include <string>

#include "cacovid/checkpoint.h"
#include "cacovid/graph.h"

namespace cacovid::diffcore {

// Scalar function of a parameter set. Only forward evaluation is used, so the
// finite-difference gradient never touches the backward path it checks.
using ScalarFn = std::function<double(const ParamMap&)>;

ParamMap CentralDifference(const ScalarFn& fn, const ParamMap& params,
                           double step = 1e-5);

struct GradCheckResult {
  // ||analytic - numeric|| / max(||analytic||, ||numeric||) over all
  // parameters concatenated.
  double relative_error = 0.0;
  // Worst per-tensor value of the same ratio, and the tensor it came from.
  double worst_tensor_error = 0.0;
  std::string worst_tensor;
  double analytic_norm = 0.0;
  double numeric_norm = 0.0;
};

// Norms below `floor` count as zero; two zero gradients agree exactly.
GradCheckResult CompareGradients(const Gradients& analytic,
                                 const ParamMap& numeric,
                                 double floor = 1e-12);

}  // namespace cacovid::diffcore

#endif  // CACOVID_GRADCHECK_H_
