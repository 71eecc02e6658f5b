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

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP version; both accumulate each output element in the same order, so
// their results are bitwise identical and the serial path doubles as the test
// oracle for the parallel one.

#ifndef CACOVID_KERNELS_H_
#define CACOVID_KERNELS_H_

#include <cstddef>
#include <span>

namespace cacovid::kernels {

// Operand layout for a matrix product. With transpose_a the left operand is
// stored k x m, with transpose_b the right operand is stored n x k.
struct GemmDims {
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t n = 0;
  bool transpose_a = false;
  bool transpose_b = false;
};

// out (m x n) = op(a) * op(b). `out` is overwritten.
void MatMulSerial(std::span<const double> a, std::span<const double> b,
                  std::span<double> out, const GemmDims& dims);
void MatMulParallel(std::span<const double> a, std::span<const double> b,
                    std::span<double> out, const GemmDims& dims);
// Picks the parallel kernel once the product is large enough to amortize the
// fork/join.
void MatMul(std::span<const double> a, std::span<const double> b,
            std::span<double> out, const GemmDims& dims);

// out (rows x rows) with out[i][j] = ||x_i - x_j||^2 for a row-major
// rows x dim point set.
void PairwiseSquaredDistancesSerial(std::span<const double> points,
                                    std::size_t rows, std::size_t dim,
                                    std::span<double> out);
void PairwiseSquaredDistancesParallel(std::span<const double> points,
                                      std::size_t rows, std::size_t dim,
                                      std::span<double> out);
void PairwiseSquaredDistances(std::span<const double> points,
                              std::size_t rows, std::size_t dim,
                              std::span<double> out);

int MaxThreads();
void SetNumThreads(int n);

}  // namespace cacovid::kernels

#endif  // CACOVID_KERNELS_H_
