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

#include "cacovid/kernels.h"

#include <cstdint>
#include <stdexcept>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace cacovid::kernels {
namespace {

constexpr std::size_t kParallelGemmWork = 1 << 15;
constexpr std::size_t kParallelDistanceWork = 1 << 14;

void CheckGemm(std::span<const double> a, std::span<const double> b,
               std::span<double> out, const GemmDims& d) {
  if (a.size() != d.m * d.k || b.size() != d.k * d.n ||
      out.size() != d.m * d.n) {
    throw std::invalid_argument("matmul operand sizes do not match dims");
  }
}

inline double LeftAt(std::span<const double> a, const GemmDims& d,
                     std::size_t i, std::size_t p) {
  return d.transpose_a ? a[p * d.m + i] : a[i * d.k + p];
}

inline double RightAt(std::span<const double> b, const GemmDims& d,
                      std::size_t p, std::size_t j) {
  return d.transpose_b ? b[j * d.k + p] : b[p * d.n + j];
}

inline void GemmRow(std::span<const double> a, std::span<const double> b,
                    std::span<double> out, const GemmDims& d, std::size_t i) {
  for (std::size_t j = 0; j < d.n; ++j) {
    double acc = 0.0;
    for (std::size_t p = 0; p < d.k; ++p) {
      acc += LeftAt(a, d, i, p) * RightAt(b, d, p, j);
    }
    out[i * d.n + j] = acc;
  }
}

inline void DistanceRow(std::span<const double> x, std::size_t rows,
                        std::size_t dim, std::span<double> out,
                        std::size_t i) {
  for (std::size_t j = 0; j < rows; ++j) {
    double acc = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double diff = x[i * dim + c] - x[j * dim + c];
      acc += diff * diff;
    }
    out[i * rows + j] = acc;
  }
}

}  // namespace

void MatMulSerial(std::span<const double> a, std::span<const double> b,
                  std::span<double> out, const GemmDims& dims) {
  CheckGemm(a, b, out, dims);
  for (std::size_t i = 0; i < dims.m; ++i) GemmRow(a, b, out, dims, i);
}

void MatMulParallel(std::span<const double> a, std::span<const double> b,
                    std::span<double> out, const GemmDims& dims) {
  CheckGemm(a, b, out, dims);
  const auto m = static_cast<std::int64_t>(dims.m);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i) {
    GemmRow(a, b, out, dims, static_cast<std::size_t>(i));
  }
}

void MatMul(std::span<const double> a, std::span<const double> b,
            std::span<double> out, const GemmDims& dims) {
  if (MaxThreads() > 1 && dims.m > 1 &&
      dims.m * dims.k * dims.n >= kParallelGemmWork) {
    MatMulParallel(a, b, out, dims);
  } else {
    MatMulSerial(a, b, out, dims);
  }
}

void PairwiseSquaredDistancesSerial(std::span<const double> points,
                                    std::size_t rows, std::size_t dim,
                                    std::span<double> out) {
  if (points.size() != rows * dim || out.size() != rows * rows) {
    throw std::invalid_argument("pairwise distance sizes do not match");
  }
  for (std::size_t i = 0; i < rows; ++i) DistanceRow(points, rows, dim, out, i);
}

void PairwiseSquaredDistancesParallel(std::span<const double> points,
                                      std::size_t rows, std::size_t dim,
                                      std::span<double> out) {
  if (points.size() != rows * dim || out.size() != rows * rows) {
    throw std::invalid_argument("pairwise distance sizes do not match");
  }
  const auto n = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    DistanceRow(points, rows, dim, out, static_cast<std::size_t>(i));
  }
}

void PairwiseSquaredDistances(std::span<const double> points,
                              std::size_t rows, std::size_t dim,
                              std::span<double> out) {
  if (MaxThreads() > 1 && rows * rows * dim >= kParallelDistanceWork) {
    PairwiseSquaredDistancesParallel(points, rows, dim, out);
  } else {
    PairwiseSquaredDistancesSerial(points, rows, dim, out);
  }
}

int MaxThreads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void SetNumThreads(int n) {
#if defined(_OPENMP)
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace cacovid::kernels
