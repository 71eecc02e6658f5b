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

#include "cacovid/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace cacovid::diffcore {
namespace {

// Sanity limits so a corrupt header fails cleanly instead of allocating.
constexpr std::uint32_t kMaxNameLength = 4096;
constexpr std::uint32_t kMaxRank = 8;
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

template <typename UInt>
void PutLE(std::ostream& out, UInt v) {
  char buf[sizeof(UInt)];
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  }
  out.write(buf, sizeof(UInt));
}

template <typename UInt>
UInt GetLE(std::istream& in) {
  unsigned char buf[sizeof(UInt)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(UInt))) {
    throw CheckpointError("checkpoint truncated");
  }
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    v |= static_cast<UInt>(buf[i]) << (8 * i);
  }
  return v;
}

}  // namespace

void WriteCheckpoint(std::ostream& out, const ParamMap& params) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  PutLE<std::uint32_t>(out, kCheckpointVersion);
  PutLE<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    PutLE<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    PutLE<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) PutLE<std::uint64_t>(out, d);
  }
  for (const auto& [name, t] : params) {
    for (double v : t.data()) PutLE<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw CheckpointError("checkpoint write failed");
}

ParamMap ReadCheckpoint(std::istream& in) {
  char magic[sizeof(kCheckpointMagic)];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw CheckpointError("not a checkpoint (bad magic)");
  }
  const auto version = GetLE<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(version));
  }
  const auto count = GetLE<std::uint32_t>(in);
  std::vector<std::pair<std::string, Shape>> table;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = GetLE<std::uint32_t>(in);
    if (len > kMaxNameLength) throw CheckpointError("tensor name too long");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw CheckpointError("checkpoint truncated");
    const auto rank = GetLE<std::uint32_t>(in);
    if (rank > kMaxRank) throw CheckpointError("tensor rank too large");
    Shape shape(rank);
    std::uint64_t total = 1;
    for (auto& d : shape) {
      const auto dim = GetLE<std::uint64_t>(in);
      total *= dim;
      if (total > kMaxElements) throw CheckpointError("tensor too large");
      d = static_cast<std::size_t>(dim);
    }
    table.emplace_back(std::move(name), std::move(shape));
  }
  ParamMap params;
  for (auto& [name, shape] : table) {
    std::vector<double> data(NumElements(shape));
    for (double& v : data) v = std::bit_cast<double>(GetLE<std::uint64_t>(in));
    if (!params.emplace(name, Tensor(shape, std::move(data))).second) {
      throw CheckpointError("duplicate tensor '" + name + "'");
    }
  }
  return params;
}

void SaveCheckpoint(const std::filesystem::path& path, const ParamMap& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open " + path.string());
  WriteCheckpoint(out, params);
}

ParamMap LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  return ReadCheckpoint(in);
}

}  // namespace cacovid::diffcore
