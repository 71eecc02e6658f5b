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

// Binary parameter checkpoints.
//
// Layout (all integers little-endian):
//   8 bytes   magic "CCVDCKPT"
//   u32       format version (1)
//   u32       tensor count
//   per tensor, in name order:
//     u32 name length, name bytes, u32 rank, u64 per dimension
//   per tensor, same order:
//     row-major IEEE-754 binary64 values, little-endian
//
// Values are stored by bit pattern, so a save/load cycle is bit-exact.

#ifndef CACOVID_CHECKPOINT_H_
#define CACOVID_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>

#include "cacovid/tensor.h"

namespace cacovid::diffcore {

inline constexpr char kCheckpointMagic[8] = {'C', 'C', 'V', 'D',
                                             'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

using ParamMap = std::map<std::string, Tensor>;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void WriteCheckpoint(std::ostream& out, const ParamMap& params);
ParamMap ReadCheckpoint(std::istream& in);

void SaveCheckpoint(const std::filesystem::path& path, const ParamMap& params);
ParamMap LoadCheckpoint(const std::filesystem::path& path);

}  // namespace cacovid::diffcore

#endif  // CACOVID_CHECKPOINT_H_
