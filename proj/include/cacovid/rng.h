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

// Splittable counter-based random streams.
//
// A stream is identified by (base_seed, stream_id); its i-th 64-bit output is
// a pure function of (base_seed, stream_id, i). Child streams are derived by
// hashing the parent id with a child index, so a rollout's draws depend only
// on where it sits in the experiment, never on evaluation order or thread
// schedule.

#ifndef CACOVID_RNG_H_
#define CACOVID_RNG_H_

#include <cstddef>
#include <cstdint>
#include <limits>

namespace cacovid {

// SplitMix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t base_seed, std::uint64_t stream_id = 0)
      : base_seed_(base_seed), stream_id_(stream_id) {}

  // Independent child stream; same (parent, child) always gives the same one.
  RngStream Split(std::uint64_t child) const {
    return RngStream(base_seed_,
                     Mix64(stream_id_ ^ Mix64(child + 0x632BE59BD9B4E019ULL)));
  }

  std::uint64_t At(std::uint64_t counter) const {
    const std::uint64_t key =
        Mix64(base_seed_ + 0x9E3779B97F4A7C15ULL) ^ Mix64(~stream_id_);
    return Mix64(key + (counter + 1) * 0x9E3779B97F4A7C15ULL);
  }

  std::uint64_t operator()() { return At(counter_++); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() {
    return std::numeric_limits<std::uint64_t>::max();
  }

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double Uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }
  // Standard normal via Box-Muller; consumes two outputs.
  double Gaussian();
  // Uniform integer in [0, n); n must be positive.
  std::size_t Index(std::size_t n);
  // Standard Gumbel variate.
  double Gumbel();

  std::uint64_t base_seed() const { return base_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t base_seed_;
  std::uint64_t stream_id_;
  std::uint64_t counter_ = 0;
};

}  // namespace cacovid

#endif  // CACOVID_RNG_H_
