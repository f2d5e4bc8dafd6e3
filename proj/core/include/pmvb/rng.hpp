#pragma once

#include <cstdint>
#include <random>

#include "pmvb/common.hpp"

namespace pmvb {

/// splitmix64 step; used to derive independent, schedule-invariant
/// per-sample streams from (master seed, sample index).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x517cc1b727220a95ULL));
}

/// Standard-normal stream. Sample i of a batch uses NormalStream(seed, i),
/// so results do not depend on the parallel schedule.
class NormalStream {
 public:
  NormalStream(std::uint64_t master, std::uint64_t index)
      : engine_(derive_stream_seed(master, index)) {}

  double next() { return normal_(engine_); }

  void fill(VecRef out) {
    for (Index i = 0; i < out.size(); ++i) out[i] = normal_(engine_);
  }

  Vec draw(Index n) {
    Vec v(n);
    fill(v);
    return v;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace pmvb
