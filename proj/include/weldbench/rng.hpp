#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace weldbench {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream for sample `index` of a run seeded with `seed`. The
// stream depends only on (seed, index), never on scheduling.
class SampleStream {
 public:
  SampleStream(std::uint64_t seed, std::uint64_t index, std::uint64_t salt = 0) {
    const std::uint64_t key = splitmix64(seed ^ splitmix64(index ^ (salt * 0xd1b54a32d192ed03ULL)));
    std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(salt)};
    engine_.seed(seq);
  }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  // Uniform on (0, 1], safe for logarithms.
  double uniform_open() { return 1.0 - uniform_(engine_); }
  double exponential(double rate) { return -std::log(uniform_open()) / rate; }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace weldbench
