#pragma once

// Seeded random streams. Every stochastic operation takes a RandomStream&
// explicitly; there is no global engine.
//
// Child streams are derived as splitmix64(master + golden * (index + 1)), so
// trial i of a sweep always sees the same stream no matter how many worker
// threads run the sweep.

#include "genrestore/types.hpp"

#include <cstdint>
#include <random>

namespace genrestore {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master + 0x9E3779B97F4A7C15ULL * (index + 1));
}

class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  double normal() { return normal_(engine_); }

  /// Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }

  std::uint64_t next_u64() { return engine_(); }

  void fill_normal(Eigen::Ref<Vector> out) {
    for (Index i = 0; i < out.size(); ++i) out[i] = normal_(engine_);
  }

  Vector normal_vector(Index d) {
    Vector v(d);
    fill_normal(v);
    return v;
  }

  /// Independent child stream; does not advance this stream.
  [[nodiscard]] RandomStream child(std::uint64_t index) const {
    return RandomStream(derive_seed(seed_, index));
  }

  std::mt19937_64 &engine() noexcept { return engine_; }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

} // namespace genrestore
