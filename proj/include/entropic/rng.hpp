#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace entropic {

// Seeded random stream. The engine is std::mt19937_64, whose output sequence
// is fixed by the standard; the distributions below are implemented here
// because the std:: distribution algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  // Uniform integer in [0, n); n >= 1. Unbiased (rejection).
  std::uint64_t uniform_int(std::uint64_t n);

  double normal();

  // log of a Gamma(shape, 1) draw. Computed in log space so that shapes far
  // below 1 do not underflow to zero.
  double log_gamma_draw(double shape);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Index drawn from an unnormalized non-negative weight vector.
  std::size_t categorical(const std::vector<double>& probs);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// 64-bit stable hashing used to derive child seeds.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t stable_hash(std::string_view s);
std::uint64_t derive_seed(std::uint64_t master, std::string_view cell_id, std::uint64_t replicate);

}  // namespace entropic
