#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "relapprox/rational.hpp"

namespace relapprox {

// Seed derivation: FNV-1a-64 of the stage label, mixed into the master seed
// with the splitmix64 finalizer. Adding a new stage label never changes the
// stream of an existing one.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage);

// The single generator used everywhere: std::mt19937_64. Bounded draws use
// rejection sampling so results do not depend on the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  static Rng for_stage(std::uint64_t master, std::string_view stage) { return Rng(derive_seed(master, stage)); }

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, bound), bound >= 1.
  std::uint64_t below(std::uint64_t bound);

  // True with probability exactly p = a/b (0 <= p <= 1, b < 2^64).
  bool bernoulli(const Rational& p);

  // k distinct indices from [0, n), returned in increasing order.
  std::vector<std::uint32_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace relapprox
