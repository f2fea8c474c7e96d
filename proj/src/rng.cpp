#include "relapprox/rng.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace relapprox {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view stage) {
  return splitmix64(master ^ splitmix64(fnv1a64(stage)));
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below with zero bound");
  if ((bound & (bound - 1)) == 0) return next() & (bound - 1);
  // Largest multiple of bound that fits; reject the tail.
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    std::uint64_t v = next();
    if (v < limit) return v % bound;
  }
}

bool Rng::bernoulli(const Rational& p) {
  if (p.is_negative() || p > Rational(1)) throw std::invalid_argument("bernoulli probability outside [0,1]");
  if (p.is_zero()) {
    next();
    return false;
  }
  if (p == Rational(1)) {
    next();
    return true;
  }
  if (p.den() > static_cast<i128>(std::numeric_limits<std::uint64_t>::max()))
    throw std::invalid_argument("bernoulli denominator exceeds 64 bits");
  return static_cast<i128>(below(static_cast<std::uint64_t>(p.den()))) < p.num();
}

std::vector<std::uint32_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  if (k > n) throw std::invalid_argument("sample larger than population");
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + below(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace relapprox
