#include <bit>

#include "relapprox/kernels.hpp"

namespace relapprox::kernels::scalar {

namespace {

inline std::int8_t sign_of(i128 v) { return static_cast<std::int8_t>((v > 0) - (v < 0)); }

}  // namespace

void intersect_counts(std::span<const std::uint64_t> ranges, std::size_t words, std::span<const std::uint64_t> mask,
                      std::span<std::uint32_t> counts) {
  const std::size_t n = counts.size();
  const std::uint64_t* r = ranges.data();
  for (std::size_t i = 0; i < n; ++i, r += words) {
    std::uint32_t c = 0;
    for (std::size_t w = 0; w < words; ++w) c += static_cast<std::uint32_t>(std::popcount(r[w] & mask[w]));
    counts[i] = c;
  }
}

void orient2d_signs(const CoordColumns& cols, std::size_t a, std::size_t b, std::span<std::int8_t> out) {
  const Point& pa = cols.exact[a];
  const Point& pb = cols.exact[b];
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = sign_of(orient2d_exact(pa, pb, cols.exact[j]));
}

void orient3d_signs(const CoordColumns& cols, std::size_t a, std::size_t b, std::size_t c,
                    std::span<std::int8_t> out) {
  const Point& pa = cols.exact[a];
  const Point& pb = cols.exact[b];
  const Point& pc = cols.exact[c];
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = sign_of(orient3d_exact(pa, pb, pc, cols.exact[j]));
}

std::size_t first_out_of_bounds(std::span<const std::uint32_t> counts, std::span<const std::int32_t> lo,
                                std::span<const std::int32_t> hi) {
  for (std::size_t r = 0; r < counts.size(); ++r) {
    auto c = static_cast<std::int64_t>(counts[r]);
    if (c < lo[r] || c > hi[r]) return r;
  }
  return counts.size();
}

}  // namespace relapprox::kernels::scalar
