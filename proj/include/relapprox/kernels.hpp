#pragma once

// Data-parallel inner loops. Each kernel has a portable scalar reference and an
// AVX2 variant; the variant is picked once at runtime from CPUID and can be
// pinned with RELAPPROX_SIMD=scalar|avx2 or set_isa(). Both variants must give
// bit-identical results, which the equivalence tests check.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "relapprox/point_set.hpp"
#include "relapprox/rational.hpp"

namespace relapprox::kernels {

enum class Isa { scalar, avx2 };

bool isa_supported(Isa isa);
Isa active_isa();
void set_isa(Isa isa);
const char* isa_name(Isa isa);

// Point coordinates as exact doubles (|v| <= 2^40), one column per axis. The
// integer points are kept alongside for the exact fallback.
struct CoordColumns {
  explicit CoordColumns(const PointSet& pts);
  std::span<const Point> exact;
  std::vector<double> x, y, z;
};

// Exact orientation predicates on the fixed-point integers.
// orient2d > 0 iff p lies to the left of the directed line a->b.
i128 orient2d_exact(const Point& a, const Point& b, const Point& p);
// orient3d = det[a-p; b-p; c-p]; zero iff p is on the plane through a, b, c.
i128 orient3d_exact(const Point& a, const Point& b, const Point& c, const Point& p);

// counts[r] = popcount(ranges[r*words .. r*words+words) & mask)
void intersect_counts(std::span<const std::uint64_t> ranges, std::size_t words, std::span<const std::uint64_t> mask,
                      std::span<std::uint32_t> counts);

// out[j] = sign(orient2d(pts[a], pts[b], pts[j])) for every j.
void orient2d_signs(const CoordColumns& cols, std::size_t a, std::size_t b, std::span<std::int8_t> out);

// out[j] = sign(orient3d(pts[a], pts[b], pts[c], pts[j])) for every j.
void orient3d_signs(const CoordColumns& cols, std::size_t a, std::size_t b, std::size_t c,
                    std::span<std::int8_t> out);

// Index of the first r with counts[r] outside [lo[r], hi[r]], or counts.size().
std::size_t first_out_of_bounds(std::span<const std::uint32_t> counts, std::span<const std::int32_t> lo,
                                std::span<const std::int32_t> hi);

// Per-ISA entry points, exposed for the equivalence tests.
namespace scalar {
void intersect_counts(std::span<const std::uint64_t>, std::size_t, std::span<const std::uint64_t>,
                      std::span<std::uint32_t>);
void orient2d_signs(const CoordColumns&, std::size_t, std::size_t, std::span<std::int8_t>);
void orient3d_signs(const CoordColumns&, std::size_t, std::size_t, std::size_t, std::span<std::int8_t>);
std::size_t first_out_of_bounds(std::span<const std::uint32_t>, std::span<const std::int32_t>,
                                std::span<const std::int32_t>);
}  // namespace scalar

namespace avx2 {
void intersect_counts(std::span<const std::uint64_t>, std::size_t, std::span<const std::uint64_t>,
                      std::span<std::uint32_t>);
void orient2d_signs(const CoordColumns&, std::size_t, std::size_t, std::span<std::int8_t>);
void orient3d_signs(const CoordColumns&, std::size_t, std::size_t, std::size_t, std::span<std::int8_t>);
std::size_t first_out_of_bounds(std::span<const std::uint32_t>, std::span<const std::int32_t>,
                                std::span<const std::int32_t>);
}  // namespace avx2

}  // namespace relapprox::kernels
