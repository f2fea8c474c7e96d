#include "relapprox/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string_view>

namespace relapprox::kernels {

namespace {

Isa detect() {
  Isa best = isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
  if (const char* env = std::getenv("RELAPPROX_SIMD")) {
    std::string_view v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && isa_supported(Isa::avx2)) return Isa::avx2;
  }
  return best;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(__i386__)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (!isa_supported(isa)) throw std::runtime_error(std::string("ISA not supported on this CPU: ") + isa_name(isa));
  current().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

CoordColumns::CoordColumns(const PointSet& pts) : exact(pts.points()), x(pts.column(0)), y(pts.column(1)), z(pts.column(2)) {}

i128 orient2d_exact(const Point& a, const Point& b, const Point& p) {
  i128 bax = b.coords[0] - a.coords[0], bay = b.coords[1] - a.coords[1];
  i128 pax = p.coords[0] - a.coords[0], pay = p.coords[1] - a.coords[1];
  return bax * pay - bay * pax;
}

i128 orient3d_exact(const Point& a, const Point& b, const Point& c, const Point& p) {
  i128 adx = a.coords[0] - p.coords[0], ady = a.coords[1] - p.coords[1], adz = a.coords[2] - p.coords[2];
  i128 bdx = b.coords[0] - p.coords[0], bdy = b.coords[1] - p.coords[1], bdz = b.coords[2] - p.coords[2];
  i128 cdx = c.coords[0] - p.coords[0], cdy = c.coords[1] - p.coords[1], cdz = c.coords[2] - p.coords[2];
  return adz * (bdx * cdy - cdx * bdy) + bdz * (cdx * ady - adx * cdy) + cdz * (adx * bdy - bdx * ady);
}

void intersect_counts(std::span<const std::uint64_t> ranges, std::size_t words, std::span<const std::uint64_t> mask,
                      std::span<std::uint32_t> counts) {
  if (active_isa() == Isa::avx2) return avx2::intersect_counts(ranges, words, mask, counts);
  scalar::intersect_counts(ranges, words, mask, counts);
}

void orient2d_signs(const CoordColumns& cols, std::size_t a, std::size_t b, std::span<std::int8_t> out) {
  if (active_isa() == Isa::avx2) return avx2::orient2d_signs(cols, a, b, out);
  scalar::orient2d_signs(cols, a, b, out);
}

void orient3d_signs(const CoordColumns& cols, std::size_t a, std::size_t b, std::size_t c,
                    std::span<std::int8_t> out) {
  if (active_isa() == Isa::avx2) return avx2::orient3d_signs(cols, a, b, c, out);
  scalar::orient3d_signs(cols, a, b, c, out);
}

std::size_t first_out_of_bounds(std::span<const std::uint32_t> counts, std::span<const std::int32_t> lo,
                                std::span<const std::int32_t> hi) {
  if (active_isa() == Isa::avx2) return avx2::first_out_of_bounds(counts, lo, hi);
  return scalar::first_out_of_bounds(counts, lo, hi);
}

}  // namespace relapprox::kernels
