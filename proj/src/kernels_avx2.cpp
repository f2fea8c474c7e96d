#include <bit>
#include <stdexcept>

#include "relapprox/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define RELAPPROX_HAVE_X86 1
#else
#define RELAPPROX_HAVE_X86 0
#endif

namespace relapprox::kernels::avx2 {

#if RELAPPROX_HAVE_X86

#define RELAPPROX_AVX2 __attribute__((target("avx2,popcnt")))

namespace {

constexpr double kEps = 0x1p-53;
// Shewchuk's first-stage error bounds for orient2d / orient3d.
constexpr double kCcwErrBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kO3dErrBound = (7.0 + 56.0 * kEps) * kEps;

inline std::int8_t sign_of(i128 v) { return static_cast<std::int8_t>((v > 0) - (v < 0)); }

// Per-64-bit-lane popcount (nibble lookup + SAD).
RELAPPROX_AVX2 inline __m256i popcount_lanes(__m256i v) {
  const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4, 0, 1, 1, 2, 1, 2, 2, 3, 1, 2,
                                       2, 3, 2, 3, 3, 4);
  const __m256i low = _mm256_set1_epi8(0x0f);
  __m256i lo = _mm256_and_si256(v, low);
  __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low);
  __m256i cnt = _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
  return _mm256_sad_epu8(cnt, _mm256_setzero_si256());
}

RELAPPROX_AVX2 inline __m256d vabs(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

RELAPPROX_AVX2 inline std::uint64_t hsum_lanes(__m256i v) {
  alignas(32) std::uint64_t t[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(t), v);
  return t[0] + t[1] + t[2] + t[3];
}

}  // namespace

RELAPPROX_AVX2 void intersect_counts(std::span<const std::uint64_t> ranges, std::size_t words,
                                     std::span<const std::uint64_t> mask, std::span<std::uint32_t> counts) {
  const std::size_t n = counts.size();
  const std::uint64_t* r = ranges.data();
  alignas(32) std::uint64_t t[4];
  std::size_t i = 0;
  if (words == 1) {
    const __m256i m = _mm256_set1_epi64x(static_cast<long long>(mask[0]));
    for (; i + 4 <= n; i += 4) {
      __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(r + i));
      _mm256_store_si256(reinterpret_cast<__m256i*>(t), popcount_lanes(_mm256_and_si256(v, m)));
      for (int k = 0; k < 4; ++k) counts[i + k] = static_cast<std::uint32_t>(t[k]);
    }
    for (; i < n; ++i) counts[i] = static_cast<std::uint32_t>(std::popcount(r[i] & mask[0]));
    return;
  }
  if (words == 2) {
    const __m256i m = _mm256_setr_epi64x(static_cast<long long>(mask[0]), static_cast<long long>(mask[1]),
                                         static_cast<long long>(mask[0]), static_cast<long long>(mask[1]));
    for (; i + 2 <= n; i += 2) {
      __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(r + 2 * i));
      _mm256_store_si256(reinterpret_cast<__m256i*>(t), popcount_lanes(_mm256_and_si256(v, m)));
      counts[i] = static_cast<std::uint32_t>(t[0] + t[1]);
      counts[i + 1] = static_cast<std::uint32_t>(t[2] + t[3]);
    }
    for (; i < n; ++i)
      counts[i] = static_cast<std::uint32_t>(std::popcount(r[2 * i] & mask[0]) + std::popcount(r[2 * i + 1] & mask[1]));
    return;
  }
  const std::size_t blocks = words / 4;
  for (; i < n; ++i, r += words) {
    __m256i acc = _mm256_setzero_si256();
    for (std::size_t b = 0; b < blocks; ++b) {
      __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(r + 4 * b));
      __m256i m = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(mask.data() + 4 * b));
      acc = _mm256_add_epi64(acc, popcount_lanes(_mm256_and_si256(v, m)));
    }
    std::uint64_t c = hsum_lanes(acc);
    for (std::size_t w = 4 * blocks; w < words; ++w) c += static_cast<std::uint64_t>(std::popcount(r[w] & mask[w]));
    counts[i] = static_cast<std::uint32_t>(c);
  }
}

RELAPPROX_AVX2 void orient2d_signs(const CoordColumns& cols, std::size_t a, std::size_t b,
                                   std::span<std::int8_t> out) {
  const std::size_t n = out.size();
  const double* xs = cols.x.data();
  const double* ys = cols.y.data();
  const __m256d ax = _mm256_set1_pd(xs[a]), ay = _mm256_set1_pd(ys[a]);
  const __m256d bax = _mm256_set1_pd(xs[b] - xs[a]), bay = _mm256_set1_pd(ys[b] - ys[a]);
  const __m256d bound = _mm256_set1_pd(kCcwErrBound);
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const Point& pa = cols.exact[a];
  const Point& pb = cols.exact[b];
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + j), ax);
    __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + j), ay);
    __m256d t1 = _mm256_mul_pd(bax, dy);
    __m256d t2 = _mm256_mul_pd(bay, dx);
    __m256d det = _mm256_sub_pd(t1, t2);
    __m256d err = _mm256_mul_pd(bound, _mm256_add_pd(_mm256_andnot_pd(sign_mask, t1), _mm256_andnot_pd(sign_mask, t2)));
    int pos = _mm256_movemask_pd(_mm256_cmp_pd(det, err, _CMP_GT_OQ));
    int neg = _mm256_movemask_pd(_mm256_cmp_pd(det, _mm256_xor_pd(err, sign_mask), _CMP_LT_OQ));
    for (int k = 0; k < 4; ++k) {
      if (pos >> k & 1)
        out[j + k] = 1;
      else if (neg >> k & 1)
        out[j + k] = -1;
      else
        out[j + k] = sign_of(orient2d_exact(pa, pb, cols.exact[j + k]));
    }
  }
  for (; j < n; ++j) out[j] = sign_of(orient2d_exact(pa, pb, cols.exact[j]));
}

RELAPPROX_AVX2 void orient3d_signs(const CoordColumns& cols, std::size_t a, std::size_t b, std::size_t c,
                                   std::span<std::int8_t> out) {
  const std::size_t n = out.size();
  const double* xs = cols.x.data();
  const double* ys = cols.y.data();
  const double* zs = cols.z.data();
  const __m256d ax = _mm256_set1_pd(xs[a]), ay = _mm256_set1_pd(ys[a]), az = _mm256_set1_pd(zs[a]);
  const __m256d bx = _mm256_set1_pd(xs[b]), by = _mm256_set1_pd(ys[b]), bz = _mm256_set1_pd(zs[b]);
  const __m256d cx = _mm256_set1_pd(xs[c]), cy = _mm256_set1_pd(ys[c]), cz = _mm256_set1_pd(zs[c]);
  const __m256d bound = _mm256_set1_pd(kO3dErrBound);
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const Point& pa = cols.exact[a];
  const Point& pb = cols.exact[b];
  const Point& pc = cols.exact[c];
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d px = _mm256_loadu_pd(xs + j), py = _mm256_loadu_pd(ys + j), pz = _mm256_loadu_pd(zs + j);
    __m256d adx = _mm256_sub_pd(ax, px), ady = _mm256_sub_pd(ay, py), adz = _mm256_sub_pd(az, pz);
    __m256d bdx = _mm256_sub_pd(bx, px), bdy = _mm256_sub_pd(by, py), bdz = _mm256_sub_pd(bz, pz);
    __m256d cdx = _mm256_sub_pd(cx, px), cdy = _mm256_sub_pd(cy, py), cdz = _mm256_sub_pd(cz, pz);
    __m256d bdxcdy = _mm256_mul_pd(bdx, cdy), cdxbdy = _mm256_mul_pd(cdx, bdy);
    __m256d cdxady = _mm256_mul_pd(cdx, ady), adxcdy = _mm256_mul_pd(adx, cdy);
    __m256d adxbdy = _mm256_mul_pd(adx, bdy), bdxady = _mm256_mul_pd(bdx, ady);
    __m256d det = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(adz, _mm256_sub_pd(bdxcdy, cdxbdy)),
                      _mm256_mul_pd(bdz, _mm256_sub_pd(cdxady, adxcdy))),
        _mm256_mul_pd(cdz, _mm256_sub_pd(adxbdy, bdxady)));
    __m256d perm = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(_mm256_add_pd(vabs(bdxcdy), vabs(cdxbdy)), vabs(adz)),
                      _mm256_mul_pd(_mm256_add_pd(vabs(cdxady), vabs(adxcdy)), vabs(bdz))),
        _mm256_mul_pd(_mm256_add_pd(vabs(adxbdy), vabs(bdxady)), vabs(cdz)));
    __m256d err = _mm256_mul_pd(bound, perm);
    int pos = _mm256_movemask_pd(_mm256_cmp_pd(det, err, _CMP_GT_OQ));
    int neg = _mm256_movemask_pd(_mm256_cmp_pd(det, _mm256_xor_pd(err, sign_mask), _CMP_LT_OQ));
    for (int k = 0; k < 4; ++k) {
      if (pos >> k & 1)
        out[j + k] = 1;
      else if (neg >> k & 1)
        out[j + k] = -1;
      else
        out[j + k] = sign_of(orient3d_exact(pa, pb, pc, cols.exact[j + k]));
    }
  }
  for (; j < n; ++j) out[j] = sign_of(orient3d_exact(pa, pb, pc, cols.exact[j]));
}

RELAPPROX_AVX2 std::size_t first_out_of_bounds(std::span<const std::uint32_t> counts,
                                               std::span<const std::int32_t> lo, std::span<const std::int32_t> hi) {
  const std::size_t n = counts.size();
  std::size_t r = 0;
  for (; r + 8 <= n; r += 8) {
    __m256i c = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(counts.data() + r));
    __m256i l = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(lo.data() + r));
    __m256i h = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(hi.data() + r));
    __m256i bad = _mm256_or_si256(_mm256_cmpgt_epi32(l, c), _mm256_cmpgt_epi32(c, h));
    int m = _mm256_movemask_ps(_mm256_castsi256_ps(bad));
    if (m != 0) return r + static_cast<std::size_t>(std::countr_zero(static_cast<unsigned>(m)));
  }
  for (; r < n; ++r) {
    auto c = static_cast<std::int64_t>(counts[r]);
    if (c < lo[r] || c > hi[r]) return r;
  }
  return n;
}

#else  // no x86: the dispatcher never selects these.

void intersect_counts(std::span<const std::uint64_t>, std::size_t, std::span<const std::uint64_t>,
                      std::span<std::uint32_t>) {
  throw std::runtime_error("avx2 kernels unavailable");
}
void orient2d_signs(const CoordColumns&, std::size_t, std::size_t, std::span<std::int8_t>) {
  throw std::runtime_error("avx2 kernels unavailable");
}
void orient3d_signs(const CoordColumns&, std::size_t, std::size_t, std::size_t, std::span<std::int8_t>) {
  throw std::runtime_error("avx2 kernels unavailable");
}
std::size_t first_out_of_bounds(std::span<const std::uint32_t>, std::span<const std::int32_t>,
                                std::span<const std::int32_t>) {
  throw std::runtime_error("avx2 kernels unavailable");
}

#endif

}  // namespace relapprox::kernels::avx2
