#pragma once

// Range spaces: exhaustive enumeration of the distinct ranges a geometric
// family cuts out of a finite point set, shallow counts and incidences.
//
// All ranges are closed. Member sets are stored as fixed-width bitsets, one
// row of `words()` 64-bit words per range, so intersection counts against a
// sample reduce to AND + popcount (see kernels.hpp).

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "relapprox/point_set.hpp"
#include "relapprox/range_family.hpp"
#include "relapprox/rational.hpp"

namespace relapprox {

// Rule deciding which points on a supporting line are included: none, all,
// or those with projection t = (b-a).(p-a) on one side of the threshold
// point q (dir = +1 keeps t <= t(q), dir = -1 keeps t >= t(q)).
enum class Boundary : std::uint8_t { none, all, prefix, halfplane };

// A closed-halfplane rule in some 2D coordinate frame: keep the open side
// `side` of the line a->b, plus the boundary points selected by `boundary`.
struct LineRule {
  std::uint32_t a = 0, b = 0;
  std::int8_t side = 0;
  Boundary boundary = Boundary::none;
  std::int8_t dir = 0;
  std::uint32_t q = 0;
};

// Description of a region realizing a range. Halfplane/halfspace witnesses
// are lexicographic: the open side of the supporting line or plane plus a
// boundary rule, which is the limit of an infinitesimal rotation of a genuine
// closed halfspace. Box witnesses are the tight bounding box of the members.
struct Witness {
  enum class Kind : std::uint8_t { empty, full, halfplane, halfspace, line_prefix, box };
  Kind kind = Kind::empty;
  // halfplane and line_prefix: `line` (a, b, dir, q) in xy / along the line.
  // halfspace: plane through (line.a, line.b, c) with open side `line.side`;
  // boundary none/all, or `in_plane` applied to the points projected along
  // `drop_axis`.
  LineRule line;
  std::uint32_t c = 0;
  std::int8_t drop_axis = -1;
  LineRule in_plane;
  std::array<Fixed, 3> lo{}, hi{};
};

// Evaluates a witness on point j.
bool witness_contains(const Witness& w, const PointSet& pts, std::size_t j);

struct CanonicalRange {
  std::vector<std::uint32_t> members;  // sorted
  Witness witness;
};

struct EnumerationOptions {
  bool force_large_n = false;
};

class RangeCatalog {
 public:
  RangeCatalog() = default;

  // Builds a catalog from explicit member lists (dedupes, sorts, adds the
  // empty and full ranges). Witnesses are left empty. Used by tests and tools.
  static RangeCatalog from_member_lists(std::size_t ground_size, RangeFamily family,
                                        const std::vector<std::vector<std::uint32_t>>& lists);

  std::size_t ground_size() const { return ground_size_; }
  const RangeFamily& family() const { return family_; }
  std::size_t size() const { return sizes_.size(); }
  std::size_t words() const { return words_; }

  std::span<const std::uint64_t> all_bits() const { return bits_; }
  std::span<const std::uint64_t> bits(std::size_t r) const { return {bits_.data() + r * words_, words_}; }
  std::span<const std::uint32_t> sizes() const { return sizes_; }
  std::uint32_t range_size(std::size_t r) const { return sizes_[r]; }
  bool contains(std::size_t r, std::size_t j) const { return (bits_[r * words_ + j / 64] >> (j % 64)) & 1; }
  std::vector<std::uint32_t> members(std::size_t r) const;

  bool has_witnesses() const { return !witnesses_.empty() || family_.is_box(); }
  // Box witnesses are derived from the members and the points on request.
  Witness witness(std::size_t r, const PointSet& pts) const;
  CanonicalRange range(std::size_t r, const PointSet& pts) const;

  // Number of ranges with at most k members (the catalog is size-sorted).
  std::size_t count_at_most(std::size_t k) const;

 private:
  friend class CatalogBuilder;

  std::size_t ground_size_ = 0;
  RangeFamily family_;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
  std::vector<std::uint32_t> sizes_;
  std::vector<Witness> witnesses_;
};

// Number of 64-bit words for an n-bit member set.
inline std::size_t words_for(std::size_t n) { return (n + 63) / 64; }

// Every distinct member set realizable by `family` over `points`, sorted by
// size then lexicographically by members. Includes the empty and full range.
RangeCatalog canonical_ranges(const PointSet& points, const RangeFamily& family,
                              const EnumerationOptions& options = {});

// Catalog ranges with |members| <= k, in catalog order.
std::vector<CanonicalRange> shallow_ranges(const RangeCatalog& catalog, std::size_t k, const PointSet& points);

Rational raw_measure(std::size_t range_size, std::size_t ground_size);

// counts[j] = number of the given ranges containing j.
std::vector<std::uint64_t> incidence_counts(std::span<const CanonicalRange> ranges, std::size_t n);
// Same over a subset of catalog rows given by id.
std::vector<std::uint64_t> incidence_counts(const RangeCatalog& catalog, std::span<const std::uint32_t> range_ids);

struct ProfileRow {
  std::size_t k = 0;
  std::size_t count = 0;
  double bound = 0;  // n * phi(n) * k^c with unit constant
  bool exceeds = false;
};

std::vector<ProfileRow> well_behaved_profile(const PointSet& points, const RangeFamily& family,
                                             std::span<const std::size_t> ks, const EnumerationOptions& options = {});
// Same, reusing an existing catalog of `points`.
std::vector<ProfileRow> well_behaved_profile(const RangeCatalog& catalog, std::span<const std::size_t> ks);

}  // namespace relapprox
