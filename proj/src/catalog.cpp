#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "catalog_builder.hpp"
#include "relapprox/error.hpp"
#include "relapprox/kernels.hpp"

namespace relapprox {

// ---------------------------------------------------------------- families

RangeFamily RangeFamily::of(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::halfplanes2d:
      return {kind, 1, GrowthFn::const1};
    case FamilyKind::halfspaces3d:
      return {kind, 2, GrowthFn::const1};
    case FamilyKind::rects2d:
      return {kind, 2, GrowthFn::log};
    case FamilyKind::boxes3d:
      return {kind, 2, GrowthFn::log3};
  }
  throw std::invalid_argument("unknown family");
}

RangeFamily RangeFamily::parse(std::string_view name) {
  for (FamilyKind k : {FamilyKind::halfplanes2d, FamilyKind::halfspaces3d, FamilyKind::rects2d, FamilyKind::boxes3d})
    if (to_string(k) == name) return of(k);
  throw std::invalid_argument("unknown range family '" + std::string(name) + "'");
}

std::string RangeFamily::name() const { return std::string(to_string(kind)); }

std::size_t RangeFamily::enumeration_cap() const {
  switch (kind) {
    case FamilyKind::halfplanes2d:
      return 400;
    case FamilyKind::halfspaces3d:
      return 200;
    case FamilyKind::rects2d:
      return 150;
    case FamilyKind::boxes3d:
      return 90;
  }
  return 0;
}

std::string_view to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::halfplanes2d:
      return "halfplanes2d";
    case FamilyKind::halfspaces3d:
      return "halfspaces3d";
    case FamilyKind::rects2d:
      return "rects2d";
    case FamilyKind::boxes3d:
      return "boxes3d";
  }
  return "?";
}

std::string_view to_string(GrowthFn fn) {
  switch (fn) {
    case GrowthFn::const1:
      return "const1";
    case GrowthFn::log:
      return "log";
    case GrowthFn::log3:
      return "log3";
  }
  return "?";
}

double phi_value(GrowthFn fn, std::size_t n) {
  double l = n > 1 ? std::log2(static_cast<double>(n)) : 0.0;
  switch (fn) {
    case GrowthFn::const1:
      return 1.0;
    case GrowthFn::log:
      return std::max(1.0, l);
    case GrowthFn::log3:
      return std::max(1.0, l * l * l);
  }
  return 1.0;
}

// ---------------------------------------------------------------- witnesses

namespace {

i128 orient2d_frame(const Point& a, const Point& b, const Point& p, int ax0, int ax1) {
  i128 bx = b.coords[ax0] - a.coords[ax0], by = b.coords[ax1] - a.coords[ax1];
  i128 px = p.coords[ax0] - a.coords[ax0], py = p.coords[ax1] - a.coords[ax1];
  return bx * py - by * px;
}

i128 projection(const Point& a, const Point& b, const Point& p, int dims, const int* axes) {
  i128 t = 0;
  for (int k = 0; k < dims; ++k) {
    int ax = axes[k];
    t += static_cast<i128>(b.coords[ax] - a.coords[ax]) * (p.coords[ax] - a.coords[ax]);
  }
  return t;
}

bool boundary_keeps(const LineRule& rule, const PointSet& pts, std::size_t j, int dims, const int* axes) {
  switch (rule.boundary) {
    case Boundary::none:
      return false;
    case Boundary::all:
      return true;
    case Boundary::prefix: {
      const Point& a = pts[rule.a];
      const Point& b = pts[rule.b];
      i128 tj = projection(a, b, pts[j], dims, axes);
      i128 tq = projection(a, b, pts[rule.q], dims, axes);
      return rule.dir > 0 ? tj <= tq : tj >= tq;
    }
    case Boundary::halfplane:
      break;
  }
  return false;
}

bool line_rule_contains(const LineRule& rule, const PointSet& pts, std::size_t j, int ax0, int ax1) {
  i128 o = orient2d_frame(pts[rule.a], pts[rule.b], pts[j], ax0, ax1);
  if (o != 0) return (o > 0 ? 1 : -1) == rule.side;
  const int axes[2] = {ax0, ax1};
  return boundary_keeps(rule, pts, j, 2, axes);
}

}  // namespace

bool witness_contains(const Witness& w, const PointSet& pts, std::size_t j) {
  switch (w.kind) {
    case Witness::Kind::empty:
      return false;
    case Witness::Kind::full:
      return true;
    case Witness::Kind::halfplane:
      return line_rule_contains(w.line, pts, j, 0, 1);
    case Witness::Kind::line_prefix: {
      const int axes[3] = {0, 1, 2};
      return boundary_keeps(w.line, pts, j, pts.dim(), axes);
    }
    case Witness::Kind::halfspace: {
      i128 o = kernels::orient3d_exact(pts[w.line.a], pts[w.line.b], pts[w.c], pts[j]);
      if (o != 0) return (o > 0 ? 1 : -1) == w.line.side;
      switch (w.line.boundary) {
        case Boundary::none:
          return false;
        case Boundary::all:
          return true;
        default: {
          int ax0 = w.drop_axis == 0 ? 1 : 0;
          int ax1 = w.drop_axis == 2 ? 1 : 2;
          return line_rule_contains(w.in_plane, pts, j, ax0, ax1);
        }
      }
    }
    case Witness::Kind::box: {
      const Point& p = pts[j];
      for (int a = 0; a < pts.dim(); ++a)
        if (p.coords[a] < w.lo[a] || p.coords[a] > w.hi[a]) return false;
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------- builder

CatalogBuilder::CatalogBuilder(std::size_t ground_size, RangeFamily family, bool dedupe, bool keep_witnesses)
    : ground_size_(ground_size),
      family_(family),
      words_(words_for(ground_size)),
      dedupe_(dedupe),
      keep_witnesses_(keep_witnesses),
      scratch_(words_, 0),
      index_(1024, RowHash{this}, RowEq{this}) {}

std::size_t CatalogBuilder::RowHash::operator()(std::uint32_t r) const {
  const std::uint64_t* p = owner->row(r);
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::size_t w = 0; w < owner->words_; ++w) {
    h ^= p[w] + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
  }
  return static_cast<std::size_t>(h ^ (h >> 33));
}

bool CatalogBuilder::RowEq::operator()(std::uint32_t a, std::uint32_t b) const {
  return std::equal(owner->row(a), owner->row(a) + owner->words_, owner->row(b));
}

void CatalogBuilder::clear_scratch() { std::fill(scratch_.begin(), scratch_.end(), 0); }

bool CatalogBuilder::commit(const Witness& witness) { return add(scratch_.data(), witness); }

bool CatalogBuilder::add(const std::uint64_t* row_bits, const Witness& witness) {
  ++candidates_;
  bits_.insert(bits_.end(), row_bits, row_bits + words_);
  auto id = static_cast<std::uint32_t>(rows_);
  if (dedupe_ && !index_.insert(id).second) {
    bits_.resize(bits_.size() - words_);
    return false;
  }
  ++rows_;
  if (keep_witnesses_) witnesses_.push_back(witness);
  return true;
}

RangeCatalog CatalogBuilder::finish() {
  index_.clear();
  std::vector<std::uint32_t> sizes(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    std::uint32_t c = 0;
    for (std::size_t w = 0; w < words_; ++w) c += static_cast<std::uint32_t>(std::popcount(bits_[r * words_ + w]));
    sizes[r] = c;
  }
  // Bucket by size, then order each bucket lexicographically by member list:
  // for equal sizes, the set holding the lowest differing index comes first.
  std::vector<std::size_t> start(ground_size_ + 2, 0);
  for (std::uint32_t s : sizes) ++start[s + 1];
  std::partial_sum(start.begin(), start.end(), start.begin());
  std::vector<std::uint32_t> order(rows_);
  {
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (std::size_t r = 0; r < rows_; ++r) order[fill[sizes[r]]++] = static_cast<std::uint32_t>(r);
  }
  auto lex_less = [&](std::uint32_t a, std::uint32_t b) {
    const std::uint64_t* pa = row(a);
    const std::uint64_t* pb = row(b);
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t x = pa[w] ^ pb[w];
      if (x != 0) return ((pa[w] >> std::countr_zero(x)) & 1) != 0;
    }
    return false;
  };
  for (std::size_t s = 0; s <= ground_size_; ++s)
    std::sort(order.begin() + static_cast<std::ptrdiff_t>(start[s]),
              order.begin() + static_cast<std::ptrdiff_t>(start[s + 1]), lex_less);

  RangeCatalog cat;
  cat.ground_size_ = ground_size_;
  cat.family_ = family_;
  cat.words_ = words_;
  cat.bits_.resize(rows_ * words_);
  cat.sizes_.resize(rows_);
  if (keep_witnesses_) cat.witnesses_.resize(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    std::uint32_t r = order[i];
    std::copy_n(row(r), words_, cat.bits_.data() + i * words_);
    cat.sizes_[i] = sizes[r];
    if (keep_witnesses_) cat.witnesses_[i] = witnesses_[r];
  }
  bits_.clear();
  bits_.shrink_to_fit();
  witnesses_.clear();
  rows_ = 0;
  return cat;
}

// ---------------------------------------------------------------- catalog

RangeCatalog RangeCatalog::from_member_lists(std::size_t ground_size, RangeFamily family,
                                             const std::vector<std::vector<std::uint32_t>>& lists) {
  if (ground_size == 0) throw Error("enumeration", "ground set is empty");
  CatalogBuilder b(ground_size, family, true, false);
  Witness none;
  b.commit(none);
  for (std::size_t j = 0; j < ground_size; ++j) b.scratch()[j / 64] |= std::uint64_t{1} << (j % 64);
  b.commit(none);
  for (const auto& list : lists) {
    b.clear_scratch();
    for (std::uint32_t j : list) {
      if (j >= ground_size) throw Error("enumeration", "member index out of range");
      b.scratch()[j / 64] |= std::uint64_t{1} << (j % 64);
    }
    b.commit(none);
  }
  return b.finish();
}

std::vector<std::uint32_t> RangeCatalog::members(std::size_t r) const {
  std::vector<std::uint32_t> out;
  out.reserve(sizes_[r]);
  const std::uint64_t* p = bits_.data() + r * words_;
  for (std::size_t w = 0; w < words_; ++w) {
    for (std::uint64_t x = p[w]; x != 0; x &= x - 1)
      out.push_back(static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(std::countr_zero(x))));
  }
  return out;
}

Witness RangeCatalog::witness(std::size_t r, const PointSet& pts) const {
  if (!witnesses_.empty()) return witnesses_[r];
  Witness w;
  if (!family_.is_box()) return w;
  if (sizes_[r] == 0) return w;
  w.kind = Witness::Kind::box;
  bool first = true;
  for (std::uint32_t j : members(r)) {
    for (int a = 0; a < pts.dim(); ++a) {
      Fixed c = pts[j].coords[a];
      if (first || c < w.lo[a]) w.lo[a] = c;
      if (first || c > w.hi[a]) w.hi[a] = c;
    }
    first = false;
  }
  return w;
}

CanonicalRange RangeCatalog::range(std::size_t r, const PointSet& pts) const {
  return CanonicalRange{members(r), witness(r, pts)};
}

std::size_t RangeCatalog::count_at_most(std::size_t k) const {
  return static_cast<std::size_t>(
      std::upper_bound(sizes_.begin(), sizes_.end(), static_cast<std::uint32_t>(std::min<std::size_t>(k, ground_size_))) -
      sizes_.begin());
}

RangeCatalog canonical_ranges(const PointSet& points, const RangeFamily& family, const EnumerationOptions& options) {
  if (points.empty()) throw Error("enumeration", "point set is empty");
  if (points.dim() != family.dim())
    throw Error("enumeration", family.name() + " needs " + std::to_string(family.dim()) + "D points, got " +
                                   std::to_string(points.dim()) + "D");
  if (points.size() > family.enumeration_cap() && !options.force_large_n)
    throw Error("enumeration", "n = " + std::to_string(points.size()) + " exceeds the " + family.name() +
                                   " enumeration cap of " + std::to_string(family.enumeration_cap()) +
                                   " (use the force flag to override)");

  const std::size_t n = points.size();
  CatalogBuilder builder(n, family, /*dedupe=*/!family.is_box(), /*keep_witnesses=*/!family.is_box());
  Witness empty;
  builder.commit(empty);
  for (std::size_t j = 0; j < n; ++j) builder.scratch()[j / 64] |= std::uint64_t{1} << (j % 64);
  Witness full;
  full.kind = Witness::Kind::full;
  builder.commit(full);

  switch (family.kind) {
    case FamilyKind::halfplanes2d:
      enumerate_halfplanes(points, builder);
      break;
    case FamilyKind::halfspaces3d:
      enumerate_halfspaces(points, builder);
      break;
    case FamilyKind::rects2d:
    case FamilyKind::boxes3d:
      enumerate_boxes(points, builder);
      break;
  }
  return builder.finish();
}

std::vector<CanonicalRange> shallow_ranges(const RangeCatalog& catalog, std::size_t k, const PointSet& points) {
  if (k > catalog.ground_size())
    throw Error("enumeration", "shallow range size k = " + std::to_string(k) + " exceeds n = " +
                                   std::to_string(catalog.ground_size()));
  std::vector<CanonicalRange> out;
  std::size_t count = catalog.count_at_most(k);
  out.reserve(count);
  for (std::size_t r = 0; r < count; ++r) out.push_back(catalog.range(r, points));
  return out;
}

Rational raw_measure(std::size_t range_size, std::size_t ground_size) {
  if (ground_size == 0) throw Error("measure", "ground set is empty");
  if (range_size > ground_size) throw Error("measure", "range larger than the ground set");
  return Rational(static_cast<i128>(range_size), static_cast<i128>(ground_size));
}

std::vector<std::uint64_t> incidence_counts(std::span<const CanonicalRange> ranges, std::size_t n) {
  std::vector<std::uint64_t> counts(n, 0);
  for (const CanonicalRange& r : ranges)
    for (std::uint32_t j : r.members) {
      if (j >= n) throw Error("incidence", "member index " + std::to_string(j) + " out of bounds");
      ++counts[j];
    }
  return counts;
}

std::vector<std::uint64_t> incidence_counts(const RangeCatalog& catalog, std::span<const std::uint32_t> range_ids) {
  std::vector<std::uint64_t> counts(catalog.ground_size(), 0);
  for (std::uint32_t r : range_ids) {
    if (r >= catalog.size()) throw Error("incidence", "range id out of bounds");
    auto row = catalog.bits(r);
    for (std::size_t w = 0; w < row.size(); ++w)
      for (std::uint64_t x = row[w]; x != 0; x &= x - 1) ++counts[w * 64 + static_cast<std::size_t>(std::countr_zero(x))];
  }
  return counts;
}

std::vector<ProfileRow> well_behaved_profile(const RangeCatalog& catalog, std::span<const std::size_t> ks) {
  if (!std::is_sorted(ks.begin(), ks.end())) throw Error("profile", "ks must be sorted ascending");
  const std::size_t n = catalog.ground_size();
  const RangeFamily& fam = catalog.family();
  std::vector<ProfileRow> rows;
  for (std::size_t k : ks) {
    if (k > n) throw Error("profile", "k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
    ProfileRow row;
    row.k = k;
    row.count = catalog.count_at_most(k);
    row.bound = static_cast<double>(n) * phi_value(fam.phi, n) * std::pow(static_cast<double>(k), fam.c);
    row.exceeds = static_cast<double>(row.count) > row.bound;
    rows.push_back(row);
  }
  return rows;
}

std::vector<ProfileRow> well_behaved_profile(const PointSet& points, const RangeFamily& family,
                                             std::span<const std::size_t> ks, const EnumerationOptions& options) {
  if (!std::is_sorted(ks.begin(), ks.end())) throw Error("profile", "ks must be sorted ascending");
  for (std::size_t k : ks)
    if (k > points.size()) throw Error("profile", "k exceeds n");
  return well_behaved_profile(canonical_ranges(points, family, options), ks);
}

}  // namespace relapprox
