// Halfplane and halfspace enumeration.
//
// Every closed halfplane range other than the empty and full set equals, for
// some line through two distinct points, the open side of that line plus a
// prefix or suffix (in line order) of the points on it. Lines are visited once
// each through their canonical pair (a = lowest index on the line, b = lowest
// index on it at a different position). Halfspaces reduce to the same thing
// inside each canonical plane through three non-collinear points.

#include <algorithm>
#include <array>
#include <numeric>

#include "catalog_builder.hpp"
#include "relapprox/kernels.hpp"

namespace relapprox {
namespace {

inline void set_bit(std::vector<std::uint64_t>& row, std::size_t j) { row[j / 64] |= std::uint64_t{1} << (j % 64); }

// first_copy[j]: true iff no lower index sits at the same position.
std::vector<bool> first_copies(const PointSet& pts) {
  std::vector<std::uint32_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t i, std::uint32_t j) { return pts[i] < pts[j]; });
  std::vector<bool> first(pts.size(), true);
  for (std::size_t k = 1; k < order.size(); ++k)
    if (pts[order[k]] == pts[order[k - 1]]) first[order[k]] = false;
  return first;
}

i128 line_param(const Point& a, const Point& b, const Point& p, std::span<const int> axes) {
  i128 t = 0;
  for (int ax : axes) t += static_cast<i128>(b.coords[ax] - a.coords[ax]) * (p.coords[ax] - a.coords[ax]);
  return t;
}

// Points in `on_line` (global indices) grouped by their position along a->b,
// groups in increasing order.
std::vector<std::vector<std::uint32_t>> line_groups(const PointSet& pts, std::uint32_t a, std::uint32_t b,
                                                    std::vector<std::uint32_t> on_line, std::span<const int> axes) {
  std::vector<std::pair<i128, std::uint32_t>> keyed;
  keyed.reserve(on_line.size());
  for (std::uint32_t j : on_line) keyed.emplace_back(line_param(pts[a], pts[b], pts[j], axes), j);
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::vector<std::uint32_t>> groups;
  for (std::size_t k = 0; k < keyed.size(); ++k) {
    if (k == 0 || keyed[k].first != keyed[k - 1].first) groups.emplace_back();
    groups.back().push_back(keyed[k].second);
  }
  return groups;
}

// Emits base | open | (prefix or suffix of groups) for every prefix and
// suffix, with the matching boundary rule.
template <class Emit>
void emit_line_prefixes(const std::vector<std::uint64_t>& base, const std::vector<std::vector<std::uint32_t>>& groups,
                        LineRule rule, Emit&& emit) {
  const std::size_t g_count = groups.size();
  std::vector<std::uint64_t> row = base;
  rule.boundary = Boundary::none;
  rule.dir = 0;
  rule.q = 0;
  emit(row, rule);
  for (std::size_t g = 0; g < g_count; ++g) {
    for (std::uint32_t j : groups[g]) set_bit(row, j);
    if (g + 1 == g_count) {
      rule.boundary = Boundary::all;
      rule.dir = 0;
      rule.q = 0;
    } else {
      rule.boundary = Boundary::prefix;
      rule.dir = 1;
      rule.q = groups[g].front();
    }
    emit(row, rule);
  }
  row = base;
  for (std::size_t g = g_count; g-- > 1;) {
    for (std::uint32_t j : groups[g]) set_bit(row, j);
    rule.boundary = Boundary::prefix;
    rule.dir = -1;
    rule.q = groups[g].front();
    emit(row, rule);
  }
}

// Halfplane ranges of the points `idx` (ascending global indices) in a 2D
// frame. `signs(a, b, out)` fills out[k] = sign of orient(a, b, idx[k]).
// Every emitted row is `base` plus the selected points of idx.
template <class Signs, class Emit>
void enumerate_planar(const PointSet& pts, const std::vector<std::uint32_t>& idx, const std::vector<bool>& first_copy,
                      std::span<const int> axes, const std::vector<std::uint64_t>& base, Signs&& signs, Emit&& emit) {
  const std::size_t m = idx.size();
  std::vector<std::int8_t> s(m);
  std::vector<std::uint32_t> on_line;
  std::vector<std::uint64_t> side_row;
  for (std::size_t ia = 0; ia < m; ++ia) {
    const std::uint32_t a = idx[ia];
    if (!first_copy[a]) continue;
    for (std::size_t ib = ia + 1; ib < m; ++ib) {
      const std::uint32_t b = idx[ib];
      if (!first_copy[b] || pts[a] == pts[b]) continue;
      signs(a, b, std::span<std::int8_t>(s));
      on_line.clear();
      bool canonical = true;
      for (std::size_t k = 0; k < m && canonical; ++k) {
        if (s[k] != 0) continue;
        if (k < ia || (k < ib && !(pts[idx[k]] == pts[a]))) canonical = false;
        on_line.push_back(idx[k]);
      }
      if (!canonical) continue;
      auto groups = line_groups(pts, a, b, on_line, axes);
      for (std::int8_t side : {std::int8_t{1}, std::int8_t{-1}}) {
        side_row = base;
        for (std::size_t k = 0; k < m; ++k)
          if (s[k] == side) set_bit(side_row, idx[k]);
        LineRule rule;
        rule.a = a;
        rule.b = b;
        rule.side = side;
        emit_line_prefixes(side_row, groups, rule, emit);
      }
    }
  }
}

// All points collinear (dim 2 or 3) but not all coincident: intervals that
// touch an end of the line.
void enumerate_collinear(const PointSet& pts, CatalogBuilder& out) {
  const std::uint32_t a = 0;
  std::uint32_t b = 0;
  while (b < pts.size() && pts[b] == pts[a]) ++b;
  if (b == pts.size()) return;
  std::vector<std::uint32_t> all(pts.size());
  std::iota(all.begin(), all.end(), 0u);
  const int axes[3] = {0, 1, 2};
  auto groups = line_groups(pts, a, b, all, std::span<const int>(axes, static_cast<std::size_t>(pts.dim())));
  LineRule rule;
  rule.a = a;
  rule.b = b;
  std::vector<std::uint64_t> base(out.words(), 0);
  emit_line_prefixes(base, groups, rule, [&](const std::vector<std::uint64_t>& row, const LineRule& r) {
    Witness w;
    w.kind = r.boundary == Boundary::none ? Witness::Kind::empty
             : r.boundary == Boundary::all ? Witness::Kind::full
                                           : Witness::Kind::line_prefix;
    w.line = r;
    out.add(row.data(), w);
  });
}

std::array<i128, 3> plane_normal(const Point& a, const Point& b, const Point& c) {
  i128 u[3], v[3];
  for (int k = 0; k < 3; ++k) {
    u[k] = b.coords[k] - a.coords[k];
    v[k] = c.coords[k] - a.coords[k];
  }
  return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
}

i128 abs128(i128 v) { return v < 0 ? -v : v; }

}  // namespace

void enumerate_halfplanes(const PointSet& pts, CatalogBuilder& out) {
  const kernels::CoordColumns cols(pts);
  std::vector<std::uint32_t> idx(pts.size());
  std::iota(idx.begin(), idx.end(), 0u);
  const auto first_copy = first_copies(pts);
  const int axes[2] = {0, 1};
  std::vector<std::uint64_t> base(out.words(), 0);
  enumerate_planar(
      pts, idx, first_copy, axes, base,
      [&](std::uint32_t a, std::uint32_t b, std::span<std::int8_t> s) { kernels::orient2d_signs(cols, a, b, s); },
      [&](const std::vector<std::uint64_t>& row, const LineRule& rule) {
        Witness w;
        w.kind = Witness::Kind::halfplane;
        w.line = rule;
        out.add(row.data(), w);
      });
}

void enumerate_halfspaces(const PointSet& pts, CatalogBuilder& out) {
  const std::size_t n = pts.size();
  const kernels::CoordColumns cols(pts);
  const auto first_copy = first_copies(pts);
  std::vector<std::int8_t> s(n);
  std::vector<std::uint32_t> on_plane;
  std::vector<std::uint64_t> base;
  bool found_plane = false;

  for (std::uint32_t a = 0; a < n; ++a) {
    if (!first_copy[a]) continue;
    for (std::uint32_t b = a + 1; b < n; ++b) {
      if (!first_copy[b] || pts[a] == pts[b]) continue;
      for (std::uint32_t c = b + 1; c < n; ++c) {
        if (!first_copy[c]) continue;
        const auto normal = plane_normal(pts[a], pts[b], pts[c]);
        if (normal[0] == 0 && normal[1] == 0 && normal[2] == 0) continue;
        found_plane = true;
        kernels::orient3d_signs(cols, a, b, c, s);
        // Canonical: a lowest on the plane, b lowest at another position,
        // c lowest off the line ab.
        on_plane.clear();
        bool canonical = true;
        for (std::uint32_t j = 0; j < n && canonical; ++j) {
          if (s[j] != 0) continue;
          if (j < a) canonical = false;
          else if (j < b && !(pts[j] == pts[a])) canonical = false;
          else if (j < c) {
            const auto nj = plane_normal(pts[a], pts[b], pts[j]);
            if (nj[0] != 0 || nj[1] != 0 || nj[2] != 0) canonical = false;
          }
          on_plane.push_back(j);
        }
        if (!canonical) continue;

        int drop = 0;
        for (int k = 1; k < 3; ++k)
          if (abs128(normal[k]) > abs128(normal[drop])) drop = k;
        const int ax0 = drop == 0 ? 1 : 0;
        const int ax1 = drop == 2 ? 1 : 2;
        const int axes[2] = {ax0, ax1};

        for (std::int8_t side : {std::int8_t{1}, std::int8_t{-1}}) {
          base.assign(out.words(), 0);
          for (std::uint32_t j = 0; j < n; ++j)
            if (s[j] == side) set_bit(base, j);
          Witness w;
          w.kind = Witness::Kind::halfspace;
          w.line.a = a;
          w.line.b = b;
          w.line.side = side;
          w.c = c;
          w.drop_axis = static_cast<std::int8_t>(drop);
          w.line.boundary = Boundary::none;
          out.add(base.data(), w);
          {
            std::vector<std::uint64_t> all = base;
            for (std::uint32_t j : on_plane) set_bit(all, j);
            w.line.boundary = Boundary::all;
            out.add(all.data(), w);
          }
          w.line.boundary = Boundary::halfplane;
          enumerate_planar(
              pts, on_plane, first_copy, axes, base,
              [&](std::uint32_t pa, std::uint32_t pb, std::span<std::int8_t> out_signs) {
                for (std::size_t k = 0; k < on_plane.size(); ++k) {
                  const Point& p = pts[on_plane[k]];
                  i128 bx = pts[pb].coords[ax0] - pts[pa].coords[ax0];
                  i128 by = pts[pb].coords[ax1] - pts[pa].coords[ax1];
                  i128 px = p.coords[ax0] - pts[pa].coords[ax0];
                  i128 py = p.coords[ax1] - pts[pa].coords[ax1];
                  i128 o = bx * py - by * px;
                  out_signs[k] = static_cast<std::int8_t>((o > 0) - (o < 0));
                }
              },
              [&](const std::vector<std::uint64_t>& row, const LineRule& rule) {
                w.in_plane = rule;
                out.add(row.data(), w);
              });
        }
      }
    }
  }
  if (!found_plane) enumerate_collinear(pts, out);
}

}  // namespace relapprox
