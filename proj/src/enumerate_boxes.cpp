// Axis-parallel rectangle and box enumeration.
//
// A nonempty set S is a box range iff S = bbox(S) ∩ X, and its tight bounding
// box is unique. So walking all boxes whose every face touches a member,
// with faces at point coordinates, yields each range exactly once and needs
// no deduplication. The full set is already in the builder and is skipped.

#include <algorithm>
#include <numeric>

#include "catalog_builder.hpp"

namespace relapprox {
namespace {

struct Sweep {
  std::vector<std::uint64_t> row;
  std::size_t count = 0;
  void reset() {
    std::fill(row.begin(), row.end(), 0);
    count = 0;
  }
  void add(std::uint32_t j) {
    row[j / 64] |= std::uint64_t{1} << (j % 64);
    ++count;
  }
};

std::vector<std::uint32_t> sorted_by_axis(const PointSet& pts, int axis) {
  std::vector<std::uint32_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t i, std::uint32_t j) { return pts[i].coords[axis] < pts[j].coords[axis]; });
  return order;
}

}  // namespace

void enumerate_boxes(const PointSet& pts, CatalogBuilder& out) {
  const std::size_t n = pts.size();
  const int dim = pts.dim();
  std::vector<Fixed> xs;
  for (std::size_t j = 0; j < n; ++j) xs.push_back(pts[j].coords[0]);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  const auto by_y = sorted_by_axis(pts, 1);
  const Witness none;

  Sweep sweep{std::vector<std::uint64_t>(out.words(), 0)};
  std::vector<std::uint32_t> slab;
  std::vector<std::uint32_t> column;

  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t k = i; k < xs.size(); ++k) {
      const Fixed xl = xs[i], xh = xs[k];
      slab.clear();
      for (std::uint32_t j : by_y)
        if (pts[j].coords[0] >= xl && pts[j].coords[0] <= xh) slab.push_back(j);
      auto y_of = [&](std::size_t t) { return pts[slab[t]].coords[1]; };

      for (std::size_t s = 0; s < slab.size(); ++s) {
        if (s > 0 && y_of(s) == y_of(s - 1)) continue;  // yl must start a y-group
        if (dim == 2) {
          sweep.reset();
          std::size_t has_lo = 0, has_hi = 0;
          for (std::size_t e = s; e < slab.size(); ++e) {
            const std::uint32_t j = slab[e];
            sweep.add(j);
            has_lo += pts[j].coords[0] == xl;
            has_hi += pts[j].coords[0] == xh;
            const bool group_end = e + 1 == slab.size() || y_of(e + 1) != y_of(e);
            if (group_end && has_lo && has_hi && sweep.count < n) out.add(sweep.row.data(), none);
          }
          continue;
        }
        // 3D: grow the y-range one group at a time, keeping the column sorted
        // by z, then sweep z-ranges over the column.
        column.clear();
        const Fixed yl = y_of(s);
        for (std::size_t e = s; e < slab.size(); ++e) {
          const std::uint32_t je = slab[e];
          auto pos = std::upper_bound(column.begin(), column.end(), je, [&](std::uint32_t a, std::uint32_t b) {
            return pts[a].coords[2] < pts[b].coords[2];
          });
          column.insert(pos, je);
          const bool group_end = e + 1 == slab.size() || y_of(e + 1) != y_of(e);
          if (!group_end) continue;
          const Fixed yh = y_of(e);
          auto z_of = [&](std::size_t t) { return pts[column[t]].coords[2]; };
          for (std::size_t zs = 0; zs < column.size(); ++zs) {
            if (zs > 0 && z_of(zs) == z_of(zs - 1)) continue;
            sweep.reset();
            std::size_t xlo = 0, xhi = 0, ylo = 0, yhi = 0;
            for (std::size_t ze = zs; ze < column.size(); ++ze) {
              const Point& p = pts[column[ze]];
              sweep.add(column[ze]);
              xlo += p.coords[0] == xl;
              xhi += p.coords[0] == xh;
              ylo += p.coords[1] == yl;
              yhi += p.coords[1] == yh;
              const bool z_end = ze + 1 == column.size() || z_of(ze + 1) != z_of(ze);
              if (z_end && xlo && xhi && ylo && yhi && sweep.count < n) out.add(sweep.row.data(), none);
            }
          }
        }
      }
    }
  }
}

}  // namespace relapprox
