#include "relapprox/generators.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "relapprox/error.hpp"
#include "relapprox/kernels.hpp"
#include "relapprox/rng.hpp"

namespace relapprox {

GeneratorKind parse_generator(std::string_view name) {
  for (GeneratorKind k : {GeneratorKind::uniform_square, GeneratorKind::uniform_cube, GeneratorKind::grid,
                          GeneratorKind::convex_circle, GeneratorKind::clustered})
    if (to_string(k) == name) return k;
  throw Error("generator", "unknown generator '" + std::string(name) + "'");
}

std::string_view to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::uniform_square:
      return "uniform_square";
    case GeneratorKind::uniform_cube:
      return "uniform_cube";
    case GeneratorKind::grid:
      return "grid";
    case GeneratorKind::convex_circle:
      return "convex_circle";
    case GeneratorKind::clustered:
      return "clustered";
  }
  return "?";
}

namespace {

PointSet uniform(std::size_t n, int dim, Rng& rng) {
  std::vector<Point> pts(n);
  for (auto& p : pts)
    for (int a = 0; a < dim; ++a) p.coords[a] = static_cast<Fixed>(rng.below(kCoordScale + 1));
  return PointSet(dim, std::move(pts));
}

PointSet lattice(std::size_t n, int dim) {
  std::size_t side = 1;
  while (static_cast<std::size_t>(std::pow(static_cast<double>(side), dim) + 0.5) < n) ++side;
  std::vector<Point> pts(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t r = j;
    for (int a = dim - 1; a >= 0; --a) {
      pts[j].coords[a] = static_cast<Fixed>(r % side) * kCoordScale;
      r /= side;
    }
  }
  return PointSet(dim, std::move(pts));
}

PointSet convex_circle(std::size_t n, Rng& rng) {
  const double start = static_cast<double>(rng.below(std::uint64_t{1} << 53)) / 9007199254740992.0 * 2 *
                       std::numbers::pi;
  constexpr double radius = 1000.0;
  std::vector<Point> pts(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = start + 2 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    pts[j].coords[0] = std::llround(radius * std::cos(t) * kCoordScale);
    pts[j].coords[1] = std::llround(radius * std::sin(t) * kCoordScale);
  }
  if (n >= 3)
    for (std::size_t j = 0; j < n; ++j)
      if (kernels::orient2d_exact(pts[j], pts[(j + 1) % n], pts[(j + 2) % n]) <= 0)
        throw Error("generator", "convex_circle lost strict convexity at n = " + std::to_string(n));
  return PointSet(2, std::move(pts));
}

PointSet clustered(std::size_t n, int dim, Rng& rng) {
  const auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  std::vector<Point> centres(k);
  for (auto& c : centres)
    for (int a = 0; a < dim; ++a) c.coords[a] = static_cast<Fixed>(rng.below(kCoordScale + 1));
  constexpr std::uint64_t spread = 20'000;  // 0.02 in 1e-6 units
  std::vector<Point> pts(n);
  for (std::size_t j = 0; j < n; ++j) {
    pts[j] = centres[j % k];
    for (int a = 0; a < dim; ++a) {
      Fixed off = 0;
      for (int t = 0; t < 4; ++t) off += static_cast<Fixed>(rng.below(2 * spread + 1)) - static_cast<Fixed>(spread);
      pts[j].coords[a] += off / 2;
    }
  }
  return PointSet(dim, std::move(pts));
}

}  // namespace

PointSet generate_points(GeneratorKind kind, std::size_t n, std::uint64_t seed, int dim) {
  if (n == 0) throw Error("generator", "n must be at least 1");
  if (dim != 2 && dim != 3) throw Error("generator", "dimension must be 2 or 3");
  Rng rng = Rng::for_stage(seed, "points");
  switch (kind) {
    case GeneratorKind::uniform_square:
      return uniform(n, 2, rng);
    case GeneratorKind::uniform_cube:
      return uniform(n, 3, rng);
    case GeneratorKind::grid:
      return lattice(n, dim);
    case GeneratorKind::convex_circle:
      if (dim != 2) throw Error("generator", "convex_circle is two-dimensional");
      return convex_circle(n, rng);
    case GeneratorKind::clustered:
      return clustered(n, dim, rng);
  }
  throw Error("generator", "unknown generator");
}

}  // namespace relapprox
