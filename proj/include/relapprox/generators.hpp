#pragma once

#include <cstdint>
#include <string_view>

#include "relapprox/point_set.hpp"

namespace relapprox {

enum class GeneratorKind { uniform_square, uniform_cube, grid, convex_circle, clustered };

GeneratorKind parse_generator(std::string_view name);
std::string_view to_string(GeneratorKind kind);

// Deterministic in (kind, n, seed, dim). uniform_square is 2D and
// uniform_cube 3D regardless of dim; convex_circle is 2D only.
//   uniform_*:     coordinates uniform on the 1e-6 grid of [0,1]
//   grid:          first n points of the integer lattice of side ceil(n^(1/dim)), row-major
//   convex_circle: n equally spaced angles on a radius-1000 circle from a random
//                  start angle, rounded to 1e-6; strict convex position is checked exactly
//   clustered:     ceil(sqrt(n)) centres in [0,1]^dim, points assigned round-robin with
//                  offsets summed from four uniforms (roughly Gaussian, spread 0.02)
PointSet generate_points(GeneratorKind kind, std::size_t n, std::uint64_t seed, int dim = 2);

}  // namespace relapprox
