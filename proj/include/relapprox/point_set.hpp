#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace relapprox {

// Coordinates are exact decimals with at most six fractional digits, stored as
// integers in units of 1e-6. All geometric predicates run on these integers.
inline constexpr std::int64_t kCoordScale = 1'000'000;
inline constexpr int kCoordDigits = 6;
// |scaled coordinate| bound; keeps 3D orientation determinants inside 128 bits.
inline constexpr std::int64_t kMaxScaledCoord = std::int64_t{1} << 40;

using Fixed = std::int64_t;

// Parses a decimal literal ("-0.25", "3", "1.5e2") into 1e-6 units. Throws on
// more than six fractional digits or out-of-range magnitude.
Fixed parse_fixed(std::string_view text);
std::string format_fixed(Fixed v);

struct Point {
  std::array<Fixed, 3> coords{};  // unused trailing coordinates are zero

  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point&, const Point&) = default;
};

class PointSet {
 public:
  PointSet() = default;
  PointSet(int dim, std::vector<Point> points);

  int dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }
  std::span<const Point> points() const { return points_; }

  // Number of points that coincide with an earlier point. Duplicates are
  // allowed; they only show up here.
  std::size_t duplicate_count() const { return duplicates_; }

  // Column of scaled coordinates as doubles (exact, |v| < 2^53).
  std::vector<double> column(int axis) const;

  PointSet subset(std::span<const std::uint32_t> indices) const;

 private:
  int dim_ = 0;
  std::vector<Point> points_;
  std::size_t duplicates_ = 0;
};

// One point per line, whitespace separated coordinates, '#' starts a comment.
// Dimension comes from the first data line.
PointSet read_point_set(std::istream& in);
PointSet read_point_set_file(const std::string& path);
void write_point_set(std::ostream& out, const PointSet& points);

}  // namespace relapprox
