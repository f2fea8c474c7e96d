#include "relapprox/point_set.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "relapprox/rational.hpp"

namespace relapprox {

Fixed parse_fixed(std::string_view text) {
  Rational r = Rational::parse(text);
  Rational scaled = r * Rational(kCoordScale);
  if (!scaled.is_integer())
    throw std::invalid_argument("coordinate '" + std::string(text) + "' has more than 6 fractional digits");
  i128 v = scaled.num();
  if (v > kMaxScaledCoord || v < -kMaxScaledCoord)
    throw std::invalid_argument("coordinate '" + std::string(text) + "' out of range");
  return static_cast<Fixed>(v);
}

std::string format_fixed(Fixed v) {
  bool neg = v < 0;
  std::uint64_t u = neg ? static_cast<std::uint64_t>(-v) : static_cast<std::uint64_t>(v);
  std::string whole = std::to_string(u / kCoordScale);
  std::uint64_t frac = u % kCoordScale;
  std::string out = neg ? "-" + whole : whole;
  if (frac != 0) {
    std::string f = std::to_string(frac);
    f.insert(0, kCoordDigits - f.size(), '0');
    while (!f.empty() && f.back() == '0') f.pop_back();
    out += "." + f;
  }
  return out;
}

PointSet::PointSet(int dim, std::vector<Point> points) : dim_(dim), points_(std::move(points)) {
  if (dim_ != 2 && dim_ != 3) throw std::invalid_argument("point dimension must be 2 or 3");
  for (const Point& p : points_) {
    for (int a = 0; a < 3; ++a) {
      Fixed c = p.coords[a];
      if (a >= dim_ && c != 0) throw std::invalid_argument("point has coordinates beyond its dimension");
      if (c > kMaxScaledCoord || c < -kMaxScaledCoord) throw std::invalid_argument("coordinate out of range");
    }
  }
  std::set<Point> seen;
  for (const Point& p : points_)
    if (!seen.insert(p).second) ++duplicates_;
}

std::vector<double> PointSet::column(int axis) const {
  std::vector<double> out(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) out[i] = static_cast<double>(points_[i].coords[axis]);
  return out;
}

PointSet PointSet::subset(std::span<const std::uint32_t> indices) const {
  std::vector<Point> pts;
  pts.reserve(indices.size());
  for (std::uint32_t i : indices) pts.push_back(points_.at(i));
  return PointSet(dim_, std::move(pts));
}

PointSet read_point_set(std::istream& in) {
  std::vector<Point> pts;
  int dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::vector<std::string> fields;
    for (std::string tok; tokens >> tok;) fields.push_back(tok);
    if (fields.empty()) continue;
    if (dim == 0) {
      dim = static_cast<int>(fields.size());
      if (dim != 2 && dim != 3)
        throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 2 or 3 coordinates");
    }
    if (static_cast<int>(fields.size()) != dim)
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                                  " coordinates");
    Point p;
    try {
      for (int a = 0; a < dim; ++a) p.coords[a] = parse_fixed(fields[a]);
    } catch (const std::exception& e) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
    }
    pts.push_back(p);
  }
  if (pts.empty()) throw std::invalid_argument("point set is empty");
  return PointSet(dim, std::move(pts));
}

PointSet read_point_set_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open point file " + path);
  return read_point_set(in);
}

void write_point_set(std::ostream& out, const PointSet& points) {
  for (const Point& p : points.points()) {
    for (int a = 0; a < points.dim(); ++a) {
      if (a) out << ' ';
      out << format_fixed(p.coords[a]);
    }
    out << '\n';
  }
}

}  // namespace relapprox
