#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace relapprox {

enum class FamilyKind { halfplanes2d, halfspaces3d, rects2d, boxes3d };
enum class GrowthFn { const1, log, log3 };

// A geometric range family together with its well-behavedness constants:
// at most O(n * phi(n) * k^c) ranges of size <= k.
struct RangeFamily {
  FamilyKind kind = FamilyKind::halfplanes2d;
  int c = 1;
  GrowthFn phi = GrowthFn::const1;

  static RangeFamily of(FamilyKind kind);
  static RangeFamily parse(std::string_view name);

  int dim() const { return kind == FamilyKind::halfplanes2d || kind == FamilyKind::rects2d ? 2 : 3; }
  bool is_box() const { return kind == FamilyKind::rects2d || kind == FamilyKind::boxes3d; }
  std::string name() const;

  // Largest n enumerated without an explicit force flag.
  std::size_t enumeration_cap() const;

  friend bool operator==(const RangeFamily&, const RangeFamily&) = default;
};

std::string_view to_string(FamilyKind kind);
std::string_view to_string(GrowthFn fn);

// phi(n), floored at 1 so that log phi(n) >= 0.
double phi_value(GrowthFn fn, std::size_t n);

}  // namespace relapprox
