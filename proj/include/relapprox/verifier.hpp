#pragma once

// Exact certification of relative approximations and p-nets against a full
// range catalog, plus the uniform-sample baseline.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "relapprox/catalog.hpp"
#include "relapprox/rational.hpp"
#include "relapprox/rng.hpp"

namespace relapprox {

// Z(tau) = sum_k weight_k * |tau ∩ class_k| / denominator, with each class a
// bitset over the ground set of the catalog. Covers uniform subsets (one class
// of weight 1) and the two-weight samples produced by construct().
struct CountingMeasure {
  struct Class {
    std::vector<std::uint64_t> mask;
    i128 weight = 1;
  };
  std::vector<Class> classes;
  i128 denominator = 1;

  static CountingMeasure uniform(std::size_t ground_size, std::span<const std::uint32_t> subset);
  // Z = X.
  static CountingMeasure whole(std::size_t ground_size);
};

enum class Branch { multiplicative, additive };
std::string_view to_string(Branch b);

struct Violation {
  std::uint32_t range_id = 0;
  Branch branch = Branch::multiplicative;
  Rational ground;  // X(tau)
  Rational approx;  // Z(tau)
  Rational lower, upper;
  Rational slack;   // distance of approx outside [lower, upper]
};

struct ViolationReport {
  std::size_t checked_ranges = 0;
  std::size_t violation_count = 0;
  std::vector<Violation> violations;  // first `max_listed` in catalog order
  // max |Z - X| / X over ranges with X >= p, and max |Z - X| over the rest.
  Rational max_multiplicative_error;
  Rational max_additive_error;
  bool pass = true;

  nlohmann::json to_json() const;
};

inline constexpr std::size_t kDefaultMaxListed = 100;

// Two-branch check: X(tau) >= p requires |Z - X| <= eps X, otherwise
// |Z - X| <= eps p. All comparisons are exact.
ViolationReport check_relative(const RangeCatalog& catalog, const CountingMeasure& measure, const Rational& p,
                               const Rational& eps, std::size_t max_listed = kDefaultMaxListed);
// Same check with an arbitrary measure function of the range id.
ViolationReport check_relative(const RangeCatalog& catalog, const std::function<Rational(std::size_t)>& measure_of,
                               const Rational& p, const Rational& eps, std::size_t max_listed = kDefaultMaxListed);

struct PnetResult {
  bool pass = true;
  std::optional<std::uint32_t> witness;  // first heavy range missing the support
  std::size_t heavy_ranges = 0;
};

// support: bitset over the catalog's ground set.
PnetResult check_pnet(const RangeCatalog& catalog, std::span<const std::uint64_t> support, const Rational& p);

// Uniform sample without replacement of size min(n, ceil(D_base log2(1/p) / (eps^2 p))).
std::size_t baseline_size(std::size_t n, const Rational& p, const Rational& eps, const Rational& D_base);
std::vector<std::uint32_t> baseline_sample(std::size_t n, const Rational& p, const Rational& eps,
                                           const Rational& D_base, Rng& rng);

std::vector<std::uint64_t> to_mask(std::size_t ground_size, std::span<const std::uint32_t> members);

}  // namespace relapprox
