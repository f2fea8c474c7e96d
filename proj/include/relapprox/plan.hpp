#pragma once

// Parameter resolution: picks the construction mode and derives every
// numeric quantity (internal p and eps, |F|, layer scales, heavy thresholds,
// sampling probability) from (n, p, eps, constants, family).

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "relapprox/range_family.hpp"
#include "relapprox/rational.hpp"

namespace relapprox {

struct Constants {
  Rational A{1};
  Rational C{1};
  Rational D{4};
  Rational D_base{4};
  Rational gamma{1};
  Rational eps_scale{6};
};

struct Caps {
  std::uint64_t initial_retries = 64;
  std::uint64_t mt_max_resamples = 1'000'000;
};

struct ApproxParams {
  Rational p;
  Rational eps;
  Constants constants;
  Caps caps;

  // Throws Error("plan", ...) on p or eps outside (0,1), nonpositive
  // constants, eps_scale < 1 or zero caps.
  void validate() const;
};

enum class Mode { full, standard_fallback, absolute_fallback, degenerate_whole_set };
std::string_view to_string(Mode mode);

struct ResolvedPlan {
  Mode mode = Mode::full;
  // p > 1/8 and eps >= 1/8: the absolute sample has constant size.
  bool constant_size_regime = false;
  RangeFamily family;
  std::size_t n = 0;
  Rational p, eps;          // user-facing
  Rational p_int, eps_int;  // eps_int = eps / eps_scale, p_int = p
  // Target |F| in full mode; sample size in the fallback modes; n when the
  // whole set is used. Never exceeds n.
  std::size_t f_size = 0;
  // Unclamped size formula value before capping at n.
  double f_size_formula = 0;
  int layer_count = 0;  // L_max
  std::vector<double> delta;             // index 0..L_max
  std::vector<double> heavy_thresholds;  // index 0..L_max
  Rational pi{1};
  bool pi_clamped = false;
  bool pi_exact = true;  // false when pi is a 2^-32 dyadic floor of the real value
  Constants constants;
  Caps caps;
  std::map<std::string, std::string> provenance;

  nlohmann::json to_json() const;
};

ResolvedPlan resolve_plan(std::size_t n, const ApproxParams& params, const RangeFamily& family);

struct PiResult {
  Rational pi{1};
  bool exact = true;     // false: 2^-32 dyadic floor of the real value
  bool clamped = false;  // the formula exceeded 1
};

// (max{log2 log2(1/p), log2 phi(f)} + log2(1/eps)) / (log2(1/p) + log2(1/eps)),
// exact when every logarithm is an integer, capped at 1.
PiResult sampling_probability(const Rational& p, const Rational& eps, GrowthFn phi, std::size_t f_size);

// Smallest L >= 0 with 2^L * p >= 1.
int ceil_log2_reciprocal(const Rational& p);

}  // namespace relapprox
