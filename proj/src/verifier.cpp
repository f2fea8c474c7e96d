#include "relapprox/verifier.hpp"

#include <cmath>

#include "relapprox/error.hpp"
#include "relapprox/kernels.hpp"

namespace relapprox {

std::vector<std::uint64_t> to_mask(std::size_t ground_size, std::span<const std::uint32_t> members) {
  std::vector<std::uint64_t> mask(words_for(ground_size), 0);
  for (std::uint32_t j : members) {
    if (j >= ground_size) throw Error("verifier", "member index out of range");
    mask[j / 64] |= std::uint64_t{1} << (j % 64);
  }
  return mask;
}

CountingMeasure CountingMeasure::uniform(std::size_t ground_size, std::span<const std::uint32_t> subset) {
  if (subset.empty()) throw Error("verifier", "uniform measure over an empty subset");
  CountingMeasure m;
  m.classes.push_back({to_mask(ground_size, subset), 1});
  m.denominator = static_cast<i128>(subset.size());
  return m;
}

CountingMeasure CountingMeasure::whole(std::size_t ground_size) {
  std::vector<std::uint32_t> all(ground_size);
  for (std::size_t j = 0; j < ground_size; ++j) all[j] = static_cast<std::uint32_t>(j);
  return uniform(ground_size, all);
}

std::string_view to_string(Branch b) { return b == Branch::multiplicative ? "multiplicative" : "additive"; }

namespace {

i128 abs128(i128 v) { return v < 0 ? -v : v; }

Violation make_violation(std::uint32_t r, bool heavy, const Rational& X, const Rational& Z, const Rational& p,
                         const Rational& eps) {
  Violation v;
  v.range_id = r;
  v.branch = heavy ? Branch::multiplicative : Branch::additive;
  v.ground = X;
  v.approx = Z;
  if (heavy) {
    v.lower = X * (Rational(1) - eps);
    v.upper = X * (Rational(1) + eps);
  } else {
    v.lower = X - eps * p;
    v.upper = X + eps * p;
  }
  v.slack = Z < v.lower ? v.lower - Z : Z - v.upper;
  return v;
}

// Running maximum of a nonnegative fraction num/den.
struct MaxFrac {
  i128 num = 0, den = 1;
  void offer(i128 n, i128 d) {
    if (compare_fractions(n, d, num, den) == std::strong_ordering::greater) {
      num = n;
      den = d;
    }
  }
  Rational value() const { return Rational(num, den); }
};

}  // namespace

ViolationReport check_relative(const RangeCatalog& catalog, const CountingMeasure& measure, const Rational& p,
                               const Rational& eps, std::size_t max_listed) {
  const std::size_t R = catalog.size();
  const i128 n = static_cast<i128>(catalog.ground_size());
  const i128 W = measure.denominator;
  if (W <= 0) throw Error("verifier", "measure denominator must be positive");
  std::vector<std::vector<std::uint32_t>> counts(measure.classes.size(), std::vector<std::uint32_t>(R));
  for (std::size_t k = 0; k < measure.classes.size(); ++k) {
    if (measure.classes[k].mask.size() != catalog.words()) throw Error("verifier", "measure mask width mismatch");
    kernels::intersect_counts(catalog.all_bits(), catalog.words(), measure.classes[k].mask, counts[k]);
  }

  ViolationReport rep;
  rep.checked_ranges = R;
  MaxFrac mult, add;
  // Loop-invariant right-hand sides.
  const i128 add_rhs = checked_mul(checked_mul(checked_mul(eps.num(), p.num()), n), W);
  const i128 add_scale = checked_mul(eps.den(), p.den());
  for (std::size_t r = 0; r < R; ++r) {
    const i128 s = catalog.range_size(r);
    i128 z = 0;
    for (std::size_t k = 0; k < counts.size(); ++k)
      z = checked_add(z, checked_mul(measure.classes[k].weight, counts[k][r]));
    const i128 diff = abs128(checked_sub(checked_mul(z, n), checked_mul(s, W)));
    const bool heavy = checked_mul(s, p.den()) >= checked_mul(p.num(), n);
    bool bad;
    if (heavy) {
      bad = checked_mul(diff, eps.den()) > checked_mul(checked_mul(eps.num(), s), W);
      mult.offer(diff, checked_mul(s, W));
    } else {
      bad = checked_mul(diff, add_scale) > add_rhs;
      add.offer(diff, checked_mul(n, W));
    }
    if (bad) {
      ++rep.violation_count;
      if (rep.violations.size() < max_listed)
        rep.violations.push_back(make_violation(static_cast<std::uint32_t>(r), heavy, Rational(s, n), Rational(z, W), p, eps));
    }
  }
  rep.max_multiplicative_error = mult.value();
  rep.max_additive_error = add.value();
  rep.pass = rep.violation_count == 0;
  return rep;
}

ViolationReport check_relative(const RangeCatalog& catalog, const std::function<Rational(std::size_t)>& measure_of,
                               const Rational& p, const Rational& eps, std::size_t max_listed) {
  ViolationReport rep;
  rep.checked_ranges = catalog.size();
  const auto n = static_cast<i128>(catalog.ground_size());
  Rational max_mult(0), max_add(0);
  for (std::size_t r = 0; r < catalog.size(); ++r) {
    const Rational X(static_cast<i128>(catalog.range_size(r)), n);
    const Rational Z = measure_of(r);
    const Rational err = (Z - X).abs();
    const bool heavy = X >= p;
    bool bad;
    if (heavy) {
      bad = err > eps * X;
      max_mult = max(max_mult, err / X);
    } else {
      bad = err > eps * p;
      max_add = max(max_add, err);
    }
    if (bad) {
      ++rep.violation_count;
      if (rep.violations.size() < max_listed)
        rep.violations.push_back(make_violation(static_cast<std::uint32_t>(r), heavy, X, Z, p, eps));
    }
  }
  rep.max_multiplicative_error = max_mult;
  rep.max_additive_error = max_add;
  rep.pass = rep.violation_count == 0;
  return rep;
}

nlohmann::json ViolationReport::to_json() const {
  nlohmann::json j;
  j["checked_ranges"] = checked_ranges;
  j["violation_count"] = violation_count;
  j["max_multiplicative_error"] = max_multiplicative_error.str();
  j["max_additive_error"] = max_additive_error.str();
  j["pass"] = pass;
  auto& list = j["violations"] = nlohmann::json::array();
  for (const Violation& v : violations)
    list.push_back({{"range_id", v.range_id},
                    {"branch", std::string(to_string(v.branch))},
                    {"ground", v.ground.str()},
                    {"approx", v.approx.str()},
                    {"lower", v.lower.str()},
                    {"upper", v.upper.str()},
                    {"slack", v.slack.str()}});
  return j;
}

PnetResult check_pnet(const RangeCatalog& catalog, std::span<const std::uint64_t> support, const Rational& p) {
  if (support.size() != catalog.words()) throw Error("verifier", "support mask width mismatch");
  std::vector<std::uint32_t> counts(catalog.size());
  kernels::intersect_counts(catalog.all_bits(), catalog.words(), support, counts);
  const i128 n = static_cast<i128>(catalog.ground_size());
  PnetResult res;
  for (std::size_t r = 0; r < catalog.size(); ++r) {
    const i128 s = catalog.range_size(r);
    if (checked_mul(s, p.den()) < checked_mul(p.num(), n)) continue;
    ++res.heavy_ranges;
    if (counts[r] == 0 && res.pass) {
      res.pass = false;
      res.witness = static_cast<std::uint32_t>(r);
    }
  }
  return res;
}

std::size_t baseline_size(std::size_t n, const Rational& p, const Rational& eps, const Rational& D_base) {
  if (!(p > Rational(0) && p < Rational(1) && eps > Rational(0) && eps < Rational(1)))
    throw Error("baseline", "p and eps must lie in (0,1)");
  const long double pd = p.to_double(), ed = eps.to_double();
  const long double v = D_base.to_double() * std::log2l(1.0L / pd) / (ed * ed * pd);
  if (!(v < static_cast<long double>(n))) return n;
  return std::min(n, static_cast<std::size_t>(std::ceil(v)));
}

std::vector<std::uint32_t> baseline_sample(std::size_t n, const Rational& p, const Rational& eps,
                                           const Rational& D_base, Rng& rng) {
  return rng.sample_without_replacement(n, baseline_size(n, p, eps, D_base));
}

}  // namespace relapprox
