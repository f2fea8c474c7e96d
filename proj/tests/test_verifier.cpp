#include <doctest.h>

#include <algorithm>

#include "relapprox/construction.hpp"
#include "relapprox/generators.hpp"
#include "relapprox/harness.hpp"
#include "relapprox/verifier.hpp"

using namespace relapprox;

namespace {

const RangeFamily kHalfplanes = RangeFamily::of(FamilyKind::halfplanes2d);

struct Instance {
  PointSet pts;
  RangeCatalog cat;
  explicit Instance(std::size_t n, std::uint64_t seed, FamilyKind kind = FamilyKind::halfplanes2d) {
    const RangeFamily fam = RangeFamily::of(kind);
    pts = generate_points(fam.dim() == 2 ? GeneratorKind::uniform_square : GeneratorKind::uniform_cube, n, seed,
                          fam.dim());
    cat = canonical_ranges(pts, fam);
  }
};

// Naive recount of a uniform subsample with per-range rational arithmetic.
ViolationReport naive(const RangeCatalog& cat, const std::vector<std::uint32_t>& subset, const Rational& p,
                      const Rational& eps) {
  return check_relative(
      cat,
      [&](std::size_t r) {
        std::size_t c = 0;
        for (auto j : subset) c += cat.contains(r, j);
        return Rational(static_cast<i128>(c), static_cast<i128>(subset.size()));
      },
      p, eps);
}

void same_report(const ViolationReport& a, const ViolationReport& b) {
  CHECK(a.pass == b.pass);
  CHECK(a.violation_count == b.violation_count);
  CHECK(a.max_multiplicative_error == b.max_multiplicative_error);
  CHECK(a.max_additive_error == b.max_additive_error);
  REQUIRE(a.violations.size() == b.violations.size());
  for (std::size_t k = 0; k < a.violations.size(); ++k) {
    CHECK(a.violations[k].range_id == b.violations[k].range_id);
    CHECK(a.violations[k].branch == b.violations[k].branch);
    CHECK(a.violations[k].approx == b.violations[k].approx);
    CHECK(a.violations[k].slack == b.violations[k].slack);
  }
}

}  // namespace

TEST_SUITE("verifier") {
  TEST_CASE("the ground set approximates itself for every (p, eps)") {
    const Instance in(40, 1);
    for (auto p : {Rational(1, 40), Rational(1, 16), Rational(1, 2)})
      for (auto e : {Rational(1, 100), Rational(1, 2)}) {
        const auto rep = check_relative(in.cat, CountingMeasure::whole(40), p, e);
        CHECK(rep.pass);
        CHECK(rep.max_multiplicative_error == Rational(0));
        CHECK(rep.max_additive_error == Rational(0));
        CHECK(rep.checked_ranges == in.cat.size());
        CHECK(check_pnet(in.cat, to_mask(40, std::vector<std::uint32_t>{}), p).pass == false);
      }
  }

  TEST_CASE("the empty measure fails on the multiplicative lower branch") {
    const Instance in(30, 2);
    CountingMeasure zero;  // no classes: Z = 0 everywhere
    const auto rep = check_relative(in.cat, zero, Rational(1, 16), Rational(1, 2));
    CHECK_FALSE(rep.pass);
    bool mult = false;
    for (const auto& v : rep.violations)
      if (v.branch == Branch::multiplicative) {
        mult = true;
        CHECK(v.approx < v.lower);
        CHECK(v.slack == v.lower);
      }
    CHECK(mult);
    CHECK(rep.max_multiplicative_error == Rational(1));
  }

  TEST_CASE("closed at p: a range of measure exactly p uses the multiplicative branch") {
    // Ranges {0}, {0,1} over 4 points; p = 1/4.
    const auto cat = RangeCatalog::from_member_lists(4, kHalfplanes, {{0}, {0, 1}});
    const auto rep = check_relative(
        cat, [&](std::size_t r) { return r == 1 ? Rational(3, 16) : Rational(cat.range_size(r), 4); }, Rational(1, 4),
        Rational(1, 4));
    // |3/16 - 1/4| = 1/16 = eps X: allowed with equality.
    CHECK(rep.pass);
    const auto tight = check_relative(
        cat, [&](std::size_t r) { return r == 1 ? Rational(3, 16) : Rational(cat.range_size(r), 4); }, Rational(1, 4),
        Rational(1, 5));
    REQUIRE(tight.violations.size() == 1);
    CHECK(tight.violations[0].branch == Branch::multiplicative);
    CHECK(tight.violations[0].slack == Rational(1, 80));
  }

  TEST_CASE("double entry and eps monotonicity on random subsamples") {
    const Instance in(60, 3);
    Rng rng(8);
    for (int t = 0; t < 20; ++t) {
      const auto sub = rng.sample_without_replacement(60, 10 + static_cast<std::size_t>(t) * 2);
      const Rational p(1, 10);
      bool passed = false;
      for (auto e : {Rational(1, 10), Rational(1, 4), Rational(1, 2), Rational(3, 4), Rational(99, 100)}) {
        const auto fast = check_relative(in.cat, CountingMeasure::uniform(60, sub), p, e);
        same_report(fast, naive(in.cat, sub, p, e));
        if (passed) CHECK(fast.pass);  // pass at eps implies pass at eps' >= eps
        passed = passed || fast.pass;
        if (fast.pass) CHECK(check_pnet(in.cat, to_mask(60, sub), p).pass);
      }
    }
  }

  TEST_CASE("two-weight measure agrees with the weighted formula") {
    WeightedSample s;
    for (std::uint32_t j = 0; j < 20; ++j) s.F.push_back(j * 2);  // F = even points of X
    s.F1 = {0, 3, 4, 9, 15};
    s.H = {1, 2, 17};
    s.pi = Rational(2, 7);
    const Instance in(40, 4);
    const auto viaX = check_relative(in.cat, s.measure_on_X(40), Rational(1, 8), Rational(1, 3));
    const auto viaF = check_relative(
        in.cat,
        [&](std::size_t r) {
          std::vector<std::uint32_t> m;
          for (auto j : in.cat.members(r))
            if (j % 2 == 0) m.push_back(j / 2);
          return weighted_measure(s, m);
        },
        Rational(1, 8), Rational(1, 3));
    same_report(viaX, viaF);
  }

  TEST_CASE("p-net") {
    const Instance in(30, 5);
    std::vector<std::uint32_t> all(30);
    for (std::uint32_t j = 0; j < 30; ++j) all[j] = j;
    CHECK(check_pnet(in.cat, to_mask(30, all), Rational(1, 10)).pass);
    const auto empty = check_pnet(in.cat, to_mask(30, std::vector<std::uint32_t>{}), Rational(1, 10));
    CHECK_FALSE(empty.pass);
    REQUIRE(empty.witness.has_value());
    CHECK(in.cat.range_size(*empty.witness) * 10 >= 30);
    // One point misses some heavy range of measure 1/2.
    const auto one = check_pnet(in.cat, to_mask(30, std::vector<std::uint32_t>{0}), Rational(1, 2));
    CHECK_FALSE(one.pass);
    CHECK_FALSE(in.cat.contains(*one.witness, 0));
  }

  TEST_CASE("baseline sample") {
    CHECK(baseline_size(100, Rational(1, 16), Rational(1, 2), Rational(4)) == 100);
    // 4 * 3 / (1/4 * 1/8) = 384.
    CHECK(baseline_size(10000, Rational(1, 8), Rational(1, 2), Rational(4)) == 384);
    Rng a(3), b(3);
    const auto s1 = baseline_sample(10000, Rational(1, 8), Rational(1, 2), Rational(4), a);
    CHECK(s1 == baseline_sample(10000, Rational(1, 8), Rational(1, 2), Rational(4), b));
    CHECK(s1.size() == 384);
    Rng c(1);
    CHECK(baseline_sample(50, Rational(1, 16), Rational(1, 2), Rational(4), c).size() == 50);
  }

  TEST_CASE("comparison table") {
    const Instance in(50, 6);
    ApproxParams a;
    a.p = Rational(1, 16);
    a.eps = Rational(1, 2);
    const std::vector<std::uint64_t> seeds = {1, 2, 3, 4};
    const ComparisonTable t = compare(in.pts, kHalfplanes, a, seeds);
    REQUIRE(t.rows.size() == seeds.size());
    std::vector<double> sup, base;
    for (const auto& r : t.rows) {
      CHECK(r.n == 50);
      CHECK(r.support == 50);  // degenerate: the whole set
      CHECK(r.baseline_size == 50);
      CHECK(r.construct_pass);
      sup.push_back(static_cast<double>(r.support));
      base.push_back(static_cast<double>(r.baseline_size));
    }
    CHECK(t.median_support == median(sup));
    CHECK(t.median_baseline_size == median(base));
    CHECK(t.construct_passes == 4);
    CHECK(median({3, 1, 2}) == 2);
    CHECK(median({4, 1, 2, 3}) == 2.5);
  }

  TEST_CASE("report json lists at most max_listed violations") {
    const Instance in(30, 7);
    CountingMeasure zero;
    const auto rep = check_relative(in.cat, zero, Rational(1, 16), Rational(1, 2), 3);
    CHECK(rep.violations.size() == 3);
    CHECK(rep.violation_count > 3);
    const auto j = rep.to_json();
    CHECK(j["violations"].size() == 3);
    CHECK(j["pass"] == false);
  }
}
