#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "relapprox/construction.hpp"
#include "relapprox/generators.hpp"
#include "relapprox/verifier.hpp"
#include "test_util.hpp"

using namespace relapprox;

namespace {

const RangeFamily kHalfplanes = RangeFamily::of(FamilyKind::halfplanes2d);
const RangeFamily kRects = RangeFamily::of(FamilyKind::rects2d);

ApproxParams params(Rational p, Rational eps) {
  ApproxParams a;
  a.p = p;
  a.eps = eps;
  return a;
}

// Full-mode parameters that fit desk-scale n: p = 1/8, eps = 1/2 and
// eps_int = eps / eps_scale.
ApproxParams full_params(Rational eps_scale, Rational D) {
  ApproxParams a = params(Rational(1, 8), Rational(1, 2));
  a.constants.eps_scale = eps_scale;
  a.constants.D = D;
  return a;
}

// The event system of one fixed F, with F taken as the whole point set.
struct EventFixture {
  PointSet pts;
  RangeCatalog cat;
  ResolvedPlan plan;
  LayerStructure layers;
  HeavyLightPartition part;

  EventFixture(std::size_t n, std::uint64_t seed, const ApproxParams& a) {
    pts = generate_points(GeneratorKind::uniform_square, n, seed);
    cat = canonical_ranges(pts, kHalfplanes);
    plan = resolve_plan(400, a, kHalfplanes);
    layers = assign_layers(cat, plan);
    part = classify_objects(cat, layers, plan);
  }
};

// Independent statement of the acceptance conditions with rationals: with
// s = |tau ∩ L|, c = |tau ∩ F1|, E = pi |L|,
//   s >= 2^(i-1) p |F| (i >= 1):  (s/|L|)(1 - eps) <= c/E <= (s/|L|)(1 + eps)
//   otherwise:                    |c/E - s/|L|| <= eps 2^(i-1) p  (p on layer 0)
std::set<std::uint32_t> naive_violations(const EventFixture& fx, const CoinVector& coins) {
  const Rational& pi = fx.plan.pi;
  const Rational& e = fx.plan.eps_int;
  const Rational& p = fx.plan.p_int;
  const Rational l(static_cast<i128>(fx.part.light.size()));
  const Rational f(static_cast<i128>(fx.cat.ground_size()));
  std::set<std::uint32_t> f1;
  for (std::size_t k = 0; k < coins.chosen.size(); ++k)
    if (coins.chosen[k]) f1.insert(fx.part.light[k]);
  std::set<std::uint32_t> out;
  for (std::size_t r = 0; r < fx.cat.size(); ++r) {
    std::size_t s = 0, c = 0;
    for (auto j : fx.cat.members(r)) {
      s += !fx.part.is_heavy(j);
      c += f1.count(j);
    }
    const int i = fx.layers.layer[r];
    const Rational scale = i >= 1 ? pow2(i - 1) : Rational(1);
    const Rational sl = Rational(static_cast<i128>(s)) / l;
    const Rational ce = Rational(static_cast<i128>(c)) / (pi * l);
    bool ok;
    if (i >= 1 && Rational(static_cast<i128>(s)) >= scale * p * f)
      ok = sl * (Rational(1) - e) <= ce && ce <= sl * (Rational(1) + e);
    else
      ok = (ce - sl).abs() <= e * scale * p;
    if (!ok) out.insert(static_cast<std::uint32_t>(r));
  }
  return out;
}

}  // namespace

TEST_SUITE("construction") {
  TEST_CASE("layer assignment follows the half-open dyadic intervals") {
    const Rational p(1, 16);
    CHECK(layer_of(2, 16, p, 4) == 2);  // measure 1/8
    CHECK(layer_of(1, 16, p, 4) == 1);  // measure p
    CHECK(layer_of(1, 32, p, 4) == 0);  // measure p/2
    CHECK(layer_of(0, 32, p, 4) == 0);
    CHECK(layer_of(3, 32, p, 4) == 1);  // 3/32 in [1/16, 1/8)
    CHECK(layer_of(8, 16, p, 4) == 4);  // measure 1/2
    CHECK(layer_of(16, 16, p, 4) == 4);  // top layer absorbs [1/2, 1]
    CHECK(layer_of(7, 16, p, 4) == 3);
  }

  TEST_CASE("property: layer measures lie in their interval") {
    const Rational p(1, 32);
    for (std::size_t f = 1; f <= 70; ++f)
      for (std::size_t c = 0; c <= f; ++c) {
        const int i = layer_of(c, f, p, 5);
        const Rational m(static_cast<i128>(c), static_cast<i128>(f));
        if (i == 0) {
          CHECK(m < p);
        } else {
          CHECK(pow2(i - 1) * p <= m);
          if (i < 5) CHECK(m < pow2(i) * p);
        }
      }
  }

  TEST_CASE("default thresholds leave every object light") {
    EventFixture fx(60, 3, params(Rational(1, 16), Rational(1, 2)));
    CHECK(fx.part.heavy.empty());
    CHECK(fx.part.light.size() == 60);
    CHECK_FALSE(fx.part.light_below_half);
    std::size_t total = 0;
    for (auto h : fx.layers.histogram) total += h;
    CHECK(total == fx.cat.size());
  }

  TEST_CASE("the point inside every small rectangle of a cluster becomes heavy") {
    // 3x3 lattice. With p = 1/2, layer 0 holds the rectangles of at most 4
    // points: the centre lies in 11 of them, an edge midpoint in 8, a corner in 6.
    std::vector<Point> v;
    for (Fixed dx = -1; dx <= 1; ++dx)
      for (Fixed dy = -1; dy <= 1; ++dy) v.push_back({{500 + dx, 500 + dy, 0}});
    const PointSet pts(2, v);
    const std::uint32_t centre = 4;
    const RangeCatalog cat = canonical_ranges(pts, kRects);

    ApproxParams a = params(Rational(1, 2), Rational(1, 2));
    a.constants.eps_scale = Rational(1);
    const ResolvedPlan base = resolve_plan(pts.size(), a, kRects);
    const LayerStructure layers = assign_layers(cat, base);
    std::vector<std::uint64_t> c0(pts.size(), 0);
    for (std::size_t r = 0; r < cat.size(); ++r)
      if (layers.layer[r] == 0)
        for (auto j : cat.members(r)) ++c0[j];
    CHECK(c0 == std::vector<std::uint64_t>{6, 8, 6, 8, 11, 8, 6, 8, 6});

    // Lower the layer-0 threshold to 19/2 through A.
    a.constants.A = dyadic_floor(static_cast<long double>(9.5 / base.heavy_thresholds[0]), 40);
    const ResolvedPlan plan = resolve_plan(pts.size(), a, kRects);
    const HeavyLightPartition part = classify_objects(cat, layers, plan);
    CHECK(part.heavy == std::vector<std::uint32_t>{centre});
    CHECK(part.light.size() == 8);
    // Heavy iff some layer count reaches its threshold.
    for (std::uint32_t j = 0; j < pts.size(); ++j) {
      bool heavy = false;
      for (std::size_t i = 0; i < part.counts.size(); ++i)
        heavy |= static_cast<double>(part.counts[i][j]) >= plan.heavy_thresholds[i];
      CHECK(part.is_heavy(j) == heavy);
    }
    CHECK(classify_objects(cat, layers, plan).heavy == part.heavy);
  }

  TEST_CASE("coins") {
    Rng r1(1), r2(1);
    CHECK(draw_coins(50, Rational(1), r1).count() == 50);
    Rng a(9), b(9);
    CHECK(draw_coins(500, Rational(1, 3), a).chosen == draw_coins(500, Rational(1, 3), b).chosen);
    Rng big(4);
    const std::size_t L = 10000;
    const double got = static_cast<double>(draw_coins(L, Rational(1, 3), big).count());
    const double sigma = std::sqrt(L * (1.0 / 3) * (2.0 / 3));
    CHECK(std::abs(got - L / 3.0) < 5 * sigma);
    CHECK_THROWS(draw_coins(3, Rational(0), big));
    CHECK_THROWS(draw_coins(3, Rational(3, 2), big));
  }

  TEST_CASE("pi = 1 with every coin chosen violates nothing") {
    EventFixture fx(60, 5, full_params(Rational(2), Rational(1, 2)));
    fx.plan.pi = Rational(1);
    CoinVector all;
    all.chosen.assign(fx.part.light.size(), 1);
    CHECK(violated_events(fx.cat, fx.layers, fx.part, all, fx.plan).empty());
    Rng rng(1);
    const MtResult mt = moser_tardos(fx.cat, fx.layers, fx.part, fx.plan, rng);
    CHECK(mt.stats.resample_count == 0);
    CHECK(mt.coins.chosen == all.chosen);
  }

  TEST_CASE("no chosen coins in a heavy-enough range is a lower-side case (i) event") {
    EventFixture fx(60, 5, full_params(Rational(2), Rational(1, 2)));
    CoinVector none;
    none.chosen.assign(fx.part.light.size(), 0);
    const EventSystem es(fx.cat, fx.layers, fx.part, fx.plan);
    const auto events = es.all_violated(none);
    bool found = false;
    for (const auto& ev : events) {
      if (ev.kind != EventKind::A_tau || ev.ecase != EventCase::geq_threshold) continue;
      CHECK(ev.side == Side::lower);
      CHECK(ev.layer >= 1);
      CHECK(es.lo(ev.range_id) > 0);
      found = true;
    }
    CHECK(found);
    // The full range is in the top layer and certainly in case (i).
    const std::size_t full = fx.cat.size() - 1;
    CHECK(es.event_case(full) == EventCase::geq_threshold);
  }

  TEST_CASE("double entry: event system agrees with a naive rational check") {
    EventFixture fx(50, 6, full_params(Rational(2), Rational(1, 2)));
    const EventSystem es(fx.cat, fx.layers, fx.part, fx.plan);
    Rng rng(12);
    for (int t = 0; t < 30; ++t) {
      // Vary the density so both sides of every interval get exercised.
      const Rational q(static_cast<i128>(1 + t % 9), 10);
      const CoinVector coins = draw_coins(fx.part.light.size(), q, rng);
      std::set<std::uint32_t> got;
      bool size_event = false;
      for (const auto& ev : es.all_violated(coins)) {
        if (ev.kind == EventKind::B_size) size_event = true;
        else got.insert(ev.range_id);
      }
      CHECK(got == naive_violations(fx, coins));
      const Rational bound = (Rational(1) + fx.plan.constants.gamma) * fx.plan.pi *
                             Rational(static_cast<i128>(fx.part.light.size()));
      CHECK(size_event == (Rational(static_cast<i128>(coins.count())) > bound));
      const auto first = es.first_violated(coins);
      CHECK(first.has_value() == (size_event || !got.empty()));
      if (first && !size_event) {
        // First in (layer, id) order.
        for (auto r : got) {
          const auto key = std::make_pair(fx.layers.layer[r], r);
          CHECK(std::make_pair(fx.layers.layer[first->range_id], first->range_id) <= key);
        }
      }
    }
  }

  TEST_CASE("event frequency decreases with the layer index") {
    EventFixture fx(120, 7, full_params(Rational(2), Rational(1, 2)));
    const EventSystem es(fx.cat, fx.layers, fx.part, fx.plan);
    const std::size_t L = static_cast<std::size_t>(fx.plan.layer_count);
    std::vector<double> hits(L + 1, 0);
    Rng rng(3);
    const int trials = 200;
    for (int t = 0; t < trials; ++t)
      for (const auto& ev : es.all_violated(draw_coins(fx.part.light.size(), fx.plan.pi, rng)))
        if (ev.kind == EventKind::A_tau) hits[static_cast<std::size_t>(ev.layer)] += 1;
    std::vector<double> freq;
    for (std::size_t i = 1; i <= L; ++i)
      if (fx.layers.histogram[i] > 0) freq.push_back(hits[i] / (trials * static_cast<double>(fx.layers.histogram[i])));
    REQUIRE(freq.size() >= 2);
    for (std::size_t i = 0; i + 1 < freq.size(); ++i) CHECK(freq[i] >= freq[i + 1]);
  }

  TEST_CASE("resampling is deterministic and leaves no violated event") {
    EventFixture fx(120, 8, full_params(Rational(1), Rational(3, 2)));
    Rng a(5), b(5);
    const MtResult r1 = moser_tardos(fx.cat, fx.layers, fx.part, fx.plan, a);
    const MtResult r2 = moser_tardos(fx.cat, fx.layers, fx.part, fx.plan, b);
    CHECK(r1.coins.chosen == r2.coins.chosen);
    CHECK(r1.stats.to_json() == r2.stats.to_json());
    CHECK(violated_events(fx.cat, fx.layers, fx.part, r1.coins, fx.plan).empty());
    std::uint64_t total = 0;
    for (const auto& [k, v] : r1.stats.per_event) total += v;
    CHECK(total == r1.stats.resample_count);
  }

  TEST_CASE("resample cap is reported") {
    EventFixture fx(120, 8, full_params(Rational(1), Rational(3, 2)));
    fx.plan.caps.mt_max_resamples = 1;
    fx.plan.pi = Rational(1, 1000);  // far too few coins: events are certain
    Rng rng(1);
    CHECK_THROWS_AS(moser_tardos(fx.cat, fx.layers, fx.part, fx.plan, rng), ResampleCapExceeded);
  }

  TEST_CASE("weighted measure") {
    WeightedSample s;
    for (std::uint32_t j = 0; j < 30; ++j) s.F.push_back(j);
    s.F1 = {0, 1, 2, 3, 4};
    s.H = {10, 11, 12};
    s.pi = Rational(1, 3);
    const std::vector<std::uint32_t> tau = {0, 1, 2, 10, 11, 20};
    CHECK(weighted_measure(s, tau) == Rational(11, 30));
    // tau inside H: pi cancels.
    CHECK(weighted_measure(s, std::vector<std::uint32_t>{10, 12}) == Rational(2, 30));
    // H empty: |tau ∩ F1| / (pi |F|).
    WeightedSample t = s;
    t.H.clear();
    CHECK(weighted_measure(t, tau) == Rational(3) / (Rational(1, 3) * Rational(30)));
    CHECK(s.support_size() == 8);
    CHECK_THROWS(weighted_measure(s, std::vector<std::uint32_t>{30}));
  }

  TEST_CASE("degenerate mode returns the whole set with zero error") {
    const PointSet pts = generate_points(GeneratorKind::uniform_square, 50, 2);
    const RangeCatalog cat = canonical_ranges(pts, kHalfplanes);
    const auto res = construct(pts, cat, params(Rational(1, 20), Rational(1, 10)), 1);
    CHECK(res.report.plan.mode == Mode::degenerate_whole_set);
    CHECK(res.sample.support().size() == 50);
    const auto rep = check_relative(cat, res.sample.measure_on_X(50), Rational(1, 20), Rational(1, 10));
    CHECK(rep.pass);
    CHECK(rep.max_multiplicative_error == Rational(0));
    CHECK(rep.max_additive_error == Rational(0));
  }

  TEST_CASE("default constants, n = 200, seed 1: zero violations") {
    const PointSet pts = generate_points(GeneratorKind::uniform_square, 200, 1);
    const RangeCatalog cat = canonical_ranges(pts, kHalfplanes);
    const auto a = params(Rational(1, 16), Rational(1, 2));
    const auto res = construct(pts, cat, a, 1);
    const auto rep = check_relative(cat, res.sample.measure_on_X(200), a.p, a.eps);
    CHECK(rep.violation_count == 0);
    CHECK(check_pnet(cat, to_mask(200, res.sample.support()), a.p).pass);
  }

  TEST_CASE("full pipeline: identity, events and size bound hold; same seed, same output") {
    const PointSet pts = generate_points(GeneratorKind::uniform_square, 400, 3);
    const RangeCatalog cat = canonical_ranges(pts, kHalfplanes);
    const ApproxParams a = full_params(Rational(2), Rational(1, 2));
    const auto res = construct(pts, cat, a, 11);
    REQUIRE(res.report.plan.mode == Mode::full);
    CHECK(res.report.identity_checked);
    CHECK(res.sample.F.size() == 320);
    REQUIRE(res.catalog_F.has_value());
    CHECK(violated_events(*res.catalog_F, res.layers, res.partition, res.coins, res.report.plan).empty());
    const Rational bound = (Rational(1) + a.constants.gamma) * res.report.plan.pi *
                           Rational(static_cast<i128>(res.partition.light.size()));
    CHECK(Rational(static_cast<i128>(res.sample.F1.size())) <= bound);
    // Guarantee on F before rescaling: relative (p_int, 2 eps_int).
    const auto onF = check_relative(*res.catalog_F, res.sample.measure_on_F(), res.report.plan.p_int,
                                    Rational(2) * res.report.plan.eps_int);
    CHECK(onF.pass);
    CHECK(check_relative(cat, res.sample.measure_on_X(400), a.p, a.eps).pass);
    const auto again = construct(pts, cat, a, 11);
    CHECK(again.sample.F == res.sample.F);
    CHECK(again.sample.F1 == res.sample.F1);
    CHECK(again.report.to_json() == res.report.to_json());
  }

  TEST_CASE("resampling terminates on 100 seeded desk runs") {
    const PointSet pts = generate_points(GeneratorKind::uniform_square, 200, 4);
    const RangeCatalog cat = canonical_ranges(pts, kHalfplanes);
    const ApproxParams a = full_params(Rational(1), Rational(1));
    std::vector<double> counts;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      const auto res = construct(pts, cat, a, seed);
      REQUIRE(res.report.plan.mode == Mode::full);
      CHECK(res.report.mt.resample_count < a.caps.mt_max_resamples);
      counts.push_back(static_cast<double>(res.report.mt.resample_count));
    }
    std::sort(counts.begin(), counts.end());
    MESSAGE("median resample count " << counts[counts.size() / 2] << ", max " << counts.back());
  }

  TEST_CASE("initial sample certification rarely needs many retries") {
    const PointSet pts = generate_points(GeneratorKind::uniform_square, 200, 5);
    const RangeCatalog cat = canonical_ranges(pts, kHalfplanes);
    // Default constants: the size formula exceeds n, F = X on the first try.
    const ResolvedPlan trivial = resolve_plan(200, params(Rational(1, 16), Rational(1, 2)), kHalfplanes);
    Rng r0(1);
    const auto whole = initial_sample(cat, trivial, r0);
    CHECK(whole.indices.size() == 200);
    CHECK(whole.retries == 0);
    // A proper subsample: |F| = 128 at (1/8, 1/2).
    const ResolvedPlan plan = resolve_plan(200, full_params(Rational(1), Rational(1)), kHalfplanes);
    REQUIRE(plan.f_size == 128);
    int ok = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      Rng rng(seed);
      try {
        const auto s = initial_sample(cat, plan, rng);
        CHECK(s.certificate.pass);
        Rng again(seed);
        CHECK(initial_sample(cat, plan, again).indices == s.indices);
        ++ok;
      } catch (const RetriesExhausted&) {
      }
    }
    CHECK(ok >= 99);
  }
}
