#include "relapprox/construction.hpp"

#include <algorithm>
#include <bit>

#include "relapprox/kernels.hpp"

namespace relapprox {

namespace {

// Uniform samples of `size` points from X until one passes check_relative at
// (p, eps). attempts >= 1.
InitialSample certified_uniform(const RangeCatalog& catalog_X, std::size_t size, const Rational& p,
                                const Rational& eps, std::uint64_t attempts, Rng& rng, const std::string& stage) {
  const std::size_t n = catalog_X.ground_size();
  InitialSample out;
  std::size_t best = static_cast<std::size_t>(-1);
  for (std::uint64_t t = 0; t < attempts; ++t) {
    auto idx = rng.sample_without_replacement(n, size);
    auto rep = check_relative(catalog_X, CountingMeasure::uniform(n, idx), p, eps);
    if (rep.pass) {
      out.indices = std::move(idx);
      out.certificate = std::move(rep);
      return out;
    }
    best = std::min(best, rep.violation_count);
    ++out.retries;
    // The whole set always passes; no point in redrawing it.
    if (size == n) break;
  }
  throw RetriesExhausted(stage,
                         "no certified sample of size " + std::to_string(size) + " after " +
                             std::to_string(out.retries) + " attempts (best attempt: " + std::to_string(best) +
                             " violations)",
                         best);
}

std::vector<std::uint32_t> iota_u32(std::size_t n) {
  std::vector<std::uint32_t> v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = static_cast<std::uint32_t>(j);
  return v;
}

}  // namespace

InitialSample initial_sample(const RangeCatalog& catalog_X, const ResolvedPlan& plan, Rng& rng) {
  return certified_uniform(catalog_X, std::min(plan.f_size, catalog_X.ground_size()), plan.p_int, plan.eps_int,
                           plan.caps.initial_retries, rng, "initial_sample");
}

// ---------------------------------------------------------------- layers

int layer_of(std::size_t count, std::size_t f_size, const Rational& p, int layer_count) {
  const i128 lhs = checked_mul(static_cast<i128>(count), p.den());
  const i128 base = checked_mul(p.num(), static_cast<i128>(f_size));
  if (lhs < base) return 0;
  int i = 1;
  while (i < layer_count && lhs >= checked_mul(base, i128{1} << i)) ++i;
  return i;
}

LayerStructure assign_layers(const RangeCatalog& catalog_F, const ResolvedPlan& plan) {
  LayerStructure ls;
  ls.layer.resize(catalog_F.size());
  ls.histogram.assign(static_cast<std::size_t>(plan.layer_count) + 1, 0);
  for (std::size_t r = 0; r < catalog_F.size(); ++r) {
    const int i = layer_of(catalog_F.range_size(r), catalog_F.ground_size(), plan.p_int, plan.layer_count);
    ls.layer[r] = static_cast<std::uint8_t>(i);
    ++ls.histogram[static_cast<std::size_t>(i)];
  }
  return ls;
}

// ---------------------------------------------------------------- heavy/light

HeavyLightPartition classify_objects(const RangeCatalog& catalog_F, const LayerStructure& layers,
                                     const ResolvedPlan& plan) {
  const std::size_t f = catalog_F.ground_size();
  HeavyLightPartition part;
  part.counts.assign(plan.heavy_thresholds.size(), std::vector<std::uint64_t>(f, 0));
  for (std::size_t r = 0; r < catalog_F.size(); ++r) {
    auto& row_counts = part.counts[layers.layer[r]];
    auto row = catalog_F.bits(r);
    for (std::size_t w = 0; w < row.size(); ++w)
      for (std::uint64_t x = row[w]; x != 0; x &= x - 1)
        ++row_counts[w * 64 + static_cast<std::size_t>(std::countr_zero(x))];
  }
  part.light_pos.assign(f, -1);
  for (std::size_t j = 0; j < f; ++j) {
    bool heavy = false;
    for (std::size_t i = 0; i < part.counts.size() && !heavy; ++i)
      heavy = static_cast<double>(part.counts[i][j]) >= plan.heavy_thresholds[i];
    if (heavy) {
      part.heavy.push_back(static_cast<std::uint32_t>(j));
    } else {
      part.light_pos[j] = static_cast<std::int32_t>(part.light.size());
      part.light.push_back(static_cast<std::uint32_t>(j));
    }
  }
  part.light_below_half = 2 * part.light.size() < f;
  return part;
}

// ---------------------------------------------------------------- coins

std::size_t CoinVector::count() const {
  return static_cast<std::size_t>(std::count(chosen.begin(), chosen.end(), std::uint8_t{1}));
}

CoinVector draw_coins(std::size_t light_size, const Rational& pi, Rng& rng) {
  if (!(pi > Rational(0)) || pi > Rational(1)) throw Error("coins", "pi must lie in (0,1], got " + pi.str());
  CoinVector c;
  c.chosen.resize(light_size);
  for (auto& b : c.chosen) b = rng.bernoulli(pi) ? 1 : 0;
  return c;
}

std::vector<std::uint64_t> chosen_mask(const CoinVector& coins, const HeavyLightPartition& part, std::size_t f_size) {
  std::vector<std::uint64_t> mask(words_for(f_size), 0);
  for (std::size_t k = 0; k < coins.chosen.size(); ++k)
    if (coins.chosen[k]) {
      const std::uint32_t j = part.light[k];
      mask[j / 64] |= std::uint64_t{1} << (j % 64);
    }
  return mask;
}

// ---------------------------------------------------------------- output

std::vector<std::uint32_t> WeightedSample::support() const {
  std::vector<std::uint32_t> s;
  for (std::uint32_t j : F1) s.push_back(F[j]);
  for (std::uint32_t j : H) s.push_back(F[j]);
  std::sort(s.begin(), s.end());
  return s;
}

namespace {

CountingMeasure two_weight(std::size_t ground, const std::vector<std::uint32_t>& f1, const std::vector<std::uint32_t>& h,
                           const Rational& pi, std::size_t f_size) {
  CountingMeasure m;
  if (!f1.empty()) m.classes.push_back({to_mask(ground, f1), pi.den()});
  if (!h.empty()) m.classes.push_back({to_mask(ground, h), pi.num()});
  m.denominator = checked_mul(pi.num(), static_cast<i128>(f_size));
  return m;
}

}  // namespace

CountingMeasure WeightedSample::measure_on_F() const { return two_weight(F.size(), F1, H, pi, F.size()); }

CountingMeasure WeightedSample::measure_on_X(std::size_t n) const {
  std::vector<std::uint32_t> f1x, hx;
  for (std::uint32_t j : F1) f1x.push_back(F[j]);
  for (std::uint32_t j : H) hx.push_back(F[j]);
  return two_weight(n, f1x, hx, pi, F.size());
}

Rational weighted_measure(const WeightedSample& sample, std::span<const std::uint32_t> range_members) {
  if (sample.F.empty()) throw Error("measure", "empty sample");
  std::size_t c1 = 0, ch = 0;
  for (std::uint32_t j : range_members) {
    if (j >= sample.F.size()) throw Error("measure", "member outside F");
    if (std::binary_search(sample.F1.begin(), sample.F1.end(), j)) ++c1;
    else if (std::binary_search(sample.H.begin(), sample.H.end(), j)) ++ch;
  }
  const Rational f(static_cast<i128>(sample.F.size()));
  return (Rational(static_cast<i128>(c1)) + sample.pi * Rational(static_cast<i128>(ch))) / (sample.pi * f);
}

nlohmann::json ConstructionReport::to_json() const {
  nlohmann::json j;
  j["plan"] = plan.to_json();
  j["sizes"] = {{"n", n},         {"F", f_size},          {"H", heavy},
                {"L", light},     {"F1", f1},             {"support", support},
                {"catalog_F", catalog_F_size}};
  j["initial_retries"] = initial_retries;
  j["layer_histogram"] = layer_histogram;
  j["light_below_half"] = light_below_half;
  j["identity_checked"] = identity_checked;
  j["infeasible_events"] = infeasible_events;
  j["moser_tardos"] = mt.to_json();
  j["warnings"] = warnings;
  return j;
}

// ---------------------------------------------------------------- pipeline

ConstructionResult construct(const PointSet& points, const RangeCatalog& catalog_X, const ApproxParams& params,
                             std::uint64_t seed) {
  const std::size_t n = points.size();
  if (catalog_X.ground_size() != n) throw Error("construct", "catalog does not match the point set");
  const RangeFamily& family = catalog_X.family();
  ConstructionResult res;
  ResolvedPlan plan = resolve_plan(n, params, family);
  ConstructionReport& rep = res.report;
  rep.plan = plan;
  rep.n = n;
  WeightedSample& out = res.sample;

  switch (plan.mode) {
    case Mode::degenerate_whole_set:
      out.F = iota_u32(n);
      out.F1 = iota_u32(n);
      out.pi = Rational(1);
      break;
    case Mode::standard_fallback:
    case Mode::absolute_fallback: {
      Rng rng = Rng::for_stage(seed, "fallback_sample");
      auto s = certified_uniform(catalog_X, plan.f_size, plan.p, plan.eps, plan.caps.initial_retries, rng,
                                 "fallback_sample");
      rep.initial_retries = s.retries;
      out.F = std::move(s.indices);
      out.F1 = iota_u32(out.F.size());
      out.pi = Rational(1);
      break;
    }
    case Mode::full: {
      Rng rng_f = Rng::for_stage(seed, "initial_sample");
      auto init = initial_sample(catalog_X, plan, rng_f);
      rep.initial_retries = init.retries;
      out.F = init.indices;
      const PointSet f_points = points.subset(out.F);
      EnumerationOptions opts;
      opts.force_large_n = true;  // |F| < n and n already passed the cap
      res.catalog_F = canonical_ranges(f_points, family, opts);
      const RangeCatalog& cf = *res.catalog_F;
      rep.catalog_F_size = cf.size();
      res.layers = assign_layers(cf, plan);
      res.partition = classify_objects(cf, res.layers, plan);
      const auto& part = res.partition;
      {
        // |tau ∩ F| = |tau ∩ L| + |tau ∩ H| for every range.
        std::vector<std::uint32_t> cl(cf.size()), ch(cf.size());
        kernels::intersect_counts(cf.all_bits(), cf.words(), to_mask(cf.ground_size(), part.light), cl);
        kernels::intersect_counts(cf.all_bits(), cf.words(), to_mask(cf.ground_size(), part.heavy), ch);
        for (std::size_t r = 0; r < cf.size(); ++r)
          if (cl[r] + ch[r] != cf.range_size(r))
            throw Error("construct", "decomposition identity fails for range " + std::to_string(r));
        rep.identity_checked = true;
      }
      Rng rng_mt = Rng::for_stage(seed, "moser_tardos");
      auto mt = moser_tardos(cf, res.layers, part, plan, rng_mt);
      res.coins = mt.coins;
      rep.mt = std::move(mt.stats);
      for (std::size_t k = 0; k < res.coins.chosen.size(); ++k)
        if (res.coins.chosen[k]) out.F1.push_back(part.light[k]);
      out.H = part.heavy;
      out.pi = plan.pi;
      rep.layer_histogram = res.layers.histogram;
      rep.light_below_half = part.light_below_half;
      if (part.light_below_half) rep.warnings.push_back("fewer than half of the objects of F are light");
      if (plan.pi_clamped) rep.warnings.push_back("sampling probability clamped to 1");
      break;
    }
  }
  rep.f_size = out.F.size();
  rep.heavy = out.H.size();
  rep.light = out.F.size() - out.H.size();
  rep.f1 = out.F1.size();
  rep.support = out.support_size();
  return res;
}

ConstructionResult construct(const PointSet& points, const RangeFamily& family, const ApproxParams& params,
                             std::uint64_t seed, const EnumerationOptions& options) {
  const RangeCatalog catalog_X = canonical_ranges(points, family, options);
  return construct(points, catalog_X, params, seed);
}

}  // namespace relapprox
