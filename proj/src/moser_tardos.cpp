#include <algorithm>
#include <bit>
#include <numeric>

#include "relapprox/construction.hpp"
#include "relapprox/kernels.hpp"

namespace relapprox {

std::string_view to_string(EventCase c) {
  switch (c) {
    case EventCase::geq_threshold:
      return "geq_threshold";
    case EventCase::lt_threshold:
      return "lt_threshold";
    case EventCase::layer0:
      return "layer0";
    case EventCase::size:
      return "size";
  }
  return "?";
}

EventSystem::EventSystem(const RangeCatalog& catalog_F, const LayerStructure& layers, const HeavyLightPartition& part,
                         const ResolvedPlan& plan)
    : catalog_(&catalog_F), layers_(&layers), part_(&part), f_size_(catalog_F.ground_size()) {
  const std::size_t R = catalog_F.size();
  const std::size_t W = catalog_F.words();
  order_.resize(R);
  std::iota(order_.begin(), order_.end(), 0u);
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return layers.layer[a] < layers.layer[b]; });
  rank_.resize(R);
  bits_.resize(R * W);
  for (std::size_t k = 0; k < R; ++k) {
    rank_[order_[k]] = static_cast<std::uint32_t>(k);
    auto row = catalog_F.bits(order_[k]);
    std::copy(row.begin(), row.end(), bits_.begin() + static_cast<std::ptrdiff_t>(k * W));
  }
  light_counts_.resize(R);
  kernels::intersect_counts(bits_, W, to_mask(f_size_, part.light), light_counts_);

  // With pi = a/b, eps = en/ed, p = pn/pd, |L| = l, |F| = f and s = |tau ∩ L|,
  // the accepted values of c = |tau ∩ F1| are
  //   case (i):  pi s (1 - eps) <= c <= pi s (1 + eps)
  //   otherwise: |c - pi s| <= eps 2^(i-1) p pi l   (2^(i-1) -> 1 on layer 0)
  const i128 a = plan.pi.num(), b = plan.pi.den();
  const i128 en = plan.eps_int.num(), ed = plan.eps_int.den();
  const i128 pn = plan.p_int.num(), pd = plan.p_int.den();
  const i128 l = static_cast<i128>(part.light.size());
  const i128 f = static_cast<i128>(f_size_);
  lo_.resize(R);
  hi_.resize(R);
  cases_.resize(R);
  for (std::size_t k = 0; k < R; ++k) {
    const int i = layers.layer[order_[k]];
    const i128 s = light_counts_[k];
    const i128 scale = i >= 1 ? (i128{1} << (i - 1)) : 1;
    i128 lo, hi;
    if (i >= 1 && checked_mul(s, pd) >= checked_mul(checked_mul(scale, pn), f)) {
      cases_[k] = EventCase::geq_threshold;
      lo = ceil_div(checked_mul(checked_mul(a, s), ed - en), checked_mul(b, ed));
      hi = floor_div(checked_mul(checked_mul(a, s), ed + en), checked_mul(b, ed));
    } else {
      cases_[k] = i >= 1 ? EventCase::lt_threshold : EventCase::layer0;
      const i128 centre = checked_mul(checked_mul(checked_mul(a, s), ed), pd);
      const i128 margin = checked_mul(checked_mul(checked_mul(checked_mul(en, scale), pn), a), l);
      const i128 den = checked_mul(checked_mul(b, ed), pd);
      lo = ceil_div(centre - margin, den);
      hi = floor_div(checked_add(centre, margin), den);
    }
    lo = std::max<i128>(lo, 0);
    hi = std::min<i128>(hi, s);
    if (lo > hi) ++infeasible_;
    lo_[k] = static_cast<std::int32_t>(lo);
    hi_[k] = static_cast<std::int32_t>(std::max<i128>(hi, -1));
  }
  // B: |F1| > (1 + gamma) pi l.
  const i128 gn = plan.constants.gamma.num(), gd = plan.constants.gamma.den();
  size_hi_ = static_cast<std::size_t>(floor_div(checked_mul(checked_mul(checked_add(gd, gn), a), l), checked_mul(b, gd)));
}

void EventSystem::counts_for(const CoinVector& coins, std::vector<std::uint32_t>& counts) const {
  counts.resize(order_.size());
  kernels::intersect_counts(bits_, catalog_->words(), chosen_mask(coins, *part_, f_size_), counts);
}

BadEvent EventSystem::make_event(std::size_t rank, std::uint32_t count) const {
  BadEvent ev;
  ev.kind = EventKind::A_tau;
  ev.range_id = order_[rank];
  ev.layer = layers_->layer[ev.range_id];
  ev.ecase = cases_[rank];
  ev.side = static_cast<std::int32_t>(count) < lo_[rank] ? Side::lower : Side::upper;
  const std::size_t W = catalog_->words();
  for (std::size_t w = 0; w < W; ++w)
    for (std::uint64_t x = bits_[rank * W + w]; x != 0; x &= x - 1) {
      const auto j = static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(std::countr_zero(x)));
      if (part_->light_pos[j] >= 0) ev.dependency.push_back(static_cast<std::uint32_t>(part_->light_pos[j]));
    }
  return ev;
}

namespace {

BadEvent size_event(std::size_t light) {
  BadEvent ev;
  ev.kind = EventKind::B_size;
  ev.ecase = EventCase::size;
  ev.side = Side::upper;
  ev.dependency.resize(light);
  std::iota(ev.dependency.begin(), ev.dependency.end(), 0u);
  return ev;
}

}  // namespace

std::optional<BadEvent> EventSystem::first_violated(const CoinVector& coins) const {
  if (coins.count() > size_hi_) return size_event(part_->light.size());
  std::vector<std::uint32_t> counts;
  counts_for(coins, counts);
  const std::size_t k = kernels::first_out_of_bounds(counts, lo_, hi_);
  if (k == counts.size()) return std::nullopt;
  return make_event(k, counts[k]);
}

std::vector<BadEvent> EventSystem::all_violated(const CoinVector& coins) const {
  std::vector<BadEvent> out;
  if (coins.count() > size_hi_) out.push_back(size_event(part_->light.size()));
  std::vector<std::uint32_t> counts;
  counts_for(coins, counts);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const auto c = static_cast<std::int32_t>(counts[k]);
    if (c < lo_[k] || c > hi_[k]) out.push_back(make_event(k, counts[k]));
  }
  return out;
}

std::vector<BadEvent> violated_events(const RangeCatalog& catalog_F, const LayerStructure& layers,
                                      const HeavyLightPartition& part, const CoinVector& coins,
                                      const ResolvedPlan& plan) {
  if (coins.chosen.size() != part.light.size()) throw Error("events", "coin vector length differs from |L|");
  return EventSystem(catalog_F, layers, part, plan).all_violated(coins);
}

nlohmann::json MtStats::to_json() const {
  return {{"resample_count", resample_count}, {"per_event", per_event}};
}

MtResult moser_tardos(const RangeCatalog& catalog_F, const LayerStructure& layers, const HeavyLightPartition& part,
                      const ResolvedPlan& plan, Rng& rng) {
  const EventSystem events(catalog_F, layers, part, plan);
  if (events.infeasible_count() > 0)
    throw ResampleCapExceeded(std::to_string(events.infeasible_count()) +
                                  " events hold for every coin vector; resampling cannot terminate",
                              events.infeasible_count());
  MtResult res;
  res.coins = draw_coins(part.light.size(), plan.pi, rng);
  while (auto ev = events.first_violated(res.coins)) {
    if (res.stats.resample_count >= plan.caps.mt_max_resamples) {
      const std::size_t surviving = events.all_violated(res.coins).size();
      throw ResampleCapExceeded("resample cap " + std::to_string(plan.caps.mt_max_resamples) + " reached with " +
                                    std::to_string(surviving) + " events still violated",
                                surviving);
    }
    for (std::uint32_t k : ev->dependency) res.coins.chosen[k] = rng.bernoulli(plan.pi) ? 1 : 0;
    ++res.stats.resample_count;
    const std::string key = ev->kind == EventKind::B_size
                                ? "B_size"
                                : "A_tau/layer=" + std::to_string(ev->layer) + "/" + std::string(to_string(ev->ecase));
    ++res.stats.per_event[key];
  }
  return res;
}

}  // namespace relapprox
