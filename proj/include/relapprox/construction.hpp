#pragma once

// The weighted relative-approximation construction: certified initial sample
// F, layers, heavy/light split, light coins repaired by Moser-Tardos
// resampling, and the resulting two-weight sample F1 ∪ H.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "relapprox/catalog.hpp"
#include "relapprox/error.hpp"
#include "relapprox/plan.hpp"
#include "relapprox/rng.hpp"
#include "relapprox/verifier.hpp"

namespace relapprox {

// ---------------------------------------------------------------- errors

struct RetriesExhausted : Error {
  RetriesExhausted(std::string stage, const std::string& msg, std::size_t best_violations)
      : Error(std::move(stage), msg), best_violation_count(best_violations) {}
  std::size_t best_violation_count;
};

struct ResampleCapExceeded : Error {
  ResampleCapExceeded(const std::string& msg, std::size_t surviving)
      : Error("moser_tardos", msg), surviving_events(surviving) {}
  std::size_t surviving_events;
};

// ---------------------------------------------------------------- sampling F

struct InitialSample {
  std::vector<std::uint32_t> indices;  // into X, ascending
  std::size_t retries = 0;             // failed attempts before the certified one
  ViolationReport certificate;
};

// Draws f_size points without replacement until the uniform measure on the
// sample is a relative (p_int, eps_int)-approximation of catalog_X. Throws
// RetriesExhausted after plan.caps.initial_retries failures.
InitialSample initial_sample(const RangeCatalog& catalog_X, const ResolvedPlan& plan, Rng& rng);

// ---------------------------------------------------------------- layers

struct LayerStructure {
  std::vector<std::uint8_t> layer;      // per catalog range
  std::vector<std::size_t> histogram;   // ranges per layer, 0..L_max
};

// Layer of a range with `count` of `f_size` objects: 0 below p, else the i
// with 2^(i-1) p <= count/f_size < 2^i p, capped at L_max.
int layer_of(std::size_t count, std::size_t f_size, const Rational& p, int layer_count);

LayerStructure assign_layers(const RangeCatalog& catalog_F, const ResolvedPlan& plan);

// ---------------------------------------------------------------- heavy/light

struct HeavyLightPartition {
  std::vector<std::uint32_t> heavy;        // F indices, ascending
  std::vector<std::uint32_t> light;        // F indices, ascending
  std::vector<std::int32_t> light_pos;     // F index -> position in `light`, or -1
  std::vector<std::vector<std::uint64_t>> counts;  // [layer][F index] incidences
  bool light_below_half = false;           // |L| < |F|/2

  bool is_heavy(std::uint32_t j) const { return light_pos[j] < 0; }
};

HeavyLightPartition classify_objects(const RangeCatalog& catalog_F, const LayerStructure& layers,
                                     const ResolvedPlan& plan);

// ---------------------------------------------------------------- coins

struct CoinVector {
  std::vector<std::uint8_t> chosen;  // one per light object
  std::size_t count() const;
};

CoinVector draw_coins(std::size_t light_size, const Rational& pi, Rng& rng);

// Bitset over F of the chosen light objects.
std::vector<std::uint64_t> chosen_mask(const CoinVector& coins, const HeavyLightPartition& part, std::size_t f_size);

// ---------------------------------------------------------------- events

enum class EventKind { A_tau, B_size };
enum class EventCase { geq_threshold, lt_threshold, layer0, size };
enum class Side { lower, upper };
std::string_view to_string(EventCase c);

struct BadEvent {
  EventKind kind = EventKind::A_tau;
  std::uint32_t range_id = 0;
  int layer = 0;
  EventCase ecase = EventCase::layer0;
  Side side = Side::lower;
  std::vector<std::uint32_t> dependency;  // positions in L
};

// Integer acceptance interval for |tau ∩ F1| of every range, and for |F1|.
// A range's event holds iff its count falls outside [lo, hi].
class EventSystem {
 public:
  EventSystem(const RangeCatalog& catalog_F, const LayerStructure& layers, const HeavyLightPartition& part,
              const ResolvedPlan& plan);

  std::size_t range_count() const { return order_.size(); }
  // Ranges in resampling order: by (layer, range id).
  std::span<const std::uint32_t> order() const { return order_; }
  std::int32_t lo(std::size_t r) const { return lo_[rank_[r]]; }
  std::int32_t hi(std::size_t r) const { return hi_[rank_[r]]; }
  EventCase event_case(std::size_t r) const { return cases_[rank_[r]]; }
  std::uint32_t light_count(std::size_t r) const { return light_counts_[rank_[r]]; }
  std::size_t size_bound() const { return size_hi_; }

  // Ranges whose event can never be avoided (lo > hi).
  std::size_t infeasible_count() const { return infeasible_; }

  // First violated event in resampling order (B first), or nothing.
  std::optional<BadEvent> first_violated(const CoinVector& coins) const;
  // All violated events in resampling order.
  std::vector<BadEvent> all_violated(const CoinVector& coins) const;

 private:
  BadEvent make_event(std::size_t rank, std::uint32_t count) const;
  void counts_for(const CoinVector& coins, std::vector<std::uint32_t>& counts) const;

  const RangeCatalog* catalog_;
  const LayerStructure* layers_;
  const HeavyLightPartition* part_;
  std::size_t f_size_;
  std::vector<std::uint32_t> order_;  // rank -> range id
  std::vector<std::uint32_t> rank_;   // range id -> rank
  std::vector<std::uint64_t> bits_;   // catalog rows in rank order
  std::vector<std::int32_t> lo_, hi_;
  std::vector<EventCase> cases_;
  std::vector<std::uint32_t> light_counts_;
  std::size_t size_hi_ = 0;
  std::size_t infeasible_ = 0;
};

std::vector<BadEvent> violated_events(const RangeCatalog& catalog_F, const LayerStructure& layers,
                                      const HeavyLightPartition& part, const CoinVector& coins,
                                      const ResolvedPlan& plan);

// ---------------------------------------------------------------- resampling

struct MtStats {
  std::uint64_t resample_count = 0;
  std::map<std::string, std::uint64_t> per_event;  // "B_size", "A_tau/layer=2/geq_threshold", ...
  nlohmann::json to_json() const;
};

struct MtResult {
  CoinVector coins;
  MtStats stats;
};

// Throws ResampleCapExceeded when plan.caps.mt_max_resamples is reached, or
// immediately when some event is unavoidable.
MtResult moser_tardos(const RangeCatalog& catalog_F, const LayerStructure& layers, const HeavyLightPartition& part,
                      const ResolvedPlan& plan, Rng& rng);

// ---------------------------------------------------------------- output

struct WeightedSample {
  std::vector<std::uint32_t> F;   // ground indices of F, ascending
  std::vector<std::uint32_t> F1;  // F indices, weight 1
  std::vector<std::uint32_t> H;   // F indices, weight pi
  Rational pi{1};

  std::size_t support_size() const { return F1.size() + H.size(); }
  // Ground indices with positive weight.
  std::vector<std::uint32_t> support() const;
  // Measure over F (ground = F) or over X (ground size n).
  CountingMeasure measure_on_F() const;
  CountingMeasure measure_on_X(std::size_t n) const;
};

// (|tau ∩ F1| + pi |tau ∩ H|) / (pi |F|), members given as F indices.
Rational weighted_measure(const WeightedSample& sample, std::span<const std::uint32_t> range_members);

struct ConstructionReport {
  ResolvedPlan plan;
  std::size_t n = 0, f_size = 0, heavy = 0, light = 0, f1 = 0, support = 0;
  std::size_t initial_retries = 0;
  std::size_t catalog_F_size = 0;
  std::vector<std::size_t> layer_histogram;
  bool light_below_half = false;
  bool identity_checked = false;
  std::size_t infeasible_events = 0;
  MtStats mt;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

struct ConstructionResult {
  WeightedSample sample;
  ConstructionReport report;
  // Full mode only: the intermediate state, kept for certification.
  std::optional<RangeCatalog> catalog_F;
  LayerStructure layers;
  HeavyLightPartition partition;
  CoinVector coins;
};

// Pure function of (points, family, params, seed); every stage draws from its
// own derived stream. catalog_X must be the catalog of `points`.
ConstructionResult construct(const PointSet& points, const RangeCatalog& catalog_X, const ApproxParams& params,
                             std::uint64_t seed);
ConstructionResult construct(const PointSet& points, const RangeFamily& family, const ApproxParams& params,
                             std::uint64_t seed, const EnumerationOptions& options = {});

}  // namespace relapprox
