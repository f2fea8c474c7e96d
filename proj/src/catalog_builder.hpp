#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "relapprox/catalog.hpp"

namespace relapprox {

// Accumulates candidate member sets, optionally deduplicating them, and turns
// them into a size-then-lex sorted RangeCatalog.
class CatalogBuilder {
 public:
  CatalogBuilder(std::size_t ground_size, RangeFamily family, bool dedupe, bool keep_witnesses);

  std::size_t words() const { return words_; }

  // Scratch row for composing a candidate; commit() inserts it.
  std::uint64_t* scratch() { return scratch_.data(); }
  void clear_scratch();
  // Returns true if the scratch set was new.
  bool commit(const Witness& witness);
  bool add(const std::uint64_t* row, const Witness& witness);

  std::size_t candidate_count() const { return candidates_; }
  std::size_t distinct_count() const { return rows_; }

  RangeCatalog finish();

 private:
  struct RowHash {
    const CatalogBuilder* owner;
    std::size_t operator()(std::uint32_t row) const;
  };
  struct RowEq {
    const CatalogBuilder* owner;
    bool operator()(std::uint32_t a, std::uint32_t b) const;
  };

  const std::uint64_t* row(std::uint32_t r) const { return bits_.data() + static_cast<std::size_t>(r) * words_; }

  std::size_t ground_size_;
  RangeFamily family_;
  std::size_t words_;
  bool dedupe_;
  bool keep_witnesses_;
  std::vector<std::uint64_t> bits_;
  std::vector<Witness> witnesses_;
  std::vector<std::uint64_t> scratch_;
  std::unordered_set<std::uint32_t, RowHash, RowEq> index_;
  std::size_t rows_ = 0;
  std::size_t candidates_ = 0;
};

// Family enumerators (one translation unit each).
void enumerate_halfplanes(const PointSet& points, CatalogBuilder& out);
void enumerate_halfspaces(const PointSet& points, CatalogBuilder& out);
void enumerate_boxes(const PointSet& points, CatalogBuilder& out);

}  // namespace relapprox
