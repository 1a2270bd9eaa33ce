#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qrelax/catalog.hpp"

namespace qrelax {

/// Normalized numeric distance min(1, |v-w| / |v|); d(0,w) is 0 for w=0 and 1
/// otherwise, the conservative limit of the formula.
double numeric_distance(double v, double w) noexcept;

/// Per-attribute distance functions with range [0,1].
///
/// Lookups are directional: (query value, item value). A pair absent from the
/// table falls back to the numeric formula when both values are numeric, and
/// to the maximum distance 1 otherwise. d(v,v) is always 0.
class DistanceModel {
 public:
  struct Entry {
    std::string attribute;
    AttributeValue from;
    AttributeValue to;
    double distance = 0.0;
  };

  /// Throws on out-of-range distances, duplicate pairs, or a non-zero
  /// self-distance.
  void add_entry(std::string attribute, AttributeValue from, AttributeValue to, double distance);

  double distance(std::string_view attribute, const AttributeValue& from, const AttributeValue& to) const;

  /// All stored entries in deterministic (attribute, from, to) order.
  std::vector<Entry> entries() const;
  std::size_t entry_count() const noexcept;

 private:
  using PairKey = std::pair<AttributeValue, AttributeValue>;
  std::map<std::string, std::map<PairKey, double>, std::less<>> tables_;
};

/// Reads lines of the form `attr,v,w,distance`. Values are typed against the
/// schema; duplicate pairs are an error.
DistanceModel load_distance_model(std::istream& source, const Schema& schema,
                                  std::string_view source_name = "<distances>");

void save_distance_model(const DistanceModel& model, std::ostream& out);

/// Mean per-attribute distance between an item and the query's m terms.
/// An item missing a queried attribute contributes the maximum distance 1.
double aggregate_distance(const Item& item, const StructuredQuery& query, const DistanceModel& model);

/// Evaluation metric: mean aggregate distance over all results, padding any
/// shortfall below k with distance-1 phantoms (denominator k when short).
double mean_dist(std::span<const Item* const> results, const StructuredQuery& query,
                 const DistanceModel& model, std::int64_t k);

}  // namespace qrelax
