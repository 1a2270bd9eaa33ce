#pragma once

#include <concepts>
#include <cstdint>
#include <vector>

#include "qrelax/catalog.hpp"
#include "qrelax/distance.hpp"
#include "qrelax/stats.hpp"

namespace qrelax {

/// Items matching a relaxed query, in catalog order.
struct MatchSet {
  std::vector<const Item*> items;

  std::size_t count() const noexcept { return items.size(); }
};

/// An item matches when each queried attribute value lies within the term's
/// radius; an item missing a queried attribute matches only at radius 1.
bool matches(const Item& item, const RelaxedQuery& query, const DistanceModel& model);

/// Anything exposing the catalog's item list. The indirection lets tests
/// substitute access-counting wrappers when proving that the rewrite phase
/// never touches the catalog.
template <typename C>
concept CatalogSource = requires(const C& c) {
  { c.items() } -> std::convertible_to<const std::vector<Item>&>;
};

template <CatalogSource C>
MatchSet match_items(const C& catalog, const RelaxedQuery& query, const DistanceModel& model) {
  MatchSet set;
  for (const Item& item : catalog.items())
    if (matches(item, query, model)) set.items.push_back(&item);
  return set;
}

/// Up to k matches sorted by aggregate distance to the original (unrelaxed)
/// query, catalog order breaking ties.
std::vector<const Item*> top_k(const MatchSet& matches, const StructuredQuery& query, const DistanceModel& model,
                               std::int64_t k);

/// Number of items the index had to process for this relaxed query.
std::size_t index_hits(const MatchSet& matches) noexcept;

}  // namespace qrelax
