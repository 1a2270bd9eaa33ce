#include "qrelax/executor.hpp"

#include <algorithm>
#include <stdexcept>

namespace qrelax {

bool matches(const Item& item, const RelaxedQuery& query, const DistanceModel& model) {
  for (const RelaxedTerm& term : query.terms) {
    const AttributeValue* value = item.find(term.attribute);
    if (value == nullptr) {
      if (term.delta < 1.0 - kDeltaTolerance) return false;
      continue;
    }
    if (model.distance(term.attribute, term.value, *value) > term.delta + kDeltaTolerance) return false;
  }
  return true;
}

std::vector<const Item*> top_k(const MatchSet& matches, const StructuredQuery& query, const DistanceModel& model,
                               std::int64_t k) {
  if (k < 1) throw std::invalid_argument("top_k requires k >= 1");
  // Ranking is against the original query; stable sort keeps catalog order on
  // equal distances.
  std::vector<std::pair<double, const Item*>> scored;
  scored.reserve(matches.items.size());
  for (const Item* item : matches.items) scored.emplace_back(aggregate_distance(*item, query, model), item);
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  if (scored.size() > static_cast<std::size_t>(k)) scored.resize(static_cast<std::size_t>(k));
  std::vector<const Item*> ranked;
  ranked.reserve(scored.size());
  for (const auto& [distance, item] : scored) ranked.push_back(item);
  return ranked;
}

std::size_t index_hits(const MatchSet& matches) noexcept { return matches.count(); }

}  // namespace qrelax
