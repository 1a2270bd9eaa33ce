#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "qrelax/catalog.hpp"
#include "qrelax/distance.hpp"

namespace qrelax {

/// Comparison slack for delta grids, so that accumulated epsilon steps still
/// admit distances written with short decimals (e.g. 3*0.1 vs "0.3").
inline constexpr double kDeltaTolerance = 1e-9;

struct RelaxedTerm {
  std::string attribute;
  AttributeValue value;
  double delta = 0.0;

  friend bool operator==(const RelaxedTerm&, const RelaxedTerm&) = default;
};

/// A structured query whose terms each carry a relaxation radius in [0,1].
struct RelaxedQuery {
  std::vector<RelaxedTerm> terms;

  std::size_t size() const noexcept { return terms.size(); }
  double total_relaxation() const noexcept;
  const RelaxedTerm* find(std::string_view attribute) const noexcept;

  friend bool operator==(const RelaxedQuery&, const RelaxedQuery&) = default;
};

/// All radii zero: matches exactly the original query.
RelaxedQuery unrelaxed(const StructuredQuery& query);

/// "attr:value~delta;..." (the file/CLI form of a relaxed query).
std::string render_relaxed_query(const RelaxedQuery& query);

struct AttributeHistogram {
  std::map<AttributeValue, std::int64_t> counts;
  std::int64_t missing = 0;

  std::int64_t total() const noexcept;
};

/// Pairwise conditional probabilities P(a_i = v_i | a_j = v_j), stored only
/// for value pairs that co-occur at least once; absent pairs read as 0.
class CondProbTable {
 public:
  using Key = std::tuple<std::string, AttributeValue, std::string, AttributeValue>;

  void insert(Key key, double probability);
  double probability(std::string_view attr_i, const AttributeValue& value_i, std::string_view attr_j,
                     const AttributeValue& value_j) const noexcept;
  const std::map<Key, double>& entries() const noexcept { return probabilities_; }

 private:
  std::map<Key, double> probabilities_;
};

/// Precomputed statistics of one catalog version: exact per-value histograms,
/// the catalog size, pairwise conditional probabilities, and the distance
/// model that defines relaxation balls. Immutable once built; this is the
/// only state the rewrite strategies may read.
class StatsSnapshot {
 public:
  std::int64_t catalog_size() const noexcept { return catalog_size_; }
  const Schema& schema() const noexcept { return schema_; }
  const DistanceModel& distances() const noexcept { return distances_; }
  const CondProbTable& cond_probs() const noexcept { return cond_probs_; }

  bool has_attribute(std::string_view attribute) const noexcept;
  const AttributeHistogram& histogram(std::string_view attribute) const;

  /// B(v, delta): the catalog-occurring values within distance delta of v.
  std::vector<AttributeValue> ball(std::string_view attribute, const AttributeValue& value, double delta) const;

  /// Sum of histogram counts over the ball. Items missing the attribute are
  /// at distance 1 and therefore count only when delta reaches 1.
  std::int64_t ball_count(std::string_view attribute, const AttributeValue& value, double delta) const;

  /// Independence-assumption estimate |P| * prod_i h_i(B_i)/|P| of how many
  /// items match the relaxed query.
  double estimate_matches(const RelaxedQuery& query) const;

  void save(std::ostream& out) const;
  static StatsSnapshot load(std::istream& source, std::string_view source_name = "<stats>");

  friend StatsSnapshot build_stats(const Catalog& catalog, DistanceModel model);

 private:
  StatsSnapshot() = default;

  std::int64_t catalog_size_ = 0;
  Schema schema_;
  std::map<std::string, AttributeHistogram, std::less<>> histograms_;
  CondProbTable cond_probs_;
  DistanceModel distances_;
};

/// Single pass over a non-empty catalog: exact histograms per attribute plus
/// exact conditional probabilities over every ordered attribute pair.
StatsSnapshot build_stats(const Catalog& catalog, DistanceModel model);

}  // namespace qrelax
