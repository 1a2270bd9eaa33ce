#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "qrelax/executor.hpp"
#include "qrelax/rewrite.hpp"
#include "test_support.hpp"

using namespace qrelax;

namespace {

std::vector<std::string> ids(const std::vector<const Item*>& items) {
  std::vector<std::string> out;
  for (const Item* item : items) out.push_back(item->id);
  return out;
}

RelaxedQuery tv_relaxed(const Schema& schema, double brand, double type, double diagonal) {
  RelaxedQuery relaxed = unrelaxed(testsupport::tv_query(schema));
  relaxed.terms[0].delta = brand;
  relaxed.terms[1].delta = type;
  relaxed.terms[2].delta = diagonal;
  return relaxed;
}

}  // namespace

TEST_CASE("match_items finds the greedy result set") {
  const Catalog catalog = testsupport::tv_catalog();
  const DistanceModel model = testsupport::tv_distances(catalog.schema());
  const MatchSet set = match_items(catalog, tv_relaxed(catalog.schema(), 0.2, 0.1, 0.3), model);
  CHECK(ids(set.items) == std::vector<std::string>{"UN46B6000", "KDL-52XBR9", "KDL-46EX700"});
}

TEST_CASE("match_items finds the dp result set") {
  const Catalog catalog = testsupport::tv_catalog();
  const DistanceModel model = testsupport::tv_distances(catalog.schema());
  const MatchSet set = match_items(catalog, tv_relaxed(catalog.schema(), 0.3, 0.1, 0.1), model);
  CHECK(ids(set.items) == std::vector<std::string>{"KDL-52XBR9", "LC-52D85UN", "LC-52LE700UN"});
}

TEST_CASE("zero radii mean exact equality") {
  const Catalog catalog = testsupport::tv_catalog();
  const DistanceModel model = testsupport::tv_distances(catalog.schema());

  RelaxedQuery relaxed;
  relaxed.terms.push_back({"Brand", AttributeValue::categorical("Sony"), 0.0});
  relaxed.terms.push_back({"Type", AttributeValue::categorical("LCD"), 0.0});
  const MatchSet set = match_items(catalog, relaxed, model);
  CHECK(ids(set.items) == std::vector<std::string>{"KDL-52XBR9", "KDL-46EX700"});
}

TEST_CASE("items missing a queried attribute match only at radius 1") {
  std::istringstream in("id,Brand:cat,Type:cat\nx1,Samsung,LED\nx2,Samsung,\n");
  const Catalog catalog = load_catalog(in);
  const DistanceModel model{};

  RelaxedQuery relaxed;
  relaxed.terms.push_back({"Brand", AttributeValue::categorical("Samsung"), 0.0});
  relaxed.terms.push_back({"Type", AttributeValue::categorical("LED"), 0.9});
  CHECK(match_items(catalog, relaxed, model).count() == 1);

  relaxed.terms[1].delta = 1.0;
  CHECK(match_items(catalog, relaxed, model).count() == 2);
}

TEST_CASE("top_k ranks by distance to the original query with catalog-order ties") {
  const Catalog catalog = testsupport::tv_catalog();
  const DistanceModel model = testsupport::tv_distances(catalog.schema());
  const StructuredQuery query = testsupport::tv_query(catalog.schema());
  const MatchSet set = match_items(catalog, tv_relaxed(catalog.schema(), 0.2, 0.1, 0.3), model);

  // Distances: UN46B6000 0.1, KDL-52XBR9 0.1333..., KDL-46EX700 0.2.
  const std::vector<const Item*> ranked = top_k(set, query, model, 3);
  CHECK(ids(ranked) == std::vector<std::string>{"UN46B6000", "KDL-52XBR9", "KDL-46EX700"});

  // k beyond the match count returns everything in the same order.
  CHECK(top_k(set, query, model, 10).size() == 3);
  CHECK(ids(top_k(set, query, model, 10)) == ids(ranked));

  // Equal distances keep catalog order.
  RelaxedQuery all = unrelaxed(query);
  for (RelaxedTerm& term : all.terms) term.delta = 1.0;
  const MatchSet everything = match_items(catalog, all, model);
  REQUIRE(everything.count() == 10);
  const std::vector<const Item*> full = top_k(everything, query, model, 10);
  for (std::size_t i = 1; i < full.size(); ++i) {
    const double a = aggregate_distance(*full[i - 1], query, model);
    const double b = aggregate_distance(*full[i], query, model);
    CHECK(a <= b + 1e-12);
    if (a == b) {
      const auto& items = catalog.items();
      const auto pos = [&](const Item* item) {
        return std::find_if(items.begin(), items.end(), [&](const Item& x) { return &x == item; }) - items.begin();
      };
      CHECK(pos(full[i - 1]) < pos(full[i]));
    }
  }
}

TEST_CASE("index_hits counts the processed items") {
  const Catalog catalog = testsupport::tv_catalog();
  const DistanceModel model = testsupport::tv_distances(catalog.schema());

  CHECK(index_hits(match_items(catalog, tv_relaxed(catalog.schema(), 0.2, 0.1, 0.3), model)) == 3);

  // Attribute-Removal's rewrite keeps only Brand:Samsung.
  CHECK(index_hits(match_items(catalog, tv_relaxed(catalog.schema(), 0.0, 1.0, 1.0), model)) == 5);

  RelaxedQuery impossible;
  impossible.terms.push_back({"Brand", AttributeValue::categorical("Toshiba"), 0.0});
  CHECK(index_hits(match_items(catalog, impossible, model)) == 0);
}

TEST_CASE("enlarging any radius never drops a match") {
  std::mt19937_64 rng(41);
  for (int round = 0; round < 80; ++round) {
    const testsupport::RandomInstance instance = testsupport::make_random_instance(rng);
    RelaxedQuery relaxed = unrelaxed(instance.query);
    for (RelaxedTerm& term : relaxed.terms) term.delta = static_cast<double>(rng() % 4) * 0.25;

    const MatchSet before = match_items(instance.catalog, relaxed, instance.snapshot.distances());
    RelaxedQuery widened = relaxed;
    widened.terms[rng() % widened.terms.size()].delta = 1.0;
    const MatchSet after = match_items(instance.catalog, widened, instance.snapshot.distances());

    for (const Item* item : before.items) CHECK(std::count(after.items.begin(), after.items.end(), item) == 1);
  }
}

TEST_CASE("match_items agrees with an independent predicate scan") {
  std::mt19937_64 rng(43);
  for (int round = 0; round < 80; ++round) {
    const testsupport::RandomInstance instance = testsupport::make_random_instance(rng);
    RelaxedQuery relaxed = unrelaxed(instance.query);
    for (RelaxedTerm& term : relaxed.terms) term.delta = static_cast<double>(rng() % 5) * 0.25;

    const MatchSet set = match_items(instance.catalog, relaxed, instance.snapshot.distances());

    std::vector<const Item*> reference;
    for (const Item& item : instance.catalog.items()) {
      bool ok = true;
      for (const RelaxedTerm& term : relaxed.terms) {
        const AttributeValue* value = item.find(term.attribute);
        const double d =
            value ? instance.snapshot.distances().distance(term.attribute, term.value, *value) : 1.0;
        if (d > term.delta + 1e-9) {
          ok = false;
          break;
        }
      }
      if (ok) reference.push_back(&item);
    }
    CHECK(set.items == reference);
  }
}

TEST_CASE("top_k requires a positive k") {
  const Catalog catalog = testsupport::tv_catalog();
  const DistanceModel model = testsupport::tv_distances(catalog.schema());
  const StructuredQuery query = testsupport::tv_query(catalog.schema());
  CHECK_THROWS_AS(top_k(MatchSet{}, query, model, 0), std::invalid_argument);
}
