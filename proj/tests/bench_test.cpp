#include <memory>
#include <random>
#include <sstream>

#include "doctest.h"
#include "qrelax/bench.hpp"
#include "test_support.hpp"

using namespace qrelax;

namespace {

struct WorkedExample {
  Catalog catalog;
  StatsSnapshot snapshot;
  DistanceModel model;
  std::vector<StructuredQuery> queries;
};

WorkedExample worked_example() {
  Catalog catalog = testsupport::tv_catalog();
  StatsSnapshot snapshot = build_stats(catalog, testsupport::tv_distances(catalog.schema()));
  DistanceModel model = testsupport::tv_distances(catalog.schema());
  std::vector<StructuredQuery> queries = {testsupport::tv_query(catalog.schema())};
  return {std::move(catalog), std::move(snapshot), std::move(model), std::move(queries)};
}

std::string csv(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  write_report_csv(rows, out);
  return out.str();
}

}  // namespace

TEST_CASE("run_workload scores the worked example") {
  const WorkedExample example = worked_example();

  RunConfig config;
  config.algorithm = Algorithm::greedy;
  config.k = 3;
  config.max_evaluations = 10;
  config.epsilon = 0.1;

  const std::vector<ReportRow> rows =
      run_workload(example.queries, example.catalog, example.snapshot, example.model, config);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].query_id == "q1");
  CHECK(rows[0].error.empty());
  CHECK(rows[0].total_relaxation == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(rows[0].index_hits == 3);
  CHECK(rows[0].target_met);
  CHECK(rows[0].evaluations_used == 7);
  CHECK(rows[0].mean_dist == doctest::Approx(13.0 / 90.0).epsilon(1e-9));

  config.algorithm = Algorithm::dp;
  config.max_evaluations = 15;
  const std::vector<ReportRow> dp_rows =
      run_workload(example.queries, example.catalog, example.snapshot, example.model, config);
  REQUIRE(dp_rows.size() == 1);
  CHECK(dp_rows[0].total_relaxation == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(dp_rows[0].index_hits == 3);
  CHECK(dp_rows[0].target_met);
}

TEST_CASE("run_workload handles an empty query list") {
  const WorkedExample example = worked_example();
  const std::vector<ReportRow> rows =
      run_workload({}, example.catalog, example.snapshot, example.model, RunConfig{});
  CHECK(rows.empty());
}

TEST_CASE("per-query failures are recorded and the run continues") {
  const WorkedExample example = worked_example();
  std::vector<StructuredQuery> queries = example.queries;  // 3 attributes: dp needs T >= 3
  StructuredQuery single;
  single.terms.push_back({"Brand", AttributeValue::categorical("Samsung")});
  queries.push_back(single);

  RunConfig config;
  config.algorithm = Algorithm::dp;
  config.k = 3;
  config.max_evaluations = 2;
  config.epsilon = 0.1;

  const std::vector<ReportRow> rows =
      run_workload(queries, example.catalog, example.snapshot, example.model, config);
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].error.empty());
  CHECK(rows[0].mean_dist == 1.0);
  CHECK_FALSE(rows[0].target_met);
  CHECK(rows[1].error.empty());
  CHECK(rows[1].target_met);
}

TEST_CASE("reports are deterministic and carry the pinned header") {
  const WorkedExample example = worked_example();
  RunConfig config;
  config.algorithm = Algorithm::greedy;
  config.k = 3;

  const auto first = csv(run_workload(example.queries, example.catalog, example.snapshot, example.model, config));
  const auto second = csv(run_workload(example.queries, example.catalog, example.snapshot, example.model, config));
  CHECK(first == second);
  CHECK(first.substr(0, first.find('\n')) ==
        "query_id,algo,epsilon,T,fd,tr,estimate,target_met,evals,index_hits,mean_dist");
}

TEST_CASE("sweep aggregates match a recomputation from raw rows") {
  const WorkedExample example = worked_example();
  RunConfig config;
  config.algorithm = Algorithm::greedy;
  config.k = 3;
  config.max_evaluations = 10;
  config.epsilon = 0.1;

  const double value = 0.1;
  const std::vector<SweepRow> aggregate = sweep(example.queries, example.catalog, example.snapshot, example.model,
                                                config, SweepAxis::epsilon, std::vector<double>{value});
  REQUIRE(aggregate.size() == 1);

  const std::vector<ReportRow> rows =
      run_workload(example.queries, example.catalog, example.snapshot, example.model, config);
  double dist_sum = 0.0;
  std::size_t met = 0;
  for (const ReportRow& row : rows) {
    dist_sum += row.mean_dist;
    met += row.target_met ? 1 : 0;
  }
  CHECK(aggregate[0].mean_mean_dist == dist_sum / static_cast<double>(rows.size()));
  CHECK(aggregate[0].median_index_hits == static_cast<double>(rows[0].index_hits));
  CHECK(aggregate[0].target_met_fraction == static_cast<double>(met) / static_cast<double>(rows.size()));
}

TEST_CASE("on the worked example the index work orders dp <= greedy <= removal") {
  const WorkedExample example = worked_example();
  RunConfig config;
  config.k = 3;
  config.epsilon = 0.1;

  const auto median_hits = [&](Algorithm algorithm, std::int64_t budget) {
    RunConfig local = config;
    local.algorithm = algorithm;
    local.max_evaluations = budget;
    const std::vector<SweepRow> rows =
        sweep(example.queries, example.catalog, example.snapshot, example.model, local, SweepAxis::steps,
              std::vector<double>{static_cast<double>(budget)});
    return rows.at(0).median_index_hits;
  };

  // With T=15 every strategy meets the target: hits are 3, 3, and 5.
  CHECK(median_hits(Algorithm::dp, 15) == 3.0);
  CHECK(median_hits(Algorithm::greedy, 15) == 3.0);
  CHECK(median_hits(Algorithm::attribute_removal, 15) == 5.0);

  // At T=10 the ordering still holds.
  CHECK(median_hits(Algorithm::dp, 10) <= median_hits(Algorithm::greedy, 10));
  CHECK(median_hits(Algorithm::greedy, 10) <= median_hits(Algorithm::attribute_removal, 10));
}

TEST_CASE("sweep validates its axis values") {
  const WorkedExample example = worked_example();
  RunConfig config;
  config.k = 3;
  CHECK_THROWS_AS(sweep(example.queries, example.catalog, example.snapshot, example.model, config,
                        SweepAxis::steps, std::vector<double>{2.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(sweep(example.queries, example.catalog, example.snapshot, example.model, config,
                        SweepAxis::epsilon, std::vector<double>{}),
                  std::invalid_argument);
}

TEST_CASE("the rewrite phase performs zero catalog reads") {
  auto catalog = std::make_unique<Catalog>(testsupport::tv_catalog());
  const StatsSnapshot snapshot = build_stats(*catalog, testsupport::tv_distances(catalog->schema()));
  const StructuredQuery query = testsupport::tv_query(catalog->schema());

  testsupport::CountingCatalog counted;
  counted.inner = catalog.get();

  RunConfig config;
  config.k = 3;
  config.max_evaluations = 15;
  config.epsilon = 0.1;

  std::vector<RewriteOutcome> outcomes;
  for (const Algorithm algorithm : {Algorithm::greedy, Algorithm::dp, Algorithm::attribute_removal}) {
    config.algorithm = algorithm;
    outcomes.push_back(rewrite_query(query, snapshot, config));
  }
  CHECK(counted.reads == 0);  // phase one never touches the catalog

  for (const RewriteOutcome& outcome : outcomes) match_items(counted, outcome.relaxed, snapshot.distances());
  CHECK(counted.reads == outcomes.size());  // phase two scans once per query

  // The snapshot owns copies of everything it needs.
  catalog.reset();
  const RewriteOutcome after = greedy_rewrite(query, snapshot, 3, RewriteBudget{10, 0.1});
  CHECK(after.target_met);
  CHECK(after.estimate == doctest::Approx(4.48).epsilon(1e-9));
}

TEST_CASE("gen_synthetic is deterministic per seed") {
  CorpusSpec spec;
  spec.attributes = 3;
  spec.items = 300;
  spec.correlation = 0.5;
  spec.missing_distance_fraction = {0.2, 0.2, 0.2};
  spec.queries = 10;
  spec.under_match_threshold = 5;

  const auto serialize = [](const SyntheticCorpus& corpus) {
    std::ostringstream out;
    save_catalog(corpus.catalog, out);
    save_distance_model(corpus.distances, out);
    for (const StructuredQuery& query : corpus.queries) out << render_query(query) << '\n';
    return out.str();
  };

  const std::string first = serialize(gen_synthetic(1, spec));
  const std::string again = serialize(gen_synthetic(1, spec));
  const std::string other = serialize(gen_synthetic(2, spec));
  CHECK(first == again);
  CHECK(first != other);
}

TEST_CASE("full correlation yields conditional probability 1 on co-occurring pairs") {
  CorpusSpec spec;
  spec.attributes = 2;
  spec.items = 400;
  spec.domain_sizes = {12, 5};
  spec.correlation = 1.0;
  const SyntheticCorpus corpus = gen_synthetic(3, spec);
  const StatsSnapshot snapshot = build_stats(corpus.catalog, corpus.distances);
  std::size_t checked = 0;
  for (const auto& [key, probability] : snapshot.cond_probs().entries()) {
    if (std::get<0>(key) == "a1" && std::get<2>(key) == "a0") {
      CHECK(probability == 1.0);
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("generated queries under-match by construction") {
  CorpusSpec spec;
  spec.attributes = 3;
  spec.items = 500;
  spec.queries = 25;
  spec.under_match_threshold = 6;
  const SyntheticCorpus corpus = gen_synthetic(7, spec);
  REQUIRE(corpus.queries.size() == 25);
  for (const StructuredQuery& query : corpus.queries) {
    const MatchSet exact = match_items(corpus.catalog, unrelaxed(query), corpus.distances);
    CHECK(exact.count() < 6);
  }
}

TEST_CASE("independent attributes keep the estimator close to the truth") {
  CorpusSpec spec;
  spec.attributes = 3;
  spec.items = 1000;
  spec.domain_sizes = {10, 10, 10};
  spec.correlation = 0.0;
  const SyntheticCorpus corpus = gen_synthetic(1, spec);
  const StatsSnapshot snapshot = build_stats(corpus.catalog, corpus.distances);

  std::mt19937_64 rng(5);
  double total_relative_error = 0.0;
  int samples = 0;
  for (int round = 0; round < 60; ++round) {
    RelaxedQuery relaxed;
    for (int a = 0; a < 3; ++a) {
      const std::string attribute = "a" + std::to_string(a);
      const AttributeHistogram& histogram = snapshot.histogram(attribute);
      auto it = histogram.counts.begin();
      std::advance(it, static_cast<long>(rng() % histogram.counts.size()));
      relaxed.terms.push_back({attribute, it->first, static_cast<double>(rng() % 4) * 0.25});
    }
    const double estimate = snapshot.estimate_matches(relaxed);
    const double truth = static_cast<double>(match_items(corpus.catalog, relaxed, corpus.distances).count());
    total_relative_error += std::abs(estimate - truth) / std::max(truth, 1.0);
    ++samples;
  }
  CHECK(total_relative_error / samples < 0.25);
}

TEST_CASE("corpus specs are validated") {
  CorpusSpec spec;
  spec.attributes = 9;
  CHECK_THROWS_AS(gen_synthetic(1, spec), std::invalid_argument);
  spec.attributes = 2;
  spec.items = 100001;
  CHECK_THROWS_AS(gen_synthetic(1, spec), std::invalid_argument);
  spec.items = 100;
  spec.domain_sizes = {65, 5};
  CHECK_THROWS_AS(gen_synthetic(1, spec), std::invalid_argument);
  spec.domain_sizes = {5, 5};
  spec.correlation = 1.5;
  CHECK_THROWS_AS(gen_synthetic(1, spec), std::invalid_argument);
}
