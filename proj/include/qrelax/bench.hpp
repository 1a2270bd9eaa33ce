#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qrelax/catalog.hpp"
#include "qrelax/executor.hpp"
#include "qrelax/rewrite.hpp"
#include "qrelax/stats.hpp"

namespace qrelax {

enum class Algorithm { greedy, dp, attribute_removal };
enum class FdMode { off, drop_determined, drop_determining };

std::string_view to_string(Algorithm algorithm) noexcept;
std::string_view to_string(FdMode mode) noexcept;

struct RunConfig {
  Algorithm algorithm = Algorithm::greedy;
  std::int64_t k = 10;
  std::int64_t max_evaluations = 10;  // T
  double epsilon = 0.1;
  FdMode fd = FdMode::off;
  double fd_threshold = 0.9;
};

struct ReportRow {
  std::string query_id;
  Algorithm algorithm = Algorithm::greedy;
  double epsilon = 0.0;
  std::int64_t max_evaluations = 0;
  FdMode fd = FdMode::off;
  double total_relaxation = 0.0;
  double estimate = 0.0;
  bool target_met = false;
  std::int64_t evaluations_used = 0;
  std::size_t index_hits = 0;
  double mean_dist = 1.0;
  std::string error;  // empty when the query ran cleanly
};

/// The statistics-only phase: FD preprocessing (when enabled) followed by the
/// configured strategy. Takes no catalog by construction.
RewriteOutcome rewrite_query(const StructuredQuery& query, const StatsSnapshot& snapshot, const RunConfig& config);

/// One row per query: rewrite against the snapshot, execute against the
/// catalog, score with mean_dist relative to the original query. Per-query
/// failures are recorded in the row and the run continues.
std::vector<ReportRow> run_workload(std::span<const StructuredQuery> queries, const Catalog& catalog,
                                    const StatsSnapshot& snapshot, const DistanceModel& model,
                                    const RunConfig& config);

enum class SweepAxis { epsilon, steps };

struct SweepRow {
  double axis_value = 0.0;
  double mean_mean_dist = 0.0;
  double median_index_hits = 0.0;
  double target_met_fraction = 0.0;
};

/// Runs the workload once per axis value (step size or step count) and
/// aggregates: mean of mean_dist, median of index hits, fraction of queries
/// whose target was met.
std::vector<SweepRow> sweep(std::span<const StructuredQuery> queries, const Catalog& catalog,
                            const StatsSnapshot& snapshot, const DistanceModel& model, const RunConfig& base,
                            SweepAxis axis, std::span<const double> values);

void write_report_csv(std::span<const ReportRow> rows, std::ostream& out);
void write_sweep_csv(SweepAxis axis, const RunConfig& base, std::span<const SweepRow> rows, std::ostream& out);

/// Shape of a synthetic corpus. Attribute a1 can be coupled to a0 so that a0
/// determines a1 with the given probability (correlation 1 yields exact
/// functional dependence); distance tables drop each unordered value pair
/// with the per-attribute missing fraction.
struct CorpusSpec {
  int attributes = 3;
  int items = 1000;
  std::vector<int> domain_sizes;                  // per attribute, each <= 64
  double correlation = 0.0;                       // coupling strength a0 -> a1
  std::vector<double> missing_distance_fraction;  // per attribute, default 0
  int queries = 0;
  std::int64_t under_match_threshold = 10;  // emitted queries match fewer items than this
  bool perturb_queries = true;              // swap one value per query for a rare one
};

struct SyntheticCorpus {
  Catalog catalog;
  DistanceModel distances;
  std::vector<StructuredQuery> queries;
};

/// Deterministic for a given seed: byte-identical catalogs, distance tables,
/// and query lists on every run.
SyntheticCorpus gen_synthetic(std::uint64_t seed, const CorpusSpec& spec);

}  // namespace qrelax
