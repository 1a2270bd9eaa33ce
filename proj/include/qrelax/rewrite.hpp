#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qrelax/stats.hpp"

namespace qrelax {

/// Time budget of a rewrite: at most `max_evaluations` relaxed queries may be
/// estimated, and radii grow on a grid of step `epsilon`.
struct RewriteBudget {
  std::int64_t max_evaluations = 10;  // T
  double epsilon = 0.1;
};

enum class FdDirection { drop_determined, drop_determining };

/// One row of the greedy trace: the radii after the step, the per-attribute
/// ball counts at those radii, and the resulting estimate.
struct GreedyStep {
  std::vector<double> deltas;
  std::vector<std::int64_t> ball_counts;
  double estimate = 0.0;
};

/// The filled dynamic-programming table.
///
/// fractions[j][i] is the maximum product fraction achievable over the first
/// j+1 query attributes with total relaxation i*epsilon; chosen_step[j][i] is
/// the grid step assigned to attribute j in that maximum (the backpointer used
/// for reconstruction). Row lengths differ: row j is capped at
/// min(rho*epsilon, j+1).
struct DpTable {
  double epsilon = 0.0;
  std::vector<std::vector<double>> fractions;
  std::vector<std::vector<int>> chosen_step;
};

struct RewriteOutcome {
  RelaxedQuery relaxed;
  double estimate = 0.0;
  double total_relaxation = 0.0;
  std::int64_t evaluations_used = 0;
  bool target_met = false;
  std::vector<std::string> dropped_attributes;

  // Diagnostics: filled by the strategy that produced the outcome.
  std::vector<GreedyStep> trace;
  std::optional<DpTable> dp_table;
};

/// Repeatedly widens the radius of the most constraining attribute (smallest
/// ball count, ties to the first in query order) by epsilon until the
/// estimate reaches k or the evaluation budget is spent. The initial all-zero
/// query counts as the first evaluation. If the budget runs out, the last
/// (most relaxed) query is returned with target_met = false.
RewriteOutcome greedy_rewrite(const StructuredQuery& query, const StatsSnapshot& snapshot, std::int64_t k,
                              const RewriteBudget& budget);

/// Knapsack-style dynamic program over total relaxation. Each attribute may
/// take rho = floor(T/m) grid steps; cell (j, d) holds the best product
/// fraction over attributes 1..j with total relaxation at most d. The answer
/// is the smallest d whose estimate reaches k, reconstructed via
/// backpointers; ties inside a cell resolve to the smallest step for the
/// current attribute. Throws std::invalid_argument when T < m (rho = 0).
RewriteOutcome dp_rewrite(const StructuredQuery& query, const StatsSnapshot& snapshot, std::int64_t k,
                          const RewriteBudget& budget);

/// Baseline: repeatedly removes the most constraining attribute outright
/// (modeled as radius 1) until the estimate reaches k or one attribute
/// remains. No tuning parameter.
RewriteOutcome attribute_removal(const StructuredQuery& query, const StatsSnapshot& snapshot, std::int64_t k);

struct FdResult {
  StructuredQuery query;
  std::vector<std::string> dropped;
};

/// Drops one attribute of every query pair whose conditional probability
/// P(a_i = v_i | a_j = v_j) reaches the threshold: a_i (the determined side)
/// under drop_determined, a_j (the determining side) under drop_determining.
/// Ordered pairs are scanned in query order; removals take effect
/// immediately, and the last remaining attribute is never removed.
FdResult fd_preprocess(const StructuredQuery& query, const CondProbTable& cond_probs, double threshold,
                       FdDirection direction);

/// Exhaustive testing oracle: enumerates every radius vector on the epsilon
/// grid and returns one meeting the estimate target with minimum total
/// relaxation (ties: lexicographically smallest vector in query order).
/// Guarded to at most 10^7 grid points.
RewriteOutcome brute_force_optimal(const StructuredQuery& query, const StatsSnapshot& snapshot, std::int64_t k,
                                   double epsilon);

}  // namespace qrelax
