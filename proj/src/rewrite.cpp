#include "qrelax/rewrite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qrelax {

namespace {

void validate_query(const StructuredQuery& query) {
  if (query.terms.empty()) throw std::invalid_argument("rewrite of an empty query");
}

void validate_budget(const RewriteBudget& budget) {
  if (budget.max_evaluations < 1) throw std::invalid_argument("evaluation budget must be at least 1");
  if (!(budget.epsilon > 0.0 && budget.epsilon <= 1.0))
    throw std::invalid_argument("step size must be in (0,1]");
}

double delta_at(int step, double epsilon) { return std::min(static_cast<double>(step) * epsilon, 1.0); }

/// Smallest step index whose radius reaches 1 (the clamp point of the grid).
int full_relaxation_step(double epsilon) {
  int step = static_cast<int>(std::ceil((1.0 - kDeltaTolerance) / epsilon));
  while (step > 1 && static_cast<double>(step - 1) * epsilon >= 1.0 - kDeltaTolerance) --step;
  while (static_cast<double>(step) * epsilon < 1.0 - kDeltaTolerance) ++step;
  return step;
}

/// Largest step index whose radius is still a plain multiple of epsilon
/// within [0,1] (the dynamic program never relaxes a single attribute past
/// this point).
int last_step_within_one(double epsilon) {
  int step = static_cast<int>(std::floor((1.0 + kDeltaTolerance) / epsilon));
  while (step > 0 && static_cast<double>(step) * epsilon > 1.0 + kDeltaTolerance) --step;
  while (static_cast<double>(step + 1) * epsilon <= 1.0 + kDeltaTolerance) ++step;
  return step;
}

/// |P| * prod counts/|P|, folded left to right exactly like estimate_matches.
double estimate_from_counts(const std::vector<std::int64_t>& counts, std::int64_t catalog_size) {
  const auto size = static_cast<double>(catalog_size);
  double fraction = 1.0;
  for (const std::int64_t count : counts) fraction *= static_cast<double>(count) / size;
  return size * fraction;
}

RelaxedQuery relax_with(const StructuredQuery& query, const std::vector<double>& deltas) {
  RelaxedQuery relaxed;
  relaxed.terms.reserve(query.terms.size());
  for (std::size_t i = 0; i < query.terms.size(); ++i)
    relaxed.terms.push_back({query.terms[i].attribute, query.terms[i].value, deltas[i]});
  return relaxed;
}

RewriteOutcome make_outcome(const StructuredQuery& query, const std::vector<double>& deltas, double estimate,
                            std::int64_t evaluations, std::int64_t k) {
  RewriteOutcome outcome;
  outcome.relaxed = relax_with(query, deltas);
  outcome.estimate = estimate;
  outcome.total_relaxation = outcome.relaxed.total_relaxation();
  outcome.evaluations_used = evaluations;
  outcome.target_met = estimate >= static_cast<double>(k);
  return outcome;
}

}  // namespace

RewriteOutcome greedy_rewrite(const StructuredQuery& query, const StatsSnapshot& snapshot, std::int64_t k,
                              const RewriteBudget& budget) {
  validate_query(query);
  validate_budget(budget);
  if (k < 1) throw std::invalid_argument("result target k must be at least 1");

  const std::size_t m = query.terms.size();
  const double epsilon = budget.epsilon;
  const int full_step = full_relaxation_step(epsilon);

  std::vector<int> steps(m, 0);
  std::vector<std::int64_t> counts(m);
  for (std::size_t i = 0; i < m; ++i)
    counts[i] = snapshot.ball_count(query.terms[i].attribute, query.terms[i].value, 0.0);

  double estimate = estimate_from_counts(counts, snapshot.catalog_size());
  std::int64_t evaluations = 1;

  std::vector<GreedyStep> trace;
  const auto record = [&]() {
    GreedyStep row;
    row.deltas.reserve(m);
    for (std::size_t i = 0; i < m; ++i) row.deltas.push_back(delta_at(steps[i], epsilon));
    row.ball_counts = counts;
    row.estimate = estimate;
    trace.push_back(std::move(row));
  };
  record();

  while (estimate < static_cast<double>(k) && evaluations < budget.max_evaluations) {
    // Most constraining attribute still below full relaxation; ties resolve
    // to the first in query order.
    int pick = -1;
    for (std::size_t i = 0; i < m; ++i) {
      if (steps[i] >= full_step) continue;
      if (pick < 0 || counts[i] < counts[static_cast<std::size_t>(pick)]) pick = static_cast<int>(i);
    }
    if (pick < 0) break;  // everything fully relaxed

    const auto index = static_cast<std::size_t>(pick);
    ++steps[index];
    counts[index] =
        snapshot.ball_count(query.terms[index].attribute, query.terms[index].value, delta_at(steps[index], epsilon));
    estimate = estimate_from_counts(counts, snapshot.catalog_size());
    ++evaluations;
    record();
  }

  std::vector<double> deltas(m);
  for (std::size_t i = 0; i < m; ++i) deltas[i] = delta_at(steps[i], epsilon);
  RewriteOutcome outcome = make_outcome(query, deltas, estimate, evaluations, k);
  outcome.trace = std::move(trace);
  return outcome;
}

RewriteOutcome dp_rewrite(const StructuredQuery& query, const StatsSnapshot& snapshot, std::int64_t k,
                          const RewriteBudget& budget) {
  validate_query(query);
  validate_budget(budget);
  if (k < 1) throw std::invalid_argument("result target k must be at least 1");

  const auto m = static_cast<std::int64_t>(query.terms.size());
  if (budget.max_evaluations < m)
    throw std::invalid_argument("budget too small: the dynamic program needs at least one evaluation per attribute");

  const double epsilon = budget.epsilon;
  const std::int64_t rho = budget.max_evaluations / m;
  const int single_cap = last_step_within_one(epsilon);
  const auto size = static_cast<double>(snapshot.catalog_size());

  // Row j covers totals 0..top[j] in grid steps: min(rho*epsilon, j+1).
  std::vector<int> top(static_cast<std::size_t>(m));
  for (std::int64_t j = 0; j < m; ++j) {
    const int by_sum = [&]() {
      int step = static_cast<int>(std::floor((static_cast<double>(j + 1) + kDeltaTolerance) / epsilon));
      while (static_cast<double>(step) * epsilon > static_cast<double>(j + 1) + kDeltaTolerance) --step;
      while (static_cast<double>(step + 1) * epsilon <= static_cast<double>(j + 1) + kDeltaTolerance) ++step;
      return step;
    }();
    const int by_budget = static_cast<int>(std::min<std::int64_t>(rho, std::numeric_limits<int>::max()));
    top[static_cast<std::size_t>(j)] = std::min(by_budget, j == 0 ? std::min(by_sum, single_cap) : by_sum);
  }

  // Ball fractions per attribute on the step grid.
  std::vector<std::vector<double>> fraction(static_cast<std::size_t>(m));
  for (std::int64_t j = 0; j < m; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const int steps = std::min(top[ju], single_cap);
    fraction[ju].resize(static_cast<std::size_t>(steps) + 1);
    for (int a = 0; a <= steps; ++a)
      fraction[ju][static_cast<std::size_t>(a)] =
          static_cast<double>(
              snapshot.ball_count(query.terms[ju].attribute, query.terms[ju].value, delta_at(a, epsilon))) /
          size;
  }

  DpTable table;
  table.epsilon = epsilon;
  table.fractions.resize(static_cast<std::size_t>(m));
  table.chosen_step.resize(static_cast<std::size_t>(m));

  {
    const std::size_t width = static_cast<std::size_t>(top[0]) + 1;
    table.fractions[0].resize(width);
    table.chosen_step[0].resize(width);
    for (int i = 0; i <= top[0]; ++i) {
      table.fractions[0][static_cast<std::size_t>(i)] = fraction[0][static_cast<std::size_t>(i)];
      table.chosen_step[0][static_cast<std::size_t>(i)] = i;
    }
  }
  for (std::int64_t j = 1; j < m; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const std::size_t width = static_cast<std::size_t>(top[ju]) + 1;
    table.fractions[ju].resize(width);
    table.chosen_step[ju].resize(width);
    for (int i = 0; i <= top[ju]; ++i) {
      double best = -1.0;
      int best_step = 0;
      const int a_max = std::min({i, single_cap, static_cast<int>(fraction[ju].size()) - 1});
      for (int a = 0; a <= a_max; ++a) {
        const int remainder = std::min(i - a, top[ju - 1]);
        const double candidate = fraction[ju][static_cast<std::size_t>(a)] *
                                 table.fractions[ju - 1][static_cast<std::size_t>(remainder)];
        if (candidate > best) {  // strict: ties keep the smallest step
          best = candidate;
          best_step = a;
        }
      }
      table.fractions[ju][static_cast<std::size_t>(i)] = best;
      table.chosen_step[ju][static_cast<std::size_t>(i)] = best_step;
    }
  }

  std::int64_t evaluations = 0;  // one per cell with a non-zero total
  for (std::int64_t j = 0; j < m; ++j) evaluations += top[static_cast<std::size_t>(j)];

  const auto& last_row = table.fractions[static_cast<std::size_t>(m - 1)];
  int answer = -1;
  for (int i = 0; i <= top[static_cast<std::size_t>(m - 1)]; ++i) {
    if (size * last_row[static_cast<std::size_t>(i)] >= static_cast<double>(k)) {
      answer = i;
      break;
    }
  }
  const int cell = answer >= 0 ? answer : top[static_cast<std::size_t>(m - 1)];
  const double estimate = size * last_row[static_cast<std::size_t>(cell)];

  std::vector<double> deltas(static_cast<std::size_t>(m), 0.0);
  int residual = cell;
  for (std::int64_t j = m - 1; j >= 1; --j) {
    const auto ju = static_cast<std::size_t>(j);
    const int a = table.chosen_step[ju][static_cast<std::size_t>(residual)];
    deltas[ju] = delta_at(a, epsilon);
    residual = std::min(residual - a, top[ju - 1]);
  }
  deltas[0] = delta_at(residual, epsilon);

  RewriteOutcome outcome = make_outcome(query, deltas, estimate, evaluations, k);
  outcome.dp_table = std::move(table);
  return outcome;
}

RewriteOutcome attribute_removal(const StructuredQuery& query, const StatsSnapshot& snapshot, std::int64_t k) {
  validate_query(query);
  if (k < 1) throw std::invalid_argument("result target k must be at least 1");

  const std::size_t m = query.terms.size();
  std::vector<bool> removed(m, false);
  std::vector<std::int64_t> zero_counts(m);
  std::vector<std::int64_t> counts(m);
  for (std::size_t i = 0; i < m; ++i) {
    zero_counts[i] = snapshot.ball_count(query.terms[i].attribute, query.terms[i].value, 0.0);
    counts[i] = zero_counts[i];
  }

  double estimate = estimate_from_counts(counts, snapshot.catalog_size());
  std::int64_t evaluations = 1;
  std::size_t kept = m;
  std::vector<std::string> dropped;

  while (estimate < static_cast<double>(k) && kept > 1) {
    int pick = -1;
    for (std::size_t i = 0; i < m; ++i) {
      if (removed[i]) continue;
      if (pick < 0 || zero_counts[i] < zero_counts[static_cast<std::size_t>(pick)]) pick = static_cast<int>(i);
    }
    const auto index = static_cast<std::size_t>(pick);
    removed[index] = true;
    --kept;
    dropped.push_back(query.terms[index].attribute);
    // A removed attribute constrains nothing: radius 1 covers every value and
    // every item with the attribute missing.
    counts[index] = snapshot.ball_count(query.terms[index].attribute, query.terms[index].value, 1.0);
    estimate = estimate_from_counts(counts, snapshot.catalog_size());
    ++evaluations;
  }

  std::vector<double> deltas(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) deltas[i] = removed[i] ? 1.0 : 0.0;
  RewriteOutcome outcome = make_outcome(query, deltas, estimate, evaluations, k);
  outcome.dropped_attributes = std::move(dropped);
  return outcome;
}

FdResult fd_preprocess(const StructuredQuery& query, const CondProbTable& cond_probs, double threshold,
                       FdDirection direction) {
  validate_query(query);
  if (!(threshold > 0.0 && threshold <= 1.0)) throw std::invalid_argument("FD threshold must be in (0,1]");

  const std::size_t m = query.terms.size();
  std::vector<bool> removed(m, false);
  std::size_t remaining = m;
  std::vector<std::string> dropped;

  for (std::size_t i = 0; i < m && remaining > 1; ++i) {
    if (removed[i]) continue;
    for (std::size_t j = 0; j < m && remaining > 1; ++j) {
      if (j == i || removed[j]) continue;
      const double p = cond_probs.probability(query.terms[i].attribute, query.terms[i].value,
                                              query.terms[j].attribute, query.terms[j].value);
      if (p < threshold) continue;
      const std::size_t victim = direction == FdDirection::drop_determined ? i : j;
      removed[victim] = true;
      --remaining;
      dropped.push_back(query.terms[victim].attribute);
      if (victim == i) break;
    }
  }

  FdResult result;
  for (std::size_t i = 0; i < m; ++i)
    if (!removed[i]) result.query.terms.push_back(query.terms[i]);
  result.dropped = std::move(dropped);
  return result;
}

RewriteOutcome brute_force_optimal(const StructuredQuery& query, const StatsSnapshot& snapshot, std::int64_t k,
                                   double epsilon) {
  validate_query(query);
  if (k < 0) throw std::invalid_argument("result target k must be non-negative");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("step size must be in (0,1]");

  const std::size_t m = query.terms.size();
  const int full_step = full_relaxation_step(epsilon);
  const auto points_per_attribute = static_cast<double>(full_step + 1);
  double grid_points = 1.0;
  for (std::size_t i = 0; i < m; ++i) grid_points *= points_per_attribute;
  if (grid_points > 1e7)
    throw std::invalid_argument("grid too large to enumerate: " + std::to_string(grid_points) + " points");

  const auto size = static_cast<double>(snapshot.catalog_size());
  std::vector<std::vector<double>> fraction(m);
  for (std::size_t j = 0; j < m; ++j) {
    fraction[j].resize(static_cast<std::size_t>(full_step) + 1);
    for (int a = 0; a <= full_step; ++a)
      fraction[j][static_cast<std::size_t>(a)] =
          static_cast<double>(
              snapshot.ball_count(query.terms[j].attribute, query.terms[j].value, delta_at(a, epsilon))) /
          size;
  }

  std::vector<int> steps(m, 0);
  std::vector<int> best_steps;
  double best_total = std::numeric_limits<double>::infinity();
  double best_estimate = 0.0;
  std::int64_t evaluated = 0;

  // Odometer over the grid, last attribute fastest: ascending lexicographic
  // order in query-attribute order, so the first hit at a given total wins.
  while (true) {
    ++evaluated;
    double product = 1.0;
    for (std::size_t j = 0; j < m; ++j) product *= fraction[j][static_cast<std::size_t>(steps[j])];
    const double estimate = size * product;
    if (estimate >= static_cast<double>(k)) {
      double total = 0.0;
      for (std::size_t j = 0; j < m; ++j) total += delta_at(steps[j], epsilon);
      if (total < best_total) {
        best_total = total;
        best_steps = steps;
        best_estimate = estimate;
      }
    }
    std::size_t pos = m;
    while (pos > 0 && steps[pos - 1] == full_step) steps[--pos] = 0;
    if (pos == 0) break;
    ++steps[pos - 1];
  }

  std::vector<double> deltas(m, 1.0);
  double estimate;
  if (best_steps.empty()) {
    double product = 1.0;
    for (std::size_t j = 0; j < m; ++j) product *= fraction[j][static_cast<std::size_t>(full_step)];
    estimate = size * product;
  } else {
    for (std::size_t j = 0; j < m; ++j) deltas[j] = delta_at(best_steps[j], epsilon);
    estimate = best_estimate;
  }
  return make_outcome(query, deltas, estimate, evaluated, k);
}

}  // namespace qrelax
