#include "qrelax/bench.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include "qrelax/text.hpp"

namespace qrelax {

std::string_view to_string(Algorithm algorithm) noexcept {
  switch (algorithm) {
    case Algorithm::greedy: return "greedy";
    case Algorithm::dp: return "dp";
    case Algorithm::attribute_removal: return "removal";
  }
  return "?";
}

std::string_view to_string(FdMode mode) noexcept {
  switch (mode) {
    case FdMode::off: return "off";
    case FdMode::drop_determined: return "drop-determined";
    case FdMode::drop_determining: return "drop-determining";
  }
  return "?";
}

namespace {

void validate_config(const RunConfig& config) {
  if (config.k < 1) throw std::invalid_argument("result target k must be at least 1");
  if (config.max_evaluations < 1) throw std::invalid_argument("evaluation budget must be at least 1");
  if (!(config.epsilon > 0.0 && config.epsilon <= 1.0)) throw std::invalid_argument("step size must be in (0,1]");
  if (!(config.fd_threshold > 0.0 && config.fd_threshold <= 1.0))
    throw std::invalid_argument("FD threshold must be in (0,1]");
}

double median(std::vector<std::size_t> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n % 2 == 1) return static_cast<double>(values[n / 2]);
  return (static_cast<double>(values[n / 2 - 1]) + static_cast<double>(values[n / 2])) / 2.0;
}

}  // namespace

RewriteOutcome rewrite_query(const StructuredQuery& query, const StatsSnapshot& snapshot, const RunConfig& config) {
  validate_config(config);

  StructuredQuery reduced = query;
  std::vector<std::string> fd_dropped;
  if (config.fd != FdMode::off) {
    const FdDirection direction =
        config.fd == FdMode::drop_determined ? FdDirection::drop_determined : FdDirection::drop_determining;
    FdResult fd = fd_preprocess(query, snapshot.cond_probs(), config.fd_threshold, direction);
    reduced = std::move(fd.query);
    fd_dropped = std::move(fd.dropped);
  }

  const RewriteBudget budget{config.max_evaluations, config.epsilon};
  RewriteOutcome outcome;
  switch (config.algorithm) {
    case Algorithm::greedy: outcome = greedy_rewrite(reduced, snapshot, config.k, budget); break;
    case Algorithm::dp: outcome = dp_rewrite(reduced, snapshot, config.k, budget); break;
    case Algorithm::attribute_removal: outcome = attribute_removal(reduced, snapshot, config.k); break;
  }
  if (!fd_dropped.empty())
    outcome.dropped_attributes.insert(outcome.dropped_attributes.begin(), fd_dropped.begin(), fd_dropped.end());
  return outcome;
}

std::vector<ReportRow> run_workload(std::span<const StructuredQuery> queries, const Catalog& catalog,
                                    const StatsSnapshot& snapshot, const DistanceModel& model,
                                    const RunConfig& config) {
  validate_config(config);
  std::vector<ReportRow> rows;
  rows.reserve(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    ReportRow row;
    row.query_id = "q" + std::to_string(i + 1);
    row.algorithm = config.algorithm;
    row.epsilon = config.epsilon;
    row.max_evaluations = config.max_evaluations;
    row.fd = config.fd;
    try {
      const RewriteOutcome outcome = rewrite_query(queries[i], snapshot, config);
      const MatchSet matched = match_items(catalog, outcome.relaxed, model);
      row.total_relaxation = outcome.total_relaxation;
      row.estimate = outcome.estimate;
      row.target_met = outcome.target_met;
      row.evaluations_used = outcome.evaluations_used;
      row.index_hits = index_hits(matched);
      row.mean_dist = mean_dist(matched.items, queries[i], model, config.k);
    } catch (const std::exception& e) {
      row.error = e.what();
      row.mean_dist = 1.0;  // scored as a total shortfall
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SweepRow> sweep(std::span<const StructuredQuery> queries, const Catalog& catalog,
                            const StatsSnapshot& snapshot, const DistanceModel& model, const RunConfig& base,
                            SweepAxis axis, std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one axis value");
  std::vector<SweepRow> out;
  out.reserve(values.size());
  for (const double value : values) {
    RunConfig config = base;
    if (axis == SweepAxis::epsilon) {
      config.epsilon = value;
    } else {
      const auto steps = static_cast<std::int64_t>(std::llround(value));
      if (std::abs(value - static_cast<double>(steps)) > 1e-9 || steps < 1)
        throw std::invalid_argument("step-count axis values must be positive integers");
      config.max_evaluations = steps;
    }
    const std::vector<ReportRow> rows = run_workload(queries, catalog, snapshot, model, config);

    SweepRow aggregate;
    aggregate.axis_value = value;
    double dist_sum = 0.0;
    std::size_t met = 0;
    std::vector<std::size_t> hits;
    hits.reserve(rows.size());
    for (const ReportRow& row : rows) {
      dist_sum += row.mean_dist;
      met += row.target_met ? 1 : 0;
      hits.push_back(row.index_hits);
    }
    const auto n = static_cast<double>(rows.size());
    aggregate.mean_mean_dist = rows.empty() ? 0.0 : dist_sum / n;
    aggregate.median_index_hits = median(std::move(hits));
    aggregate.target_met_fraction = rows.empty() ? 0.0 : static_cast<double>(met) / n;
    out.push_back(aggregate);
  }
  return out;
}

void write_report_csv(std::span<const ReportRow> rows, std::ostream& out) {
  out << "query_id,algo,epsilon,T,fd,tr,estimate,target_met,evals,index_hits,mean_dist\n";
  for (const ReportRow& row : rows) {
    out << row.query_id << ',' << to_string(row.algorithm) << ',' << text::format_metric(row.epsilon) << ','
        << row.max_evaluations << ',' << to_string(row.fd) << ',' << text::format_metric(row.total_relaxation)
        << ',' << text::format_metric(row.estimate) << ',' << (row.target_met ? "true" : "false") << ','
        << row.evaluations_used << ',' << row.index_hits << ',' << text::format_metric(row.mean_dist) << '\n';
  }
}

void write_sweep_csv(SweepAxis axis, const RunConfig& base, std::span<const SweepRow> rows, std::ostream& out) {
  out << "axis,value,algo,k,epsilon,T,fd,mean_mean_dist,median_index_hits,target_met_fraction\n";
  const std::string_view axis_name = axis == SweepAxis::epsilon ? "epsilon" : "steps";
  for (const SweepRow& row : rows) {
    const double epsilon = axis == SweepAxis::epsilon ? row.axis_value : base.epsilon;
    const std::int64_t steps =
        axis == SweepAxis::steps ? static_cast<std::int64_t>(std::llround(row.axis_value)) : base.max_evaluations;
    out << axis_name << ',' << text::format_metric(row.axis_value) << ',' << to_string(base.algorithm) << ','
        << base.k << ',' << text::format_metric(epsilon) << ',' << steps << ',' << to_string(base.fd) << ','
        << text::format_metric(row.mean_mean_dist) << ',' << text::format_metric(row.median_index_hits) << ','
        << text::format_metric(row.target_met_fraction) << '\n';
  }
}

namespace {

/// Deterministic uniform draws on top of the standard mt19937_64 stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  std::size_t index(std::size_t bound) { return static_cast<std::size_t>(next() % bound); }
  double real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Popularity-skewed value pick: weight 1/(rank+1).
std::size_t zipf_pick(Rng& rng, const std::vector<double>& cumulative) {
  const double u = rng.real() * cumulative.back();
  const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
  return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                           static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
}

std::string value_name(std::size_t index) {
  std::string name = "v";
  name += static_cast<char>('0' + index / 10);
  name += static_cast<char>('0' + index % 10);
  return name;
}

void validate_spec(const CorpusSpec& spec) {
  if (spec.attributes < 1 || spec.attributes > 8)
    throw std::invalid_argument("corpus spec: attributes must be in [1,8]");
  if (spec.items < 1 || spec.items > 100000) throw std::invalid_argument("corpus spec: items must be in [1,100000]");
  if (!spec.domain_sizes.empty() && spec.domain_sizes.size() != static_cast<std::size_t>(spec.attributes))
    throw std::invalid_argument("corpus spec: domain_sizes must list one size per attribute");
  for (const int size : spec.domain_sizes)
    if (size < 1 || size > 64) throw std::invalid_argument("corpus spec: domain sizes must be in [1,64]");
  if (!(spec.correlation >= 0.0 && spec.correlation <= 1.0))
    throw std::invalid_argument("corpus spec: correlation must be in [0,1]");
  if (!spec.missing_distance_fraction.empty() &&
      spec.missing_distance_fraction.size() != static_cast<std::size_t>(spec.attributes))
    throw std::invalid_argument("corpus spec: missing_distance_fraction must list one value per attribute");
  for (const double fraction : spec.missing_distance_fraction)
    if (!(fraction >= 0.0 && fraction <= 1.0))
      throw std::invalid_argument("corpus spec: missing fractions must be in [0,1]");
  if (spec.queries < 0) throw std::invalid_argument("corpus spec: queries must be non-negative");
  if (spec.queries > 0 && spec.under_match_threshold < 1)
    throw std::invalid_argument("corpus spec: under_match_threshold must be at least 1");
}

}  // namespace

SyntheticCorpus gen_synthetic(std::uint64_t seed, const CorpusSpec& spec) {
  validate_spec(spec);
  Rng rng(seed);

  const auto attribute_count = static_cast<std::size_t>(spec.attributes);
  std::vector<int> domains = spec.domain_sizes;
  if (domains.empty()) domains.assign(attribute_count, 10);
  std::vector<double> missing = spec.missing_distance_fraction;
  if (missing.empty()) missing.assign(attribute_count, 0.0);

  Schema schema;
  std::vector<std::string> attribute_names(attribute_count);
  for (std::size_t a = 0; a < attribute_count; ++a) {
    attribute_names[a] = "a" + std::to_string(a);
    schema.add_field(attribute_names[a], AttributeKind::categorical);
  }

  std::vector<std::vector<double>> cumulative(attribute_count);
  for (std::size_t a = 0; a < attribute_count; ++a) {
    double sum = 0.0;
    cumulative[a].reserve(static_cast<std::size_t>(domains[a]));
    for (int v = 0; v < domains[a]; ++v) {
      sum += 1.0 / static_cast<double>(v + 1);
      cumulative[a].push_back(sum);
    }
  }

  std::vector<Item> items;
  items.reserve(static_cast<std::size_t>(spec.items));
  std::vector<std::vector<std::size_t>> item_values(static_cast<std::size_t>(spec.items));
  for (int n = 0; n < spec.items; ++n) {
    Item item;
    {
      std::string id = std::to_string(n + 1);
      item.id = "p" + std::string(6 - std::min<std::size_t>(6, id.size()), '0') + id;
    }
    std::vector<std::size_t> picks(attribute_count);
    picks[0] = zipf_pick(rng, cumulative[0]);
    for (std::size_t a = 1; a < attribute_count; ++a) {
      if (a == 1 && spec.correlation > 0.0 && rng.real() < spec.correlation) {
        picks[a] = picks[0] % static_cast<std::size_t>(domains[1]);
      } else {
        picks[a] = zipf_pick(rng, cumulative[a]);
      }
    }
    for (std::size_t a = 0; a < attribute_count; ++a)
      item.attributes.emplace(attribute_names[a], AttributeValue::categorical(value_name(picks[a])));
    item_values[static_cast<std::size_t>(n)] = std::move(picks);
    items.push_back(std::move(item));
  }

  DistanceModel model;
  for (std::size_t a = 0; a < attribute_count; ++a) {
    for (int x = 0; x < domains[a]; ++x) {
      for (int y = x + 1; y < domains[a]; ++y) {
        if (rng.real() < missing[a]) continue;
        const double raw = 0.05 + 0.9 * rng.real();
        const double distance = static_cast<double>(std::lround(raw / 0.05)) * 0.05;
        model.add_entry(attribute_names[a], AttributeValue::categorical(value_name(static_cast<std::size_t>(x))),
                        AttributeValue::categorical(value_name(static_cast<std::size_t>(y))), distance);
        model.add_entry(attribute_names[a], AttributeValue::categorical(value_name(static_cast<std::size_t>(y))),
                        AttributeValue::categorical(value_name(static_cast<std::size_t>(x))), distance);
      }
    }
  }

  std::vector<StructuredQuery> queries;
  queries.reserve(static_cast<std::size_t>(spec.queries));
  for (int q = 0; q < spec.queries; ++q) {
    bool accepted = false;
    for (int attempt = 0; attempt < 1000 && !accepted; ++attempt) {
      std::vector<std::size_t> picks = item_values[rng.index(item_values.size())];
      if (spec.perturb_queries) {
        const std::size_t target = rng.index(attribute_count);
        const auto domain = static_cast<std::size_t>(domains[target]);
        const std::size_t tail = std::max<std::size_t>(1, domain / 3);
        picks[target] = domain - 1 - rng.index(tail);
      }
      std::int64_t exact_matches = 0;
      for (const auto& values : item_values) {
        bool all_equal = true;
        for (std::size_t a = 0; a < attribute_count && all_equal; ++a) all_equal = values[a] == picks[a];
        if (all_equal) ++exact_matches;
      }
      if (exact_matches >= spec.under_match_threshold) continue;

      StructuredQuery query;
      for (std::size_t a = 0; a < attribute_count; ++a)
        query.terms.push_back({attribute_names[a], AttributeValue::categorical(value_name(picks[a]))});
      queries.push_back(std::move(query));
      accepted = true;
    }
    if (!accepted)
      throw std::runtime_error("gen_synthetic: could not engineer an under-matching query; lower the threshold");
  }

  return SyntheticCorpus{Catalog(std::move(schema), std::move(items)), std::move(model), std::move(queries)};
}

}  // namespace qrelax
