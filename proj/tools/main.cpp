#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qrelax/bench.hpp"
#include "qrelax/catalog.hpp"
#include "qrelax/distance.hpp"
#include "qrelax/executor.hpp"
#include "qrelax/rewrite.hpp"
#include "qrelax/stats.hpp"
#include "qrelax/text.hpp"

namespace {

using namespace qrelax;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

Catalog read_catalog(const std::string& path) {
  auto in = open_input(path);
  return load_catalog(in, path);
}

DistanceModel read_distances(const std::string& path, const Schema& schema) {
  auto in = open_input(path);
  return load_distance_model(in, schema, path);
}

StatsSnapshot read_stats(const std::string& path) {
  auto in = open_input(path);
  return StatsSnapshot::load(in, path);
}

std::vector<StructuredQuery> read_queries(const std::string& path, const Schema& schema) {
  auto in = open_input(path);
  std::vector<StructuredQuery> queries;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    try {
      queries.push_back(parse_query(trimmed, schema));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_number) + ": " + e.what());
    }
  }
  return queries;
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "greedy") return Algorithm::greedy;
  if (name == "dp") return Algorithm::dp;
  if (name == "removal") return Algorithm::attribute_removal;
  throw std::runtime_error("unknown algorithm '" + name + "' (expected greedy, dp, or removal)");
}

FdMode parse_fd_mode(const std::string& name) {
  if (name == "off") return FdMode::off;
  if (name == "drop-determined") return FdMode::drop_determined;
  if (name == "drop-determining") return FdMode::drop_determining;
  throw std::runtime_error("unknown fd mode '" + name + "'");
}

std::vector<double> parse_value_list(const std::string& list) {
  std::vector<double> values;
  for (const auto token : text::split(list, ',')) {
    const auto value = text::parse_double(text::trim(token));
    if (!value) throw std::runtime_error("'" + std::string(token) + "' is not a number");
    values.push_back(*value);
  }
  return values;
}

std::vector<int> parse_int_list(std::string_view list) {
  std::vector<int> values;
  for (const auto token : text::split(list, ',')) {
    const auto value = text::parse_int(text::trim(token));
    if (!value) throw std::runtime_error("'" + std::string(token) + "' is not an integer");
    values.push_back(static_cast<int>(*value));
  }
  return values;
}

std::vector<double> parse_double_list(std::string_view list) {
  std::vector<double> values;
  for (const auto token : text::split(list, ',')) {
    const auto value = text::parse_double(text::trim(token));
    if (!value) throw std::runtime_error("'" + std::string(token) + "' is not a number");
    values.push_back(*value);
  }
  return values;
}

/// Corpus spec grammar: semicolon-separated key=value pairs, list values
/// comma-separated. Keys: attrs, values, items, corr, missing, queries,
/// threshold, perturb.
CorpusSpec parse_corpus_spec(const std::string& text_spec) {
  CorpusSpec spec;
  const auto require_int = [](std::string_view key, std::string_view value) {
    const auto parsed = text::parse_int(value);
    if (!parsed) throw std::runtime_error("spec key '" + std::string(key) + "': '" + std::string(value) +
                                          "' is not an integer");
    return *parsed;
  };
  const auto require_double = [](std::string_view key, std::string_view value) {
    const auto parsed = text::parse_double(value);
    if (!parsed) throw std::runtime_error("spec key '" + std::string(key) + "': '" + std::string(value) +
                                          "' is not a number");
    return *parsed;
  };
  for (const auto pair : text::split(text_spec, ';')) {
    const auto trimmed = text::trim(pair);
    if (trimmed.empty()) continue;
    const std::size_t sep = trimmed.find('=');
    if (sep == std::string_view::npos) throw std::runtime_error("spec entry '" + std::string(trimmed) + "' has no '='");
    const auto key = text::trim(trimmed.substr(0, sep));
    const auto value = text::trim(trimmed.substr(sep + 1));
    if (key == "attrs") {
      spec.attributes = static_cast<int>(require_int(key, value));
    } else if (key == "values") {
      spec.domain_sizes = parse_int_list(value);
    } else if (key == "items") {
      spec.items = static_cast<int>(require_int(key, value));
    } else if (key == "corr") {
      spec.correlation = require_double(key, value);
    } else if (key == "missing") {
      spec.missing_distance_fraction = parse_double_list(value);
    } else if (key == "queries") {
      spec.queries = static_cast<int>(require_int(key, value));
    } else if (key == "threshold") {
      spec.under_match_threshold = require_int(key, value);
    } else if (key == "perturb") {
      spec.perturb_queries = require_int(key, value) != 0;
    } else {
      throw std::runtime_error("unknown corpus spec key '" + std::string(key) + "'");
    }
  }
  if (!spec.domain_sizes.empty() && spec.domain_sizes.size() == 1 && spec.attributes > 1)
    spec.domain_sizes.assign(static_cast<std::size_t>(spec.attributes), spec.domain_sizes[0]);
  if (!spec.missing_distance_fraction.empty() && spec.missing_distance_fraction.size() == 1 && spec.attributes > 1)
    spec.missing_distance_fraction.assign(static_cast<std::size_t>(spec.attributes),
                                          spec.missing_distance_fraction[0]);
  return spec;
}

void print_row_errors(const std::vector<ReportRow>& rows) {
  for (const ReportRow& row : rows)
    if (!row.error.empty()) std::cerr << row.query_id << ": " << row.error << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-bounded query-rewrite engine for structured search"};
  app.require_subcommand(1);

  // --- build-stats ---
  std::string catalog_path, distances_path, stats_path, out_path, queries_path, query_text;
  std::string algo_name = "greedy", fd_name = "off", axis_name, values_list, spec_text, out_dir;
  std::int64_t k = 10, budget = 10;
  double epsilon = 0.1, fd_threshold = 0.9;
  std::uint64_t seed = 1;

  CLI::App* build = app.add_subcommand("build-stats", "Precompute statistics from a catalog and distance table");
  build->add_option("--catalog", catalog_path, "catalog file")->required();
  build->add_option("--distances", distances_path, "distance-table file")->required();
  build->add_option("--out", out_path, "output stats file")->required();

  CLI::App* rewrite_cmd = app.add_subcommand("rewrite", "Rewrite one query using only a stats file");
  rewrite_cmd->add_option("--stats", stats_path, "stats file")->required();
  rewrite_cmd->add_option("--query", query_text, "query string, attr:value;attr:value")->required();
  rewrite_cmd->add_option("--algo", algo_name, "greedy | dp | removal");
  rewrite_cmd->add_option("--k", k, "minimum number of results");
  rewrite_cmd->add_option("--t", budget, "maximum relaxed-query evaluations");
  rewrite_cmd->add_option("--epsilon", epsilon, "relaxation step size");
  rewrite_cmd->add_option("--fd", fd_name, "off | drop-determined | drop-determining");
  rewrite_cmd->add_option("--fd-threshold", fd_threshold, "conditional-probability threshold");

  CLI::App* evaluate = app.add_subcommand("evaluate", "Rewrite and execute a query workload, emitting report rows");
  evaluate->add_option("--catalog", catalog_path, "catalog file")->required();
  evaluate->add_option("--distances", distances_path, "distance-table file")->required();
  evaluate->add_option("--stats", stats_path, "stats file")->required();
  evaluate->add_option("--queries", queries_path, "query file, one query per line")->required();
  evaluate->add_option("--algo", algo_name, "greedy | dp | removal");
  evaluate->add_option("--k", k, "minimum number of results");
  evaluate->add_option("--t", budget, "maximum relaxed-query evaluations");
  evaluate->add_option("--epsilon", epsilon, "relaxation step size");
  evaluate->add_option("--fd", fd_name, "off | drop-determined | drop-determining");
  evaluate->add_option("--fd-threshold", fd_threshold, "conditional-probability threshold");
  evaluate->add_option("--out", out_path, "write the CSV report here instead of stdout");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Evaluate a workload across a parameter axis");
  sweep_cmd->add_option("--catalog", catalog_path, "catalog file")->required();
  sweep_cmd->add_option("--distances", distances_path, "distance-table file")->required();
  sweep_cmd->add_option("--stats", stats_path, "stats file")->required();
  sweep_cmd->add_option("--queries", queries_path, "query file")->required();
  sweep_cmd->add_option("--axis", axis_name, "epsilon | steps")->required();
  sweep_cmd->add_option("--values", values_list, "comma-separated axis values")->required();
  sweep_cmd->add_option("--algo", algo_name, "greedy | dp | removal");
  sweep_cmd->add_option("--k", k, "minimum number of results");
  sweep_cmd->add_option("--t", budget, "maximum relaxed-query evaluations");
  sweep_cmd->add_option("--epsilon", epsilon, "relaxation step size");
  sweep_cmd->add_option("--fd", fd_name, "off | drop-determined | drop-determining");
  sweep_cmd->add_option("--fd-threshold", fd_threshold, "conditional-probability threshold");
  sweep_cmd->add_option("--out", out_path, "write the CSV table here instead of stdout");

  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic corpus");
  gen->add_option("--seed", seed, "random seed");
  gen->add_option("--spec", spec_text, "e.g. \"attrs=3;values=12;items=2000;corr=0;missing=0.2;queries=60\"")
      ->required();
  gen->add_option("--out-dir", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) {
      const Catalog catalog = read_catalog(catalog_path);
      const DistanceModel model = read_distances(distances_path, catalog.schema());
      const StatsSnapshot snapshot = build_stats(catalog, model);
      auto out = open_output(out_path);
      snapshot.save(out);
      std::cout << "wrote " << out_path << " (|P| = " << snapshot.catalog_size() << ")\n";
    } else if (rewrite_cmd->parsed()) {
      const StatsSnapshot snapshot = read_stats(stats_path);
      RunConfig config;
      config.algorithm = parse_algorithm(algo_name);
      config.k = k;
      config.max_evaluations = budget;
      config.epsilon = epsilon;
      config.fd = parse_fd_mode(fd_name);
      config.fd_threshold = fd_threshold;
      const StructuredQuery query = parse_query(query_text, snapshot.schema());
      const RewriteOutcome outcome = rewrite_query(query, snapshot, config);
      std::cout << "relaxed: " << render_relaxed_query(outcome.relaxed) << "\n"
                << "estimate: " << text::format_metric(outcome.estimate) << "\n"
                << "total_relaxation: " << text::format_metric(outcome.total_relaxation) << "\n"
                << "evaluations_used: " << outcome.evaluations_used << "\n"
                << "target_met: " << (outcome.target_met ? "true" : "false") << "\n";
      if (!outcome.dropped_attributes.empty()) {
        std::cout << "dropped:";
        for (const std::string& name : outcome.dropped_attributes) std::cout << ' ' << name;
        std::cout << "\n";
      }
    } else if (evaluate->parsed()) {
      const Catalog catalog = read_catalog(catalog_path);
      const DistanceModel model = read_distances(distances_path, catalog.schema());
      const StatsSnapshot snapshot = read_stats(stats_path);
      const std::vector<StructuredQuery> queries = read_queries(queries_path, catalog.schema());
      RunConfig config;
      config.algorithm = parse_algorithm(algo_name);
      config.k = k;
      config.max_evaluations = budget;
      config.epsilon = epsilon;
      config.fd = parse_fd_mode(fd_name);
      config.fd_threshold = fd_threshold;
      const std::vector<ReportRow> rows = run_workload(queries, catalog, snapshot, model, config);
      print_row_errors(rows);
      if (out_path.empty()) {
        write_report_csv(rows, std::cout);
      } else {
        auto out = open_output(out_path);
        write_report_csv(rows, out);
      }
    } else if (sweep_cmd->parsed()) {
      const Catalog catalog = read_catalog(catalog_path);
      const DistanceModel model = read_distances(distances_path, catalog.schema());
      const StatsSnapshot snapshot = read_stats(stats_path);
      const std::vector<StructuredQuery> queries = read_queries(queries_path, catalog.schema());
      RunConfig config;
      config.algorithm = parse_algorithm(algo_name);
      config.k = k;
      config.max_evaluations = budget;
      config.epsilon = epsilon;
      config.fd = parse_fd_mode(fd_name);
      config.fd_threshold = fd_threshold;
      SweepAxis axis;
      if (axis_name == "epsilon") {
        axis = SweepAxis::epsilon;
      } else if (axis_name == "steps") {
        axis = SweepAxis::steps;
      } else {
        throw std::runtime_error("unknown axis '" + axis_name + "' (expected epsilon or steps)");
      }
      const std::vector<double> values = parse_value_list(values_list);
      const std::vector<SweepRow> rows = sweep(queries, catalog, snapshot, model, config, axis, values);
      if (out_path.empty()) {
        write_sweep_csv(axis, config, rows, std::cout);
      } else {
        auto out = open_output(out_path);
        write_sweep_csv(axis, config, rows, out);
      }
    } else if (gen->parsed()) {
      const CorpusSpec spec = parse_corpus_spec(spec_text);
      const SyntheticCorpus corpus = gen_synthetic(seed, spec);
      std::filesystem::create_directories(out_dir);
      {
        auto out = open_output(out_dir + "/catalog.csv");
        save_catalog(corpus.catalog, out);
      }
      {
        auto out = open_output(out_dir + "/distances.csv");
        save_distance_model(corpus.distances, out);
      }
      {
        auto out = open_output(out_dir + "/queries.txt");
        for (const StructuredQuery& query : corpus.queries) out << render_query(query) << '\n';
      }
      std::cout << "wrote " << out_dir << "/catalog.csv, distances.csv, queries.txt ("
                << corpus.catalog.size() << " items, " << corpus.queries.size() << " queries)\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
