#include "qrelax/stats.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include "qrelax/text.hpp"

namespace qrelax {

double RelaxedQuery::total_relaxation() const noexcept {
  double sum = 0.0;
  for (const RelaxedTerm& term : terms) sum += term.delta;
  return sum;
}

const RelaxedTerm* RelaxedQuery::find(std::string_view attribute) const noexcept {
  for (const RelaxedTerm& term : terms)
    if (term.attribute == attribute) return &term;
  return nullptr;
}

RelaxedQuery unrelaxed(const StructuredQuery& query) {
  RelaxedQuery relaxed;
  relaxed.terms.reserve(query.terms.size());
  for (const QueryTerm& term : query.terms) relaxed.terms.push_back({term.attribute, term.value, 0.0});
  return relaxed;
}

std::string render_relaxed_query(const RelaxedQuery& query) {
  std::string out;
  for (const RelaxedTerm& term : query.terms) {
    if (!out.empty()) out += ';';
    out += term.attribute;
    out += ':';
    out += term.value.to_string();
    out += '~';
    out += text::format_metric(term.delta);
  }
  return out;
}

std::int64_t AttributeHistogram::total() const noexcept {
  std::int64_t sum = missing;
  for (const auto& [value, count] : counts) sum += count;
  return sum;
}

void CondProbTable::insert(Key key, double probability) {
  if (!(probability >= 0.0 && probability <= 1.0))
    throw std::invalid_argument("conditional probability outside [0,1]");
  probabilities_.insert_or_assign(std::move(key), probability);
}

double CondProbTable::probability(std::string_view attr_i, const AttributeValue& value_i,
                                  std::string_view attr_j, const AttributeValue& value_j) const noexcept {
  const auto it = probabilities_.find(Key{std::string(attr_i), value_i, std::string(attr_j), value_j});
  return it == probabilities_.end() ? 0.0 : it->second;
}

bool StatsSnapshot::has_attribute(std::string_view attribute) const noexcept {
  return histograms_.contains(attribute);
}

const AttributeHistogram& StatsSnapshot::histogram(std::string_view attribute) const {
  const auto it = histograms_.find(attribute);
  if (it == histograms_.end())
    throw std::invalid_argument("no statistics for attribute '" + std::string(attribute) + "'");
  return it->second;
}

std::vector<AttributeValue> StatsSnapshot::ball(std::string_view attribute, const AttributeValue& value,
                                                double delta) const {
  if (!(delta >= -kDeltaTolerance && delta <= 1.0 + kDeltaTolerance))
    throw std::invalid_argument("relaxation radius " + text::format_double(delta) + " is outside [0,1]");
  const AttributeHistogram& histogram = this->histogram(attribute);
  std::vector<AttributeValue> members;
  for (const auto& [candidate, count] : histogram.counts)
    if (distances_.distance(attribute, value, candidate) <= delta + kDeltaTolerance)
      members.push_back(candidate);
  return members;
}

std::int64_t StatsSnapshot::ball_count(std::string_view attribute, const AttributeValue& value,
                                       double delta) const {
  if (!(delta >= -kDeltaTolerance && delta <= 1.0 + kDeltaTolerance))
    throw std::invalid_argument("relaxation radius " + text::format_double(delta) + " is outside [0,1]");
  const AttributeHistogram& histogram = this->histogram(attribute);
  std::int64_t sum = 0;
  for (const auto& [candidate, count] : histogram.counts)
    if (distances_.distance(attribute, value, candidate) <= delta + kDeltaTolerance) sum += count;
  if (delta >= 1.0 - kDeltaTolerance) sum += histogram.missing;
  return sum;
}

double StatsSnapshot::estimate_matches(const RelaxedQuery& query) const {
  if (catalog_size_ <= 0) throw std::invalid_argument("estimation over an empty catalog");
  const auto size = static_cast<double>(catalog_size_);
  double fraction = 1.0;
  for (const RelaxedTerm& term : query.terms)
    fraction *= static_cast<double>(ball_count(term.attribute, term.value, term.delta)) / size;
  return size * fraction;
}

StatsSnapshot build_stats(const Catalog& catalog, DistanceModel model) {
  if (catalog.size() == 0) throw std::invalid_argument("cannot build statistics over an empty catalog");

  StatsSnapshot snapshot;
  snapshot.catalog_size_ = static_cast<std::int64_t>(catalog.size());
  snapshot.schema_ = catalog.schema();
  snapshot.distances_ = std::move(model);

  for (const SchemaField& field : catalog.schema().fields()) snapshot.histograms_[field.name] = {};
  for (const Item& item : catalog.items()) {
    for (const SchemaField& field : catalog.schema().fields()) {
      AttributeHistogram& histogram = snapshot.histograms_[field.name];
      if (const AttributeValue* value = item.find(field.name)) {
        ++histogram.counts[*value];
      } else {
        ++histogram.missing;
      }
    }
  }

  // Exact co-occurrence counts over every ordered attribute pair.
  const auto& fields = catalog.schema().fields();
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (i == j) continue;
      std::map<std::pair<AttributeValue, AttributeValue>, std::int64_t> joint;
      for (const Item& item : catalog.items()) {
        const AttributeValue* vi = item.find(fields[i].name);
        const AttributeValue* vj = item.find(fields[j].name);
        if (vi != nullptr && vj != nullptr) ++joint[{*vi, *vj}];
      }
      const AttributeHistogram& condition_histogram = snapshot.histograms_[fields[j].name];
      for (const auto& [pair, count] : joint) {
        const std::int64_t condition_count = condition_histogram.counts.at(pair.second);
        snapshot.cond_probs_.insert(CondProbTable::Key{fields[i].name, pair.first, fields[j].name, pair.second},
                                    static_cast<double>(count) / static_cast<double>(condition_count));
      }
    }
  }
  return snapshot;
}

namespace {
constexpr std::string_view kStatsMagic = "qrelax-stats";
constexpr int kStatsVersion = 1;
}  // namespace

void StatsSnapshot::save(std::ostream& out) const {
  out << kStatsMagic << ',' << kStatsVersion << '\n';
  out << "P," << catalog_size_ << '\n';
  for (const SchemaField& field : schema_.fields()) {
    const AttributeHistogram& histogram = histograms_.at(field.name);
    out << "A," << field.name << ',' << to_string(field.kind) << ',' << histogram.missing << '\n';
  }
  for (const SchemaField& field : schema_.fields()) {
    const AttributeHistogram& histogram = histograms_.at(field.name);
    for (const auto& [value, count] : histogram.counts)
      out << "H," << field.name << ',' << value.to_string() << ',' << count << '\n';
  }
  for (const auto& [key, probability] : cond_probs_.entries()) {
    out << "C," << std::get<0>(key) << ',' << std::get<1>(key).to_string() << ',' << std::get<2>(key) << ','
        << std::get<3>(key).to_string() << ',' << text::format_double(probability) << '\n';
  }
  for (const DistanceModel::Entry& entry : distances_.entries()) {
    out << "D," << entry.attribute << ',' << entry.from.to_string() << ',' << entry.to.to_string() << ','
        << text::format_double(entry.distance) << '\n';
  }
}

StatsSnapshot StatsSnapshot::load(std::istream& source, std::string_view source_name) {
  StatsSnapshot snapshot;
  std::string line;
  std::size_t line_number = 0;
  const auto fail = [&](const std::string& message) -> void {
    throw std::runtime_error(std::string(source_name) + ":" + std::to_string(line_number) + ": " + message);
  };

  ++line_number;
  if (!std::getline(source, line)) fail("missing version line");
  {
    const auto fields = text::split(text::trim(line), ',');
    if (fields.size() != 2 || fields[0] != kStatsMagic || text::parse_int(fields[1]) != kStatsVersion)
      fail("unsupported stats file version");
  }

  const auto typed = [&](std::string_view attribute, std::string_view token) -> AttributeValue {
    const SchemaField* field = snapshot.schema_.find(attribute);
    if (field == nullptr) fail("unknown attribute '" + std::string(attribute) + "'");
    try {
      return AttributeValue::parse(token, field->kind);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    throw std::logic_error("unreachable");
  };

  while (std::getline(source, line)) {
    ++line_number;
    const auto trimmed = text::trim(line);
    if (trimmed.empty()) continue;
    const auto fields = text::split(trimmed, ',');
    if (fields[0] == "P") {
      if (fields.size() != 2) fail("malformed P line");
      const auto size = text::parse_int(fields[1]);
      if (!size || *size <= 0) fail("catalog size must be positive");
      snapshot.catalog_size_ = *size;
    } else if (fields[0] == "A") {
      if (fields.size() != 4) fail("malformed A line");
      const auto missing = text::parse_int(fields[3]);
      if (!missing || *missing < 0) fail("malformed missing count");
      AttributeKind kind;
      if (fields[2] == "cat") {
        kind = AttributeKind::categorical;
      } else if (fields[2] == "num") {
        kind = AttributeKind::numeric;
      } else {
        fail("unknown attribute kind '" + std::string(fields[2]) + "'");
        continue;
      }
      try {
        snapshot.schema_.add_field(std::string(fields[1]), kind);
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      }
      snapshot.histograms_[std::string(fields[1])].missing = *missing;
    } else if (fields[0] == "H") {
      if (fields.size() != 4) fail("malformed H line");
      const auto count = text::parse_int(fields[3]);
      if (!count || *count < 0) fail("malformed histogram count");
      AttributeHistogram& histogram = snapshot.histograms_[std::string(fields[1])];
      if (!histogram.counts.emplace(typed(fields[1], fields[2]), *count).second) fail("duplicate histogram bucket");
    } else if (fields[0] == "C") {
      if (fields.size() != 6) fail("malformed C line");
      const auto probability = text::parse_double(fields[5]);
      if (!probability) fail("malformed probability");
      try {
        snapshot.cond_probs_.insert(CondProbTable::Key{std::string(fields[1]), typed(fields[1], fields[2]),
                                                       std::string(fields[3]), typed(fields[3], fields[4])},
                                    *probability);
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      }
    } else if (fields[0] == "D") {
      if (fields.size() != 5) fail("malformed D line");
      const auto distance = text::parse_double(fields[4]);
      if (!distance) fail("malformed distance");
      try {
        snapshot.distances_.add_entry(std::string(fields[1]), typed(fields[1], fields[2]),
                                      typed(fields[1], fields[3]), *distance);
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      }
    } else {
      fail("unknown record type '" + std::string(fields[0]) + "'");
    }
  }
  if (snapshot.catalog_size_ <= 0) fail("stats file has no P line");

  // Conservation check: per attribute, bucket counts plus the missing count
  // must equal the catalog size.
  for (const SchemaField& field : snapshot.schema_.fields()) {
    if (snapshot.histograms_.at(field.name).total() != snapshot.catalog_size_)
      throw std::runtime_error(std::string(source_name) + ": histogram for '" + field.name +
                               "' does not sum to the catalog size");
  }
  return snapshot;
}

}  // namespace qrelax
