#include "qrelax/distance.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "qrelax/text.hpp"

namespace qrelax {

double numeric_distance(double v, double w) noexcept {
  if (v == w) return 0.0;
  if (v == 0.0) return 1.0;
  return std::min(1.0, std::abs(v - w) / std::abs(v));
}

void DistanceModel::add_entry(std::string attribute, AttributeValue from, AttributeValue to, double distance) {
  if (!(distance >= 0.0 && distance <= 1.0))
    throw std::invalid_argument("distance " + text::format_double(distance) + " is outside [0,1]");
  if (from == to && distance != 0.0)
    throw std::invalid_argument("self-distance for '" + from.to_string() + "' must be 0");
  auto& table = tables_[std::move(attribute)];
  const auto [it, inserted] = table.emplace(PairKey{std::move(from), std::move(to)}, distance);
  if (!inserted)
    throw std::invalid_argument("duplicate distance entry for (" + it->first.first.to_string() + ", " +
                                it->first.second.to_string() + ")");
}

double DistanceModel::distance(std::string_view attribute, const AttributeValue& from,
                               const AttributeValue& to) const {
  if (from == to) return 0.0;
  if (const auto table = tables_.find(attribute); table != tables_.end()) {
    if (const auto it = table->second.find(PairKey{from, to}); it != table->second.end()) return it->second;
  }
  if (from.is_numeric() && to.is_numeric()) return numeric_distance(from.number(), to.number());
  return 1.0;
}

std::vector<DistanceModel::Entry> DistanceModel::entries() const {
  std::vector<Entry> out;
  for (const auto& [attribute, table] : tables_)
    for (const auto& [pair, distance] : table) out.push_back({attribute, pair.first, pair.second, distance});
  return out;
}

std::size_t DistanceModel::entry_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [attribute, table] : tables_) n += table.size();
  return n;
}

DistanceModel load_distance_model(std::istream& source, const Schema& schema, std::string_view source_name) {
  DistanceModel model;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(source, line)) {
    ++line_number;
    const auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = text::split(trimmed, ',');
    const auto fail = [&](const std::string& message) -> void {
      throw std::runtime_error(std::string(source_name) + ":" + std::to_string(line_number) + ": " + message);
    };
    if (fields.size() != 4) fail("expected 4 fields (attr,v,w,distance)");
    const auto attribute = text::trim(fields[0]);
    const SchemaField* field = schema.find(attribute);
    if (field == nullptr) fail("unknown attribute '" + std::string(attribute) + "'");
    const auto distance = text::parse_double(text::trim(fields[3]));
    if (!distance) fail("'" + std::string(fields[3]) + "' is not a number");
    try {
      model.add_entry(field->name, AttributeValue::parse(text::trim(fields[1]), field->kind),
                      AttributeValue::parse(text::trim(fields[2]), field->kind), *distance);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
  return model;
}

void save_distance_model(const DistanceModel& model, std::ostream& out) {
  for (const DistanceModel::Entry& entry : model.entries()) {
    out << entry.attribute << ',' << entry.from.to_string() << ',' << entry.to.to_string() << ','
        << text::format_double(entry.distance) << '\n';
  }
}

double aggregate_distance(const Item& item, const StructuredQuery& query, const DistanceModel& model) {
  if (query.terms.empty()) throw std::invalid_argument("aggregate distance of an empty query");
  double sum = 0.0;
  for (const QueryTerm& term : query.terms) {
    const AttributeValue* value = item.find(term.attribute);
    sum += value == nullptr ? 1.0 : model.distance(term.attribute, term.value, *value);
  }
  return sum / static_cast<double>(query.terms.size());
}

double mean_dist(std::span<const Item* const> results, const StructuredQuery& query,
                 const DistanceModel& model, std::int64_t k) {
  if (k < 1) throw std::invalid_argument("mean_dist requires k >= 1");
  double sum = 0.0;
  for (const Item* item : results) sum += aggregate_distance(*item, query, model);
  const auto count = static_cast<std::int64_t>(results.size());
  if (count >= k) return sum / static_cast<double>(count);
  return (sum + static_cast<double>(k - count)) / static_cast<double>(k);
}

}  // namespace qrelax
