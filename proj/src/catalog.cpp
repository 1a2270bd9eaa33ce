#include "qrelax/catalog.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "qrelax/text.hpp"

namespace qrelax {

namespace {

[[noreturn]] void fail_at(std::string_view source, std::size_t line, const std::string& message) {
  throw std::runtime_error(std::string(source) + ":" + std::to_string(line) + ": " + message);
}

void check_identifier(std::string_view name) {
  if (name.empty()) throw std::invalid_argument("attribute name must be non-empty");
  if (name.find_first_of(",:;") != std::string_view::npos)
    throw std::invalid_argument("attribute name '" + std::string(name) + "' contains a reserved character");
}

}  // namespace

std::string_view to_string(AttributeKind kind) noexcept {
  return kind == AttributeKind::numeric ? "num" : "cat";
}

AttributeValue AttributeValue::categorical(std::string token) {
  if (token.empty()) throw std::invalid_argument("categorical value must be non-empty");
  AttributeValue value;
  value.value_ = std::move(token);
  return value;
}

AttributeValue AttributeValue::numeric(double number) {
  if (!std::isfinite(number)) throw std::invalid_argument("numeric value must be finite");
  AttributeValue value;
  value.value_ = number;
  return value;
}

AttributeValue AttributeValue::parse(std::string_view token, AttributeKind kind) {
  if (kind == AttributeKind::categorical) return categorical(std::string(token));
  const auto number = text::parse_double(token);
  if (!number) throw std::invalid_argument("'" + std::string(token) + "' is not a numeric value");
  return numeric(*number);
}

std::string AttributeValue::to_string() const {
  if (is_numeric()) return text::format_double(number());
  return token();
}

void Schema::add_field(std::string name, AttributeKind kind) {
  check_identifier(name);
  if (index_.contains(name)) throw std::invalid_argument("duplicate attribute '" + name + "'");
  index_.emplace(name, fields_.size());
  fields_.push_back({std::move(name), kind});
}

const SchemaField* Schema::find(std::string_view name) const noexcept {
  const auto it = index_.find(name);
  return it == index_.end() ? nullptr : &fields_[it->second];
}

const AttributeValue* Item::find(std::string_view attribute) const noexcept {
  const auto it = attributes.find(attribute);
  return it == attributes.end() ? nullptr : &it->second;
}

Catalog::Catalog(Schema schema, std::vector<Item> items)
    : schema_(std::move(schema)), items_(std::move(items)) {
  std::set<std::string_view> ids;
  for (const Item& item : items_) {
    if (item.id.empty()) throw std::invalid_argument("item id must be non-empty");
    if (!ids.insert(item.id).second) throw std::invalid_argument("duplicate item id '" + item.id + "'");
    if (item.attributes.empty())
      throw std::invalid_argument("item '" + item.id + "' has no attribute values");
    for (const auto& [name, value] : item.attributes) {
      const SchemaField* field = schema_.find(name);
      if (field == nullptr)
        throw std::invalid_argument("item '" + item.id + "' uses undeclared attribute '" + name + "'");
      if (value.kind() != field->kind)
        throw std::invalid_argument("item '" + item.id + "' has a " + std::string(to_string(value.kind())) +
                                    " value for " + std::string(to_string(field->kind)) + " attribute '" + name + "'");
    }
  }
}

const QueryTerm* StructuredQuery::find(std::string_view attribute) const noexcept {
  for (const QueryTerm& term : terms)
    if (term.attribute == attribute) return &term;
  return nullptr;
}

Catalog load_catalog(std::istream& source, std::string_view source_name) {
  std::string line;
  if (!std::getline(source, line)) fail_at(source_name, 1, "missing header line");

  const auto header = text::split(line, ',');
  if (header.empty() || text::trim(header[0]) != "id")
    fail_at(source_name, 1, "header must start with the 'id' column");

  Schema schema;
  for (std::size_t i = 1; i < header.size(); ++i) {
    const auto column = text::trim(header[i]);
    const std::size_t sep = column.rfind(':');
    if (sep == std::string_view::npos)
      fail_at(source_name, 1, "column '" + std::string(column) + "' is missing its kind (expected name:cat or name:num)");
    const auto name = column.substr(0, sep);
    const auto kind_token = column.substr(sep + 1);
    AttributeKind kind;
    if (kind_token == "cat") {
      kind = AttributeKind::categorical;
    } else if (kind_token == "num") {
      kind = AttributeKind::numeric;
    } else {
      fail_at(source_name, 1, "unknown attribute kind '" + std::string(kind_token) + "'");
    }
    try {
      schema.add_field(std::string(name), kind);
    } catch (const std::invalid_argument& e) {
      fail_at(source_name, 1, e.what());
    }
  }

  std::vector<Item> items;
  std::set<std::string> seen_ids;
  std::size_t line_number = 1;
  while (std::getline(source, line)) {
    ++line_number;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(line, ',');
    if (fields.size() != schema.size() + 1)
      fail_at(source_name, line_number,
              "expected " + std::to_string(schema.size() + 1) + " fields, found " + std::to_string(fields.size()));

    Item item;
    item.id = std::string(text::trim(fields[0]));
    if (item.id.empty()) fail_at(source_name, line_number, "empty item id");
    if (!seen_ids.insert(item.id).second)
      fail_at(source_name, line_number, "duplicate item id '" + item.id + "'");

    for (std::size_t i = 0; i < schema.size(); ++i) {
      const auto token = text::trim(fields[i + 1]);
      if (token.empty()) continue;  // missing attribute
      const SchemaField& field = schema.fields()[i];
      try {
        item.attributes.emplace(field.name, AttributeValue::parse(token, field.kind));
      } catch (const std::invalid_argument&) {
        fail_at(source_name, line_number,
                "attribute kind conflict: '" + std::string(token) + "' is not a valid " +
                    std::string(to_string(field.kind)) + " value for '" + field.name + "'");
      }
    }
    if (item.attributes.empty()) fail_at(source_name, line_number, "item '" + item.id + "' has no attribute values");
    items.push_back(std::move(item));
  }
  return Catalog(std::move(schema), std::move(items));
}

void save_catalog(const Catalog& catalog, std::ostream& out) {
  out << "id";
  for (const SchemaField& field : catalog.schema().fields())
    out << ',' << field.name << ':' << to_string(field.kind);
  out << '\n';
  for (const Item& item : catalog.items()) {
    out << item.id;
    for (const SchemaField& field : catalog.schema().fields()) {
      out << ',';
      if (const AttributeValue* value = item.find(field.name)) out << value->to_string();
    }
    out << '\n';
  }
}

namespace {

StructuredQuery parse_query_impl(std::string_view query_text, const Schema* schema) {
  StructuredQuery query;
  for (const auto part : text::split(query_text, ';')) {
    const auto term_text = text::trim(part);
    const std::size_t sep = term_text.find(':');
    if (sep == std::string_view::npos)
      throw std::runtime_error("query term '" + std::string(term_text) + "' is missing ':'");
    const auto attribute = text::trim(term_text.substr(0, sep));
    const auto value_token = text::trim(term_text.substr(sep + 1));
    if (attribute.empty()) throw std::runtime_error("query term with empty attribute name");
    if (value_token.empty())
      throw std::runtime_error("query term for '" + std::string(attribute) + "' has an empty value");
    if (query.find(attribute) != nullptr)
      throw std::runtime_error("repeated attribute '" + std::string(attribute) + "' in query");

    AttributeKind kind = AttributeKind::categorical;
    if (schema != nullptr) {
      const SchemaField* field = schema->find(attribute);
      if (field == nullptr) throw std::runtime_error("unknown attribute '" + std::string(attribute) + "'");
      kind = field->kind;
    }
    AttributeValue value = AttributeValue::categorical("?");
    try {
      value = AttributeValue::parse(value_token, kind);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("query term for '" + std::string(attribute) + "': " + e.what());
    }
    query.terms.push_back({std::string(attribute), std::move(value)});
  }
  if (query.terms.empty()) throw std::runtime_error("query has no terms");
  return query;
}

}  // namespace

StructuredQuery parse_query(std::string_view query_text) { return parse_query_impl(query_text, nullptr); }

StructuredQuery parse_query(std::string_view query_text, const Schema& schema) {
  return parse_query_impl(query_text, &schema);
}

std::string render_query(const StructuredQuery& query) {
  std::string out;
  for (const QueryTerm& term : query.terms) {
    if (!out.empty()) out += ';';
    out += term.attribute;
    out += ':';
    out += term.value.to_string();
  }
  return out;
}

}  // namespace qrelax
