#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qrelax {

enum class AttributeKind { categorical, numeric };

std::string_view to_string(AttributeKind kind) noexcept;

/// A single attribute value: either a categorical token or a finite number.
/// Values compare first by kind, then by content, so they can key ordered maps.
class AttributeValue {
 public:
  static AttributeValue categorical(std::string token);
  static AttributeValue numeric(double value);

  /// Parses a raw token according to the attribute kind it belongs to.
  static AttributeValue parse(std::string_view token, AttributeKind kind);

  bool is_numeric() const noexcept { return std::holds_alternative<double>(value_); }
  AttributeKind kind() const noexcept {
    return is_numeric() ? AttributeKind::numeric : AttributeKind::categorical;
  }
  const std::string& token() const { return std::get<std::string>(value_); }
  double number() const { return std::get<double>(value_); }

  /// Canonical text form; numeric values use the shortest round-trip rendering.
  std::string to_string() const;

  friend bool operator==(const AttributeValue&, const AttributeValue&) = default;
  friend bool operator<(const AttributeValue& a, const AttributeValue& b) {
    if (a.value_.index() != b.value_.index()) return a.value_.index() < b.value_.index();
    return a.value_ < b.value_;
  }

 private:
  AttributeValue() = default;
  std::variant<std::string, double> value_;
};

struct SchemaField {
  std::string name;
  AttributeKind kind = AttributeKind::categorical;
};

/// The attribute set of a catalog, in declaration order.
class Schema {
 public:
  void add_field(std::string name, AttributeKind kind);
  const SchemaField* find(std::string_view name) const noexcept;
  const std::vector<SchemaField>& fields() const noexcept { return fields_; }
  std::size_t size() const noexcept { return fields_.size(); }

 private:
  std::vector<SchemaField> fields_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

struct Item {
  std::string id;
  std::map<std::string, AttributeValue, std::less<>> attributes;

  /// nullptr when the item does not carry the attribute.
  const AttributeValue* find(std::string_view attribute) const noexcept;
};

/// Immutable item database. Item order is the canonical tie-break order for
/// all downstream ranking, so it is preserved exactly as loaded.
class Catalog {
 public:
  Catalog(Schema schema, std::vector<Item> items);

  const Schema& schema() const noexcept { return schema_; }
  const std::vector<Item>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }

 private:
  Schema schema_;
  std::vector<Item> items_;
};

struct QueryTerm {
  std::string attribute;
  AttributeValue value;

  friend bool operator==(const QueryTerm&, const QueryTerm&) = default;
};

/// A conjunctive attribute:value query (AND-semantics over all terms).
struct StructuredQuery {
  std::vector<QueryTerm> terms;

  std::size_t size() const noexcept { return terms.size(); }
  const QueryTerm* find(std::string_view attribute) const noexcept;

  friend bool operator==(const StructuredQuery&, const StructuredQuery&) = default;
};

/// Loads a catalog from its line-oriented file form:
///   line 1:  id,attr1:kind,attr2:kind,...   (kind is "cat" or "num")
///   line 2+: comma-separated values, empty field = attribute missing.
/// Throws std::runtime_error with "<source>:<line>: ..." on malformed input.
Catalog load_catalog(std::istream& source, std::string_view source_name = "<catalog>");

void save_catalog(const Catalog& catalog, std::ostream& out);

/// Parses "attr:value(;attr:value)*". Untyped: every value is categorical.
StructuredQuery parse_query(std::string_view query_text);

/// Typed variant: values take the kind declared by the schema, and unknown
/// attributes are rejected.
StructuredQuery parse_query(std::string_view query_text, const Schema& schema);

std::string render_query(const StructuredQuery& query);

}  // namespace qrelax
