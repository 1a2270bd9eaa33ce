#include <random>
#include <sstream>

#include "doctest.h"
#include "qrelax/catalog.hpp"
#include "test_support.hpp"

using namespace qrelax;

TEST_CASE("load_catalog reads the TV table") {
  const Catalog catalog = testsupport::tv_catalog();
  CHECK(catalog.size() == 10);
  REQUIRE(catalog.schema().size() == 4);
  CHECK(catalog.schema().fields()[0].name == "Brand");
  CHECK(catalog.schema().fields()[0].kind == AttributeKind::categorical);
  CHECK(catalog.schema().fields()[3].name == "Diagonal");
  CHECK(catalog.schema().fields()[3].kind == AttributeKind::numeric);

  // Source order is preserved.
  CHECK(catalog.items().front().id == "UN46B6000");
  CHECK(catalog.items().back().id == "LC-52LE700UN");

  const Item& first = catalog.items().front();
  REQUIRE(first.find("Diagonal") != nullptr);
  CHECK(first.find("Diagonal")->number() == 46.0);
  CHECK(first.find("Brand")->token() == "Samsung");
}

TEST_CASE("load_catalog accepts an empty stream with a valid header") {
  std::istringstream in("id,Brand:cat\n");
  const Catalog catalog = load_catalog(in);
  CHECK(catalog.size() == 0);
  CHECK(catalog.schema().size() == 1);
}

TEST_CASE("load_catalog rejects duplicate item ids") {
  std::istringstream in("id,Brand:cat\nx1,Samsung\nx1,Sony\n");
  CHECK_THROWS_WITH_AS(load_catalog(in, "cat.csv"), doctest::Contains("cat.csv:3: duplicate item id 'x1'"),
                       std::runtime_error);
}

TEST_CASE("load_catalog reports malformed records with line numbers") {
  SUBCASE("wrong field count") {
    std::istringstream in("id,Brand:cat,Type:cat\nx1,Samsung\n");
    CHECK_THROWS_WITH_AS(load_catalog(in, "cat.csv"), doctest::Contains("cat.csv:2:"), std::runtime_error);
  }
  SUBCASE("kind conflict in a numeric column") {
    std::istringstream in("id,Diagonal:num\nx1,wide\n");
    CHECK_THROWS_WITH_AS(load_catalog(in, "cat.csv"), doctest::Contains("kind conflict"), std::runtime_error);
  }
  SUBCASE("unknown kind tag") {
    std::istringstream in("id,Brand:text\n");
    CHECK_THROWS_AS(load_catalog(in, "cat.csv"), std::runtime_error);
  }
  SUBCASE("record with every attribute missing") {
    std::istringstream in("id,Brand:cat,Type:cat\nx1,,\n");
    CHECK_THROWS_WITH_AS(load_catalog(in, "cat.csv"), doctest::Contains("no attribute values"), std::runtime_error);
  }
}

TEST_CASE("items may omit schema attributes") {
  std::istringstream in("id,Brand:cat,Type:cat\nx1,Samsung,\nx2,,LED\n");
  const Catalog catalog = load_catalog(in);
  CHECK(catalog.items()[0].find("Type") == nullptr);
  CHECK(catalog.items()[1].find("Brand") == nullptr);
  CHECK(catalog.items()[1].find("Type")->token() == "LED");
}

TEST_CASE("catalog round-trips through its file form") {
  const Catalog catalog = testsupport::tv_catalog();
  std::ostringstream first;
  save_catalog(catalog, first);
  std::istringstream back(first.str());
  const Catalog reloaded = load_catalog(back);
  std::ostringstream second;
  save_catalog(reloaded, second);
  CHECK(first.str() == second.str());
  CHECK(reloaded.size() == catalog.size());
}

TEST_CASE("parse_query handles the running example") {
  const Catalog catalog = testsupport::tv_catalog();
  const StructuredQuery query = parse_query("Brand:Samsung;Type:LED;Diagonal:50", catalog.schema());
  REQUIRE(query.size() == 3);
  CHECK(query.terms[0].attribute == "Brand");
  CHECK(query.terms[0].value.token() == "Samsung");
  CHECK(query.terms[2].value.is_numeric());
  CHECK(query.terms[2].value.number() == 50.0);
}

TEST_CASE("parse_query parses a single pair") {
  const StructuredQuery query = parse_query("Brand:Samsung");
  REQUIRE(query.size() == 1);
  CHECK(query.terms[0].value.token() == "Samsung");
}

TEST_CASE("parse_query rejects bad input") {
  CHECK_THROWS_WITH_AS(parse_query("Brand:Samsung;Brand:Sony"), doctest::Contains("repeated attribute"),
                       std::runtime_error);
  CHECK_THROWS_AS(parse_query("BrandSamsung"), std::runtime_error);
  CHECK_THROWS_AS(parse_query("Brand:"), std::runtime_error);
  CHECK_THROWS_AS(parse_query(""), std::runtime_error);

  const Catalog catalog = testsupport::tv_catalog();
  CHECK_THROWS_WITH_AS(parse_query("Color:red", catalog.schema()), doctest::Contains("unknown attribute"),
                       std::runtime_error);
  CHECK_THROWS_AS(parse_query("Diagonal:wide", catalog.schema()), std::runtime_error);
}

TEST_CASE("parse_query(render_query(q)) is the identity") {
  const Catalog catalog = testsupport::tv_catalog();
  std::mt19937_64 rng(7);
  const char* brands[] = {"Samsung", "Sony", "Sharp"};
  const char* types[] = {"LED", "LCD", "Plasma", "CRT"};
  for (int round = 0; round < 200; ++round) {
    StructuredQuery query;
    query.terms.push_back({"Brand", AttributeValue::categorical(brands[rng() % 3])});
    if (rng() % 2) query.terms.push_back({"Type", AttributeValue::categorical(types[rng() % 4])});
    if (rng() % 2)
      query.terms.push_back(
          {"Diagonal", AttributeValue::numeric(static_cast<double>(rng() % 1000) / 8.0)});
    CHECK(parse_query(render_query(query), catalog.schema()) == query);
  }
}
