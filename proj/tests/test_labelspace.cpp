#include "mlceval/labelspace.hpp"

#include <set>
#include <string>
#include <vector>

#include "doctest.h"

using namespace mlceval;

namespace {
const LabelSchema& schema() { return LabelSchema::suicidality(); }
}

TEST_CASE("schema validation") {
    CHECK(schema().size() == 4);
    CHECK(schema().label(0) == "SI");
    CHECK(schema().label(3) == "NSSI");
    CHECK(schema().index_of("ES") == 2);
    CHECK_THROWS_AS(schema().index_of("XX"), ValidationError);
    CHECK_THROWS_AS(LabelSchema({}), ValidationError);
    CHECK_THROWS_AS(LabelSchema({"A", "A"}), ValidationError);
    CHECK_THROWS_AS(LabelSchema({"A", "B&C"}), ValidationError);
    CHECK_THROWS_AS(LabelSchema({"with space"}), ValidationError);
    CHECK_THROWS_AS(LabelSchema(std::vector<std::string>(17, "x")), ValidationError);
    // case-sensitive uniqueness: these are distinct labels
    CHECK(LabelSchema({"si", "SI"}).size() == 2);
    CHECK(schema().digest().size() == 16);
    CHECK(schema().digest() != LabelSchema({"SI", "SA", "NSSI", "ES"}).digest());
}

TEST_CASE("binary code parsing") {
    const LabelSet si_es = parse_binary_code("1-0-1-0", schema());
    CHECK(si_es == make_label_set(schema(), {"SI", "ES"}));
    CHECK(si_es.cardinality() == 2);

    CHECK(parse_binary_code("0-0-0-0", schema()).empty());
    CHECK_THROWS_AS(parse_binary_code("1-0-1", schema()), ParseError);
    CHECK_THROWS_AS(parse_binary_code("2-0-0-0", schema()), ParseError);
    CHECK_THROWS_AS(parse_binary_code("", schema()), ParseError);
    CHECK_THROWS_AS(parse_binary_code("1-0-1-0-0", schema()), ParseError);

    // position detail in messages
    try {
        parse_binary_code("1-x-0-0", schema());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("token 2") != std::string::npos);
    }
}

TEST_CASE("code formatting") {
    const LabelSet si_es = make_label_set(schema(), {"SI", "ES"});
    const CodeTriple codes = format_codes(si_es, schema());
    CHECK(codes.binary == "1-0-1-0");
    CHECK(codes.semantic == "+SI-SA+ES-NSSI");
    CHECK(codes.textual == "SI&ES");

    const CodeTriple none = format_codes(LabelSet(4), schema());
    CHECK(none.binary == "0-0-0-0");
    CHECK(none.semantic == "-SI-SA-ES-NSSI");
    CHECK(none.textual == "None");

    const CodeTriple all = format_codes(LabelSet::full(4), schema());
    CHECK(all.binary == "1-1-1-1");
    CHECK(all.semantic == "+SI+SA+ES+NSSI");
    CHECK(all.textual == "SI&SA&ES&NSSI");

    CHECK_THROWS_AS(format_binary_code(LabelSet(3), schema()), ValidationError);
}

TEST_CASE("power set canonical order") {
    const PowerSetOrder order = enumerate_powerset(schema());
    CHECK(order.size() == 16);
    CHECK(order.at(0).empty());
    CHECK(order.at(15) == LabelSet::full(4));

    // L=2 over (A,B): empty, {B}, {A}, {A,B}
    const LabelSchema ab({"A", "B"});
    const PowerSetOrder small = enumerate_powerset(ab);
    CHECK(format_binary_code(small.at(0), ab) == "0-0");
    CHECK(format_binary_code(small.at(1), ab) == "0-1");
    CHECK(format_binary_code(small.at(2), ab) == "1-0");
    CHECK(format_binary_code(small.at(3), ab) == "1-1");

    CHECK_THROWS_AS(PowerSetOrder(0), ValidationError);
    CHECK_THROWS_AS(PowerSetOrder(17), ValidationError);
}

TEST_CASE("order law: strict supersets appear later (exhaustive L<=8)") {
    for (std::size_t l = 1; l <= 8; ++l) {
        const PowerSetOrder order(l);
        for (std::size_t i = 0; i < order.size(); ++i) {
            for (std::size_t j = 0; j < order.size(); ++j) {
                const LabelSet& x = order.at(i);
                const LabelSet& y = order.at(j);
                if (x.subset_of(y) && !(x == y)) CHECK(i < j);
            }
        }
    }
}

TEST_CASE("binary round trip over the whole power set (exhaustive L<=8)") {
    const std::vector<std::string> names{"a", "b", "c", "d", "e", "f", "g", "h"};
    for (std::size_t l = 1; l <= 8; ++l) {
        const LabelSchema s(std::vector<std::string>(names.begin(), names.begin() + l));
        const PowerSetOrder order = enumerate_powerset(s);
        for (const auto& set : order.sets())
            CHECK(parse_binary_code(format_binary_code(set, s), s) == set);
    }
}

TEST_CASE("semantic and textual codes are injective over the power set") {
    const PowerSetOrder order = enumerate_powerset(schema());
    std::set<std::string> semantic, textual;
    for (const auto& set : order.sets()) {
        semantic.insert(format_semantic_code(set, schema()));
        textual.insert(format_textual_code(set, schema()));
    }
    CHECK(semantic.size() == order.size());
    CHECK(textual.size() == order.size());
}

TEST_CASE("patterns") {
    const LabelSetPattern p = parse_pattern("0-1-0-*", schema());
    CHECK(p.matches(make_label_set(schema(), {"SA"})));
    CHECK(p.matches(make_label_set(schema(), {"SA", "NSSI"})));
    CHECK_FALSE(p.matches(make_label_set(schema(), {"SI", "SA"})));
    CHECK(p.wildcard_count() == 1);
    CHECK(p.to_string() == "0-1-0-*");

    const LabelSetPattern all = parse_pattern("*-*-*-*", schema());
    const PowerSetOrder order = enumerate_powerset(schema());
    for (const auto& set : order.sets()) CHECK(all.matches(set));

    // a pattern with zero wildcards matches exactly one set
    const LabelSetPattern fixed = parse_pattern("1-0-1-0", schema());
    int matched = 0;
    for (const auto& set : order.sets()) matched += fixed.matches(set) ? 1 : 0;
    CHECK(matched == 1);

    const LabelSetPattern two = parse_pattern("1-1-0-*", schema());
    matched = 0;
    for (const auto& set : order.sets()) matched += two.matches(set) ? 1 : 0;
    CHECK(matched == 2);

    CHECK_THROWS_AS(parse_pattern("0-1-0", schema()), ParseError);
    CHECK_THROWS_AS(parse_pattern("0-1-0-x", schema()), ParseError);
}

TEST_CASE("group preset partitions the power set") {
    const auto groups = si_sa_groups(schema());
    REQUIRE(groups.size() == 4);
    CHECK(groups[0].name == "-SI-SA*");
    CHECK(groups[1].name == "-SI+SA*");
    CHECK(groups[2].name == "+SI-SA*");
    CHECK(groups[3].name == "+SI+SA*");
    const PowerSetOrder order = enumerate_powerset(schema());
    for (const auto& set : order.sets()) {
        int matches = 0;
        for (const auto& g : groups) matches += g.pattern.matches(set) ? 1 : 0;
        CHECK(matches == 1);
    }
}

TEST_CASE("label set algebra") {
    const LabelSet a = make_label_set(schema(), {"SI", "SA"});
    const LabelSet b = make_label_set(schema(), {"SA", "ES"});
    CHECK(a.intersect(b) == make_label_set(schema(), {"SA"}));
    CHECK(a.minus(b) == make_label_set(schema(), {"SI"}));
    CHECK(a.unite(b) == make_label_set(schema(), {"SI", "SA", "ES"}));
    CHECK(a.complement() == make_label_set(schema(), {"ES", "NSSI"}));
    CHECK(make_label_set(schema(), {"SA"}).subset_of(a));
    CHECK_FALSE(a.subset_of(b));
    CHECK_THROWS_AS(a.intersect(LabelSet(3)), ValidationError);
    CHECK_THROWS_AS(LabelSet(4, 0x10), ValidationError);  // bit beyond width
    // code value reads position 0 as the most significant bit
    CHECK(make_label_set(schema(), {"SI"}).code_value() == 8);
    CHECK(make_label_set(schema(), {"NSSI"}).code_value() == 1);
}
