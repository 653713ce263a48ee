#include "chartnl/errors.hpp"
#include "chartnl/json_tree.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

using namespace chartnl;

TEST(JsonTree, PreservesMemberOrder) {
    SpecNode n = parse_json(R"({"b":1,"a":2,"c":{"z":1,"y":2}})");
    ASSERT_TRUE(n.is_object());
    ASSERT_EQ(n.object().size(), 3u);
    EXPECT_EQ(n.object()[0].key, "b");
    EXPECT_EQ(n.object()[1].key, "a");
    EXPECT_EQ(to_json(n), R"({"b":1,"a":2,"c":{"z":1,"y":2}})");
}

TEST(JsonTree, SortedSerialization) {
    SpecNode n = parse_json(R"({"b":1,"a":[{"d":1,"c":2}]})");
    EXPECT_EQ(to_json_sorted(n), R"({"a":[{"c":2,"d":1}],"b":1})");
}

TEST(JsonTree, IntegersStayIntegral) {
    EXPECT_EQ(to_json(parse_json("[3, -7, 0]")), "[3,-7,0]");
    SpecNode f = parse_json("3.0");
    EXPECT_TRUE(std::holds_alternative<double>(f.scalar()));
}

TEST(JsonTree, ScalarsAndLookup) {
    SpecNode n = parse_json(R"({"s":"x","t":true,"n":null,"f":1.5,"o":{"k":1}})");
    EXPECT_EQ(n.find("s")->as_string(), "x");
    EXPECT_TRUE(n.find("t")->is_bool());
    EXPECT_TRUE(n.find("n")->is_null());
    EXPECT_DOUBLE_EQ(n.find("f")->as_number(), 1.5);
    EXPECT_TRUE(n.find("o")->truthy());
    EXPECT_FALSE(n.find("n")->truthy());
    EXPECT_EQ(n.find("missing"), nullptr);
    EXPECT_EQ(n.find("s")->find("x"), nullptr);
}

TEST(JsonTree, UnclosedObjectIsParseError) {
    EXPECT_THROW(parse_json(R"({"mark":"bar")"), ParseError);
    EXPECT_THROW(parse_json(""), ParseError);
    EXPECT_THROW(parse_json("[1,]"), ParseError);
    EXPECT_THROW(parse_json("{} {}"), ParseError);
}

TEST(JsonTree, ParseErrorCarriesPosition) {
    try {
        parse_json(R"({"a": tru})");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_GT(e.position(), 0u);
        EXPECT_LE(e.position(), 10u);
    }
}

TEST(JsonTree, DuplicateKeyRejected) {
    EXPECT_THROW(parse_json(R"({"a":1,"a":2})"), DuplicateKeyError);
    EXPECT_NO_THROW(parse_json(R"({"a":{"a":1}})"));
}

TEST(JsonTree, QuoteEscapesControlCharacters) {
    EXPECT_EQ(json_quote("a\"b\\c\n"), R"("a\"b\\c\n")");
    EXPECT_EQ(to_json(parse_json(R"("é\t")")), "\"\xC3\xA9\\t\"");
}

TEST(JsonTree, FormatDoubleRoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5, 3.0, 1e21}) {
        std::string s = format_double(v);
        EXPECT_NE(s.find_first_of(".eE"), std::string::npos) << s;
        EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
    }
}

TEST(JsonTree, ScalarText) {
    EXPECT_EQ(scalar_text(Scalar{std::string("x")}), "x");
    EXPECT_EQ(scalar_text(Scalar{std::int64_t{42}}), "42");
    EXPECT_EQ(scalar_text(Scalar{true}), "true");
    EXPECT_EQ(scalar_text(Scalar{nullptr}), "");
}

TEST(JsonTreeProperty, SerializeParseRoundTrip) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const std::string text = oracle::random_spec_tree(rng).dump(2);
        SpecNode once = parse_json(text);
        SpecNode twice = parse_json(to_json(once));
        EXPECT_EQ(once, twice) << text;
        EXPECT_EQ(to_json(once), to_json(twice));
    }
}
