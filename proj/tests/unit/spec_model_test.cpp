#include "chartnl/data_table.hpp"
#include "chartnl/errors.hpp"
#include "chartnl/spec_model.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace chartnl;

namespace {

SpecDocument doc(const std::string& text) { return parse_spec(text, "t"); }

StructuralProfile profile_off(const std::string& text) {
    return structural_profile(doc(text), VocabularyFilter::Off);
}

ChartTypeSet types(const std::string& text) { return classify_chart_types(doc(text)); }

}  // namespace

TEST(ParseSpec, MinimalDocument) {
    SpecDocument d = doc(R"({"mark":"bar"})");
    ASSERT_TRUE(d.root.is_object());
    EXPECT_EQ(d.root.object().size(), 1u);
    EXPECT_FALSE(d.schema_version.has_value());
}

TEST(ParseSpec, UnclosedIsParseError) { EXPECT_THROW(doc(R"({"mark":"bar")"), ParseError); }

TEST(ParseSpec, NonObjectRootRejected) { EXPECT_THROW(doc("[1,2]"), ParseError); }

TEST(ParseSpec, SchemaVersion) {
    EXPECT_EQ(doc(R"({"$schema":"https://vega.github.io/schema/vega-lite/v5.json","mark":"line"})").schema_version, 5);
    EXPECT_EQ(doc(R"({"$schema":"https://vega.github.io/schema/vega-lite/v3.4.0.json"})").schema_version, 3);
    EXPECT_FALSE(doc(R"({"$schema":"https://vega.github.io/schema/vega/v5.json"})").schema_version);
}

TEST(ParseSpec, LoadSpecUsesStemWithoutVlSuffix) {
    SpecDocument d = load_spec(std::string(CHARTNL_FIXTURE_DIR) + "/corpus/bar_sales.vl.json");
    EXPECT_EQ(d.id, "bar_sales");
    EXPECT_THROW(load_spec("/nonexistent/x.json"), IoError);
}

TEST(StructuralProfile, EightKeyExample) {
    auto p = profile_off(R"({"mark":"bar","encoding":{"x":{"field":"a","type":"nominal"},"y":{"field":"b","type":"quantitative"}}})");
    EXPECT_EQ(p.key_count, 8u);
    EXPECT_EQ(p.max_depth, 3u);
    EXPECT_EQ(p.internal_nodes, 4u);
    EXPECT_EQ(p.child_total, 8u);
    EXPECT_DOUBLE_EQ(p.branching_factor(), 2.0);
}

TEST(StructuralProfile, EmbeddedValuesExcluded) {
    auto p = profile_off(R"({"data":{"values":[{"a":1}]},"mark":"line"})");
    EXPECT_EQ(p.key_count, 2u);
    EXPECT_FALSE(p.unique_keys.count("values"));
    EXPECT_FALSE(p.unique_keys.count("a"));
}

TEST(StructuralProfile, EmptyDocument) {
    auto p = profile_off("{}");
    EXPECT_EQ(p.key_count, 0u);
    EXPECT_EQ(p.max_depth, 1u);
    EXPECT_EQ(p.branching_factor(), 0.0);
}

TEST(StructuralProfile, ArraysAreInternalNodes) {
    // root{layer}, layer[2], two objects with one key each.
    auto p = profile_off(R"({"layer":[{"mark":"line"},{"mark":"point"}]})");
    EXPECT_EQ(p.key_count, 3u);
    EXPECT_EQ(p.max_depth, 3u);
    EXPECT_EQ(p.internal_nodes, 4u);
    EXPECT_EQ(p.child_total, 5u);
}

TEST(StructuralProfile, VocabularyFilterExcludesUnknownKeys) {
    const std::string text = R"({"mark":"bar","myCustomKey":{"nested":1}})";
    auto off = profile_off(text);
    auto on = structural_profile(doc(text), VocabularyFilter::On);
    EXPECT_EQ(off.key_count, 3u);
    EXPECT_EQ(on.key_count, 1u);
    EXPECT_EQ(on.excluded_key_count, 2u);
    EXPECT_TRUE(vl5_vocabulary().count("encoding"));
    EXPECT_FALSE(vl5_vocabulary().count("myCustomKey"));
}

TEST(StructuralProfileProperty, MatchesNaiveWalkerOnRandomTrees) {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 200; ++i) {
        auto tree = oracle::random_spec_tree(rng);
        auto expect = oracle::naive_tree_counts(tree);
        auto got = profile_off(tree.dump());
        ASSERT_EQ(got.key_count, expect.keys) << tree.dump();
        ASSERT_EQ(got.max_depth, expect.depth) << tree.dump();
        ASSERT_EQ(got.internal_nodes, expect.internal) << tree.dump();
        ASSERT_EQ(got.child_total, expect.children) << tree.dump();
    }
}

TEST(StructuralProfileProperty, ValuesSubtreeContributesNothing) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        auto tree = oracle::random_spec_tree(rng);
        auto with = tree;
        with["values"] = oracle::random_spec_tree(rng);
        with["datasets"] = {{"d", nlohmann::ordered_json::array({{{"k", 1}}})}};
        auto a = profile_off(tree.dump());
        auto b = profile_off(with.dump());
        EXPECT_EQ(a.key_count, b.key_count);
        EXPECT_EQ(a.max_depth, b.max_depth);
    }
}

TEST(Composition, Layered) {
    auto c = detect_composition(doc(R"({"layer":[{"mark":"line"},{"mark":"point"}]})"));
    EXPECT_TRUE(c.is_composite());
    EXPECT_EQ(c.composite_type, CompositeType::Layered);
    EXPECT_EQ(c.view_count, 1u);
    EXPECT_EQ(c.leaf_plot_count, 2u);
}

TEST(Composition, HConcat) {
    auto c = detect_composition(doc(R"({"hconcat":[{"mark":"bar"},{"mark":"line"},{"mark":"area"}]})"));
    EXPECT_EQ(c.composite_type, CompositeType::MultipleViews);
    EXPECT_EQ(c.view_count, 3u);
    EXPECT_EQ(c.leaf_plot_count, 3u);
}

TEST(Composition, SingleView) {
    auto c = detect_composition(doc(R"({"mark":"bar","encoding":{"x":{"field":"a"}}})"));
    EXPECT_FALSE(c.is_composite());
    EXPECT_EQ(c.composite_type, CompositeType::None);
    EXPECT_EQ(c.view_count, 1u);
    EXPECT_EQ(c.leaf_plot_count, 1u);
}

TEST(Composition, ConcatOutranksNestedLayer) {
    auto c = detect_composition(
        doc(R"({"vconcat":[{"layer":[{"mark":"line"},{"mark":"rule"}]},{"mark":"bar"}]})"));
    EXPECT_EQ(c.composite_type, CompositeType::MultipleViews);
    EXPECT_EQ(c.view_count, 2u);
    EXPECT_EQ(c.leaf_plot_count, 3u);
}

TEST(Composition, FacetNeedsDataForCounts) {
    const std::string text = R"({"facet":{"row":{"field":"g"}},"spec":{"mark":"point"}})";
    auto without = detect_composition(doc(text));
    EXPECT_EQ(without.composite_type, CompositeType::Trellis);
    EXPECT_FALSE(without.view_count.has_value());

    DataTable t({"g", "v"}, {{"a", "1"}, {"b", "2"}, {"a", "3"}, {"c", "4"}});
    auto with = detect_composition(doc(text), &t);
    EXPECT_EQ(with.view_count, 3u);
    EXPECT_EQ(with.leaf_plot_count, 3u);
}

TEST(Composition, RepeatCountsCells) {
    auto c = detect_composition(
        doc(R"({"repeat":{"row":["a","b"],"column":["c","d","e"]},"spec":{"mark":"point"}})"));
    EXPECT_EQ(c.composite_type, CompositeType::Trellis);
    EXPECT_EQ(c.view_count, 6u);
}

TEST(CompositionProperty, NoCompositeKeywordsMeansOnePlot) {
    std::mt19937_64 rng(9);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
        auto tree = oracle::random_spec_tree(rng);
        const std::string s = tree.dump();
        if (s.find("\"layer\"") != std::string::npos) continue;
        auto c = detect_composition(doc(s));
        EXPECT_EQ(c.view_count, 1u);
        EXPECT_EQ(c.leaf_plot_count, 1u);
        ++checked;
    }
    EXPECT_GT(checked, 50);
}

TEST(Interactions, Tooltip) {
    auto p = detect_interactions(doc(R"({"mark":"bar","encoding":{"tooltip":{"field":"a"}}})"));
    EXPECT_EQ(p.kinds, std::set<InteractionKind>{InteractionKind::Tooltip});
}

TEST(Interactions, ParamsSelect) {
    auto p = detect_interactions(doc(R"({"params":[{"name":"p","select":"point"}],"mark":"bar"})"));
    EXPECT_EQ(p.kinds, std::set<InteractionKind>{InteractionKind::Selection});
}

TEST(Interactions, None) {
    auto p = detect_interactions(doc(R"({"mark":"bar"})"));
    EXPECT_TRUE(p.kinds.empty());
    EXPECT_FALSE(p.has_interaction());
}

TEST(Interactions, IntervalBoundToScalesIsPanZoom) {
    auto p = detect_interactions(
        doc(R"({"params":[{"name":"grid","select":"interval","bind":"scales"}],"mark":"point"})"));
    EXPECT_TRUE(p.kinds.count(InteractionKind::PanZoom));
    EXPECT_TRUE(p.kinds.count(InteractionKind::Selection));
}

TEST(Interactions, LegacySelectionAndWidgetBinding) {
    auto p = detect_interactions(
        doc(R"({"selection":{"s":{"type":"single","bind":{"input":"range"}}},"mark":"point"})"));
    EXPECT_TRUE(p.kinds.count(InteractionKind::Selection));
    EXPECT_TRUE(p.kinds.count(InteractionKind::Bind));
}

TEST(ChartTypes, DecisionTable) {
    EXPECT_EQ(types(R"({"mark":"bar","encoding":{"x":{"field":"a"}}})"), ChartTypeSet{ChartType::Bar});
    EXPECT_EQ(types(R"({"mark":"geoshape"})"), ChartTypeSet{ChartType::Map});
    EXPECT_EQ(types(R"({"layer":[{"mark":"line"},{"mark":"point"}]})"),
              (ChartTypeSet{ChartType::Line, ChartType::Point}));
    EXPECT_EQ(types(R"({"mark":{"type":"arc"}})"), ChartTypeSet{ChartType::Circle});
    EXPECT_EQ(types(R"({"mark":"area"})"), ChartTypeSet{ChartType::Area});
    EXPECT_EQ(types(R"({"mark":"trail"})"), ChartTypeSet{ChartType::Line});
    EXPECT_EQ(types(R"({"mark":"text"})"), ChartTypeSet{ChartType::Diagram});
    EXPECT_EQ(types(R"({"mark":"image"})"), ChartTypeSet{ChartType::Diagram});
    EXPECT_EQ(types(R"({"mark":"circle","projection":{"type":"mercator"}})"), ChartTypeSet{ChartType::Map});
}

TEST(ChartTypes, BinnedPointsAreDistribution) {
    EXPECT_EQ(types(R"({"mark":"point","encoding":{"x":{"field":"a","bin":true},"y":{"aggregate":"count"}}})"),
              ChartTypeSet{ChartType::Distribution});
    EXPECT_EQ(types(R"({"mark":"tick","encoding":{"x":{"field":"a","type":"quantitative"}}})"),
              ChartTypeSet{ChartType::Point});
}

TEST(ChartTypes, RectGridVersusDiagram) {
    EXPECT_EQ(types(R"({"mark":"rect","encoding":{"x":{"field":"a","type":"ordinal"},"y":{"field":"b","type":"nominal"}}})"),
              ChartTypeSet{ChartType::GridMatrix});
    EXPECT_EQ(types(R"({"mark":"rect","encoding":{"x":{"field":"a","type":"quantitative"}}})"),
              ChartTypeSet{ChartType::Diagram});
}

TEST(ChartTypes, RuleEdgesWithNodesAreNetworks) {
    auto t = types(R"({"layer":[
        {"mark":"rule","encoding":{"x":{"field":"x1"},"y":{"field":"y1"},"x2":{"field":"x2"},"y2":{"field":"y2"}}},
        {"mark":"circle","encoding":{"x":{"field":"x"},"y":{"field":"y"}}}]})");
    EXPECT_TRUE(t.count(ChartType::TreesNetworks));
    EXPECT_TRUE(t.count(ChartType::Point));
}

TEST(ChartTypes, NoMarkIsError) { EXPECT_THROW(types(R"({"data":{"url":"a.csv"}})"), NoMarkError); }

TEST(Complexity, Boundaries) {
    EXPECT_EQ(classify_complexity(16), ComplexityLevel::Simple);
    EXPECT_EQ(classify_complexity(17), ComplexityLevel::Medium);
    EXPECT_EQ(classify_complexity(24), ComplexityLevel::Medium);
    EXPECT_EQ(classify_complexity(25), ComplexityLevel::Complex);
    EXPECT_EQ(classify_complexity(41), ComplexityLevel::Complex);
    EXPECT_EQ(classify_complexity(42), ComplexityLevel::ExtraComplex);
    EXPECT_EQ(classify_complexity(0), ComplexityLevel::Simple);
}

TEST(ComplexityProperty, Monotone) {
    for (std::size_t k = 0; k < 200; ++k)
        EXPECT_LE(static_cast<int>(classify_complexity(k)), static_cast<int>(classify_complexity(k + 1)));
}

TEST(LeafViews, InheritEncodings) {
    SpecDocument d = doc(R"({"encoding":{"x":{"field":"a"}},"layer":[{"mark":"line","encoding":{"y":{"field":"b"}}}]})");
    auto leaves = leaf_views(d.root);
    ASSERT_EQ(leaves.size(), 1u);
    EXPECT_EQ(leaves[0].mark_type(), "line");
    ASSERT_NE(leaves[0].channel("x"), nullptr);
    ASSERT_NE(leaves[0].channel("y"), nullptr);
    EXPECT_EQ(leaves[0].channel("color"), nullptr);
}
