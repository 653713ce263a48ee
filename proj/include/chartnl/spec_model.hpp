#pragma once

#include "chartnl/data_table.hpp"
#include "chartnl/json_tree.hpp"

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace chartnl {

/// A parsed Vega-Lite specification. The root is always an object.
struct SpecDocument {
    std::string id;
    std::string source_text;
    SpecNode root;
    /// Major version from the `$schema` URL (2..5); empty when absent or unrecognised.
    std::optional<int> schema_version;
};

SpecDocument parse_spec(std::string source_text, std::string id);
/// Reads and parses a file; the id defaults to the file stem.
SpecDocument load_spec(const std::string& path, std::string id = {});

enum class VocabularyFilter { Off, On };

struct StructuralProfile {
    std::size_t key_count = 0;
    std::size_t max_depth = 0;
    /// Children summed over internal nodes and the number of internal nodes;
    /// kept as integers so the ratio is exact.
    std::size_t child_total = 0;
    std::size_t internal_nodes = 0;
    std::set<std::string> unique_keys;
    std::size_t excluded_key_count = 0;

    double branching_factor() const {
        return internal_nodes == 0 ? 0.0 : static_cast<double>(child_total) / static_cast<double>(internal_nodes);
    }
    friend bool operator==(const StructuralProfile&, const StructuralProfile&) = default;
};

/// Keys whose subtrees hold embedded data and never count as properties.
bool is_embedded_data_key(std::string_view key);

/// The embedded list of Vega-Lite v5 property names.
const std::unordered_set<std::string>& vl5_vocabulary();

StructuralProfile structural_profile(const SpecDocument& doc, VocabularyFilter filter);

enum class CompositeType { None, Layered, Trellis, MultipleViews };

/// Plot count; empty means it depends on data that was not supplied.
using PlotCount = std::optional<std::size_t>;

struct ViewComposition {
    CompositeType composite_type = CompositeType::None;
    PlotCount view_count = 1;
    PlotCount leaf_plot_count = 1;

    bool is_composite() const { return composite_type != CompositeType::None; }
    friend bool operator==(const ViewComposition&, const ViewComposition&) = default;
};

ViewComposition detect_composition(const SpecDocument& doc, const DataTable* data = nullptr);

enum class InteractionKind { Tooltip, Selection, Bind, PanZoom, Other };

struct InteractionProfile {
    std::set<InteractionKind> kinds;
    bool has_interaction() const { return !kinds.empty(); }
    friend bool operator==(const InteractionProfile&, const InteractionProfile&) = default;
};

InteractionProfile detect_interactions(const SpecDocument& doc);

enum class ChartType { Area, Bar, Circle, Diagram, Distribution, GridMatrix, Line, Map, Point, TreesNetworks };

using ChartTypeSet = std::set<ChartType>;

/// Mark-to-category decision table applied to every leaf view. Throws
/// NoMarkError when no leaf view declares a mark.
ChartTypeSet classify_chart_types(const SpecDocument& doc);

enum class ComplexityLevel { Simple, Medium, Complex, ExtraComplex };

inline constexpr std::size_t kSimpleMaxKeys = 16;
inline constexpr std::size_t kMediumMaxKeys = 24;
inline constexpr std::size_t kComplexMaxKeys = 41;

ComplexityLevel classify_complexity(std::size_t key_count);
inline ComplexityLevel classify_complexity(const StructuralProfile& p) { return classify_complexity(p.key_count); }

std::string_view to_string(CompositeType t);
std::string_view to_string(InteractionKind k);
std::string_view to_string(ChartType t);
std::string_view to_string(ComplexityLevel l);

/// A single-view (unit) specification reached by walking the composition
/// operators, together with the encodings it inherits from enclosing views.
struct LeafView {
    const SpecNode* view = nullptr;
    /// Encoding objects from outermost to innermost (the leaf's own last).
    std::vector<const SpecNode*> encodings;
    bool under_projection = false;

    std::string mark_type() const;
    /// Innermost definition of an encoding channel, or nullptr.
    const SpecNode* channel(std::string_view name) const;
};

std::vector<LeafView> leaf_views(const SpecNode& root);

}  // namespace chartnl
