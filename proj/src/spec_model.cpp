#include "chartnl/spec_model.hpp"

#include "chartnl/errors.hpp"
#include "chartnl/resources.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

namespace chartnl {

SpecDocument parse_spec(std::string source_text, std::string id) {
    SpecNode root = parse_json(source_text);
    if (!root.is_object()) throw ParseError(0, "specification root must be a JSON object");

    std::optional<int> version;
    if (const SpecNode* schema = root.find("$schema"); schema && schema->is_string()) {
        static const std::regex kVersion(R"(vega-lite/v(\d+))");
        std::string url(schema->as_string());
        std::smatch m;
        if (std::regex_search(url, m, kVersion)) {
            int v = std::stoi(m[1].str());
            if (v >= 2 && v <= 5) version = v;
        }
    }
    return SpecDocument{std::move(id), std::move(source_text), std::move(root), version};
}

SpecDocument load_spec(const std::string& path, std::string id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (id.empty()) {
        std::filesystem::path p(path);
        std::string stem = p.stem().string();
        if (stem.size() > 3 && stem.ends_with(".vl")) stem.resize(stem.size() - 3);
        id = stem;
    }
    return parse_spec(ss.str(), std::move(id));
}

bool is_embedded_data_key(std::string_view key) { return key == "values" || key == "datasets"; }

const std::unordered_set<std::string>& vl5_vocabulary() {
    static const std::unordered_set<std::string> vocab = [] {
        auto lines = resource_lines("vl5_properties.txt");
        return std::unordered_set<std::string>(lines.begin(), lines.end());
    }();
    return vocab;
}

namespace {

void profile_walk(const SpecNode& n, std::size_t depth, VocabularyFilter filter, StructuralProfile& p) {
    if (n.is_scalar()) return;
    p.max_depth = std::max(p.max_depth, depth);
    if (n.is_array()) {
        if (!n.array().empty()) {
            ++p.internal_nodes;
            p.child_total += n.array().size();
        }
        for (const auto& item : n.array()) profile_walk(item, depth + 1, filter, p);
        return;
    }
    std::size_t children = 0;
    for (const auto& m : n.object()) {
        if (is_embedded_data_key(m.key)) continue;
        ++children;
        if (filter == VocabularyFilter::On && !vl5_vocabulary().contains(m.key)) {
            ++p.excluded_key_count;
        } else {
            ++p.key_count;
            p.unique_keys.insert(m.key);
        }
        profile_walk(m.value, depth + 1, filter, p);
    }
    if (children > 0) {
        ++p.internal_nodes;
        p.child_total += children;
    }
}

}  // namespace

StructuralProfile structural_profile(const SpecDocument& doc, VocabularyFilter filter) {
    StructuralProfile p;
    profile_walk(doc.root, 1, filter, p);
    return p;
}

// ---------------------------------------------------------------------------
// View tree traversal

std::string LeafView::mark_type() const {
    const SpecNode* mark = view ? view->find("mark") : nullptr;
    if (!mark) return {};
    if (mark->is_string()) return std::string(mark->as_string());
    if (const SpecNode* t = mark->find("type"); t && t->is_string()) return std::string(t->as_string());
    return {};
}

const SpecNode* LeafView::channel(std::string_view name) const {
    for (auto it = encodings.rbegin(); it != encodings.rend(); ++it)
        if (const SpecNode* c = (*it)->find(name)) return c;
    return nullptr;
}

namespace {

constexpr std::string_view kConcatKeys[] = {"concat", "hconcat", "vconcat"};

void collect_leaves(const SpecNode& view, std::vector<const SpecNode*> encodings, bool projection,
                    std::vector<LeafView>& out) {
    if (!view.is_object()) return;
    if (const SpecNode* enc = view.find("encoding"); enc && enc->is_object()) encodings.push_back(enc);
    projection = projection || view.has("projection");

    bool composed = false;
    if (const SpecNode* layer = view.find("layer"); layer && layer->is_array()) {
        composed = true;
        for (const auto& item : layer->array()) collect_leaves(item, encodings, projection, out);
    }
    for (auto key : kConcatKeys) {
        if (const SpecNode* items = view.find(key); items && items->is_array()) {
            composed = true;
            for (const auto& item : items->array()) collect_leaves(item, {}, projection, out);
        }
    }
    if (const SpecNode* inner = view.find("spec"); inner && inner->is_object()) {
        composed = true;
        collect_leaves(*inner, encodings, projection, out);
    }
    if (!composed && view.has("mark")) out.push_back(LeafView{&view, std::move(encodings), projection});
}

}  // namespace

std::vector<LeafView> leaf_views(const SpecNode& root) {
    std::vector<LeafView> out;
    collect_leaves(root, {}, false, out);
    return out;
}

// ---------------------------------------------------------------------------
// Composition

namespace {

struct CompositionScan {
    bool concat = false;
    bool trellis = false;
    bool layer = false;
};

bool has_facet_channel(const SpecNode& view) {
    const SpecNode* enc = view.find("encoding");
    return enc && (enc->has("row") || enc->has("column") || enc->has("facet"));
}

void scan_composition(const SpecNode& view, CompositionScan& s) {
    if (!view.is_object()) return;
    if (view.has("facet") || view.has("repeat") || has_facet_channel(view)) s.trellis = true;
    if (const SpecNode* layer = view.find("layer"); layer && layer->is_array()) {
        s.layer = true;
        for (const auto& item : layer->array()) scan_composition(item, s);
    }
    for (auto key : kConcatKeys) {
        if (const SpecNode* items = view.find(key); items && items->is_array()) {
            s.concat = true;
            for (const auto& item : items->array()) scan_composition(item, s);
        }
    }
    if (const SpecNode* inner = view.find("spec"); inner && inner->is_object()) scan_composition(*inner, s);
}

PlotCount multiply(PlotCount a, PlotCount b) {
    if (!a || !b) return std::nullopt;
    return *a * *b;
}

PlotCount add(PlotCount a, PlotCount b) {
    if (!a || !b) return std::nullopt;
    return *a + *b;
}

PlotCount unique_count(const SpecNode* field_def, const DataTable* data) {
    if (!field_def) return 1;
    const SpecNode* field = field_def->is_object() ? field_def->find("field") : nullptr;
    if (!field || !field->is_string() || !data) return std::nullopt;
    auto col = data->column_index(field->as_string());
    if (!col) return std::nullopt;
    return data->unique_values(*col).size();
}

std::size_t list_length(const SpecNode* n) { return n && n->is_array() ? n->array().size() : 1; }

// Number of facet/repeat cells produced by one trellis operator, or
// 1 when the view carries none.
PlotCount trellis_cells(const SpecNode& view, const DataTable* data) {
    if (const SpecNode* repeat = view.find("repeat")) {
        if (repeat->is_array()) return repeat->array().size();
        if (repeat->is_object())
            return list_length(repeat->find("row")) * list_length(repeat->find("column")) *
                   list_length(repeat->find("repeat"));
        return 1;
    }
    if (const SpecNode* facet = view.find("facet"); facet && facet->is_object()) {
        if (facet->has("field")) return unique_count(facet, data);
        return multiply(unique_count(facet->find("row"), data), unique_count(facet->find("column"), data));
    }
    if (has_facet_channel(view)) {
        const SpecNode* enc = view.find("encoding");
        if (const SpecNode* f = enc->find("facet")) return unique_count(f, data);
        return multiply(unique_count(enc->find("row"), data), unique_count(enc->find("column"), data));
    }
    return 1;
}

PlotCount count_leaf_plots(const SpecNode& view, const DataTable* data) {
    if (!view.is_object()) return 0;
    for (auto key : kConcatKeys) {
        if (const SpecNode* items = view.find(key); items && items->is_array()) {
            PlotCount total = 0;
            for (const auto& item : items->array()) total = add(total, count_leaf_plots(item, data));
            return total;
        }
    }
    PlotCount cells = trellis_cells(view, data);
    // A layer repeat multiplies leaves, not views.
    if (const SpecNode* repeat = view.find("repeat"); repeat && repeat->is_object() && repeat->has("layer")) {
        cells = multiply(cells, list_length(repeat->find("layer")));
    }
    if (const SpecNode* inner = view.find("spec"); inner && inner->is_object())
        return multiply(cells, count_leaf_plots(*inner, data));
    if (const SpecNode* layer = view.find("layer"); layer && layer->is_array()) {
        PlotCount total = 0;
        for (const auto& item : layer->array()) total = add(total, count_leaf_plots(item, data));
        return multiply(cells, total);
    }
    return cells;
}

const SpecNode* outermost_concat(const SpecNode& root) {
    std::vector<const SpecNode*> queue{&root};
    for (std::size_t i = 0; i < queue.size(); ++i) {
        const SpecNode& v = *queue[i];
        if (!v.is_object()) continue;
        for (auto key : kConcatKeys)
            if (const SpecNode* items = v.find(key); items && items->is_array()) return items;
        if (const SpecNode* layer = v.find("layer"); layer && layer->is_array())
            for (const auto& item : layer->array()) queue.push_back(&item);
        if (const SpecNode* inner = v.find("spec"); inner && inner->is_object()) queue.push_back(inner);
    }
    return nullptr;
}

const SpecNode* outermost_trellis(const SpecNode& root) {
    std::vector<const SpecNode*> queue{&root};
    for (std::size_t i = 0; i < queue.size(); ++i) {
        const SpecNode& v = *queue[i];
        if (!v.is_object()) continue;
        if (v.has("facet") || v.has("repeat") || has_facet_channel(v)) return &v;
        if (const SpecNode* layer = v.find("layer"); layer && layer->is_array())
            for (const auto& item : layer->array()) queue.push_back(&item);
        if (const SpecNode* inner = v.find("spec"); inner && inner->is_object()) queue.push_back(inner);
    }
    return nullptr;
}

}  // namespace

ViewComposition detect_composition(const SpecDocument& doc, const DataTable* data) {
    CompositionScan scan;
    scan_composition(doc.root, scan);

    ViewComposition vc;
    if (scan.concat) vc.composite_type = CompositeType::MultipleViews;
    else if (scan.trellis) vc.composite_type = CompositeType::Trellis;
    else if (scan.layer) vc.composite_type = CompositeType::Layered;

    switch (vc.composite_type) {
        case CompositeType::MultipleViews: vc.view_count = outermost_concat(doc.root)->array().size(); break;
        case CompositeType::Trellis: vc.view_count = trellis_cells(*outermost_trellis(doc.root), data); break;
        default: vc.view_count = 1;
    }
    vc.leaf_plot_count = vc.composite_type == CompositeType::None ? PlotCount{1} : count_leaf_plots(doc.root, data);
    return vc;
}

// ---------------------------------------------------------------------------
// Interactions

namespace {

void classify_selection(const SpecNode& def, InteractionProfile& p) {
    p.kinds.insert(InteractionKind::Selection);
    if (const SpecNode* bind = def.find("bind")) {
        if (bind->is_string() && bind->as_string() == "scales") p.kinds.insert(InteractionKind::PanZoom);
        else if (bind->truthy()) p.kinds.insert(InteractionKind::Bind);
    }
}

void scan_interactions(const SpecNode& n, InteractionProfile& p) {
    if (n.is_array()) {
        for (const auto& item : n.array()) scan_interactions(item, p);
        return;
    }
    if (!n.is_object()) return;
    for (const auto& m : n.object()) {
        if (is_embedded_data_key(m.key) || m.key == "data") continue;
        if (m.key == "tooltip" && m.value.truthy()) {
            p.kinds.insert(InteractionKind::Tooltip);
        } else if (m.key == "href" && m.value.truthy()) {
            p.kinds.insert(InteractionKind::Other);
        } else if (m.key == "selection" && m.value.is_object()) {
            // v3/v4: named selection definitions.
            for (const auto& sel : m.value.object()) classify_selection(sel.value, p);
        } else if (m.key == "params" && m.value.is_array()) {
            for (const auto& param : m.value.array()) {
                if (!param.is_object()) continue;
                if (param.has("select")) classify_selection(param, p);
                else if (const SpecNode* bind = param.find("bind"); bind && bind->truthy())
                    p.kinds.insert(InteractionKind::Bind);
            }
        }
        scan_interactions(m.value, p);
    }
}

}  // namespace

InteractionProfile detect_interactions(const SpecDocument& doc) {
    InteractionProfile p;
    scan_interactions(doc.root, p);
    return p;
}

// ---------------------------------------------------------------------------
// Chart types

namespace {

bool is_discrete(const SpecNode* channel) {
    if (!channel || !channel->is_object()) return false;
    if (const SpecNode* bin = channel->find("bin"); bin && bin->truthy()) return true;
    const SpecNode* type = channel->find("type");
    return type && (type->as_string() == "nominal" || type->as_string() == "ordinal");
}

bool is_binned_or_count(const SpecNode* channel) {
    if (!channel || !channel->is_object()) return false;
    if (const SpecNode* bin = channel->find("bin"); bin && bin->truthy()) return true;
    const SpecNode* agg = channel->find("aggregate");
    return agg && agg->as_string() == "count";
}

bool aggregates_counts(const SpecNode& node) {
    if (node.is_array()) {
        for (const auto& i : node.array())
            if (aggregates_counts(i)) return true;
        return false;
    }
    if (!node.is_object()) return false;
    if (const SpecNode* op = node.find("op"); op && op->as_string() == "count") return true;
    for (const auto& m : node.object())
        if (!is_embedded_data_key(m.key) && aggregates_counts(m.value)) return true;
    return false;
}

bool point_like(std::string_view mark) {
    return mark == "point" || mark == "circle" || mark == "square" || mark == "tick";
}

bool draws_edges(const LeafView& leaf) {
    return leaf.channel("x") && leaf.channel("y") && leaf.channel("x2") && leaf.channel("y2");
}

}  // namespace

ChartTypeSet classify_chart_types(const SpecDocument& doc) {
    auto leaves = leaf_views(doc.root);
    ChartTypeSet types;
    bool any_mark = false;
    bool has_point_nodes = false;
    std::vector<const LeafView*> decorations;

    const bool spec_counts = [&] {
        const SpecNode* t = doc.root.find("transform");
        return t && aggregates_counts(*t);
    }();

    for (const auto& leaf : leaves) {
        std::string mark = leaf.mark_type();
        if (mark.empty()) continue;
        any_mark = true;
        if (point_like(mark) || mark == "text") has_point_nodes = true;

        if (mark == "geoshape" || leaf.under_projection) {
            types.insert(ChartType::Map);
        } else if (mark == "bar") {
            types.insert(ChartType::Bar);
        } else if (mark == "line" || mark == "trail") {
            types.insert(ChartType::Line);
        } else if (mark == "area") {
            types.insert(ChartType::Area);
        } else if (mark == "arc") {
            types.insert(ChartType::Circle);
        } else if (point_like(mark)) {
            const SpecNode* leaf_transform = leaf.view->find("transform");
            bool counts = spec_counts || (leaf_transform && aggregates_counts(*leaf_transform));
            bool distribution = counts || is_binned_or_count(leaf.channel("x")) || is_binned_or_count(leaf.channel("y"));
            types.insert(distribution ? ChartType::Distribution : ChartType::Point);
        } else if (mark == "boxplot") {
            types.insert(ChartType::Distribution);
        } else if (mark == "rect") {
            bool grid = is_discrete(leaf.channel("x")) && is_discrete(leaf.channel("y"));
            types.insert(grid ? ChartType::GridMatrix : ChartType::Diagram);
        } else if (mark == "rule" || mark == "text" || mark == "errorbar" || mark == "errorband") {
            decorations.push_back(&leaf);
        } else {
            // image and anything unrecognised
            types.insert(ChartType::Diagram);
        }
    }
    if (!any_mark) throw NoMarkError("no leaf view of \"" + doc.id + "\" declares a mark");

    for (const LeafView* d : decorations) {
        if (d->mark_type() == "rule" && draws_edges(*d) && has_point_nodes) types.insert(ChartType::TreesNetworks);
    }
    if (types.empty()) types.insert(ChartType::Diagram);
    return types;
}

ComplexityLevel classify_complexity(std::size_t key_count) {
    if (key_count <= kSimpleMaxKeys) return ComplexityLevel::Simple;
    if (key_count <= kMediumMaxKeys) return ComplexityLevel::Medium;
    if (key_count <= kComplexMaxKeys) return ComplexityLevel::Complex;
    return ComplexityLevel::ExtraComplex;
}

std::string_view to_string(CompositeType t) {
    switch (t) {
        case CompositeType::None: return "none";
        case CompositeType::Layered: return "layered";
        case CompositeType::Trellis: return "trellis";
        case CompositeType::MultipleViews: return "multiple_views";
    }
    return "none";
}

std::string_view to_string(InteractionKind k) {
    switch (k) {
        case InteractionKind::Tooltip: return "tooltip";
        case InteractionKind::Selection: return "selection";
        case InteractionKind::Bind: return "bind";
        case InteractionKind::PanZoom: return "pan_zoom";
        case InteractionKind::Other: return "other";
    }
    return "other";
}

std::string_view to_string(ChartType t) {
    switch (t) {
        case ChartType::Area: return "Area";
        case ChartType::Bar: return "Bar";
        case ChartType::Circle: return "Circle";
        case ChartType::Diagram: return "Diagram";
        case ChartType::Distribution: return "Distribution";
        case ChartType::GridMatrix: return "GridMatrix";
        case ChartType::Line: return "Line";
        case ChartType::Map: return "Map";
        case ChartType::Point: return "Point";
        case ChartType::TreesNetworks: return "TreesNetworks";
    }
    return "Diagram";
}

std::string_view to_string(ComplexityLevel l) {
    switch (l) {
        case ComplexityLevel::Simple: return "Simple";
        case ComplexityLevel::Medium: return "Medium";
        case ComplexityLevel::Complex: return "Complex";
        case ComplexityLevel::ExtraComplex: return "ExtraComplex";
    }
    return "Simple";
}

}  // namespace chartnl
