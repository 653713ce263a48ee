#include "chartnl/fielddata.hpp"

#include "chartnl/errors.hpp"
#include "chartnl/text_util.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

namespace chartnl {

namespace {

struct RawField {
    std::string name;
    std::optional<std::string> title;
    std::optional<FieldType> declared;
};

void add_field_def(const SpecNode& def, std::vector<RawField>& out) {
    if (!def.is_object()) return;
    if (const SpecNode* cond = def.find("condition")) {
        if (cond->is_array())
            for (const auto& c : cond->array()) add_field_def(c, out);
        else
            add_field_def(*cond, out);
    }
    const SpecNode* field = def.find("field");
    if (!field || !field->is_string() || field->as_string().empty() || field->as_string() == "*") return;
    RawField f{std::string(field->as_string()), std::nullopt, std::nullopt};
    if (const SpecNode* t = def.find("title"); t && t->is_string() && !t->as_string().empty())
        f.title = std::string(t->as_string());
    if (const SpecNode* t = def.find("type"); t && t->is_string()) f.declared = field_type_from_string(t->as_string());
    out.push_back(std::move(f));
}

void collect_encoded_fields(const SpecNode& node, std::vector<RawField>& out) {
    if (node.is_array()) {
        for (const auto& item : node.array()) collect_encoded_fields(item, out);
        return;
    }
    if (!node.is_object()) return;
    for (const auto& m : node.object()) {
        if (m.key == "data" || is_embedded_data_key(m.key)) continue;
        if (m.key == "encoding" && m.value.is_object()) {
            for (const auto& channel : m.value.object()) {
                if (channel.value.is_array())
                    for (const auto& def : channel.value.array()) add_field_def(def, out);
                else
                    add_field_def(channel.value, out);
            }
            continue;
        }
        collect_encoded_fields(m.value, out);
    }
}

void add_outputs(const SpecNode* as, std::set<std::string>& out) {
    if (!as) return;
    if (as->is_string()) out.emplace(as->as_string());
    if (as->is_array())
        for (const auto& a : as->array())
            if (a.is_string()) out.emplace(a.as_string());
}

// Field names produced by transforms anywhere in the document. Returns false when
// a transform with data-dependent outputs (pivot) is present.
bool collect_derived(const SpecNode& node, std::set<std::string>& out) {
    bool closed = true;
    if (node.is_array()) {
        for (const auto& item : node.array()) closed = collect_derived(item, out) && closed;
        return closed;
    }
    if (!node.is_object()) return true;
    for (const auto& m : node.object()) {
        if (m.key == "data" || is_embedded_data_key(m.key)) continue;
        if (m.key == "transform" && m.value.is_array()) {
            for (const auto& t : m.value.array()) {
                if (!t.is_object()) continue;
                if (t.has("pivot")) closed = false;
                add_outputs(t.find("as"), out);
                if (t.has("fold") && !t.has("as")) {
                    out.insert("key");
                    out.insert("value");
                }
                for (auto key : {"aggregate", "window", "joinaggregate"}) {
                    if (const SpecNode* ops = t.find(key); ops && ops->is_array())
                        for (const auto& op : ops->array()) add_outputs(op.find("as"), out);
                }
                if (const SpecNode* from = t.find("from"); from && from->is_object())
                    add_outputs(from->find("fields"), out);
            }
        }
        closed = collect_derived(m.value, out) && closed;
    }
    return closed;
}

bool categorical(FieldType t) { return t == FieldType::Nominal || t == FieldType::Ordinal; }

}  // namespace

std::string render_ftt(const std::vector<FieldDescriptor>& fields, std::size_t max_values) {
    std::string out;
    for (const auto& f : fields) {
        if (!out.empty()) out.push_back('\n');
        out += f.field;
        out += " | ";
        out += f.title ? *f.title : std::string("-");
        out += " | ";
        out += to_string(f.declared_type);
        if (f.unique_values) {
            out += " | values: ";
            const auto& vals = *f.unique_values;
            const std::size_t shown = std::min(vals.size(), max_values);
            for (std::size_t i = 0; i < shown; ++i) {
                if (i) out += ", ";
                out += vals[i];
            }
            if (vals.size() > shown) out += ", ... (+" + std::to_string(vals.size() - shown) + " more)";
        }
    }
    return out;
}

FieldInfo extract_field_descriptors(const SpecDocument& doc, const DataTable* table) {
    std::vector<RawField> raw;
    collect_encoded_fields(doc.root, raw);
    std::set<std::string> derived;
    const bool outputs_known = collect_derived(doc.root, derived);

    FieldInfo info;
    std::map<std::string, std::size_t> index;
    for (auto& r : raw) {
        auto it = index.find(r.name);
        if (it != index.end()) {
            auto& existing = info.fields[it->second];
            if (!existing.title && r.title) existing.title = r.title;
            continue;
        }
        FieldDescriptor d;
        d.field = r.name;
        d.title = r.title;
        std::optional<std::size_t> column;
        if (table) column = table->column_index(r.name);
        if (table && !column) {
            if (!derived.contains(r.name) && outputs_known)
                throw UnknownFieldError("field \"" + r.name + "\" is not a column of the data table");
            d.derived = true;
        }
        if (r.declared) d.declared_type = *r.declared;
        else if (column) d.declared_type = table->columns()[*column].inferred_type;
        else d.declared_type = FieldType::Nominal;

        if (categorical(d.declared_type))
            d.unique_values = (table && column) ? table->unique_values(column.value()) : std::vector<std::string>{};
        index.emplace(d.field, info.fields.size());
        info.fields.push_back(std::move(d));
    }
    info.ftt = render_ftt(info.fields);
    return info;
}

std::string_view to_string(AggregateOp op) {
    switch (op) {
        case AggregateOp::Max: return "max";
        case AggregateOp::Min: return "min";
        case AggregateOp::Sum: return "sum";
        case AggregateOp::Mean: return "mean";
        case AggregateOp::Count: return "count";
        case AggregateOp::Difference: return "difference";
    }
    return "count";
}

std::optional<AggregateOp> aggregate_op_from_string(std::string_view s) {
    for (auto op : {AggregateOp::Max, AggregateOp::Min, AggregateOp::Sum, AggregateOp::Mean, AggregateOp::Count,
                    AggregateOp::Difference})
        if (to_string(op) == s) return op;
    if (s == "average") return AggregateOp::Mean;
    return std::nullopt;
}

namespace {

struct Accumulator {
    std::size_t n = 0;
    double sum = 0;
    double max = -std::numeric_limits<double>::infinity();
    double min = std::numeric_limits<double>::infinity();

    void add(double v) {
        ++n;
        sum += v;
        max = std::max(max, v);
        min = std::min(min, v);
    }

    double result(AggregateOp op) const {
        switch (op) {
            case AggregateOp::Max: return max;
            case AggregateOp::Min: return min;
            case AggregateOp::Sum: return sum;
            case AggregateOp::Mean: return sum / static_cast<double>(n);
            case AggregateOp::Count: return static_cast<double>(n);
            case AggregateOp::Difference: return max - min;
        }
        return 0;
    }
};

std::size_t require_column(const DataTable& table, const std::string& name) {
    auto c = table.column_index(name);
    if (!c) throw UnknownFieldError("no column \"" + name + "\"");
    return *c;
}

}  // namespace

AggregationResult evaluate_aggregation(const DataTable& table, const AggregationQuery& q) {
    const std::size_t col = require_column(table, q.field);
    const bool numeric = q.op != AggregateOp::Count;
    if (numeric && table.columns()[col].inferred_type != FieldType::Quantitative)
        throw TypeError(std::string(to_string(q.op)) + " needs a numeric column; \"" + q.field + "\" is " +
                        std::string(to_string(table.columns()[col].inferred_type)));
    std::optional<std::size_t> group_col;
    if (q.group_by) group_col = require_column(table, *q.group_by);
    std::optional<std::size_t> filter_col;
    if (q.filter) filter_col = require_column(table, q.filter->first);

    AggregationResult result;
    Accumulator total;
    std::vector<std::pair<std::string, Accumulator>> groups;
    std::map<std::string, std::size_t> group_index;

    for (const auto& row : table.rows()) {
        if (filter_col && row[*filter_col] != q.filter->second) continue;
        const std::string& cell = row[col];
        double v = 1.0;
        if (numeric) {
            auto parsed = parse_number(cell);
            if (!parsed) {
                ++result.skipped;
                continue;
            }
            v = *parsed;
        } else if (trim(cell).empty()) {
            ++result.skipped;
            continue;
        }
        ++result.used;
        if (group_col) {
            const std::string& key = row[*group_col];
            auto [it, inserted] = group_index.emplace(key, groups.size());
            if (inserted) groups.emplace_back(key, Accumulator{});
            groups[it->second].second.add(v);
        } else {
            total.add(v);
        }
    }
    if (result.used == 0) throw EmptyInputError("no usable cells in \"" + q.field + "\"");

    if (group_col) {
        for (const auto& [key, acc] : groups) result.groups.emplace_back(key, acc.result(q.op));
    } else {
        result.value = total.result(q.op);
    }
    return result;
}

}  // namespace chartnl
