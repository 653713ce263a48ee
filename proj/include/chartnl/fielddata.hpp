#pragma once

#include "chartnl/data_table.hpp"
#include "chartnl/spec_model.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace chartnl {

/// One field referenced by an encoding channel, as described to the model.
struct FieldDescriptor {
    std::string field;
    std::optional<std::string> title;
    FieldType declared_type = FieldType::Nominal;
    /// Present iff the declared type is nominal or ordinal.
    std::optional<std::vector<std::string>> unique_values;
    /// Produced by a transform rather than read from the table.
    bool derived = false;

    friend bool operator==(const FieldDescriptor&, const FieldDescriptor&) = default;
};

inline constexpr std::size_t kMaxFttValues = 50;

struct FieldInfo {
    std::vector<FieldDescriptor> fields;
    /// One line per field: `field | title | type[ | values: v1, v2, ...]`,
    /// with `-` standing in for a missing title.
    std::string ftt;
};

/// Renders descriptors in the ftt line format. Value lists longer than
/// `max_values` are cut and end with `... (+N more)`.
std::string render_ftt(const std::vector<FieldDescriptor>& fields, std::size_t max_values = kMaxFttValues);

/// Descriptors for every distinct field named by an encoding channel in any
/// view. With a table, categorical fields carry their unique values and
/// a field that is neither a table column nor a transform output raises
/// UnknownFieldError. Without a table, categorical fields get an empty list.
FieldInfo extract_field_descriptors(const SpecDocument& doc, const DataTable* table);

enum class AggregateOp { Max, Min, Sum, Mean, Count, Difference };

std::string_view to_string(AggregateOp op);
std::optional<AggregateOp> aggregate_op_from_string(std::string_view s);

struct AggregationQuery {
    AggregateOp op = AggregateOp::Count;
    std::string field;
    std::optional<std::string> group_by;
    /// Keep only rows whose `first` column equals `second`.
    std::optional<std::pair<std::string, std::string>> filter;
};

struct AggregationResult {
    /// Set for ungrouped queries.
    std::optional<double> value;
    /// Set for grouped queries, in first-seen group order.
    std::vector<std::pair<std::string, double>> groups;
    /// Cells that passed the filter but were empty or not numeric.
    std::size_t skipped = 0;
    std::size_t used = 0;
};

/// Evaluates max/min/sum/mean/count/difference over a column. Numeric ops
/// require a quantitative column (TypeError otherwise); count accepts any.
/// Throws UnknownFieldError for missing columns and EmptyInputError when no
/// usable cell remains.
AggregationResult evaluate_aggregation(const DataTable& table, const AggregationQuery& q);

}  // namespace chartnl
