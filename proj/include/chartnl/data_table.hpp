#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chartnl {

enum class FieldType { Quantitative, Nominal, Ordinal, Temporal };

std::string_view to_string(FieldType t);
std::optional<FieldType> field_type_from_string(std::string_view s);

struct Column {
    std::string name;
    FieldType inferred_type = FieldType::Nominal;
};

/// Parses a numeric cell. Empty, NaN and infinite cells yield nullopt.
std::optional<double> parse_number(std::string_view cell);
/// ISO-8601 date or date-time (`YYYY-MM-DD`, `YYYY-MM-DDTHH:MM[:SS[.f]][Z|±HH:MM]`).
bool looks_temporal(std::string_view cell);

/// Column-typed table of string cells. Immutable after construction.
class DataTable {
public:
    DataTable() = default;
    /// Every row must have exactly `names.size()` cells (SchemaError otherwise).
    /// Column types are inferred: quantitative when at least 95% of non-empty
    /// cells are numeric, temporal when at least 95% are ISO dates, else nominal.
    DataTable(std::vector<std::string> names, std::vector<std::vector<std::string>> rows);

    const std::vector<Column>& columns() const { return columns_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }
    std::size_t row_count() const { return rows_.size(); }
    std::optional<std::size_t> column_index(std::string_view name) const;

    /// Distinct non-empty cell values of a column in first-seen order.
    std::vector<std::string> unique_values(std::size_t column) const;

private:
    std::vector<Column> columns_;
    std::vector<std::vector<std::string>> rows_;
};

DataTable parse_csv_table(std::string_view text);
DataTable read_csv_table(const std::string& path);

}  // namespace chartnl
