#include "chartnl/data_table.hpp"

#include "chartnl/csv.hpp"
#include "chartnl/errors.hpp"
#include "chartnl/text_util.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>
#include <unordered_set>

namespace chartnl {

std::string_view to_string(FieldType t) {
    switch (t) {
        case FieldType::Quantitative: return "quantitative";
        case FieldType::Nominal: return "nominal";
        case FieldType::Ordinal: return "ordinal";
        case FieldType::Temporal: return "temporal";
    }
    return "nominal";
}

std::optional<FieldType> field_type_from_string(std::string_view s) {
    if (s == "quantitative") return FieldType::Quantitative;
    if (s == "nominal") return FieldType::Nominal;
    if (s == "ordinal") return FieldType::Ordinal;
    if (s == "temporal") return FieldType::Temporal;
    return std::nullopt;
}

std::optional<double> parse_number(std::string_view cell) {
    cell = trim(cell);
    if (cell.empty()) return std::nullopt;
    if (cell.front() == '+') cell.remove_prefix(1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

bool looks_temporal(std::string_view cell) {
    static const std::regex kIso(
        R"(\d{4}-\d{2}(-\d{2}([T ]\d{2}:\d{2}(:\d{2}(\.\d+)?)?(Z|[+-]\d{2}:?\d{2})?)?)?)");
    cell = trim(cell);
    if (cell.size() < 7) return false;
    return std::regex_match(cell.begin(), cell.end(), kIso);
}

namespace {

FieldType infer_type(const std::vector<std::vector<std::string>>& rows, std::size_t col) {
    std::size_t non_empty = 0, numeric = 0, temporal = 0;
    for (const auto& r : rows) {
        const auto& cell = r[col];
        if (trim(cell).empty()) continue;
        ++non_empty;
        if (parse_number(cell)) ++numeric;
        else if (looks_temporal(cell)) ++temporal;
    }
    if (non_empty == 0) return FieldType::Nominal;
    // 95% thresholds, compared in integers.
    if (numeric * 100 >= non_empty * 95) return FieldType::Quantitative;
    if (temporal * 100 >= non_empty * 95) return FieldType::Temporal;
    return FieldType::Nominal;
}

}  // namespace

DataTable::DataTable(std::vector<std::string> names, std::vector<std::vector<std::string>> rows)
    : rows_(std::move(rows)) {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (rows_[i].size() != names.size())
            throw SchemaError("row " + std::to_string(i + 1) + " has " + std::to_string(rows_[i].size()) +
                              " cells, expected " + std::to_string(names.size()));
    }
    columns_.reserve(names.size());
    for (std::size_t c = 0; c < names.size(); ++c)
        columns_.push_back(Column{std::move(names[c]), infer_type(rows_, c)});
}

std::optional<std::size_t> DataTable::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i].name == name) return i;
    return std::nullopt;
}

std::vector<std::string> DataTable::unique_values(std::size_t column) const {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& r : rows_) {
        const auto& cell = r[column];
        if (trim(cell).empty()) continue;
        if (seen.insert(cell).second) out.push_back(cell);
    }
    return out;
}

DataTable parse_csv_table(std::string_view text) {
    auto records = parse_csv(text);
    if (records.empty()) return DataTable{};
    auto header = std::move(records.front());
    std::vector<std::vector<std::string>> rows;
    rows.reserve(records.size() - 1);
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (header.size() > 1 && records[i].size() == 1 && records[i][0].empty()) continue;
        rows.push_back(std::move(records[i]));
    }
    return DataTable(std::move(header), std::move(rows));
}

DataTable read_csv_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv_table(ss.str());
}

}  // namespace chartnl
