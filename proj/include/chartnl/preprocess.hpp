#pragma once

#include "chartnl/csv.hpp"
#include "chartnl/spec_model.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace chartnl {

struct DataFileInfo {
    std::string path;
    std::size_t row_count = 0;
    std::vector<std::string> column_names;
};

/// A specification whose embedded data has been moved to CSV files.
struct ExternalizedSpec {
    SpecDocument doc;
    std::vector<DataFileInfo> data_files;
    /// Named dataset -> CSV file name, for specs that used `datasets`.
    std::map<std::string, std::string> dataset_files;
    /// Non-fatal problems (e.g. HeterogeneousDataError); the offending
    /// subtree is left in place.
    std::vector<std::string> issues;
};

struct ExternalizeOptions {
    /// Directory that relative `data.url` references resolve against.
    std::string source_dir;
    /// Remote JSON references are fetched only when this is set and a
    /// fetcher is supplied.
    bool fetch_remote = false;
    std::function<std::optional<std::string>(const std::string& url)> fetcher;
};

/// Converts an array of row objects into CSV header and rows. The header is
/// the union of row keys in first-seen order; missing cells are empty.
/// Throws HeterogeneousDataError if any row is not an object.
std::pair<CsvRow, std::vector<CsvRow>> rows_to_table(const Array& rows);

/// Writes `<out_dir>/<spec_id>_data_<k>.csv` for every embedded dataset and
/// rewrites each `data` node to `{"url": "<file name>"}`. The URL is relative
/// to `out_dir`, where the rewritten specification is meant to live.
ExternalizedSpec externalize_data(const SpecDocument& doc, const std::string& out_dir,
                                  const ExternalizeOptions& opts = {});

/// Single-line serialization with no whitespace outside string literals.
std::string minify_spec(const SpecDocument& doc);

}  // namespace chartnl
