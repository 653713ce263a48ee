#pragma once

// Reference implementations used by the unit and acceptance tests. Each one
// is written independently of the library code it checks: different parser,
// different traversal, brute force where the library is clever.

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace oracle {

struct TreeCounts {
    std::size_t keys = 0;
    std::size_t depth = 0;
    std::size_t internal = 0;
    std::size_t children = 0;
    double branching() const { return internal == 0 ? 0.0 : double(children) / double(internal); }
};

/// Counts keys, container depth and children per non-empty container with an
/// explicit stack. `values` and `datasets` members are skipped entirely.
TreeCounts naive_tree_counts(const nlohmann::ordered_json& root);

/// Random JSON object tree with keys drawn from a small pool that includes
/// the embedded-data keys.
nlohmann::ordered_json random_spec_tree(std::mt19937_64& rng, int max_depth = 5);

/// Textbook Levenshtein distance over the full (n+1) x (m+1) table.
std::size_t full_table_levenshtein(const std::string& a, const std::string& b);

/// Every point as a coordinate vector.
using Points = std::vector<std::vector<double>>;

double euclid(const std::vector<double>& a, const std::vector<double>& b);

/// Minimum over all spanning trees, found by trying every (n-1)-edge subset.
double exhaustive_mst(const Points& p);

double brute_remote_clique(const Points& p);
double brute_chamfer(const Points& p);
/// Nearest-rank percentile of centroid distances, by sorting.
double brute_span(const Points& p, double percentile);
/// Mean distance to the lowest-index point minimising summed distance.
double brute_sparseness(const Points& p);

/// Fraction of `probe` points inside some k-NN ball of `support`, where a
/// ball's radius is the distance to the k-th nearest other support point.
double brute_manifold_coverage(const Points& support, const Points& probe, int k);

/// A small table as columns of raw cells.
struct RawTable {
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> rows;
};

struct ScanQuery {
    std::string op;  // max, min, sum, mean, count, difference
    std::string field;
    std::optional<std::string> group_by;
    std::optional<std::pair<std::string, std::string>> filter;
};

struct ScanResult {
    bool empty = false;
    std::optional<double> value;
    std::vector<std::pair<std::string, double>> groups;
};

/// Row-by-row evaluation: numeric ops use cells that std::strtod consumes
/// completely (and are finite); count uses non-blank cells.
ScanResult full_scan(const RawTable& t, const ScanQuery& q);

/// Columns g (A/B/C), h (x/y), v (integers), w (decimals with one "n/a").
/// Numeric columns have occasional blanks.
RawTable random_table(std::mt19937_64& rng, std::size_t rows);
ScanQuery random_query(std::mt19937_64& rng);

/// Template file read straight from the resource directory, minus one
/// trailing line break.
std::string golden_template(const std::string& file_name);

/// The template with every `{name}` replaced by values.at(name), built by
/// regex scan. Throws std::out_of_range for a placeholder without a value.
std::string expected_rendering(const std::string& tmpl, const std::map<std::string, std::string>& values);

}  // namespace oracle
