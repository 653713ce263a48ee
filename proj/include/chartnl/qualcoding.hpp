#pragma once

#include "chartnl/diversity.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chartnl {

struct Code {
    std::string text;
    std::string source_sentence_id;

    friend bool operator==(const Code&, const Code&) = default;
};

inline constexpr std::size_t kExpectedCodesPerSentence = 5;

/// Lowercases, removes the word "language" and the phrase "use of", collapses
/// whitespace and trims surrounding punctuation. May return an empty string.
std::string clean_code(std::string_view raw);

struct CodeExtraction {
    std::vector<Code> codes;
    std::vector<std::string> warnings;
};

/// Splits a coding reply on semicolons (and newlines), cleans each item,
/// drops empties and duplicates, and warns when the count is not five.
CodeExtraction extract_codes(std::string_view reply, const std::string& sentence_id);

/// DBSCAN over rows of `points`. A point's neighbourhood includes itself; core
/// points have at least `min_pts` neighbours within `eps`. Clusters are
/// numbered from 0 in order of their lowest-index core point; noise is -1.
std::vector<int> dbscan(const Eigen::MatrixXd& points, double eps, int min_pts);

/// Median distance from each point to its k-th nearest other point.
double median_knn_distance(const Eigen::MatrixXd& points, int k);

struct ClusterOptions {
    int reduce_dim = 5;
    /// Defaults to the median 4-NN distance of the reduced vectors.
    std::optional<double> eps;
    int min_pts = 4;
    bool normalize = true;
};

struct ClusterResult {
    /// Unique code texts in first-seen order, with their frequencies.
    std::vector<std::string> codes;
    std::vector<std::size_t> counts;
    std::vector<int> labels;
    double eps = 0;
    int cluster_count = 0;
};

/// Throws TooFewCodesError when fewer than `min_pts` unique codes remain.
ClusterResult cluster_codes(const std::vector<Code>& codes, EmbeddingProvider& provider,
                            const ClusterOptions& opts = {});

/// `code,count,cluster` rows.
std::string cluster_csv(const ClusterResult& r);
/// Per cluster, the `top` most frequent codes with counts.
std::string cluster_summary(const ClusterResult& r, std::size_t top = 5);

}  // namespace chartnl
