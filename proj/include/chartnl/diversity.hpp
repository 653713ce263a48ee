#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace chartnl {

/// Rows of `points` are vectors of equal dimension.
class VectorSet {
public:
    VectorSet() = default;
    /// Throws ZeroDimensionError when dim is 0.
    VectorSet(Eigen::MatrixXd points, bool normalized = false);
    /// Throws DimensionMismatchError for ragged input and ZeroDimensionError
    /// for zero-length vectors.
    static VectorSet from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(points_.cols()); }
    bool normalized() const { return normalized_; }
    const Eigen::MatrixXd& points() const { return points_; }

    /// Copy scaled to unit Euclidean norm. Throws ZeroVectorError.
    VectorSet normalize() const;

private:
    Eigen::MatrixXd points_;
    bool normalized_ = false;
};

/// Turns texts into vectors. The same text always maps to the same vector.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual VectorSet embed(const std::vector<std::string>& texts) = 0;
    virtual std::string name() const = 0;
};

/// Feature hashing of lowercase words and character trigrams. Offline and
/// deterministic; intended for tests and smoke runs.
class HashEmbedder : public EmbeddingProvider {
public:
    explicit HashEmbedder(std::size_t dim = 64, std::uint64_t seed = 0);
    VectorSet embed(const std::vector<std::string>& texts) override;
    std::string name() const override;

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

/// Precomputed vectors: a file with a `dim=<d>` header line followed by one
/// space-separated vector per line, aligned by line with a text file.
class FileEmbedder : public EmbeddingProvider {
public:
    FileEmbedder(const std::string& vectors_path, const std::string& texts_path);
    FileEmbedder(std::string_view vectors_text, std::string_view texts_text, std::string label);
    VectorSet embed(const std::vector<std::string>& texts) override;
    std::string name() const override { return label_; }

private:
    void load(std::string_view vectors_text, std::string_view texts_text);

    std::string label_;
    std::size_t dim_ = 0;
    std::vector<std::pair<std::string, std::vector<double>>> entries_;
};

/// OpenAI-compatible `/v1/embeddings` endpoint.
class RemoteEmbedder : public EmbeddingProvider {
public:
    RemoteEmbedder(std::string endpoint_url, std::string model, std::string api_key_env = "CHARTNL_API_KEY",
                   std::size_t batch_size = 64, double timeout_seconds = 120.0);
    VectorSet embed(const std::vector<std::string>& texts) override;
    std::string name() const override { return "remote:" + model_; }

private:
    std::string endpoint_url_;
    std::string model_;
    std::string api_key_env_;
    std::size_t batch_size_;
    double timeout_seconds_;
};

/// Reads vectors in the `dim=<d>` format.
VectorSet parse_vector_file(std::string_view text);
std::string format_vector_file(const VectorSet& v);

/// Euclidean distances between all rows; row blocks run in parallel.
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, unsigned threads = 0);

inline constexpr double kFrechetEpsilon = 1e-6;

/// Fréchet distance between Gaussian fits (sample covariance plus eps*I).
/// Throws DimensionMismatchError and TooFewPointsError (fewer than 2 points).
double frechet_distance(const VectorSet& a, const VectorSet& b, double eps = kFrechetEpsilon);

struct PrecisionRecall {
    double precision = 0;
    double recall = 0;
};

/// k-NN manifold precision and recall. Throws TooFewPointsError unless both
/// sets hold more than k points.
PrecisionRecall knn_precision_recall(const VectorSet& reference, const VectorSet& candidate, int k = 3);

struct WithinMetrics {
    double remote_clique = 0;
    double chamfer = 0;
    double mst = 0;
    double span = 0;
    double sparseness = 0;
    double entropy = 0;
};

struct WithinOptions {
    double span_percentile = 90.0;
    int grid = 10;
    unsigned threads = 0;
};

/// Throws TooFewPointsError (fewer than 2 points) and ZeroDimensionError.
WithinMetrics within_metrics(const VectorSet& x, const WithinOptions& opts = {});

/// Nearest-rank percentile of unsorted values (p in (0, 100]).
double nearest_rank_percentile(std::vector<double> values, double p);

/// Total weight of a minimum spanning tree over a dense distance matrix (Prim).
double mst_weight(const Eigen::MatrixXd& dist);

/// Projection onto the first `k` principal components (covariance
/// eigendecomposition, components in decreasing variance, sign fixed so the
/// largest-magnitude loading is positive).
Eigen::MatrixXd principal_components(const Eigen::MatrixXd& x, int k);

/// Shannon entropy (natural log) of a grid x grid partition of the bounding
/// box of the first two principal components.
double grid_entropy(const Eigen::MatrixXd& x, int grid);

struct Summary {
    double mean = 0;
    double std = 0;  // sample standard deviation; 0 for a single value
};

Summary summarize(const std::vector<double>& values);

struct DatasetSource {
    std::string name;
    /// One or more sampled sets of texts.
    std::vector<std::vector<std::string>> sets;
};

struct EvaluationOptions {
    bool normalize = true;
    int k = 3;
    WithinOptions within;
};

inline const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names = {"fd",     "precision", "recall",     "remote_clique", "chamfer",
                                                   "mst",    "span",      "sparseness", "entropy"};
    return names;
}

struct ReportRow {
    std::string source;
    std::size_t set_count = 0;
    /// Indexed like metric_names().
    std::vector<Summary> metrics;
};

struct Report {
    std::vector<ReportRow> rows;
};

/// Cross metrics against `reference` and within metrics for every set of every
/// source. Throws EmptySetError for empty inputs.
Report evaluate(const std::vector<std::string>& reference, const std::vector<DatasetSource>& sources,
                EmbeddingProvider& provider, const EvaluationOptions& opts = {});

std::string report_csv(const Report& r);
std::string report_text(const Report& r, int precision = 4);

}  // namespace chartnl
