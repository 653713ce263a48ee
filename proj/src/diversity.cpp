#include "chartnl/diversity.hpp"

#include "chartnl/csv.hpp"
#include "chartnl/errors.hpp"
#include "chartnl/json_tree.hpp"
#include "chartnl/text_util.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

namespace chartnl {

VectorSet::VectorSet(Eigen::MatrixXd points, bool normalized) : points_(std::move(points)), normalized_(normalized) {
    if (points_.cols() == 0) throw ZeroDimensionError("vectors have dimension 0");
}

VectorSet VectorSet::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return VectorSet(Eigen::MatrixXd(0, 1));
    const std::size_t dim = rows.front().size();
    if (dim == 0) throw ZeroDimensionError("vectors have dimension 0");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != dim)
            throw DimensionMismatchError("vector " + std::to_string(i) + " has dimension " +
                                         std::to_string(rows[i].size()) + ", expected " + std::to_string(dim));
        for (std::size_t j = 0; j < dim; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return VectorSet(std::move(m));
}

VectorSet VectorSet::normalize() const {
    Eigen::MatrixXd out = points_;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double n = out.row(i).norm();
        if (!(n > 0.0)) throw ZeroVectorError("vector " + std::to_string(i) + " has zero norm");
        out.row(i) /= n;
    }
    return VectorSet(std::move(out), true);
}

namespace {

unsigned resolve_threads(unsigned threads) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    return threads;
}

void require_points(const VectorSet& x, std::size_t min, const char* what) {
    if (x.size() < min)
        throw TooFewPointsError(std::string(what) + " needs at least " + std::to_string(min) + " points, got " +
                                std::to_string(x.size()));
}

Eigen::MatrixXd centered(const Eigen::MatrixXd& x) {
    Eigen::RowVectorXd mean = x.colwise().mean();
    return x.rowwise() - mean;
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd c = centered(x);
    const double denom = static_cast<double>(std::max<Eigen::Index>(x.rows() - 1, 1));
    return (c.transpose() * c) / denom;
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, unsigned threads) {
    if (a.cols() != b.cols()) throw DimensionMismatchError("point sets differ in dimension");
    Eigen::MatrixXd d(a.rows(), b.rows());
    auto rows = [&](Eigen::Index begin, Eigen::Index end) {
        for (Eigen::Index i = begin; i < end; ++i)
            for (Eigen::Index j = 0; j < b.rows(); ++j) d(i, j) = (a.row(i) - b.row(j)).norm();
    };
    const unsigned t = resolve_threads(threads);
    const bool parallel = t > 1 && a.rows() * b.rows() * std::max<Eigen::Index>(a.cols(), 1) > 200'000;
    if (!parallel) {
        rows(0, a.rows());
        return d;
    }
    const Eigen::Index block = (a.rows() + t - 1) / t;
    std::vector<std::jthread> pool;
    for (Eigen::Index start = 0; start < a.rows(); start += block)
        pool.emplace_back(rows, start, std::min(a.rows(), start + block));
    pool.clear();
    return d;
}

double frechet_distance(const VectorSet& a, const VectorSet& b, double eps) {
    if (a.dim() != b.dim()) throw DimensionMismatchError("sets differ in dimension");
    require_points(a, 2, "Frechet distance");
    require_points(b, 2, "Frechet distance");
    const Eigen::Index d = static_cast<Eigen::Index>(a.dim());
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd sa = covariance(a.points()) + eps * eye;
    const Eigen::MatrixXd sb = covariance(b.points()) + eps * eye;
    const Eigen::RowVectorXd diff = a.points().colwise().mean() - b.points().colwise().mean();

    // Tr((Sa Sb)^1/2) = Tr((Sa^1/2 Sb Sa^1/2)^1/2), and the inner product is symmetric.
    const Eigen::MatrixXd root_a = symmetric_sqrt(sa);
    const Eigen::MatrixXd inner = root_a * sb * root_a;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (inner + inner.transpose()), Eigen::EigenvaluesOnly);
    const double tr_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    const double fd = diff.squaredNorm() + sa.trace() + sb.trace() - 2.0 * tr_sqrt;
    return std::max(0.0, fd);
}

namespace {

// Distance from each point to its k-th nearest other point.
std::vector<double> knn_radii(const Eigen::MatrixXd& dist, int k) {
    std::vector<double> radii(static_cast<std::size_t>(dist.rows()));
    std::vector<double> row;
    for (Eigen::Index i = 0; i < dist.rows(); ++i) {
        row.clear();
        for (Eigen::Index j = 0; j < dist.cols(); ++j)
            if (j != i) row.push_back(dist(i, j));
        std::nth_element(row.begin(), row.begin() + (k - 1), row.end());
        radii[static_cast<std::size_t>(i)] = row[static_cast<std::size_t>(k - 1)];
    }
    return radii;
}

double coverage(const Eigen::MatrixXd& manifold, const Eigen::MatrixXd& probes, int k) {
    const std::vector<double> radii = knn_radii(pairwise_distances(manifold, manifold), k);
    const Eigen::MatrixXd cross = pairwise_distances(probes, manifold);
    std::size_t inside = 0;
    for (Eigen::Index i = 0; i < cross.rows(); ++i) {
        for (Eigen::Index j = 0; j < cross.cols(); ++j) {
            if (cross(i, j) <= radii[static_cast<std::size_t>(j)]) {
                ++inside;
                break;
            }
        }
    }
    return static_cast<double>(inside) / static_cast<double>(probes.rows());
}

}  // namespace

PrecisionRecall knn_precision_recall(const VectorSet& reference, const VectorSet& candidate, int k) {
    if (k < 1) throw ConfigError("k must be positive");
    if (reference.dim() != candidate.dim()) throw DimensionMismatchError("sets differ in dimension");
    const auto needed = static_cast<std::size_t>(k) + 1;
    require_points(reference, needed, "k-NN precision/recall (reference)");
    require_points(candidate, needed, "k-NN precision/recall (candidate)");
    return {coverage(reference.points(), candidate.points(), k), coverage(candidate.points(), reference.points(), k)};
}

double nearest_rank_percentile(std::vector<double> values, double p) {
    if (values.empty()) throw TooFewPointsError("percentile of an empty list");
    if (!(p > 0.0 && p <= 100.0)) throw ConfigError("percentile must lie in (0, 100]");
    std::sort(values.begin(), values.end());
    const double exact = p / 100.0 * static_cast<double>(values.size());
    // Guard against p/100*n landing a hair above an integer.
    auto rank = static_cast<std::size_t>(std::ceil(exact - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

double mst_weight(const Eigen::MatrixXd& dist) {
    const Eigen::Index n = dist.rows();
    if (n <= 1) return 0.0;
    std::vector<double> best(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    std::vector<bool> in_tree(static_cast<std::size_t>(n), false);
    best[0] = 0.0;
    double total = 0.0;
    for (Eigen::Index step = 0; step < n; ++step) {
        Eigen::Index u = -1;
        for (Eigen::Index v = 0; v < n; ++v)
            if (!in_tree[static_cast<std::size_t>(v)] && (u < 0 || best[static_cast<std::size_t>(v)] < best[static_cast<std::size_t>(u)]))
                u = v;
        in_tree[static_cast<std::size_t>(u)] = true;
        total += best[static_cast<std::size_t>(u)];
        for (Eigen::Index v = 0; v < n; ++v)
            if (!in_tree[static_cast<std::size_t>(v)])
                best[static_cast<std::size_t>(v)] = std::min(best[static_cast<std::size_t>(v)], dist(u, v));
    }
    return total;
}

Eigen::MatrixXd principal_components(const Eigen::MatrixXd& x, int k) {
    const Eigen::Index d = x.cols();
    const Eigen::Index keep = std::min<Eigen::Index>(k, d);
    Eigen::MatrixXd c = centered(x);
    if (x.rows() < 2) return Eigen::MatrixXd::Zero(x.rows(), keep);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance(x));
    Eigen::MatrixXd basis(d, keep);
    for (Eigen::Index i = 0; i < keep; ++i) {
        Eigen::VectorXd v = es.eigenvectors().col(d - 1 - i);
        Eigen::Index arg;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        basis.col(i) = v;
    }
    return c * basis;
}

double grid_entropy(const Eigen::MatrixXd& x, int grid) {
    if (grid < 1) throw ConfigError("grid must be positive");
    const Eigen::Index n = x.rows();
    if (n == 0) return 0.0;
    const Eigen::MatrixXd p = principal_components(x, 2);
    const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    std::vector<std::vector<int>> cells(static_cast<std::size_t>(n), std::vector<int>(2, 0));
    for (Eigen::Index axis = 0; axis < p.cols(); ++axis) {
        const double lo = p.col(axis).minCoeff();
        const double hi = p.col(axis).maxCoeff();
        const double range = hi - lo;
        if (range <= 1e-12 * scale) continue;  // degenerate: everything stays in cell 0
        for (Eigen::Index i = 0; i < n; ++i) {
            int c = static_cast<int>(std::floor((p(i, axis) - lo) / range * grid));
            cells[static_cast<std::size_t>(i)][static_cast<std::size_t>(axis)] = std::clamp(c, 0, grid - 1);
        }
    }
    std::map<std::pair<int, int>, std::size_t> counts;
    for (const auto& c : cells) ++counts[{c[0], c[1]}];
    double h = 0.0;
    for (const auto& [cell, count] : counts) {
        const double q = static_cast<double>(count) / static_cast<double>(n);
        h -= q * std::log(q);
    }
    return h == 0.0 ? 0.0 : h;
}

WithinMetrics within_metrics(const VectorSet& x, const WithinOptions& opts) {
    if (x.dim() == 0) throw ZeroDimensionError("vectors have dimension 0");
    require_points(x, 2, "within-set metrics");
    const Eigen::MatrixXd& pts = x.points();
    const Eigen::Index n = pts.rows();
    const Eigen::MatrixXd dist = pairwise_distances(pts, pts, opts.threads);
    const double nd = static_cast<double>(n);

    WithinMetrics m;
    double rc = 0.0, chamfer = 0.0;
    double medoid_sum = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        double sum = 0.0, nearest = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            sum += dist(i, j);
            nearest = std::min(nearest, dist(i, j));
        }
        rc += sum / (nd - 1.0);
        chamfer += nearest;
        // Ties keep the lowest index; only the medoid's summed distance is needed.
        if (sum < medoid_sum) medoid_sum = sum;
    }
    m.remote_clique = rc / nd;
    m.chamfer = chamfer / nd;
    m.mst = mst_weight(dist);

    const Eigen::RowVectorXd centroid = pts.colwise().mean();
    std::vector<double> to_centroid(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) to_centroid[static_cast<std::size_t>(i)] = (pts.row(i) - centroid).norm();
    m.span = nearest_rank_percentile(std::move(to_centroid), opts.span_percentile);
    m.sparseness = medoid_sum / nd;
    m.entropy = grid_entropy(pts, opts.grid);
    return m;
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

Report evaluate(const std::vector<std::string>& reference, const std::vector<DatasetSource>& sources,
                EmbeddingProvider& provider, const EvaluationOptions& opts) {
    if (reference.empty()) throw EmptySetError("reference dataset is empty");
    if (sources.empty()) throw EmptySetError("no dataset sources given");
    auto embed = [&](const std::vector<std::string>& texts) {
        VectorSet v = provider.embed(texts);
        return opts.normalize ? v.normalize() : v;
    };
    const VectorSet ref = embed(reference);

    Report report;
    for (const auto& source : sources) {
        if (source.sets.empty()) throw EmptySetError("source " + source.name + " has no sets");
        std::vector<std::vector<double>> values(metric_names().size());
        for (const auto& set : source.sets) {
            if (set.empty()) throw EmptySetError("source " + source.name + " has an empty set");
            const VectorSet v = embed(set);
            const double fd = frechet_distance(v, ref);
            const PrecisionRecall pr = knn_precision_recall(ref, v, opts.k);
            const WithinMetrics w = within_metrics(v, opts.within);
            const double row[] = {fd, pr.precision, pr.recall, w.remote_clique, w.chamfer,
                                  w.mst, w.span, w.sparseness, w.entropy};
            for (std::size_t i = 0; i < values.size(); ++i) values[i].push_back(row[i]);
        }
        ReportRow r;
        r.source = source.name;
        r.set_count = source.sets.size();
        for (const auto& v : values) r.metrics.push_back(summarize(v));
        report.rows.push_back(std::move(r));
    }
    return report;
}

std::string report_csv(const Report& r) {
    std::vector<std::string> header = {"source", "sets"};
    for (const auto& m : metric_names()) {
        header.push_back(m + "_mean");
        header.push_back(m + "_std");
    }
    std::string out = join(header, ",");
    for (const auto& row : r.rows) {
        std::vector<std::string> cells = {csv_field(row.source), std::to_string(row.set_count)};
        for (const auto& s : row.metrics) {
            cells.push_back(format_double(s.mean));
            cells.push_back(format_double(s.std));
        }
        out += "\n" + join(cells, ",");
    }
    return out;
}

std::string report_text(const Report& r, int precision) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header = {"source", "sets"};
    for (const auto& m : metric_names()) header.push_back(m);
    rows.push_back(header);
    for (const auto& row : r.rows) {
        std::vector<std::string> cells = {row.source, std::to_string(row.set_count)};
        for (const auto& s : row.metrics) cells.push_back(fixed(s.mean, precision) + " ± " + fixed(s.std, precision));
        rows.push_back(std::move(cells));
    }
    return aligned_table(rows);
}

}  // namespace chartnl
