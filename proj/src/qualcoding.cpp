#include "chartnl/qualcoding.hpp"

#include "chartnl/csv.hpp"
#include "chartnl/errors.hpp"
#include "chartnl/text_util.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace chartnl {

namespace {

std::vector<std::string> words(std::string_view s) {
    std::vector<std::string> out;
    for (auto w : split(s, ' '))
        if (!trim(w).empty()) out.emplace_back(trim(w));
    return out;
}

// "language," still counts as the word "language".
std::string core(const std::string& w) {
    std::size_t b = 0, e = w.size();
    while (b < e && !is_word_char(static_cast<unsigned char>(w[b]))) ++b;
    while (e > b && !is_word_char(static_cast<unsigned char>(w[e - 1]))) --e;
    return w.substr(b, e - b);
}

bool trimmable(char c) {
    return c == ' ' || c == '.' || c == ',' || c == ':' || c == '"' || c == '\'' || c == '-' || c == '*' || c == '\t';
}

}  // namespace

std::string clean_code(std::string_view raw) {
    std::string lowered = to_lower_ascii(raw);
    for (char& c : lowered)
        if (c == '\t' || c == '\r' || c == '\n') c = ' ';
    std::vector<std::string> in = words(lowered);
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < in.size(); ++i) {
        const std::string w = core(in[i]);
        if (w == "language") continue;
        if (w == "use" && i + 1 < in.size() && core(in[i + 1]) == "of" && in[i].back() != ',') {
            ++i;
            continue;
        }
        kept.push_back(in[i]);
    }
    std::string out = join(kept, " ");
    std::size_t b = 0, e = out.size();
    while (b < e && trimmable(out[b])) ++b;
    while (e > b && trimmable(out[e - 1])) --e;
    return out.substr(b, e - b);
}

CodeExtraction extract_codes(std::string_view reply, const std::string& sentence_id) {
    CodeExtraction out;
    std::set<std::string> seen;
    for (auto line : split_lines(reply)) {
        if (trim(line) == "##") continue;
        for (auto item : split(line, ';')) {
            std::string code = clean_code(item);
            if (code.empty() || !seen.insert(code).second) continue;
            out.codes.push_back({code, sentence_id});
        }
    }
    if (out.codes.size() != kExpectedCodesPerSentence)
        out.warnings.push_back("sentence " + sentence_id + ": expected " + std::to_string(kExpectedCodesPerSentence) +
                               " codes, got " + std::to_string(out.codes.size()));
    return out;
}

std::vector<int> dbscan(const Eigen::MatrixXd& points, double eps, int min_pts) {
    const Eigen::Index n = points.rows();
    const Eigen::MatrixXd dist = pairwise_distances(points, points);
    std::vector<std::vector<Eigen::Index>> neighbours(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (dist(i, j) <= eps) neighbours[static_cast<std::size_t>(i)].push_back(j);
    auto is_core = [&](Eigen::Index i) {
        return static_cast<int>(neighbours[static_cast<std::size_t>(i)].size()) >= min_pts;
    };

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    int next = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (labels[static_cast<std::size_t>(i)] != -1 || !is_core(i)) continue;
        const int id = next++;
        std::deque<Eigen::Index> frontier{i};
        labels[static_cast<std::size_t>(i)] = id;
        while (!frontier.empty()) {
            const Eigen::Index p = frontier.front();
            frontier.pop_front();
            if (!is_core(p)) continue;
            for (Eigen::Index q : neighbours[static_cast<std::size_t>(p)]) {
                if (labels[static_cast<std::size_t>(q)] != -1) continue;
                labels[static_cast<std::size_t>(q)] = id;
                frontier.push_back(q);
            }
        }
    }
    return labels;
}

double median_knn_distance(const Eigen::MatrixXd& points, int k) {
    const Eigen::Index n = points.rows();
    if (n <= k) throw TooFewCodesError("need more than " + std::to_string(k) + " points for the k-NN distance");
    const Eigen::MatrixXd dist = pairwise_distances(points, points);
    std::vector<double> kth;
    std::vector<double> row;
    for (Eigen::Index i = 0; i < n; ++i) {
        row.clear();
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) row.push_back(dist(i, j));
        std::nth_element(row.begin(), row.begin() + (k - 1), row.end());
        kth.push_back(row[static_cast<std::size_t>(k - 1)]);
    }
    std::sort(kth.begin(), kth.end());
    const std::size_t m = kth.size();
    return m % 2 ? kth[m / 2] : 0.5 * (kth[m / 2 - 1] + kth[m / 2]);
}

ClusterResult cluster_codes(const std::vector<Code>& codes, EmbeddingProvider& provider, const ClusterOptions& opts) {
    if (opts.min_pts < 1) throw ConfigError("min_pts must be positive");
    if (opts.reduce_dim < 1) throw ConfigError("reduce_dim must be positive");
    ClusterResult r;
    std::map<std::string, std::size_t> index;
    for (const auto& c : codes) {
        auto [it, inserted] = index.emplace(c.text, r.codes.size());
        if (inserted) {
            r.codes.push_back(c.text);
            r.counts.push_back(0);
        }
        ++r.counts[it->second];
    }
    if (r.codes.size() < static_cast<std::size_t>(opts.min_pts) || r.codes.size() < 2)
        throw TooFewCodesError("clustering needs at least " + std::to_string(std::max(opts.min_pts, 2)) +
                               " unique codes, got " + std::to_string(r.codes.size()));

    VectorSet v = provider.embed(r.codes);
    if (opts.normalize) v = v.normalize();
    const Eigen::MatrixXd reduced = principal_components(v.points(), opts.reduce_dim);
    constexpr int kEpsNeighbour = 4;
    const int k = std::min<int>(kEpsNeighbour, static_cast<int>(r.codes.size()) - 1);
    r.eps = opts.eps ? *opts.eps : median_knn_distance(reduced, k);
    r.labels = dbscan(reduced, r.eps, opts.min_pts);
    r.cluster_count = r.labels.empty() ? 0 : *std::max_element(r.labels.begin(), r.labels.end()) + 1;
    return r;
}

std::string cluster_csv(const ClusterResult& r) {
    std::vector<CsvRow> rows;
    for (std::size_t i = 0; i < r.codes.size(); ++i)
        rows.push_back({r.codes[i], std::to_string(r.counts[i]), std::to_string(r.labels[i])});
    return write_csv({"code", "count", "cluster"}, rows);
}

std::string cluster_summary(const ClusterResult& r, std::size_t top) {
    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < r.codes.size(); ++i) members[r.labels[i]].push_back(i);
    std::vector<std::vector<std::string>> table = {{"cluster", "size", "top codes"}};
    for (auto& [label, idx] : members) {
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return r.counts[a] > r.counts[b]; });
        std::vector<std::string> shown;
        for (std::size_t i = 0; i < idx.size() && i < top; ++i)
            shown.push_back(r.codes[idx[i]] + " (" + std::to_string(r.counts[idx[i]]) + ")");
        table.push_back({label < 0 ? std::string("noise") : std::to_string(label), std::to_string(idx.size()),
                         join(shown, ", ")});
    }
    return aligned_table(table);
}

}  // namespace chartnl
