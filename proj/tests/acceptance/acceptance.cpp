// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "chartnl/cli.hpp"
#include "chartnl/corpus.hpp"
#include "chartnl/diversity.hpp"
#include "chartnl/errors.hpp"
#include "chartnl/fielddata.hpp"
#include "chartnl/lexical.hpp"
#include "chartnl/pipeline.hpp"
#include "chartnl/promptforge.hpp"
#include "chartnl/rng.hpp"
#include "chartnl/spec_model.hpp"
#include "lexical_golden.hpp"
#include "oracles.hpp"
#include "prompt_cases.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace chartnl;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = CHARTNL_FIXTURE_DIR;

/// Collects failed checks for one criterion.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        ++count_;
        if (!ok && failures_.size() < 5) failures_.push_back(what);
        if (!ok) ++failed_;
    }
    void near(double got, double want, double tol, const std::string& what) {
        std::ostringstream ss;
        ss.precision(17);
        ss << what << ": got " << got << ", want " << want << " +- " << tol;
        expect(std::abs(got - want) <= tol, ss.str());
    }
    bool ok() const { return failed_ == 0; }
    std::size_t count() const { return count_; }
    const std::vector<std::string>& failures() const { return failures_; }
    std::size_t failed() const { return failed_; }

private:
    std::size_t count_ = 0;
    std::size_t failed_ = 0;
    std::vector<std::string> failures_;
};

struct Criterion {
    int number;
    std::string name;
    double limit_seconds;
    std::function<void(Checks&)> body;
};

template <typename E, typename Fn>
bool throws(Fn&& fn) {
    try {
        fn();
    } catch (const E&) {
        return true;
    } catch (...) {
        return false;
    }
    return false;
}

// 1 ------------------------------------------------------------------------

void complexity_thresholds(Checks& c) {
    const std::pair<std::size_t, ComplexityLevel> cases[] = {
        {16, ComplexityLevel::Simple},  {17, ComplexityLevel::Medium},  {24, ComplexityLevel::Medium},
        {25, ComplexityLevel::Complex}, {41, ComplexityLevel::Complex}, {42, ComplexityLevel::ExtraComplex},
    };
    for (const auto& [keys, level] : cases)
        c.expect(classify_complexity(keys) == level,
                 std::to_string(keys) + " keys -> " + std::string(to_string(classify_complexity(keys))));
}

// 2 ------------------------------------------------------------------------

struct HandTree {
    const char* text;
    std::size_t keys, depth, internal, children;
};

void structural_profiling(Checks& c) {
    auto compare = [&](const std::string& text, const std::string& label) {
        const auto tree = nlohmann::ordered_json::parse(text);
        const auto want = oracle::naive_tree_counts(tree);
        const auto got = structural_profile(parse_spec(text, "t"), VocabularyFilter::Off);
        c.expect(got.key_count == want.keys && got.max_depth == want.depth && got.internal_nodes == want.internal &&
                     got.child_total == want.children && got.branching_factor() == want.branching(),
                 label + " differs from the naive walker");
        return got;
    };
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 200; ++i) compare(oracle::random_spec_tree(rng).dump(), "random tree " + std::to_string(i));

    // Counts worked out by hand: keys, container depth, non-empty containers, children.
    const HandTree hand[] = {
        {R"({"mark":"bar","encoding":{"x":{"field":"a","type":"nominal"},"y":{"field":"b","type":"quantitative"}}})", 8, 3, 4, 8},
        {R"({})", 0, 1, 0, 0},
        {R"({"layer":[{"mark":"line"},{"mark":"point"}]})", 3, 3, 4, 5},
        {R"({"data":{"values":[{"a":1}]},"mark":"line"})", 2, 2, 1, 2},
        {R"({"datasets":{"d1":[{"x":1}]},"mark":"bar","data":{"name":"d1"}})", 3, 2, 2, 3},
        {R"({"a":[[[1]]]})", 1, 4, 4, 4},
        {R"({"a":[],"b":{}})", 2, 2, 1, 2},
        {R"({"hconcat":[{"mark":"bar"},{"vconcat":[{"mark":"line"}]}]})", 4, 5, 6, 7},
        {R"({"transform":[{"filter":"datum.x > 2"},{"calculate":"2*datum.y","as":"z"}]})", 4, 3, 4, 6},
        {R"({"params":[{"name":"p","select":{"type":"interval","encodings":["x"]}}],"mark":"point"})", 6, 5, 5, 8},
    };
    for (std::size_t i = 0; i < std::size(hand); ++i) {
        const auto& h = hand[i];
        const auto got = compare(h.text, "fixture " + std::to_string(i));
        c.expect(got.key_count == h.keys && got.max_depth == h.depth && got.internal_nodes == h.internal &&
                     got.child_total == h.children,
                 "fixture " + std::to_string(i) + " differs from hand counts");
    }

    // Embedded data contributes no keys, wherever it sits.
    for (int i = 0; i < 50; ++i) {
        auto tree = oracle::random_spec_tree(rng);
        auto with = tree;
        with["data"] = {{"values", oracle::random_spec_tree(rng)}};
        auto without = tree;
        without["data"] = nlohmann::ordered_json::object();
        const auto a = structural_profile(parse_spec(with.dump(), "a"), VocabularyFilter::Off);
        const auto b = structural_profile(parse_spec(without.dump(), "b"), VocabularyFilter::Off);
        c.expect(a == b, "embedded values changed the profile");
    }
}

// 3 ------------------------------------------------------------------------

// Same tree with every object's keys reversed, pretty-printed.
nlohmann::ordered_json reversed_keys(const nlohmann::ordered_json& j) {
    if (j.is_object()) {
        nlohmann::ordered_json out = nlohmann::ordered_json::object();
        std::vector<std::string> keys;
        for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
        for (auto k = keys.rbegin(); k != keys.rend(); ++k) out[*k] = reversed_keys(j.at(*k));
        return out;
    }
    if (j.is_array()) {
        nlohmann::ordered_json out = nlohmann::ordered_json::array();
        for (const auto& e : j) out.push_back(reversed_keys(e));
        return out;
    }
    return j;
}

void canonical_edit_distance(Checks& c) {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 100; ++i) {
        const auto tree = oracle::random_spec_tree(rng, 4);
        const auto a = parse_spec(tree.dump(), "a");
        const auto b = parse_spec(reversed_keys(tree).dump(2), "b");
        c.expect(pairwise_edit_distance(a, b) == 0, "reordered copy has nonzero distance");
    }
    std::vector<SpecDocument> docs;
    for (int i = 0; i < 300; ++i) docs.push_back(parse_spec(oracle::random_spec_tree(rng, 4).dump(), "d"));
    for (int t = 0; t < 1000; ++t) {
        const auto& a = docs[rng() % docs.size()];
        const auto& b = docs[rng() % docs.size()];
        const auto& x = docs[rng() % docs.size()];
        const auto ab = pairwise_edit_distance(a, b), ba = pairwise_edit_distance(b, a);
        const auto bx = pairwise_edit_distance(b, x), ax = pairwise_edit_distance(a, x);
        c.expect(ab == ba, "asymmetric distance");
        c.expect(ax <= ab + bx, "triangle inequality violated");
    }
    // Hand-computed edits on the canonical forms.
    const std::tuple<const char*, const char*, std::size_t> pairs[] = {
        {R"({"a":1})", R"({"b":2})", 1},
        {R"({"mark":"bar"})", R"({"mark":"bar","width":3})", 11},
        {R"({"a":[1,2]})", R"({"a":[1]})", 3},
        {R"({"x":{"y":1}})", R"({"x":1})", 6},
        {R"({"mark":"bar","data":{"values":[1]}})", R"({"mark":"bar"})", 10},
    };
    for (const auto& [a, b, want] : pairs) {
        const auto got = pairwise_edit_distance(parse_spec(a, "a"), parse_spec(b, "b"));
        c.expect(got == want, std::string(a) + " vs " + b + " = " + std::to_string(got));
    }
}

// 4 ------------------------------------------------------------------------

void diversity_oracles(Checks& c) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 2 + rng() % 5;
        const std::size_t d = 1 + rng() % 4;
        oracle::Points p(n, std::vector<double>(d));
        for (auto& row : p)
            for (auto& x : row) x = u(rng);
        const auto m = within_metrics(VectorSet::from_rows(p));
        const std::string tag = "set " + std::to_string(t);
        c.near(m.remote_clique, oracle::brute_remote_clique(p), 1e-9, tag + " remote_clique");
        c.near(m.chamfer, oracle::brute_chamfer(p), 1e-9, tag + " chamfer");
        c.near(m.mst, oracle::exhaustive_mst(p), 1e-9, tag + " mst");
        c.near(m.span, oracle::brute_span(p, 90.0), 1e-9, tag + " span");
        c.near(m.sparseness, oracle::brute_sparseness(p), 1e-9, tag + " sparseness");
    }
    const double h = std::sqrt(3.0) / 2.0;
    const auto tri = within_metrics(VectorSet::from_rows({{0, 0}, {1, 0}, {0.5, h}}));
    c.near(tri.remote_clique, 1.0, 1e-12, "triangle remote_clique");
    c.near(tri.chamfer, 1.0, 1e-12, "triangle chamfer");
    c.near(tri.mst, 2.0, 1e-12, "triangle mst");
    c.near(tri.sparseness, 2.0 / 3.0, 1e-12, "triangle sparseness");
    c.near(tri.span, 1.0 / std::sqrt(3.0), 1e-12, "triangle span");
    const auto line = within_metrics(VectorSet::from_rows({{0}, {1}, {3}}));
    c.near(line.mst, 3.0, 1e-12, "collinear mst");
    c.near(line.chamfer, 4.0 / 3.0, 1e-12, "collinear chamfer");
}

// 5 ------------------------------------------------------------------------

Eigen::MatrixXd gaussian(Rng& rng, int n, const Eigen::RowVectorXd& mean) {
    Eigen::MatrixXd m(n, mean.size());
    for (int i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < mean.size(); ++j) m(i, j) = mean(j) + rng.normal();
    return m;
}

void cross_metrics(Checks& c) {
    Rng rng(5);
    const Eigen::RowVectorXd zero = Eigen::RowVectorXd::Zero(4);
    Eigen::RowVectorXd delta(4);
    delta << 2.0, -1.0, 0.5, 1.5;
    const Eigen::MatrixXd x = gaussian(rng, 2000, zero);
    const VectorSet vx(x);
    c.expect(frechet_distance(vx, vx) <= 1e-6, "FD(X,X) > 1e-6");
    // Exact shift: covariances coincide, so FD is the squared mean offset.
    c.near(frechet_distance(vx, VectorSet(x.rowwise() + delta)), delta.squaredNorm(), 1e-6, "FD of shifted copy");
    // Independent samples with equal covariance.
    const VectorSet vy(gaussian(rng, 2000, delta));
    const double fd = frechet_distance(vx, vy);
    c.near(fd, delta.squaredNorm(), 0.05 * delta.squaredNorm(), "FD of independent shifted sample");

    const Eigen::MatrixXd small = x.topRows(200);
    const auto self = knn_precision_recall(VectorSet(small), VectorSet(small), 3);
    c.expect(self.precision == 1.0 && self.recall == 1.0, "P/R(a,a) != (1,1)");
    Eigen::RowVectorXd far = Eigen::RowVectorXd::Constant(4, 1000.0);
    const auto apart = knn_precision_recall(VectorSet(small), VectorSet(small.rowwise() + far), 3);
    c.expect(apart.precision == 0.0, "far-apart precision != 0");
}

// 6 ------------------------------------------------------------------------

void prompt_fidelity(Checks& c) {
    std::string all;
    for (const auto& pc : testing_support::prompt_cases()) {
        const std::string golden = oracle::golden_template(pc.template_file);
        const std::string want = oracle::expected_rendering(golden, pc.expected_values);
        c.expect(pc.prompt.text == want, pc.name + " differs from its golden template outside placeholders");
        all += pc.prompt.text + "\n";
    }
    for (const char* anchor :
         {"Let's generate a level 1 NL description", "Do not draw any charts to answer the question.",
          "Rewrite the following sentence as if it were spoken", "Let's perform a thematic analysis"})
        c.expect(all.find(anchor) != std::string::npos, std::string("missing anchor: ") + anchor);
}

// 7 ------------------------------------------------------------------------

void paraphrase_combinatorics(Checks& c) {
    for (auto [mode, want] : {std::pair{ParaphraseMode::OneAxis, 20u}, std::pair{ParaphraseMode::TwoAxes, 150u}}) {
        const auto variants = enumerate_paraphrase_variants(mode);
        std::set<std::string> distinct;
        for (const auto& v : variants) {
            validate(v);
            distinct.insert(describe(v));
        }
        c.expect(variants.size() == want && distinct.size() == want,
                 std::string(to_string(mode)) + ": " + std::to_string(variants.size()) + " variants, " +
                     std::to_string(distinct.size()) + " distinct");
    }
}

// 8 ------------------------------------------------------------------------

int cli(const std::vector<std::string>& args, std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    if (err_text) *err_text = err.str();
    return code;
}

void end_to_end(Checks& c) {
    const fs::path dir = fs::temp_directory_path() / "chartnl_acceptance_e2e";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string pool_path = (dir / "pool.jsonl").string();
    std::string err;
    c.expect(cli({"--out-dir", dir.string(), "generate", kFixtures + "/corpus/manifest.jsonl", "--mock", "--out",
                  pool_path},
                 &err) == 0,
             "generate --mock failed: " + err);
    const auto pool = read_dataset(pool_path).records;
    std::map<std::string, std::map<std::string, int>> kinds;
    for (const auto& r : pool) {
        std::string kind(to_string(r.nl_type));
        if (r.subtype) kind += "/" + std::string(to_string(*r.subtype));
        ++kinds[r.chart_id][kind];
    }
    const std::map<std::string, int> expected_kinds = {
        {"caption_l1", 1},
        {"caption_l2", 1},
        {"utterance/command", 1},
        {"utterance/query", 1},
        {"utterance/question", 1},
        {"question/nonvisual_lookup", 1},
        {"question/visual_lookup", 1},
        {"question/nonvisual_compositional", 1},
        {"question/visual_compositional", 1},
        {"question/open_ended", 1},
    };
    c.expect(kinds.size() == 3, std::to_string(kinds.size()) + " charts generated");
    for (const auto& [chart, k] : kinds) c.expect(k == expected_kinds, chart + " has the wrong record mix");
    c.expect(pool.size() == 30, std::to_string(pool.size()) + " records");

    // Reference: 4 records of one chart, 2 of another, 1 of the third.
    std::vector<NLRecord> reference;
    std::map<std::string, std::size_t> taken;
    const std::size_t quota[] = {4, 2, 1};
    std::size_t chart_index = 0;
    std::map<std::string, std::size_t> order;
    for (const auto& r : pool) {
        auto [it, fresh] = order.emplace(r.chart_id, chart_index);
        if (fresh) ++chart_index;
        if (taken[r.chart_id] < quota[it->second]) {
            reference.push_back(r);
            ++taken[r.chart_id];
        }
    }
    const std::string ref_path = (dir / "reference.jsonl").string();
    write_dataset(ref_path, DatasetFile{{"reference", kToolVersion, "fixture"}, reference});
    const std::string prefix = (dir / "matched").string();
    c.expect(cli({"--seed", "3", "match-sample", pool_path, ref_path, "--sets", "5", "--out", prefix}, &err) == 0,
             "match-sample failed: " + err);
    const auto want_hist = chart_histogram(reference);
    for (int s = 1; s <= 5; ++s) {
        const auto set = read_dataset(prefix + "_" + std::to_string(s) + ".jsonl").records;
        auto got = chart_histogram(set);
        std::sort(got.begin(), got.end());
        auto want = want_hist;
        std::sort(want.begin(), want.end());
        c.expect(got == want, "set " + std::to_string(s) + " histogram differs");
    }

    // 30 needed from a chart with 20 available.
    std::vector<NLRecord> twenty;
    for (int i = 0; i < 20; ++i) {
        NLRecord r = pool.front();
        r.id = "pool/" + std::to_string(i);
        twenty.push_back(r);
    }
    c.expect(throws<PoolExhaustedError>([&] { sample_matched_sets(twenty, {{pool.front().chart_id, 30}}, 1, 0); }),
             "30 from 20 did not raise PoolExhaustedError");
    fs::remove_all(dir);
}

// 9 ------------------------------------------------------------------------

AggregationQuery to_query(const oracle::ScanQuery& q) {
    AggregationQuery out;
    out.op = *aggregate_op_from_string(q.op);
    out.field = q.field;
    out.group_by = q.group_by;
    out.filter = q.filter;
    return out;
}

void aggregation_oracle(Checks& c) {
    std::mt19937_64 rng(9);
    int compared = 0;
    for (int i = 0; i < 500; ++i) {
        const auto raw = oracle::random_table(rng, 1 + rng() % 40);
        const DataTable t(raw.names, raw.rows);
        const auto sq = oracle::random_query(rng);
        const auto want = oracle::full_scan(raw, sq);
        const std::string tag = "query " + std::to_string(i) + " (" + sq.op + " " + sq.field + ")";
        const auto type = t.columns()[*t.column_index(sq.field)].inferred_type;
        if (sq.op != "count" && type != FieldType::Quantitative) {
            c.expect(throws<TypeError>([&] { evaluate_aggregation(t, to_query(sq)); }), tag + " expected TypeError");
            continue;
        }
        if (want.empty) {
            c.expect(throws<EmptyInputError>([&] { evaluate_aggregation(t, to_query(sq)); }),
                     tag + " expected EmptyInputError");
            continue;
        }
        const auto got = evaluate_aggregation(t, to_query(sq));
        // Column v holds integers and must match exactly.
        const double tol = sq.field == "v" ? 0.0 : 1e-9;
        if (sq.group_by) {
            c.expect(got.groups.size() == want.groups.size(), tag + " group count");
            for (std::size_t g = 0; g < std::min(got.groups.size(), want.groups.size()); ++g) {
                c.expect(got.groups[g].first == want.groups[g].first, tag + " group key");
                c.near(got.groups[g].second, want.groups[g].second, tol, tag);
            }
        } else {
            c.expect(got.value.has_value(), tag + " missing value");
            if (got.value) c.near(*got.value, *want.value, tol, tag);
        }
        ++compared;
    }
    c.expect(compared > 300, "only " + std::to_string(compared) + " numeric comparisons");
}

// 10 -----------------------------------------------------------------------

void lexical_pipeline(Checks& c) {
    std::mt19937_64 rng(10);
    std::vector<std::vector<std::string>> lists;
    for (int i = 0; i < 1000; ++i) {
        const std::string s = testing_support::random_sentence(rng);
        const auto once = normalize_text(s);
        std::string joined;
        for (const auto& t : once) joined += t + " ";
        c.expect(normalize_text(joined) == once, "not idempotent: " + s);
        lists.push_back(once);
    }
    for (const auto& [sentence, want] : testing_support::lexical_golden())
        c.expect(normalize_text(sentence) == want, "golden mismatch: " + sentence);

    const auto a = lexicon_stats({lists.begin(), lists.begin() + 500});
    const auto b = lexicon_stats({lists.begin() + 500, lists.end()});
    const auto d = vocab_diff(a, b);
    std::set<std::string> seen;
    for (const auto* part : {&d.only_in_a, &d.only_in_b, &d.shared})
        for (const auto& w : *part) c.expect(seen.insert(w).second, "word in two parts: " + w);
    std::set<std::string> uni;
    for (const auto& [w, n] : a.frequency) uni.insert(w);
    for (const auto& [w, n] : b.frequency) uni.insert(w);
    c.expect(seen == uni, "parts do not cover the union");
    for (const auto& w : d.shared) c.expect(a.frequency.contains(w) && b.frequency.contains(w), "bad shared " + w);
    for (const auto& w : d.only_in_a) c.expect(!b.frequency.contains(w), "bad only_in_a " + w);
    for (const auto& w : d.only_in_b) c.expect(!a.frequency.contains(w), "bad only_in_b " + w);
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "complexity thresholds", 1, complexity_thresholds},
        {2, "structural profiling vs naive walker", 5, structural_profiling},
        {3, "canonical edit distance", 10, canonical_edit_distance},
        {4, "within-set diversity oracles", 30, diversity_oracles},
        {5, "cross-set metrics", 30, cross_metrics},
        {6, "prompt fidelity", 1, prompt_fidelity},
        {7, "paraphrase combinatorics", 1, paraphrase_combinatorics},
        {8, "hermetic end-to-end", 10, end_to_end},
        {9, "aggregation oracle", 5, aggregation_oracle},
        {10, "lexical pipeline", 5, lexical_pipeline},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        Checks checks;
        std::string crash;
        const auto start = std::chrono::steady_clock::now();
        try {
            cr.body(checks);
        } catch (const Error& e) {
            crash = e.describe();
        } catch (const std::exception& e) {
            crash = e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < cr.limit_seconds;
        const bool pass = crash.empty() && checks.ok() && in_time;
        failed += !pass;
        std::printf("%s criterion %d: %s (%zu checks, %.3fs, limit %.0fs)\n", pass ? "PASS" : "FAIL", cr.number,
                    cr.name.c_str(), checks.count(), secs, cr.limit_seconds);
        if (!crash.empty()) std::printf("    exception: %s\n", crash.c_str());
        if (!in_time) std::printf("    over the time limit\n");
        for (const auto& f : checks.failures()) std::printf("    %s\n", f.c_str());
        if (checks.failed() > checks.failures().size())
            std::printf("    ... %zu more failed checks\n", checks.failed() - checks.failures().size());
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
