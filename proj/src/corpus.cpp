#include "chartnl/corpus.hpp"

#include "chartnl/errors.hpp"
#include "chartnl/rng.hpp"
#include "chartnl/text_util.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>
#include <openssl/evp.h>

namespace chartnl {

std::string to_hex(const Digest& d) { return to_hex(d.data(), d.size()); }

SpecRecord make_record(SpecDocument doc, VocabularyFilter filter, const DataTable* data) {
    SpecRecord r;
    r.profile = structural_profile(doc, filter);
    r.composition = detect_composition(doc, data);
    r.interactions = detect_interactions(doc);
    try {
        r.chart_types = classify_chart_types(doc);
    } catch (const NoMarkError&) {
        r.chart_types.reset();
    }
    r.level = classify_complexity(r.profile);
    r.fingerprint = spec_fingerprint(doc);
    r.doc = std::move(doc);
    return r;
}

namespace {

void write_canonical(std::string& out, const SpecNode& n) {
    if (n.is_scalar()) {
        out += "\"\"";
        return;
    }
    if (n.is_array()) {
        out.push_back('[');
        for (std::size_t i = 0; i < n.array().size(); ++i) {
            if (i) out.push_back(',');
            write_canonical(out, n.array()[i]);
        }
        out.push_back(']');
        return;
    }
    std::vector<const Member*> members;
    for (const auto& m : n.object())
        if (!is_embedded_data_key(m.key)) members.push_back(&m);
    std::sort(members.begin(), members.end(), [](const Member* a, const Member* b) { return a->key < b->key; });
    out.push_back('{');
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (i) out.push_back(',');
        out += json_quote(members[i]->key);
        out.push_back(':');
        write_canonical(out, members[i]->value);
    }
    out.push_back('}');
}

}  // namespace

std::string canonicalize_spec(const SpecDocument& doc) {
    std::string out;
    write_canonical(out, doc.root);
    return out;
}

std::string dedup_form(const SpecDocument& doc) { return to_json_sorted(doc.root); }

Digest spec_fingerprint(const SpecDocument& doc) { return sha256(dedup_form(doc)); }

Digest sha256(std::string_view text) {
    Digest d{};
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), d.data(), &len, EVP_sha256(), nullptr) != 1 || len != d.size())
        throw Error("DigestError", "SHA-256 computation failed");
    return d;
}

std::vector<std::size_t> dedup_survivors(const std::vector<SpecRecord>& records) {
    std::vector<std::size_t> keep;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (seen.insert(to_hex(records[i].fingerprint)).second) keep.push_back(i);
    return keep;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

namespace {

void check_cap(const std::string& canonical, const std::string& id, std::size_t cap) {
    if (canonical.size() > cap)
        throw SizeLimitError("canonical form of \"" + id + "\" has " + std::to_string(canonical.size()) +
                             " characters (cap " + std::to_string(cap) + ")");
}

}  // namespace

std::size_t pairwise_edit_distance(const SpecDocument& a, const SpecDocument& b, std::size_t cap) {
    const std::string ca = canonicalize_spec(a);
    const std::string cb = canonicalize_spec(b);
    check_cap(ca, a.id, cap);
    check_cap(cb, b.id, cap);
    return levenshtein(ca, cb);
}

CorpusSummary summarize_corpus(const std::vector<SpecRecord>& records, const SummaryOptions& opts) {
    if (records.empty()) throw EmptyCorpusError("cannot summarize an empty corpus");

    CorpusSummary s;
    s.spec_count = records.size();
    for (auto level : {ComplexityLevel::Simple, ComplexityLevel::Medium, ComplexityLevel::Complex,
                       ComplexityLevel::ExtraComplex})
        s.level_histogram[level] = 0;

    std::set<std::string> keys;
    ChartTypeSet chart_types;
    double depth_sum = 0, branching_sum = 0;
    for (const auto& r : records) {
        s.total_keys += r.profile.key_count;
        depth_sum += static_cast<double>(r.profile.max_depth);
        branching_sum += r.profile.branching_factor();
        ++s.level_histogram[r.level];
        keys.insert(r.profile.unique_keys.begin(), r.profile.unique_keys.end());
        if (r.composition.is_composite()) ++s.composite_count;
        if (r.interactions.has_interaction()) ++s.interaction_count;
        if (r.chart_types) chart_types.insert(r.chart_types->begin(), r.chart_types->end());
    }
    const double n = static_cast<double>(records.size());
    s.avg_keys = static_cast<double>(s.total_keys) / n;
    s.avg_depth = depth_sum / n;
    s.avg_branching = branching_sum / n;
    s.unique_key_total = keys.size();
    s.chart_type_count = chart_types.size();

    if (records.size() < 2) return s;

    // Canonical record ordering by id keeps sampled pairs independent of input order.
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return records[a].doc.id < records[b].doc.id; });
    std::vector<std::string> canon;
    canon.reserve(order.size());
    for (std::size_t i : order) {
        canon.push_back(canonicalize_spec(records[i].doc));
        check_cap(canon.back(), records[i].doc.id, opts.edit_distance_cap);
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    const std::size_t count = canon.size();
    if (count <= opts.full_pair_threshold) {
        for (std::size_t i = 0; i < count; ++i)
            for (std::size_t j = i + 1; j < count; ++j) pairs.emplace_back(i, j);
    } else {
        s.pairs_sampled = true;
        Rng rng(opts.seed);
        pairs.reserve(opts.sample_pairs);
        for (std::size_t k = 0; k < opts.sample_pairs; ++k) {
            std::size_t i = rng.uniform_index(count);
            std::size_t j = rng.uniform_index(count - 1);
            if (j >= i) ++j;
            pairs.emplace_back(std::min(i, j), std::max(i, j));
        }
    }
    if (pairs.empty()) return s;

    unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, pairs.size()));
    std::vector<std::uint64_t> partial(threads, 0);
    {
        std::vector<std::jthread> workers;
        for (unsigned t = 0; t < threads; ++t) {
            workers.emplace_back([&, t] {
                std::uint64_t sum = 0;
                for (std::size_t k = t; k < pairs.size(); k += threads)
                    sum += levenshtein(canon[pairs[k].first], canon[pairs[k].second]);
                partial[t] = sum;
            });
        }
    }
    const std::uint64_t total = std::accumulate(partial.begin(), partial.end(), std::uint64_t{0});
    s.pairs_evaluated = pairs.size();
    s.avg_pairwise_edit_distance = static_cast<double>(total) / static_cast<double>(pairs.size());
    return s;
}

std::vector<std::pair<std::string, std::string>> summary_rows(const CorpusSummary& s) {
    std::vector<std::pair<std::string, std::string>> rows = {
        {"spec_count", std::to_string(s.spec_count)},
        {"total_keys", std::to_string(s.total_keys)},
        {"avg_keys", fixed(s.avg_keys, 2)},
    };
    for (const auto& [level, count] : s.level_histogram)
        rows.emplace_back("level_" + std::string(to_string(level)), std::to_string(count));
    rows.emplace_back("avg_depth", fixed(s.avg_depth, 2));
    rows.emplace_back("avg_branching", fixed(s.avg_branching, 2));
    rows.emplace_back("unique_key_total", std::to_string(s.unique_key_total));
    rows.emplace_back("avg_pairwise_edit_distance",
                      s.avg_pairwise_edit_distance ? fixed(*s.avg_pairwise_edit_distance, 2) : std::string("NA"));
    rows.emplace_back("pairs_evaluated", std::to_string(s.pairs_evaluated) + (s.pairs_sampled ? " (sampled)" : ""));
    rows.emplace_back("composite_count", std::to_string(s.composite_count));
    rows.emplace_back("interaction_count", std::to_string(s.interaction_count));
    rows.emplace_back("chart_type_count", std::to_string(s.chart_type_count));
    return rows;
}

std::string summary_csv(const CorpusSummary& s) {
    std::string out = "metric,value\n";
    for (const auto& [k, v] : summary_rows(s)) out += k + "," + v + "\n";
    return out;
}

std::string summary_text(const CorpusSummary& s) {
    std::vector<std::vector<std::string>> rows = {{"metric", "value"}};
    for (const auto& [k, v] : summary_rows(s)) rows.push_back({k, v});
    return aligned_table(rows);
}

std::string stratum_key(const SpecRecord& r, const StrataCriteria& c) {
    std::string key;
    key += c.level ? std::string(to_string(r.level)) : "*";
    key += "|";
    key += c.composite ? (r.composition.is_composite() ? "composite" : "single") : "*";
    key += "|";
    key += c.interaction ? (r.interactions.has_interaction() ? "interactive" : "static") : "*";
    return key;
}

std::vector<std::size_t> allocate_proportional(const std::vector<std::size_t>& sizes, std::size_t n) {
    const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    std::vector<std::size_t> quota(sizes.size(), 0);
    if (total == 0) return quota;
    std::vector<std::pair<std::size_t, std::size_t>> remainders;  // (remainder numerator, index)
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const std::size_t scaled = sizes[i] * n;
        quota[i] = scaled / total;
        assigned += quota[i];
        remainders.emplace_back(scaled % total, i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < n && k < remainders.size(); ++k, ++assigned) ++quota[remainders[k].second];
    return quota;
}

std::vector<std::size_t> stratified_sample(const std::vector<SpecRecord>& records, std::size_t n,
                                           const StrataCriteria& criteria, std::uint64_t seed) {
    if (n > records.size())
        throw SampleSizeError("requested " + std::to_string(n) + " records from a corpus of " +
                              std::to_string(records.size()));
    std::map<std::string, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < records.size(); ++i) strata[stratum_key(records[i], criteria)].push_back(i);

    std::vector<std::size_t> sizes;
    for (const auto& [key, members] : strata) sizes.push_back(members.size());
    const auto quota = allocate_proportional(sizes, n);

    std::vector<std::size_t> picked;
    std::size_t s = 0;
    for (const auto& [key, members] : strata) {
        Rng rng(derive_seed(seed, s));
        for (std::size_t idx : rng.sample_indices(members.size(), quota[s])) picked.push_back(members[idx]);
        ++s;
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

std::vector<ManifestEntry> read_manifest(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open manifest " + manifest_path);
    const auto base = std::filesystem::path(manifest_path).parent_path();
    std::vector<ManifestEntry> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError("manifest line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("path") || !j["path"].is_string())
            throw SchemaError("manifest line " + std::to_string(lineno) + ": missing \"path\"");
        ManifestEntry e;
        std::filesystem::path p = j["path"].get<std::string>();
        e.path = p.is_absolute() ? p.string() : (base / p).string();
        e.id = j.value("id", p.stem().string());
        e.license_tag = j.value("license_tag", "");
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace chartnl
