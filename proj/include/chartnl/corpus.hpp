#pragma once

#include "chartnl/spec_model.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace chartnl {

using Digest = std::array<unsigned char, 32>;

std::string to_hex(const Digest& d);

/// A specification together with every per-spec fact derived from it.
struct SpecRecord {
    SpecDocument doc;
    StructuralProfile profile;
    ViewComposition composition;
    InteractionProfile interactions;
    /// Empty when no leaf view declares a mark.
    std::optional<ChartTypeSet> chart_types;
    ComplexityLevel level = ComplexityLevel::Simple;
    Digest fingerprint{};
};

SpecRecord make_record(SpecDocument doc, VocabularyFilter filter = VocabularyFilter::On,
                       const DataTable* data = nullptr);

/// Distance form: keys sorted, scalars blanked to "", embedded data removed,
/// single line with no whitespace.
std::string canonicalize_spec(const SpecDocument& doc);

/// Dedup form: keys sorted, values retained, single line.
std::string dedup_form(const SpecDocument& doc);

Digest sha256(std::string_view text);

/// SHA-256 of the dedup form.
Digest spec_fingerprint(const SpecDocument& doc);

/// Indices of the records that survive hash deduplication (first occurrence wins).
std::vector<std::size_t> dedup_survivors(const std::vector<SpecRecord>& records);

inline constexpr std::size_t kDefaultEditDistanceCap = 100'000;

/// Character-level Levenshtein distance (two-row dynamic programme).
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Levenshtein distance between the canonical forms. Throws SizeLimitError
/// when either canonical string is longer than `cap`.
std::size_t pairwise_edit_distance(const SpecDocument& a, const SpecDocument& b,
                                   std::size_t cap = kDefaultEditDistanceCap);

struct SummaryOptions {
    /// All pairs are compared when the corpus has at most this many records.
    std::size_t full_pair_threshold = 500;
    /// Pairs drawn when the corpus is larger than the threshold.
    std::size_t sample_pairs = 10'000;
    std::uint64_t seed = 0;
    std::size_t edit_distance_cap = kDefaultEditDistanceCap;
    unsigned threads = 0;  // 0 = hardware concurrency
};

struct CorpusSummary {
    std::size_t spec_count = 0;
    std::size_t total_keys = 0;
    double avg_keys = 0;
    std::map<ComplexityLevel, std::size_t> level_histogram;
    double avg_depth = 0;
    double avg_branching = 0;
    std::size_t unique_key_total = 0;
    /// Empty when the corpus has no pairs.
    std::optional<double> avg_pairwise_edit_distance;
    std::size_t pairs_evaluated = 0;
    bool pairs_sampled = false;
    std::size_t composite_count = 0;
    std::size_t interaction_count = 0;
    std::size_t chart_type_count = 0;
};

CorpusSummary summarize_corpus(const std::vector<SpecRecord>& records, const SummaryOptions& opts = {});

/// Two-column (metric, value) rendering of a summary.
std::vector<std::pair<std::string, std::string>> summary_rows(const CorpusSummary& s);
std::string summary_csv(const CorpusSummary& s);
std::string summary_text(const CorpusSummary& s);

struct StrataCriteria {
    bool level = true;
    bool composite = true;
    bool interaction = true;
};

/// Stratum key of a record under the given criteria, e.g. "Complex|composite|-".
std::string stratum_key(const SpecRecord& r, const StrataCriteria& c);

/// Largest-remainder proportional allocation of `n` draws over strata sizes.
/// Ties in the remainder go to the earlier stratum.
std::vector<std::size_t> allocate_proportional(const std::vector<std::size_t>& sizes, std::size_t n);

/// Proportional stratified sample without replacement. Returns indices into
/// `records`, in ascending order. Throws SampleSizeError if n > |records|.
std::vector<std::size_t> stratified_sample(const std::vector<SpecRecord>& records, std::size_t n,
                                           const StrataCriteria& criteria, std::uint64_t seed);

/// One line of a corpus manifest (newline-delimited JSON).
struct ManifestEntry {
    std::string id;
    std::string path;
    std::string license_tag;
};

/// Relative paths are resolved against the manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::string& manifest_path);

}  // namespace chartnl
