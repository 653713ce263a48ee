#pragma once

#include "chartnl/corpus.hpp"
#include "chartnl/errors.hpp"
#include "chartnl/fielddata.hpp"
#include "chartnl/llm_gateway.hpp"
#include "chartnl/preprocess.hpp"
#include "chartnl/promptforge.hpp"

#include <exception>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace chartnl {

enum class NLType { CaptionL1, CaptionL2, Utterance, Question };

enum class NLSubtype {
    Command,
    Query,
    UtteranceQuestion,
    NonvisualLookup,
    NonvisualCompositional,
    VisualLookup,
    VisualCompositional,
    OpenEnded,
};

std::string_view to_string(NLType t);
std::string_view to_string(NLSubtype s);
NLType nl_type_from_string(std::string_view s);
/// The utterance and question subtypes share the name "question"; the type
/// disambiguates.
NLSubtype nl_subtype_from_string(std::string_view s, NLType type);
bool subtype_allowed(NLType type, NLSubtype sub);

struct Provenance {
    bool paraphrased = false;
    std::vector<AxisName> axes;
    std::vector<int> scores;
    std::string source_record_id;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct NLRecord {
    std::string id;
    std::string chart_id;
    NLType nl_type = NLType::CaptionL1;
    std::optional<NLSubtype> subtype;
    std::string text;
    Provenance provenance;
    std::string model_name;
    std::string created_at;
    /// Intermediate answers kept alongside the record (e.g. L1 chart semantics).
    std::map<std::string, std::string> metadata;
    /// Unrecognised fields read from a file, as raw JSON, written back unchanged.
    std::map<std::string, std::string> extra;

    friend bool operator==(const NLRecord&, const NLRecord&) = default;
};

/// Throws SchemaError when the subtype does not fit the type.
void validate(const NLRecord& r);

struct DatasetHeader {
    std::string corpus_id;
    std::string tool_version;
    std::string config_digest;

    friend bool operator==(const DatasetHeader&, const DatasetHeader&) = default;
};

struct DatasetFile {
    DatasetHeader header;
    std::vector<NLRecord> records;

    friend bool operator==(const DatasetFile&, const DatasetFile&) = default;
};

inline constexpr const char* kToolVersion = "0.1.0";

std::string record_to_json(const NLRecord& r);
/// Unknown fields land in `extra`, with a note appended to `warnings`.
NLRecord record_from_json(std::string_view line, std::vector<std::string>* warnings = nullptr);

/// JSON lines; the first line is the header object, marked by `"__header__": true`.
std::string dataset_to_jsonl(const DatasetFile& d);
/// Throws SchemaError on malformed lines, invalid records and duplicate ids.
DatasetFile dataset_from_jsonl(std::string_view text, std::vector<std::string>* warnings = nullptr);

void write_dataset(const std::string& path, const DatasetFile& d);
DatasetFile read_dataset(const std::string& path, std::vector<std::string>* warnings = nullptr);

struct GenerationOptions {
    std::set<NLType> tasks = {NLType::CaptionL1, NLType::CaptionL2, NLType::Utterance, NLType::Question};
    bool include_open_ended = true;
    /// One utterance triple per chart; otherwise one per view block in the reply.
    bool collapse_utterances = true;
    ModelConfig model;
    /// Timestamp stamped on every record; empty means the current UTC time.
    std::string created_at;
};

/// Digest of the settings that determine generated output.
std::string config_digest(const GenerationOptions& opts);

struct ChartInput {
    std::string chart_id;
    ExternalizedSpec spec;
    /// Needed for level 2 captions; may be null otherwise.
    const DataTable* table = nullptr;
};

/// Builds an aggregation from a question that names an operation and a field
/// (by name or title). A categorical value mentioned in the question becomes
/// a filter; "per"/"each"/"by" followed by a categorical field becomes a
/// grouping. Empty when no operation or no quantitative field is recognised.
std::optional<AggregationQuery> derive_query(std::string_view question, const std::vector<FieldDescriptor>& fields,
                                             const DataTable& table);

/// Text form of an aggregation result.
std::string format_answer(const AggregationResult& r);

/// Records for one chart. Errors are annotated with `chart=<id>` and
/// `stage=<stage>`; when earlier stages already produced records the error is
/// wrapped in a PartialResultError carrying them.
std::vector<NLRecord> run_generation(const ChartInput& chart, const GenerationOptions& opts, Gateway& gateway);

class PartialResultError : public Error {
public:
    PartialResultError(std::vector<NLRecord> completed, std::string chart_id, std::string stage,
                       std::exception_ptr cause, const std::string& message)
        : Error("PartialResultError", message),
          completed_(std::move(completed)),
          chart_id_(std::move(chart_id)),
          stage_(std::move(stage)),
          cause_(std::move(cause)) {}

    const std::vector<NLRecord>& completed() const { return completed_; }
    const std::string& chart_id() const { return chart_id_; }
    const std::string& stage() const { return stage_; }
    std::exception_ptr cause() const { return cause_; }

private:
    std::vector<NLRecord> completed_;
    std::string chart_id_;
    std::string stage_;
    std::exception_ptr cause_;
};

struct Failure {
    /// Chart id, or source record id for paraphrases.
    std::string item;
    std::string stage;
    std::string message;
};

struct BatchResult {
    std::vector<NLRecord> records;
    std::vector<Failure> failures;
};

/// Runs charts on up to `workers` threads. Output order follows input order;
/// completed records of failed charts are kept.
BatchResult run_generation_batch(const std::vector<ChartInput>& charts, const GenerationOptions& opts,
                                 Gateway& gateway, unsigned workers = HttpGateway::kDefaultMaxInFlight);

/// One paraphrased record per variant of `mode` for each input record.
/// Throws ProvenanceError if an input is already paraphrased; variant failures
/// are reported individually.
BatchResult paraphrase_dataset(const std::vector<NLRecord>& records, ParaphraseMode mode, Gateway& gateway,
                               const GenerationOptions& opts, unsigned workers = HttpGateway::kDefaultMaxInFlight);

/// Paraphrased records must name a source present in `sources` (ProvenanceError).
void check_provenance(const std::vector<NLRecord>& paraphrased, const std::vector<NLRecord>& sources);

/// Records per chart in first-seen order.
std::vector<std::pair<std::string, std::size_t>> chart_histogram(const std::vector<NLRecord>& records);

/// `n_sets` draws from `pool`, each matching `reference` exactly. Draws are
/// uniform without replacement per chart. Throws PoolExhaustedError.
std::vector<std::vector<NLRecord>> sample_matched_sets(const std::vector<NLRecord>& pool,
                                                       const std::vector<std::pair<std::string, std::size_t>>& reference,
                                                       std::size_t n_sets, std::uint64_t seed);

}  // namespace chartnl
