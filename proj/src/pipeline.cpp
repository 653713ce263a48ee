#include "chartnl/pipeline.hpp"

#include "chartnl/rng.hpp"
#include "chartnl/text_util.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace chartnl {

namespace {

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    if (workers == 0) workers = 1;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
}

std::size_t find_word_icase(std::string_view hay, std::string_view needle) {
    if (needle.empty()) return std::string_view::npos;
    for (std::size_t pos = find_icase(hay, needle); pos != std::string_view::npos;
         pos = find_icase(hay, needle, pos + 1)) {
        const bool left = pos == 0 || !is_word_char(static_cast<unsigned char>(hay[pos - 1]));
        const std::size_t end = pos + needle.size();
        const bool right = end >= hay.size() || !is_word_char(static_cast<unsigned char>(hay[end]));
        if (left && right) return pos;
    }
    return std::string_view::npos;
}

bool mentions_any(std::string_view text, std::initializer_list<std::string_view> words) {
    for (auto w : words)
        if (find_word_icase(text, w) != std::string_view::npos) return true;
    return false;
}

std::optional<AggregateOp> detect_op(std::string_view q) {
    if (mentions_any(q, {"difference", "range", "gap", "how much more", "how much higher", "how much lower"}))
        return AggregateOp::Difference;
    if (mentions_any(q, {"average", "mean"})) return AggregateOp::Mean;
    if (mentions_any(q, {"how many", "number of", "count"})) return AggregateOp::Count;
    if (mentions_any(q, {"total", "sum", "combined"})) return AggregateOp::Sum;
    if (mentions_any(q, {"maximum", "highest", "max", "largest", "greatest", "peak"})) return AggregateOp::Max;
    if (mentions_any(q, {"minimum", "lowest", "min", "smallest", "least"})) return AggregateOp::Min;
    return std::nullopt;
}

// Position and length of the longest name/title of `f` found in `q`.
std::optional<std::pair<std::size_t, std::size_t>> field_mention(std::string_view q, const FieldDescriptor& f) {
    std::optional<std::pair<std::size_t, std::size_t>> best;
    auto consider = [&](std::string_view name) {
        auto pos = find_word_icase(q, name);
        if (pos != std::string_view::npos && (!best || name.size() > best->second)) best = {pos, name.size()};
    };
    consider(f.field);
    if (f.title) consider(*f.title);
    return best;
}

std::string number_text(double v) {
    if (std::isfinite(v) && std::fabs(v) < 1e15 && v == std::floor(v)) {
        std::ostringstream ss;
        ss << static_cast<long long>(v);
        return ss.str();
    }
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

}  // namespace

std::optional<AggregationQuery> derive_query(std::string_view question, const std::vector<FieldDescriptor>& fields,
                                             const DataTable& table) {
    if (mentions_any(question, {"which", "who", "why", "where", "when"})) return std::nullopt;
    auto op = detect_op(question);
    if (!op) return std::nullopt;

    const FieldDescriptor* target = nullptr;
    std::size_t target_len = 0;
    const FieldDescriptor* group = nullptr;
    for (const auto& f : fields) {
        auto col = table.column_index(f.field);
        if (!col) continue;
        auto mention = field_mention(question, f);
        if (!mention) continue;
        const bool quantitative = table.columns()[*col].inferred_type == FieldType::Quantitative;
        if (quantitative && mention->second > target_len) {
            target = &f;
            target_len = mention->second;
        }
        if (!quantitative && !group) {
            std::string_view before = question.substr(0, mention->first);
            while (!before.empty() && before.back() == ' ') before.remove_suffix(1);
            for (std::string_view kw : {"per", "each", "by", "every"})
                if (before.size() >= kw.size() && to_lower_ascii(before.substr(before.size() - kw.size())) == kw)
                    group = &f;
        }
    }

    AggregationQuery q;
    q.op = *op;
    if (target) {
        q.field = target->field;
    } else if (*op == AggregateOp::Count && table.columns().size() > 0) {
        q.field = table.columns().front().name;
    } else {
        return std::nullopt;
    }
    if (group) q.group_by = group->field;

    std::size_t best_len = 0;
    for (const auto& col : table.columns()) {
        if (col.inferred_type == FieldType::Quantitative) continue;
        if (group && col.name == group->field) continue;
        auto idx = table.column_index(col.name);
        for (const auto& value : table.unique_values(*idx)) {
            if (value.size() < 2 || value.size() <= best_len) continue;
            if (find_word_icase(question, value) != std::string_view::npos) {
                q.filter = std::make_pair(col.name, value);
                best_len = value.size();
            }
        }
    }
    return q;
}

std::string format_answer(const AggregationResult& r) {
    if (r.value) return number_text(*r.value);
    std::vector<std::string> parts;
    for (const auto& [key, v] : r.groups) parts.push_back(key + ": " + number_text(v));
    return join(parts, "; ");
}

std::string config_digest(const GenerationOptions& opts) {
    nlohmann::ordered_json j;
    j["model"] = opts.model.model_name;
    j["temperature"] = opts.model.temperature;
    std::vector<std::string> tasks;
    for (auto t : opts.tasks) tasks.emplace_back(to_string(t));
    j["tasks"] = tasks;
    j["include_open_ended"] = opts.include_open_ended;
    j["collapse_utterances"] = opts.collapse_utterances;
    j["tool_version"] = kToolVersion;
    return to_hex(sha256(j.dump()));
}

namespace {

class ChartRun {
public:
    ChartRun(const ChartInput& chart, const GenerationOptions& opts, Gateway& gateway)
        : chart_(chart), opts_(opts), gateway_(gateway) {
        created_at_ = opts.created_at.empty() ? utc_now() : opts.created_at;
    }

    std::vector<NLRecord> run() {
        stage(NLType::CaptionL1, [&] { caption_l1(); });
        stage(NLType::CaptionL2, [&] { caption_l2(); });
        stage(NLType::Utterance, [&] { utterances(); });
        stage(NLType::Question, [&] { questions(); });
        return std::move(out_);
    }

private:
    template <typename Fn>
    void stage(NLType t, Fn&& fn) {
        if (!opts_.tasks.contains(t)) return;
        const std::string name(to_string(t));
        try {
            if (!prepared_) prepare();
            fn();
        } catch (Error& e) {
            e.add_context("chart=" + chart_.chart_id);
            e.add_context("stage=" + name);
            if (out_.empty()) throw;
            throw PartialResultError(std::move(out_), chart_.chart_id, name, std::current_exception(), e.describe());
        }
    }

    void prepare() {
        minified_ = minify_spec(chart_.spec.doc);
        fields_ = extract_field_descriptors(chart_.spec.doc, chart_.table);
        ftt_ = fields_.ftt.empty() ? std::string("(no encoded fields)") : fields_.ftt;
        prepared_ = true;
    }

    std::string ask(const RenderedPrompt& p) {
        Completion c = gateway_.complete(p, opts_.model);
        model_ = c.model.empty() ? opts_.model.model_name : c.model;
        return c.text;
    }

    NLRecord& emit(NLType t, std::optional<NLSubtype> sub, std::string text, std::string id_suffix = {}) {
        NLRecord r;
        r.id = chart_.chart_id + "/" + std::string(to_string(t));
        if (!id_suffix.empty()) r.id += "/" + id_suffix;
        if (sub) r.id += "/" + std::string(to_string(*sub));
        r.chart_id = chart_.chart_id;
        r.nl_type = t;
        r.subtype = sub;
        r.text = std::move(text);
        r.model_name = model_.empty() ? opts_.model.model_name : model_;
        r.created_at = created_at_;
        if (trim(r.text).empty()) throw EmptyStepError(r.id + " produced empty text");
        out_.push_back(std::move(r));
        return out_.back();
    }

    void caption_l1() {
        const std::string reply = ask(build_l1_prompt(minified_, ftt_));
        StepParse s = parse_steps(reply, step_labels(3));
        NLRecord& r = emit(NLType::CaptionL1, std::nullopt, s.body("Step 3."));
        r.metadata["composite_views"] = s.body("Step 1.");
        r.metadata["chart_semantics"] = s.body("Step 2.");
    }

    void caption_l2() {
        if (!chart_.table) throw MissingStageInputError("level 2 captions need the chart's data table");
        const std::string feature_reply = ask(build_l2_prompt(L2Stage::Feature, minified_, ftt_));
        StepParse s = parse_steps(feature_reply, step_labels(3));
        const auto questions = split_list(s.body("Step 3."));
        if (questions.empty()) throw EmptyStepError("Step 3.");

        std::string info;
        nlohmann::ordered_json answers = nlohmann::ordered_json::array();
        for (const auto& q : questions) {
            std::string answer;
            std::string source = "computed";
            if (auto query = derive_query(q, fields_.fields, *chart_.table)) {
                try {
                    answer = format_answer(evaluate_aggregation(*chart_.table, *query));
                } catch (const TypeError&) {
                } catch (const EmptyInputError&) {
                }
            }
            if (answer.empty()) {
                source = "model";
                answer = std::string(trim(ask(build_l2_prompt(L2Stage::Answer, minified_, ftt_, q))));
            }
            if (!info.empty()) info += "\n";
            info += "Question: " + q + "\nAnswer: " + answer;
            answers.push_back({{"question", q}, {"answer", answer}, {"source", source}});
        }
        const std::string caption_reply = ask(build_l2_prompt(L2Stage::Caption, minified_, ftt_, info));
        NLRecord& r = emit(NLType::CaptionL2, std::nullopt, text_after_label(caption_reply, "Level 2 NL Description:"));
        r.metadata["features"] = s.body("Step 1.");
        r.metadata["operations"] = s.body("Step 2.");
        r.metadata["answers"] = answers.dump();
    }

    void utterances() {
        const std::string inst_reply = ask(build_utterance_prompt(UtteranceStage::Instructions, minified_, ftt_));
        StepParse inst = parse_steps(inst_reply, step_labels(3));
        const std::string instructions = inst.body("Step 3.");
        const std::string reply =
            ask(build_utterance_prompt(UtteranceStage::Combine, minified_, ftt_, instructions));

        std::vector<std::string> blocks;
        std::string current;
        bool seen_view = false;
        for (auto line : split_lines(reply)) {
            if (trim(line).starts_with("View #")) {
                if (seen_view || !trim(current).empty()) blocks.push_back(current);
                current.clear();
                seen_view = true;
                continue;
            }
            current += std::string(line) + "\n";
        }
        blocks.push_back(current);
        std::erase_if(blocks, [](const std::string& b) { return trim(b).empty(); });
        if (blocks.empty()) throw MissingStepError("Step 3.");
        if (opts_.collapse_utterances) blocks.resize(1);

        for (std::size_t v = 0; v < blocks.size(); ++v) {
            StepParse s = parse_steps(blocks[v], step_labels(5));
            const std::string suffix = opts_.collapse_utterances ? std::string() : "v" + std::to_string(v + 1);
            const std::pair<const char*, NLSubtype> picks[] = {
                {"Step 3.", NLSubtype::Command}, {"Step 4.", NLSubtype::Query}, {"Step 5.", NLSubtype::UtteranceQuestion}};
            for (const auto& [label, sub] : picks) {
                NLRecord& r = emit(NLType::Utterance, sub, s.body(label), suffix);
                r.metadata["primary_information"] = s.body("Step 1.");
            }
        }
    }

    void questions() {
        const std::string reply = ask(build_question_prompt(minified_));
        StepParse s = parse_steps(reply, step_labels(11));
        const std::pair<const char*, NLSubtype> picks[] = {
            {"Step 4.", NLSubtype::NonvisualLookup},
            {"Step 6.", NLSubtype::VisualLookup},
            {"Step 8.", NLSubtype::NonvisualCompositional},
            {"Step 10.", NLSubtype::VisualCompositional},
        };
        for (const auto& [label, sub] : picks) {
            NLRecord& r = emit(NLType::Question, sub, s.body(label));
            r.metadata["decision"] = s.body("Step 1.");
            r.metadata["conclusion"] = s.body("Step 2.");
        }
        if (opts_.include_open_ended) {
            NLRecord& r = emit(NLType::Question, NLSubtype::OpenEnded, s.body("Step 11."));
            r.metadata["decision"] = s.body("Step 1.");
            r.metadata["conclusion"] = s.body("Step 2.");
        }
    }

    const ChartInput& chart_;
    const GenerationOptions& opts_;
    Gateway& gateway_;
    std::string created_at_;
    std::string model_;
    bool prepared_ = false;
    std::string minified_;
    FieldInfo fields_;
    std::string ftt_;
    std::vector<NLRecord> out_;
};

std::string stage_of(const Error& e) {
    for (const auto& c : e.context())
        if (c.rfind("stage=", 0) == 0) return c.substr(6);
    return {};
}

}  // namespace

std::vector<NLRecord> run_generation(const ChartInput& chart, const GenerationOptions& opts, Gateway& gateway) {
    return ChartRun(chart, opts, gateway).run();
}

BatchResult run_generation_batch(const std::vector<ChartInput>& charts, const GenerationOptions& opts,
                                 Gateway& gateway, unsigned workers) {
    std::vector<std::vector<NLRecord>> per_chart(charts.size());
    std::vector<std::optional<Failure>> failed(charts.size());
    parallel_for(charts.size(), workers, [&](std::size_t i) {
        try {
            per_chart[i] = run_generation(charts[i], opts, gateway);
        } catch (const PartialResultError& e) {
            per_chart[i] = e.completed();
            failed[i] = Failure{charts[i].chart_id, e.stage(), e.describe()};
        } catch (const Error& e) {
            failed[i] = Failure{charts[i].chart_id, stage_of(e), e.describe()};
        }
    });
    BatchResult out;
    for (std::size_t i = 0; i < charts.size(); ++i) {
        for (auto& r : per_chart[i]) out.records.push_back(std::move(r));
        if (failed[i]) out.failures.push_back(std::move(*failed[i]));
    }
    return out;
}

BatchResult paraphrase_dataset(const std::vector<NLRecord>& records, ParaphraseMode mode, Gateway& gateway,
                               const GenerationOptions& opts, unsigned workers) {
    for (const auto& r : records)
        if (r.provenance.paraphrased)
            throw ProvenanceError("record " + r.id + " is already a paraphrase; paraphrase generated records only");
    const auto variants = enumerate_paraphrase_variants(mode);
    const std::string created_at = opts.created_at.empty() ? utc_now() : opts.created_at;
    const std::size_t n = records.size() * variants.size();
    std::vector<std::optional<NLRecord>> produced(n);
    std::vector<std::optional<Failure>> failed(n);

    parallel_for(n, workers, [&](std::size_t i) {
        const NLRecord& src = records[i / variants.size()];
        const ParaphraseSpec& spec = variants[i % variants.size()];
        try {
            Completion c = gateway.complete(build_paraphrase_prompt(src.text, spec), opts.model);
            std::string text(trim(c.text));
            if (text.empty()) throw EmptyStepError("empty paraphrase");
            NLRecord r;
            r.id = src.id + "#" + describe(spec);
            r.chart_id = src.chart_id;
            r.nl_type = src.nl_type;
            r.subtype = src.subtype;
            r.text = std::move(text);
            r.provenance = Provenance{true, spec.axes, spec.scores, src.id};
            r.model_name = c.model.empty() ? opts.model.model_name : c.model;
            r.created_at = created_at;
            produced[i] = std::move(r);
        } catch (const Error& e) {
            failed[i] = Failure{src.id, "paraphrase " + describe(spec), e.describe()};
        }
    });

    BatchResult out;
    for (std::size_t i = 0; i < n; ++i) {
        if (produced[i]) out.records.push_back(std::move(*produced[i]));
        if (failed[i]) out.failures.push_back(std::move(*failed[i]));
    }
    return out;
}

void check_provenance(const std::vector<NLRecord>& paraphrased, const std::vector<NLRecord>& sources) {
    std::set<std::string> ids;
    for (const auto& s : sources)
        if (!s.provenance.paraphrased) ids.insert(s.id);
    for (const auto& r : paraphrased)
        if (r.provenance.paraphrased && !ids.contains(r.provenance.source_record_id))
            throw ProvenanceError("record " + r.id + " names unknown source " + r.provenance.source_record_id);
}

std::vector<std::pair<std::string, std::size_t>> chart_histogram(const std::vector<NLRecord>& records) {
    std::vector<std::pair<std::string, std::size_t>> out;
    std::map<std::string, std::size_t> index;
    for (const auto& r : records) {
        auto [it, inserted] = index.emplace(r.chart_id, out.size());
        if (inserted) out.emplace_back(r.chart_id, 0);
        ++out[it->second].second;
    }
    return out;
}

std::vector<std::vector<NLRecord>> sample_matched_sets(const std::vector<NLRecord>& pool,
                                                       const std::vector<std::pair<std::string, std::size_t>>& reference,
                                                       std::size_t n_sets, std::uint64_t seed) {
    std::map<std::string, std::vector<std::size_t>> by_chart;
    for (std::size_t i = 0; i < pool.size(); ++i) by_chart[pool[i].chart_id].push_back(i);
    for (const auto& [chart, count] : reference) {
        const std::size_t available = by_chart.contains(chart) ? by_chart[chart].size() : 0;
        if (count > available)
            throw PoolExhaustedError("chart " + chart + " needs " + std::to_string(count) + " records but the pool holds " +
                                     std::to_string(available));
    }
    std::vector<std::vector<NLRecord>> sets(n_sets);
    for (std::size_t s = 0; s < n_sets; ++s) {
        const std::uint64_t set_seed = derive_seed(seed, s);
        for (std::size_t c = 0; c < reference.size(); ++c) {
            const auto& [chart, count] = reference[c];
            if (count == 0) continue;
            const auto& candidates = by_chart[chart];
            Rng rng(derive_seed(set_seed, c));
            auto picks = rng.sample_indices(candidates.size(), count);
            std::sort(picks.begin(), picks.end());
            for (auto p : picks) sets[s].push_back(pool[candidates[p]]);
        }
    }
    return sets;
}

}  // namespace chartnl
