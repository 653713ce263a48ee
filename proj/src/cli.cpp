#include "chartnl/cli.hpp"

#include "chartnl/corpus.hpp"
#include "chartnl/diversity.hpp"
#include "chartnl/errors.hpp"
#include "chartnl/lexical.hpp"
#include "chartnl/pipeline.hpp"
#include "chartnl/preprocess.hpp"
#include "chartnl/qualcoding.hpp"
#include "chartnl/text_util.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

namespace chartnl {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

RunConfig parse_run_config(std::string_view json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ConfigError("config file must hold a JSON object");
    RunConfig c;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "endpoint_url") c.model.endpoint_url = value.get<std::string>();
            else if (key == "model_name") c.model.model_name = value.get<std::string>();
            else if (key == "temperature") c.model.temperature = value.get<double>();
            else if (key == "max_retries") c.model.max_retries = value.get<int>();
            else if (key == "timeout_seconds") c.model.timeout_seconds = value.get<double>();
            else if (key == "api_key_env") c.model.api_key_env = value.get<std::string>();
            else if (key == "backoff_base_seconds") c.model.backoff_base_seconds = value.get<double>();
            else if (key == "backoff_factor") c.model.backoff_factor = value.get<double>();
            else if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "output_dir") c.output_dir = value.get<std::string>();
            else if (key == "workers") c.workers = value.get<unsigned>();
            else if (key == "span_percentile") c.span_percentile = value.get<double>();
            else if (key == "grid") c.grid = value.get<int>();
            else if (key == "k") c.k = value.get<int>();
            else if (key == "api_key") throw ConfigError("API keys are read from the environment only");
            else throw ConfigError("unknown config key \"" + key + "\"");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    validate(c.model);
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_run_config(ss.str());
    } catch (Error& e) {
        e.add_context("config=" + path);
        throw;
    }
}

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    auto parent = fs::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty()) fs::create_directories(parent, ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
}

std::vector<std::string> string_list(const std::set<std::string>& s) { return {s.begin(), s.end()}; }

ojson analysis_json(const SpecRecord& r) {
    ojson j;
    j["id"] = r.doc.id;
    j["schema_version"] = r.doc.schema_version ? ojson(*r.doc.schema_version) : ojson(nullptr);
    j["key_count"] = r.profile.key_count;
    j["max_depth"] = r.profile.max_depth;
    j["branching_factor"] = r.profile.branching_factor();
    j["unique_keys"] = string_list(r.profile.unique_keys);
    j["excluded_key_count"] = r.profile.excluded_key_count;
    j["complexity"] = std::string(to_string(r.level));
    j["composite_type"] = std::string(to_string(r.composition.composite_type));
    j["view_count"] = r.composition.view_count ? ojson(*r.composition.view_count) : ojson(nullptr);
    j["leaf_plot_count"] = r.composition.leaf_plot_count ? ojson(*r.composition.leaf_plot_count) : ojson(nullptr);
    ojson kinds = ojson::array();
    for (auto k : r.interactions.kinds) kinds.push_back(std::string(to_string(k)));
    j["interactions"] = kinds;
    if (r.chart_types) {
        ojson types = ojson::array();
        for (auto t : *r.chart_types) types.push_back(std::string(to_string(t)));
        j["chart_types"] = types;
    } else {
        j["chart_types"] = nullptr;
    }
    j["fingerprint"] = to_hex(r.fingerprint);
    return j;
}

std::vector<SpecRecord> load_manifest_records(const std::string& manifest, VocabularyFilter filter,
                                              std::vector<ManifestEntry>* entries_out = nullptr) {
    auto entries = read_manifest(manifest);
    std::vector<SpecRecord> records;
    for (const auto& e : entries) {
        try {
            records.push_back(make_record(load_spec(e.path, e.id), filter));
        } catch (Error& ex) {
            ex.add_context("spec=" + e.id);
            throw;
        }
    }
    if (entries_out) *entries_out = std::move(entries);
    return records;
}

std::set<NLType> parse_tasks(const std::string& list) {
    std::set<NLType> tasks;
    for (const auto& raw : split_list(list, ',')) {
        const std::string t = to_lower_ascii(raw);
        if (t == "l1" || t == "caption_l1") tasks.insert(NLType::CaptionL1);
        else if (t == "l2" || t == "caption_l2") tasks.insert(NLType::CaptionL2);
        else if (t == "utterance" || t == "utterances") tasks.insert(NLType::Utterance);
        else if (t == "question" || t == "questions") tasks.insert(NLType::Question);
        else if (t == "all") tasks = {NLType::CaptionL1, NLType::CaptionL2, NLType::Utterance, NLType::Question};
        else throw UsageError("unknown task \"" + raw + "\"");
    }
    if (tasks.empty()) throw UsageError("no tasks selected");
    return tasks;
}

std::unique_ptr<Gateway> make_gateway(bool mock, bool live, const RunConfig& cfg) {
    if (mock && live) throw UsageError("--mock and --live are mutually exclusive");
    if (live) return std::make_unique<HttpGateway>(cfg.workers);
    return std::make_unique<MockGateway>();
}

// Local CSV referenced by a data url that was left in place.
std::optional<std::string> local_csv_url(const SpecNode& node) {
    if (node.is_array()) {
        for (const auto& c : node.array())
            if (auto u = local_csv_url(c)) return u;
        return std::nullopt;
    }
    if (!node.is_object()) return std::nullopt;
    if (const SpecNode* data = node.find("data"); data && data->is_object())
        if (const SpecNode* url = data->find("url"); url && url->is_string()) {
            std::string u(url->as_string());
            if (u.ends_with(".csv") && u.find("://") == std::string::npos) return u;
        }
    for (const auto& m : node.object())
        if (!is_embedded_data_key(m.key))
            if (auto u = local_csv_url(m.value)) return u;
    return std::nullopt;
}

std::vector<std::string> dataset_texts(const std::string& path) {
    if (path.ends_with(".jsonl")) {
        std::vector<std::string> out;
        for (const auto& r : read_dataset(path).records) out.push_back(r.text);
        return out;
    }
    std::vector<std::string> out;
    for (auto line : split_lines(read_text(path)))
        if (!trim(line).empty()) out.emplace_back(trim(line));
    return out;
}

// Writes `text` followed by exactly one line break.
void emit(std::ostream& out, const std::string& text) {
    out << text;
    if (text.empty() || text.back() != '\n') out << '\n';
}

struct Cli {
    std::ostream& out;
    std::ostream& err;
    RunConfig cfg;

    Cli(std::ostream& o, std::ostream& e) : out(o), err(e) {}

    // global flags
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> endpoint, model, api_key_env, out_dir;
    std::optional<double> temperature, timeout;
    std::optional<int> max_retries;
    std::optional<unsigned> workers;

    // subcommand arguments
    std::vector<std::string> inputs;
    std::string manifest, dataset, pool, reference, out_path, tasks = "all", mode = "one", strata = "level,composite,interaction";
    std::string vectors_path, texts_path, provider = "hash", provider_model = "text-embedding-3-small", replies_path;
    std::size_t n = 0, sets = 5, dim = 64, top = 5;
    bool no_vocab_filter = false, vocab_filter = false, csv = false, dedup = false, mock = false, live = false, no_open_ended = false,
         per_view = false, fetch_remote = false, cluster = false;
    std::optional<double> span_percentile, eps;
    std::optional<int> grid, k;
    int min_pts = 4, reduce_dim = 5;

    void finalize_config() {
        if (!config_path.empty()) cfg = load_run_config(config_path);
        if (seed) cfg.seed = *seed;
        if (endpoint) cfg.model.endpoint_url = *endpoint;
        if (model) cfg.model.model_name = *model;
        if (api_key_env) cfg.model.api_key_env = *api_key_env;
        if (out_dir) cfg.output_dir = *out_dir;
        if (temperature) cfg.model.temperature = *temperature;
        if (timeout) cfg.model.timeout_seconds = *timeout;
        if (max_retries) cfg.model.max_retries = *max_retries;
        if (workers) cfg.workers = *workers;
        if (span_percentile) cfg.span_percentile = *span_percentile;
        if (grid) cfg.grid = *grid;
        if (k) cfg.k = *k;
        validate(cfg.model);
    }

    GenerationOptions generation_options() const {
        GenerationOptions g;
        g.model = cfg.model;
        g.include_open_ended = !no_open_ended;
        g.collapse_utterances = !per_view;
        if (!live) g.created_at = kMockTimestamp;
        return g;
    }

    int analyze() {
        const VocabularyFilter filter = vocab_filter ? VocabularyFilter::On : VocabularyFilter::Off;
        for (const auto& path : inputs) {
            try {
                emit(out, analysis_json(make_record(load_spec(path), filter)).dump(2));
            } catch (Error& e) {
                e.add_context("file=" + path);
                throw;
            }
        }
        return 0;
    }

    int summarize() {
        auto records = load_manifest_records(manifest, no_vocab_filter ? VocabularyFilter::Off : VocabularyFilter::On);
        if (dedup) {
            std::vector<SpecRecord> kept;
            for (auto i : dedup_survivors(records)) kept.push_back(records[i]);
            if (kept.size() != records.size())
                err << "dropped " << records.size() - kept.size() << " duplicate specification(s)\n";
            records = std::move(kept);
        }
        SummaryOptions opts;
        opts.seed = cfg.seed;
        const CorpusSummary s = summarize_corpus(records, opts);
        emit(out, (csv ? summary_csv(s) : summary_text(s)));
        return 0;
    }

    int sample() {
        auto records = load_manifest_records(manifest, VocabularyFilter::On);
        StrataCriteria c{false, false, false};
        for (const auto& s : split_list(strata, ',')) {
            if (s == "level") c.level = true;
            else if (s == "composite") c.composite = true;
            else if (s == "interaction") c.interaction = true;
            else throw UsageError("unknown stratum criterion \"" + s + "\"");
        }
        for (auto i : stratified_sample(records, n, c, cfg.seed))
            out << records[i].doc.id << "\t" << stratum_key(records[i], c) << "\n";
        return 0;
    }

    int preprocess() {
        fs::create_directories(cfg.output_dir);
        for (const auto& path : inputs) {
            SpecDocument doc = load_spec(path);
            ExternalizeOptions opts;
            opts.source_dir = fs::path(path).parent_path().string();
            opts.fetch_remote = fetch_remote;
            if (fetch_remote) {
                opts.fetcher = [](const std::string&) -> std::optional<std::string> { return std::nullopt; };
            }
            ExternalizedSpec ext = externalize_data(doc, cfg.output_dir, opts);
            const std::string spec_out = (fs::path(cfg.output_dir) / (doc.id + ".vl.json")).string();
            write_text(spec_out, minify_spec(ext.doc) + "\n");
            out << doc.id << "\t" << spec_out << "\t" << ext.data_files.size() << " data file(s)\n";
            for (const auto& issue : ext.issues) err << "warning: " << doc.id << ": " << issue << "\n";
        }
        return 0;
    }

    int generate() {
        std::vector<ManifestEntry> entries;
        auto records = load_manifest_records(manifest, VocabularyFilter::On, &entries);
        GenerationOptions gopts = generation_options();
        gopts.tasks = parse_tasks(tasks);
        auto gateway = make_gateway(mock, live, cfg);

        const fs::path work = fs::path(cfg.output_dir) / "charts";
        std::vector<std::unique_ptr<DataTable>> tables;
        std::vector<ChartInput> charts;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const std::string& id = records[i].doc.id;
            const fs::path dir = work / id;
            fs::create_directories(dir);
            ExternalizeOptions xo;
            xo.source_dir = fs::path(entries[i].path).parent_path().string();
            ChartInput chart{id, externalize_data(records[i].doc, dir.string(), xo), nullptr};
            for (const auto& issue : chart.spec.issues) err << "warning: " << id << ": " << issue << "\n";
            std::optional<std::string> csv_path;
            if (!chart.spec.data_files.empty()) csv_path = chart.spec.data_files.front().path;
            else if (auto u = local_csv_url(chart.spec.doc.root)) csv_path = (fs::path(xo.source_dir) / *u).string();
            if (csv_path && fs::exists(*csv_path)) {
                tables.push_back(std::make_unique<DataTable>(read_csv_table(*csv_path)));
                chart.table = tables.back().get();
            }
            charts.push_back(std::move(chart));
        }
        BatchResult result = run_generation_batch(charts, gopts, *gateway, cfg.workers);
        DatasetFile file{{fs::path(manifest).stem().string(), kToolVersion, config_digest(gopts)},
                         std::move(result.records)};
        const std::string path = out_path.empty() ? (fs::path(cfg.output_dir) / "generated.jsonl").string() : out_path;
        write_dataset(path, file);
        out << "wrote " << file.records.size() << " record(s) to " << path << "\n";
        for (const auto& f : result.failures) err << "error: chart " << f.item << " (" << f.stage << "): " << f.message << "\n";
        return result.failures.empty() ? 0 : 1;
    }

    int paraphrase() {
        DatasetFile in = read_dataset(dataset);
        auto gateway = make_gateway(mock, live, cfg);
        GenerationOptions gopts = generation_options();
        BatchResult result = paraphrase_dataset(in.records, paraphrase_mode_from_string(mode), *gateway, gopts, cfg.workers);
        DatasetFile file{in.header, std::move(result.records)};
        const std::string path = out_path.empty() ? (fs::path(cfg.output_dir) / "paraphrased.jsonl").string() : out_path;
        write_dataset(path, file);
        out << "wrote " << file.records.size() << " record(s) to " << path << "\n";
        for (const auto& f : result.failures) err << "error: " << f.item << " (" << f.stage << "): " << f.message << "\n";
        return result.failures.empty() ? 0 : 1;
    }

    int match_sample() {
        DatasetFile pool_file = read_dataset(pool);
        DatasetFile ref_file = read_dataset(reference);
        auto result = sample_matched_sets(pool_file.records, chart_histogram(ref_file.records), sets, cfg.seed);
        const std::string prefix = out_path.empty() ? (fs::path(cfg.output_dir) / "matched").string() : out_path;
        for (std::size_t s = 0; s < result.size(); ++s) {
            const std::string path = prefix + "_" + std::to_string(s + 1) + ".jsonl";
            write_dataset(path, DatasetFile{pool_file.header, result[s]});
            out << path << "\t" << result[s].size() << " record(s)\n";
        }
        return 0;
    }

    std::unique_ptr<EmbeddingProvider> make_provider() {
        if (!vectors_path.empty()) {
            if (texts_path.empty()) throw UsageError("--vectors needs --texts");
            return std::make_unique<FileEmbedder>(vectors_path, texts_path);
        }
        if (provider == "hash") return std::make_unique<HashEmbedder>(dim, cfg.seed);
        if (provider == "remote") return std::make_unique<RemoteEmbedder>(cfg.model.endpoint_url, provider_model, cfg.model.api_key_env);
        throw UsageError("unknown provider \"" + provider + "\"");
    }

    int evaluate() {
        if (inputs.size() < 2) throw UsageError("evaluate needs at least one candidate and a reference");
        const std::vector<std::string> ref = dataset_texts(inputs.back());
        std::vector<DatasetSource> sources;
        for (std::size_t i = 0; i + 1 < inputs.size(); ++i) {
            std::string spec = inputs[i];
            DatasetSource src;
            auto eq = spec.find('=');
            src.name = eq == std::string::npos ? fs::path(spec).stem().string() : spec.substr(0, eq);
            for (const auto& part : split_list(eq == std::string::npos ? spec : spec.substr(eq + 1), ','))
                src.sets.push_back(dataset_texts(part));
            sources.push_back(std::move(src));
        }
        auto prov = make_provider();
        EvaluationOptions eo;
        eo.k = cfg.k;
        eo.within.span_percentile = cfg.span_percentile;
        eo.within.grid = cfg.grid;
        Report r = chartnl::evaluate(ref, sources, *prov, eo);
        emit(out, (csv ? report_csv(r) : report_text(r)));
        return 0;
    }

    int lex() {
        std::vector<LexiconStats> stats;
        std::vector<std::vector<std::string>> rows = {{"dataset", "texts", "total_tokens", "unique_tokens"}};
        for (const auto& path : inputs) {
            auto texts = dataset_texts(path);
            stats.push_back(lexicon_stats(normalize_tokens(texts)));
            rows.push_back({path, std::to_string(texts.size()), std::to_string(stats.back().total_tokens),
                            std::to_string(stats.back().unique_tokens)});
        }
        if (csv) {
            std::vector<CsvRow> body(rows.begin() + 1, rows.end());
            emit(out, write_csv(rows.front(), body));
        } else {
            emit(out, aligned_table(rows));
        }
        if (stats.size() == 2) {
            VocabDiff d = vocab_diff(stats[0], stats[1]);
            out << "only in first: " << d.only_in_a.size() << ", only in second: " << d.only_in_b.size()
                << ", shared: " << d.shared.size() << "\n";
        }
        return 0;
    }

    int codes() {
        DatasetFile in = read_dataset(dataset);
        auto gateway = make_gateway(mock, live, cfg);
        std::vector<Code> all;
        std::vector<CsvRow> rows;
        for (const auto& r : in.records) {
            Completion c = gateway->complete(build_coding_prompt(r.text), cfg.model);
            CodeExtraction ex = extract_codes(c.text, r.id);
            for (const auto& w : ex.warnings) err << "warning: " << w << "\n";
            for (const auto& code : ex.codes) rows.push_back({r.id, code.text});
            all.insert(all.end(), ex.codes.begin(), ex.codes.end());
        }
        if (!cluster) {
            emit(out, write_csv({"sentence_id", "code"}, rows));
            return 0;
        }
        auto prov = make_provider();
        ClusterOptions co;
        co.eps = eps;
        co.min_pts = min_pts;
        co.reduce_dim = reduce_dim;
        ClusterResult cr = cluster_codes(all, *prov, co);
        emit(out, (csv ? cluster_csv(cr) : cluster_summary(cr, top)));
        return 0;
    }
};

constexpr const char* kSynopsis =
    "usage: chartnl [global options] <command> [args]\n"
    "commands:\n"
    "  analyze <spec...>                      structural profile of each specification (JSON)\n"
    "  summarize <manifest>                   corpus summary table\n"
    "  sample <manifest> --n N --seed S       stratified sample of chart ids\n"
    "  preprocess <spec...> --out DIR         move embedded data to CSV and minify\n"
    "  generate <manifest> --tasks T --mock|--live\n"
    "  paraphrase <dataset> --mode one|two --mock|--live\n"
    "  match-sample <pool> <reference> --sets 5 --seed S\n"
    "  evaluate <candidate...> <reference> --provider hash|remote | --vectors F --texts F\n"
    "  lex <dataset...>                       token counts after normalisation\n"
    "  codes <dataset> [--cluster]            qualitative codes for each sentence\n"
    "run 'chartnl <command> --help' for the options of a command\n";

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Cli cli(out, err);
    CLI::App app{"Natural-language dataset tools for Vega-Lite charts", "chartnl"};
    app.set_help_all_flag("--help-all");
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.add_option("--config", cli.config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--seed", cli.seed, "random seed");
    app.add_option("--endpoint", cli.endpoint, "chat-completions base URL");
    app.add_option("--model", cli.model, "model name");
    app.add_option("--temperature", cli.temperature, "sampling temperature");
    app.add_option("--timeout", cli.timeout, "request timeout in seconds");
    app.add_option("--max-retries", cli.max_retries, "retries on 429/5xx");
    app.add_option("--api-key-env", cli.api_key_env, "environment variable holding the API key");
    app.add_option("--workers", cli.workers, "concurrent requests");
    app.add_option("--out-dir", cli.out_dir, "output directory");

    auto gateway_flags = [&](CLI::App* sub) {
        sub->add_flag("--mock", cli.mock, "use the deterministic offline backend (default)");
        sub->add_flag("--live", cli.live, "call the configured endpoint");
    };

    auto* analyze = app.add_subcommand("analyze", "structural profile of specifications");
    analyze->add_option("specs", cli.inputs)->required()->check(CLI::ExistingFile);
    analyze->add_flag("--vocab-filter", cli.vocab_filter, "count only Vega-Lite v5 property names");

    auto* summarize = app.add_subcommand("summarize", "corpus summary");
    summarize->add_option("manifest", cli.manifest)->required()->check(CLI::ExistingFile);
    summarize->add_flag("--csv", cli.csv);
    summarize->add_flag("--dedup", cli.dedup, "drop exact duplicates first");
    summarize->add_flag("--no-vocab-filter", cli.no_vocab_filter);

    auto* sample = app.add_subcommand("sample", "stratified sample");
    sample->add_option("manifest", cli.manifest)->required()->check(CLI::ExistingFile);
    sample->add_option("--n", cli.n, "sample size")->required();
    sample->add_option("--strata", cli.strata, "comma list of level, composite, interaction");

    auto* preprocess = app.add_subcommand("preprocess", "externalize data and minify");
    preprocess->add_option("specs", cli.inputs)->required()->check(CLI::ExistingFile);
    preprocess->add_option("--out", cli.out_dir, "output directory")->required();
    preprocess->add_flag("--fetch-remote", cli.fetch_remote, "allow fetching remote data references");

    auto* generate = app.add_subcommand("generate", "generate NL datasets");
    generate->add_option("manifest", cli.manifest)->required()->check(CLI::ExistingFile);
    generate->add_option("--tasks", cli.tasks, "comma list of l1, l2, utterance, question, all");
    generate->add_option("--out", cli.out_path, "output dataset file");
    generate->add_flag("--no-open-ended", cli.no_open_ended, "skip open-ended questions");
    generate->add_flag("--per-view", cli.per_view, "one utterance triple per view");
    gateway_flags(generate);

    auto* paraphrase = app.add_subcommand("paraphrase", "score-based paraphrasing");
    paraphrase->add_option("dataset", cli.dataset)->required()->check(CLI::ExistingFile);
    paraphrase->add_option("--mode", cli.mode, "one or two axes")->check(CLI::IsMember({"one", "two", "one_axis", "two_axes"}));
    paraphrase->add_option("--out", cli.out_path, "output dataset file");
    gateway_flags(paraphrase);

    auto* match = app.add_subcommand("match-sample", "frequency-matched sampling");
    match->add_option("pool", cli.pool)->required()->check(CLI::ExistingFile);
    match->add_option("reference", cli.reference)->required()->check(CLI::ExistingFile);
    match->add_option("--sets", cli.sets, "number of sets");
    match->add_option("--out", cli.out_path, "output path prefix");

    auto* evaluate = app.add_subcommand("evaluate", "diversity metrics");
    evaluate->add_option("datasets", cli.inputs, "candidates then the reference (name=a.jsonl,b.jsonl groups sets)")
        ->required();
    evaluate->add_option("--vectors", cli.vectors_path, "precomputed vectors (dim=<d> format)");
    evaluate->add_option("--texts", cli.texts_path, "texts aligned with --vectors");
    evaluate->add_option("--provider", cli.provider, "hash or remote");
    evaluate->add_option("--embedding-model", cli.provider_model);
    evaluate->add_option("--dim", cli.dim, "hash embedder dimension");
    evaluate->add_option("--span-percentile", cli.span_percentile);
    evaluate->add_option("--grid", cli.grid);
    evaluate->add_option("--k", cli.k);
    evaluate->add_flag("--csv", cli.csv);

    auto* lex = app.add_subcommand("lex", "lexical statistics");
    lex->add_option("datasets", cli.inputs)->required()->check(CLI::ExistingFile);
    lex->add_flag("--csv", cli.csv);

    auto* codes = app.add_subcommand("codes", "qualitative coding");
    codes->add_option("dataset", cli.dataset)->required()->check(CLI::ExistingFile);
    codes->add_flag("--cluster", cli.cluster, "cluster the codes");
    codes->add_option("--eps", cli.eps);
    codes->add_option("--min-pts", cli.min_pts);
    codes->add_option("--reduce-dim", cli.reduce_dim);
    codes->add_option("--top", cli.top);
    codes->add_option("--provider", cli.provider, "hash or remote");
    codes->add_option("--vectors", cli.vectors_path);
    codes->add_option("--texts", cli.texts_path);
    codes->add_option("--dim", cli.dim);
    codes->add_flag("--csv", cli.csv);
    gateway_flags(codes);

    std::vector<std::string> argv_store = {"chartnl"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        const auto extra = app.remaining();
        if (app.get_subcommands().empty() && !extra.empty())
            err << "chartnl: unknown command \"" << extra.front() << "\"\n" << kSynopsis;
        else
            err << "chartnl: " << e.what() << "\n" << kSynopsis;
        return 2;
    }

    try {
        cli.finalize_config();
        if (*analyze) return cli.analyze();
        if (*summarize) return cli.summarize();
        if (*sample) return cli.sample();
        if (*preprocess) return cli.preprocess();
        if (*generate) return cli.generate();
        if (*paraphrase) return cli.paraphrase();
        if (*match) return cli.match_sample();
        if (*evaluate) return cli.evaluate();
        if (*lex) return cli.lex();
        if (*codes) return cli.codes();
    } catch (const UsageError& e) {
        err << "chartnl: " << e.what() << "\n" << kSynopsis;
        return 2;
    } catch (const Error& e) {
        err << "chartnl: " << e.describe() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "chartnl: " << e.what() << "\n";
        return 1;
    }
    err << kSynopsis;
    return 2;
}

}  // namespace chartnl
