#include "chartnl/pipeline.hpp"

#include "chartnl/text_util.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace chartnl {

using ojson = nlohmann::ordered_json;

std::string_view to_string(NLType t) {
    switch (t) {
        case NLType::CaptionL1: return "caption_l1";
        case NLType::CaptionL2: return "caption_l2";
        case NLType::Utterance: return "utterance";
        case NLType::Question: return "question";
    }
    return "caption_l1";
}

std::string_view to_string(NLSubtype s) {
    switch (s) {
        case NLSubtype::Command: return "command";
        case NLSubtype::Query: return "query";
        case NLSubtype::UtteranceQuestion: return "question";
        case NLSubtype::NonvisualLookup: return "nonvisual_lookup";
        case NLSubtype::NonvisualCompositional: return "nonvisual_compositional";
        case NLSubtype::VisualLookup: return "visual_lookup";
        case NLSubtype::VisualCompositional: return "visual_compositional";
        case NLSubtype::OpenEnded: return "open_ended";
    }
    return "command";
}

NLType nl_type_from_string(std::string_view s) {
    for (auto t : {NLType::CaptionL1, NLType::CaptionL2, NLType::Utterance, NLType::Question})
        if (to_string(t) == s) return t;
    throw SchemaError("unknown nl_type \"" + std::string(s) + "\"");
}

NLSubtype nl_subtype_from_string(std::string_view s, NLType type) {
    for (auto sub : {NLSubtype::Command, NLSubtype::Query, NLSubtype::UtteranceQuestion, NLSubtype::NonvisualLookup,
                     NLSubtype::NonvisualCompositional, NLSubtype::VisualLookup, NLSubtype::VisualCompositional,
                     NLSubtype::OpenEnded})
        if (to_string(sub) == s && subtype_allowed(type, sub)) return sub;
    throw SchemaError("subtype \"" + std::string(s) + "\" does not fit nl_type " + std::string(to_string(type)));
}

bool subtype_allowed(NLType type, NLSubtype sub) {
    switch (type) {
        case NLType::Utterance:
            return sub == NLSubtype::Command || sub == NLSubtype::Query || sub == NLSubtype::UtteranceQuestion;
        case NLType::Question:
            return sub == NLSubtype::NonvisualLookup || sub == NLSubtype::NonvisualCompositional ||
                   sub == NLSubtype::VisualLookup || sub == NLSubtype::VisualCompositional ||
                   sub == NLSubtype::OpenEnded;
        default: return false;
    }
}

void validate(const NLRecord& r) {
    const bool needs = r.nl_type == NLType::Utterance || r.nl_type == NLType::Question;
    if (needs != r.subtype.has_value())
        throw SchemaError("record " + r.id + ": subtype must be present exactly for utterances and questions");
    if (r.subtype && !subtype_allowed(r.nl_type, *r.subtype))
        throw SchemaError("record " + r.id + ": subtype " + std::string(to_string(*r.subtype)) + " does not fit " +
                          std::string(to_string(r.nl_type)));
    if (r.id.empty()) throw SchemaError("record without id");
    if (r.provenance.paraphrased) {
        if (r.provenance.source_record_id.empty())
            throw SchemaError("record " + r.id + ": paraphrase without source record");
        if (r.provenance.axes.size() != r.provenance.scores.size() || r.provenance.axes.empty())
            throw SchemaError("record " + r.id + ": paraphrase axes and scores do not match");
    }
}

std::string record_to_json(const NLRecord& r) {
    ojson j;
    j["id"] = r.id;
    j["chart_id"] = r.chart_id;
    j["nl_type"] = std::string(to_string(r.nl_type));
    j["subtype"] = r.subtype ? ojson(std::string(to_string(*r.subtype))) : ojson(nullptr);
    j["text"] = r.text;
    ojson prov;
    prov["kind"] = r.provenance.paraphrased ? "paraphrased" : "generated";
    if (r.provenance.paraphrased) {
        ojson axes = ojson::array();
        for (auto a : r.provenance.axes) axes.push_back(std::string(to_string(a)));
        prov["axes"] = axes;
        prov["scores"] = r.provenance.scores;
        prov["source_record_id"] = r.provenance.source_record_id;
    }
    j["provenance"] = prov;
    j["model_name"] = r.model_name;
    j["created_at"] = r.created_at;
    ojson meta = ojson::object();
    for (const auto& [k, v] : r.metadata) meta[k] = v;
    j["metadata"] = meta;
    for (const auto& [k, raw] : r.extra) j[k] = ojson::parse(raw);
    return j.dump();
}

namespace {

const std::string& require_string(const ojson& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw SchemaError(std::string("field \"") + key + "\" must be a string");
    return it->get_ref<const std::string&>();
}

std::string optional_string(const ojson& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return {};
    if (!it->is_string()) throw SchemaError(std::string("field \"") + key + "\" must be a string");
    return it->get<std::string>();
}

Provenance parse_provenance(const ojson& j) {
    Provenance p;
    if (j.is_null()) return p;
    if (!j.is_object()) throw SchemaError("provenance must be an object");
    const std::string kind = optional_string(j, "kind");
    if (kind.empty() || kind == "generated") return p;
    if (kind != "paraphrased") throw SchemaError("unknown provenance kind \"" + kind + "\"");
    p.paraphrased = true;
    p.source_record_id = optional_string(j, "source_record_id");
    if (auto a = j.find("axes"); a != j.end() && a->is_array())
        for (const auto& v : *a) {
            if (!v.is_string()) throw SchemaError("axis names must be strings");
            try {
                p.axes.push_back(axis_from_string(v.get<std::string>()));
            } catch (const ConfigError& e) {
                throw SchemaError(e.what());
            }
        }
    if (auto s = j.find("scores"); s != j.end() && s->is_array())
        for (const auto& v : *s) {
            if (!v.is_number_integer()) throw SchemaError("scores must be integers");
            p.scores.push_back(v.get<int>());
        }
    return p;
}

const std::set<std::string>& known_fields() {
    static const std::set<std::string> k = {"id",         "chart_id",   "nl_type",    "subtype", "text",
                                            "provenance", "model_name", "created_at", "metadata"};
    return k;
}

ojson parse_line(std::string_view line) {
    ojson j = ojson::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw SchemaError("line is not a JSON object");
    return j;
}

NLRecord record_from_object(const ojson& j, std::vector<std::string>* warnings) {
    NLRecord r;
    r.id = require_string(j, "id");
    r.chart_id = require_string(j, "chart_id");
    r.nl_type = nl_type_from_string(require_string(j, "nl_type"));
    if (std::string sub = optional_string(j, "subtype"); !sub.empty()) r.subtype = nl_subtype_from_string(sub, r.nl_type);
    r.text = require_string(j, "text");
    if (auto p = j.find("provenance"); p != j.end()) r.provenance = parse_provenance(*p);
    r.model_name = optional_string(j, "model_name");
    r.created_at = optional_string(j, "created_at");
    if (auto m = j.find("metadata"); m != j.end() && !m->is_null()) {
        if (!m->is_object()) throw SchemaError("metadata must be an object");
        for (const auto& [k, v] : m->items()) r.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    for (const auto& [k, v] : j.items()) {
        if (known_fields().contains(k)) continue;
        r.extra[k] = v.dump();
        if (warnings) warnings->push_back("record " + r.id + ": kept unknown field \"" + k + "\"");
    }
    validate(r);
    return r;
}

}  // namespace

NLRecord record_from_json(std::string_view line, std::vector<std::string>* warnings) {
    return record_from_object(parse_line(line), warnings);
}

std::string dataset_to_jsonl(const DatasetFile& d) {
    ojson h;
    h["__header__"] = true;
    h["corpus_id"] = d.header.corpus_id;
    h["tool_version"] = d.header.tool_version;
    h["config_digest"] = d.header.config_digest;
    std::string out = h.dump() + "\n";
    for (const auto& r : d.records) out += record_to_json(r) + "\n";
    return out;
}

DatasetFile dataset_from_jsonl(std::string_view text, std::vector<std::string>* warnings) {
    DatasetFile d;
    std::unordered_set<std::string> ids;
    std::size_t line_no = 0;
    bool first = true;
    for (auto line : split_lines(text)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            ojson j = parse_line(line);
            if (auto h = j.find("__header__"); h != j.end()) {
                if (!first) throw SchemaError("header must be the first line");
                d.header.corpus_id = optional_string(j, "corpus_id");
                d.header.tool_version = optional_string(j, "tool_version");
                d.header.config_digest = optional_string(j, "config_digest");
                first = false;
                continue;
            }
            first = false;
            NLRecord r = record_from_object(j, warnings);
            if (!ids.insert(r.id).second) throw SchemaError("duplicate record id \"" + r.id + "\"");
            d.records.push_back(std::move(r));
        } catch (Error& e) {
            e.add_context("line=" + std::to_string(line_no));
            throw;
        }
    }
    return d;
}

void write_dataset(const std::string& path, const DatasetFile& d) {
    std::error_code ec;
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << dataset_to_jsonl(d);
    if (!out) throw IoError("write failed for " + path);
}

DatasetFile read_dataset(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return dataset_from_jsonl(ss.str(), warnings);
    } catch (Error& e) {
        e.add_context("file=" + path);
        throw;
    }
}

}  // namespace chartnl
