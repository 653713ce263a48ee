#include "chartnl/promptforge.hpp"

#include "chartnl/errors.hpp"
#include "chartnl/resources.hpp"
#include "chartnl/text_util.hpp"

#include <cctype>
#include <set>

namespace chartnl {

std::string_view to_string(PromptTask t) {
    switch (t) {
        case PromptTask::L1: return "L1";
        case PromptTask::L2Feature: return "L2Feature";
        case PromptTask::L2Answer: return "L2Answer";
        case PromptTask::L2Caption: return "L2Caption";
        case PromptTask::UtteranceInstr: return "UtteranceInstr";
        case PromptTask::UtteranceCombine: return "UtteranceCombine";
        case PromptTask::Question: return "Question";
        case PromptTask::Coding: return "Coding";
        case PromptTask::Paraphrase1: return "Paraphrase1";
        case PromptTask::Paraphrase2: return "Paraphrase2";
    }
    return "L1";
}

namespace {

const char* template_file(PromptTask t) {
    switch (t) {
        case PromptTask::L1: return "templates/l1_caption.txt";
        case PromptTask::L2Feature: return "templates/l2_feature.txt";
        case PromptTask::L2Answer: return "templates/l2_answer.txt";
        case PromptTask::L2Caption: return "templates/l2_caption.txt";
        case PromptTask::UtteranceInstr: return "templates/utterance_instructions.txt";
        case PromptTask::UtteranceCombine: return "templates/utterance_combine.txt";
        case PromptTask::Question: return "templates/question.txt";
        case PromptTask::Coding: return "templates/coding.txt";
        case PromptTask::Paraphrase1: return "templates/paraphrase_one_axis.txt";
        case PromptTask::Paraphrase2: return "templates/paraphrase_two_axes.txt";
    }
    return "";
}

bool placeholder_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ' ';
}

// Length of the placeholder starting at tmpl[pos] == '{', or 0.
std::size_t placeholder_length(std::string_view tmpl, std::size_t pos) {
    if (pos + 1 >= tmpl.size() || !std::isalpha(static_cast<unsigned char>(tmpl[pos + 1]))) return 0;
    std::size_t i = pos + 2;
    while (i < tmpl.size() && placeholder_char(tmpl[i])) ++i;
    if (i < tmpl.size() && tmpl[i] == '}') return i - pos + 1;
    return 0;
}

void require_text(std::string_view value, std::string_view what) {
    if (trim(value).empty()) throw EmptyInputError(std::string(what) + " is empty");
}

RenderedPrompt render(PromptTask task, std::map<std::string, std::string> values) {
    RenderedPrompt p;
    p.task = task;
    try {
        p.text = render_template(prompt_template(task), values);
    } catch (Error& e) {
        e.add_context(std::string("template ") + std::string(to_string(task)));
        throw;
    }
    p.substitutions = std::move(values);
    return p;
}

}  // namespace

std::string_view prompt_template(PromptTask t) {
    std::string_view text = resource(template_file(t));
    if (!text.empty() && text.back() == '\n') text.remove_suffix(1);
    return text;
}

std::vector<std::string> template_placeholders(std::string_view tmpl) {
    std::vector<std::string> names;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] != '{') continue;
        if (std::size_t len = placeholder_length(tmpl, i)) {
            std::string name(tmpl.substr(i + 1, len - 2));
            if (seen.insert(name).second) names.push_back(std::move(name));
            i += len - 1;
        }
    }
    return names;
}

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::set<std::string> used;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] == '{') {
            if (std::size_t len = placeholder_length(tmpl, i)) {
                std::string name(tmpl.substr(i + 1, len - 2));
                auto it = values.find(name);
                if (it == values.end()) throw TemplateError("unresolved placeholder {" + name + "}");
                out += it->second;
                used.insert(name);
                i += len - 1;
                continue;
            }
        }
        out.push_back(tmpl[i]);
    }
    for (const auto& [name, value] : values)
        if (!used.contains(name)) throw TemplateError("template has no placeholder {" + name + "}");
    return out;
}

RenderedPrompt build_l1_prompt(std::string_view minified_spec, std::string_view ftt) {
    require_text(minified_spec, "specification");
    require_text(ftt, "field list");
    return render(PromptTask::L1, {{"vl", std::string(minified_spec)}, {"ftt_str", std::string(ftt)}});
}

RenderedPrompt build_l2_prompt(L2Stage stage, std::string_view minified_spec, std::string_view ftt,
                               std::string_view stage_input) {
    switch (stage) {
        case L2Stage::Feature:
            require_text(minified_spec, "specification");
            return render(PromptTask::L2Feature, {{"vl", std::string(minified_spec)}});
        case L2Stage::Answer:
            require_text(ftt, "field list");
            if (trim(stage_input).empty()) throw MissingStageInputError("answer stage needs a question");
            return render(PromptTask::L2Answer, {{"ftt_str", std::string(ftt)}, {"prompt", std::string(stage_input)}});
        case L2Stage::Caption:
            require_text(ftt, "field list");
            if (trim(stage_input).empty()) throw MissingStageInputError("caption stage needs collected information");
            return render(PromptTask::L2Caption, {{"ftt_str", std::string(ftt)}, {"info", std::string(stage_input)}});
    }
    throw MissingStageInputError("unknown stage");
}

RenderedPrompt build_utterance_prompt(UtteranceStage stage, std::string_view minified_spec, std::string_view ftt,
                                      std::string_view inst_first_concat) {
    if (stage == UtteranceStage::Instructions) {
        require_text(minified_spec, "specification");
        require_text(ftt, "field list");
        return render(PromptTask::UtteranceInstr,
                      {{"vl", std::string(minified_spec)}, {"ftt_str", std::string(ftt)}});
    }
    if (trim(inst_first_concat).empty())
        throw MissingStageInputError("combine stage needs the instruction list");
    return render(PromptTask::UtteranceCombine, {{"inst_first_concat", std::string(inst_first_concat)}});
}

RenderedPrompt build_question_prompt(std::string_view minified_spec) {
    require_text(minified_spec, "specification");
    return render(PromptTask::Question, {{"vl", std::string(minified_spec)}});
}

RenderedPrompt build_coding_prompt(std::string_view sentence) {
    require_text(sentence, "sentence");
    return render(PromptTask::Coding, {{"sent", std::string(sentence)}});
}

std::string_view to_string(AxisName a) {
    switch (a) {
        case AxisName::Formality: return "Formality";
        case AxisName::Clarity: return "Clarity";
        case AxisName::Expertise: return "Expertise";
        case AxisName::Subjectivity: return "Subjectivity";
    }
    return "Formality";
}

AxisName axis_from_string(std::string_view s) {
    for (AxisName a : kAllAxes)
        if (to_lower_ascii(to_string(a)) == to_lower_ascii(trim(s))) return a;
    throw ConfigError("unknown language axis \"" + std::string(s) + "\"");
}

const LanguageAxis& language_axis(AxisName a) {
    static const std::array<LanguageAxis, 4> axes = [] {
        std::array<LanguageAxis, 4> out{};
        std::set<AxisName> loaded;
        for (const auto& line : resource_lines("axes.txt")) {
            auto parts = split(line, '\t');
            if (parts.size() != 4) throw ConfigError("malformed axis line: " + std::string(line));
            AxisName name = axis_from_string(parts[0]);
            out[static_cast<std::size_t>(name)] =
                LanguageAxis{name, std::string(parts[1]), std::string(parts[2]), std::string(parts[3])};
            loaded.insert(name);
        }
        if (loaded.size() != kAllAxes.size()) throw ConfigError("axis resource must define all four axes");
        return out;
    }();
    return axes[static_cast<std::size_t>(a)];
}

void validate(const ParaphraseSpec& spec) {
    if (spec.axes.empty() || spec.axes.size() > 2)
        throw InvalidScoreError("a paraphrase uses one or two axes, got " + std::to_string(spec.axes.size()));
    if (spec.axes.size() != spec.scores.size())
        throw InvalidScoreError("axis and score counts differ");
    if (spec.axes.size() == 2 && spec.axes[0] == spec.axes[1])
        throw DuplicateAxisError("axis " + std::string(to_string(spec.axes[0])) + " given twice");
    for (int s : spec.scores)
        if (s < 1 || s > 5) throw InvalidScoreError("score " + std::to_string(s) + " is outside 1..5");
}

std::string describe(const ParaphraseSpec& spec) {
    std::string out;
    for (std::size_t i = 0; i < spec.axes.size() && i < spec.scores.size(); ++i) {
        if (i) out.push_back(',');
        out += to_string(spec.axes[i]);
        out.push_back('=');
        out += std::to_string(spec.scores[i]);
    }
    return out;
}

RenderedPrompt build_paraphrase_prompt(std::string_view sentence, const ParaphraseSpec& spec) {
    validate(spec);
    require_text(sentence, "sentence");
    if (spec.axes.size() == 1) {
        const auto& ax = language_axis(spec.axes[0]);
        return render(PromptTask::Paraphrase1, {{"Axis", ax.description},
                                                {"Direction-1", ax.direction_low},
                                                {"Direction-2", ax.direction_high},
                                                {"Example Sentence", std::string(sentence)},
                                                {"Score", std::to_string(spec.scores[0])}});
    }
    const auto& a = language_axis(spec.axes[0]);
    const auto& b = language_axis(spec.axes[1]);
    return render(PromptTask::Paraphrase2, {{"Axis-1", a.description},
                                            {"Axis-2", b.description},
                                            {"Direction-1-1", a.direction_low},
                                            {"Direction-1-2", a.direction_high},
                                            {"Direction-2-1", b.direction_low},
                                            {"Direction-2-2", b.direction_high},
                                            {"Example Sentence", std::string(sentence)},
                                            {"Score-A", std::to_string(spec.scores[0])},
                                            {"Score-B", std::to_string(spec.scores[1])}});
}

std::string_view to_string(ParaphraseMode m) { return m == ParaphraseMode::OneAxis ? "one_axis" : "two_axes"; }

ParaphraseMode paraphrase_mode_from_string(std::string_view s) {
    if (s == "one" || s == "one_axis" || s == "one-axis" || s == "1") return ParaphraseMode::OneAxis;
    if (s == "two" || s == "two_axes" || s == "two-axes" || s == "2") return ParaphraseMode::TwoAxes;
    throw ConfigError("unknown paraphrase mode \"" + std::string(s) + "\"");
}

std::vector<ParaphraseSpec> enumerate_paraphrase_variants(ParaphraseMode mode) {
    std::vector<ParaphraseSpec> out;
    if (mode == ParaphraseMode::OneAxis) {
        for (AxisName a : kAllAxes)
            for (int s = 1; s <= 5; ++s) out.push_back({{a}, {s}});
        return out;
    }
    for (std::size_t i = 0; i < kAllAxes.size(); ++i)
        for (std::size_t j = i + 1; j < kAllAxes.size(); ++j)
            for (int s1 = 1; s1 <= 5; ++s1)
                for (int s2 = 1; s2 <= 5; ++s2) out.push_back({{kAllAxes[i], kAllAxes[j]}, {s1, s2}});
    return out;
}

}  // namespace chartnl
