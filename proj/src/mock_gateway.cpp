#include "chartnl/errors.hpp"
#include "chartnl/llm_gateway.hpp"
#include "chartnl/spec_model.hpp"
#include "chartnl/text_util.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace chartnl {

void MockGateway::set_reply(std::string prompt_text, std::string reply) {
    std::lock_guard lock(mu_);
    canned_[std::move(prompt_text)] = std::move(reply);
}

void MockGateway::set_responder(Responder r) {
    std::lock_guard lock(mu_);
    responder_ = std::move(r);
}

Completion MockGateway::complete(const RenderedPrompt& prompt, const ModelConfig& cfg) {
    Responder responder;
    std::optional<std::string> reply;
    {
        std::lock_guard lock(mu_);
        calls_.push_back(prompt);
        if (auto it = canned_.find(prompt.text); it != canned_.end()) reply = it->second;
        responder = responder_;
    }
    if (!reply && responder) reply = responder(prompt);
    if (!reply && scaffold_) reply = scaffold_reply(prompt);
    if (!reply) throw MalformedResponseError("mock has no reply for this prompt");
    Completion c;
    c.text = std::move(*reply);
    c.model = cfg.model_name;
    return c;
}

std::vector<RenderedPrompt> MockGateway::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

std::size_t MockGateway::call_count() const {
    std::lock_guard lock(mu_);
    return calls_.size();
}

namespace {

struct MockField {
    std::string name;
    std::string type;
};

std::vector<MockField> fields_from_ftt(const std::string& ftt) {
    std::vector<MockField> out;
    for (auto line : split_lines(ftt)) {
        auto parts = split(line, '|');
        if (parts.size() < 3) continue;
        out.push_back({std::string(trim(parts[0])), std::string(trim(parts[2]))});
    }
    return out;
}

std::string substitution(const RenderedPrompt& p, const std::string& key) {
    auto it = p.substitutions.find(key);
    return it == p.substitutions.end() ? std::string() : it->second;
}

struct ChartFacts {
    std::string mark = "chart";
    bool composite = false;
    std::string composite_type = "layered";
    std::size_t plots = 1;
    std::vector<std::string> fields;
    std::string quantitative;
    std::string categorical;
};

void collect_fields(const SpecNode& n, std::vector<MockField>& out) {
    if (n.is_array()) {
        for (const auto& c : n.array()) collect_fields(c, out);
        return;
    }
    if (!n.is_object()) return;
    if (const SpecNode* f = n.find("field"); f && f->is_string()) {
        std::string name(f->as_string());
        const SpecNode* type = n.find("type");
        bool seen = std::any_of(out.begin(), out.end(), [&](const MockField& m) { return m.name == name; });
        if (!seen) out.push_back({name, type ? std::string(type->as_string()) : std::string()});
    }
    for (const auto& m : n.object()) {
        if (is_embedded_data_key(m.key) || m.key == "data") continue;
        collect_fields(m.value, out);
    }
}

void add_fields(ChartFacts& facts, const std::vector<MockField>& fields) {
    for (const auto& f : fields) {
        facts.fields.push_back(f.name);
        if (facts.quantitative.empty() && f.type == "quantitative") facts.quantitative = f.name;
        if (facts.categorical.empty() && (f.type == "nominal" || f.type == "ordinal")) facts.categorical = f.name;
    }
}

ChartFacts chart_facts(const RenderedPrompt& p) {
    ChartFacts facts;
    add_fields(facts, fields_from_ftt(substitution(p, "ftt_str")));
    const std::string vl = substitution(p, "vl");
    if (!vl.empty()) {
        try {
            SpecDocument doc = parse_spec(vl, "mock");
            for (const auto& leaf : leaf_views(doc.root)) {
                std::string m = leaf.mark_type();
                if (!m.empty()) {
                    facts.mark = m;
                    break;
                }
            }
            auto comp = detect_composition(doc);
            facts.composite = comp.is_composite();
            facts.composite_type = std::string(to_string(comp.composite_type));
            facts.plots = comp.view_count.value_or(1);
            if (facts.fields.empty()) {
                std::vector<MockField> found;
                collect_fields(doc.root, found);
                add_fields(facts, found);
            }
        } catch (const Error&) {
        }
    }
    if (facts.fields.empty()) facts.fields.push_back("value");
    if (facts.quantitative.empty()) facts.quantitative = facts.fields.back();
    if (facts.categorical.empty()) facts.categorical = facts.fields.front();
    return facts;
}

std::string composite_block(const ChartFacts& f) {
    std::string out = "- True/False: ";
    out += f.composite ? "True" : "False";
    out += "\n- (If True) Type: ";
    out += f.composite ? f.composite_type : "none";
    out += "\n- Number of plots: " + std::to_string(f.plots);
    return out;
}

std::string l1_reply(const RenderedPrompt& p) {
    ChartFacts f = chart_facts(p);
    std::string encoded = join(f.fields, ", ");
    return "Step 1. Composite Views:\n" + composite_block(f) +
           "\nStep 2. Chart Semantics:\n- Data: a table with the fields " + encoded + "\n- Mark: " + f.mark +
           "\n- Encoding: " + encoded +
           "\nStep 3. Level 1 NL Description: A " + f.mark + " chart that encodes " + encoded + ".";
}

std::string l2_feature_reply(const RenderedPrompt& p) {
    ChartFacts f = chart_facts(p);
    const std::string& q = f.quantitative;
    return "Step 1. Features: The spread between the largest and smallest " + q +
           ".\nStep 2. Operations: max; min; difference\nStep 3. Questions: What is the maximum " + q +
           "?; What is the minimum " + q + "?; What is the difference between the maximum and minimum " + q + "?";
}

std::string l2_caption_reply(const RenderedPrompt& p) {
    std::string info = substitution(p, "info");
    std::vector<std::string> facts;
    std::string question;
    for (auto line : split_lines(info)) {
        std::string_view l = trim(line);
        if (l.starts_with("Question:")) {
            question = std::string(trim(l.substr(9)));
            if (!question.empty() && question.back() == '?') question.pop_back();
        } else if (l.starts_with("Answer:") && !question.empty()) {
            facts.push_back("for \"" + question + "\" the value is " + std::string(trim(l.substr(7))));
            question.clear();
        }
    }
    std::string body = facts.empty() ? "The chart summarises the data." : "In this chart, " + join(facts, "; ") + ".";
    return "Level 2 NL Description: " + body;
}

std::string instruction_reply(const RenderedPrompt& p) {
    ChartFacts f = chart_facts(p);
    std::string list = "[View 1]; [Mark]: Use " + f.mark + " marks";
    for (std::size_t i = 0; i < f.fields.size() && i < 3; ++i)
        list += "; [Encoding]: Encode " + f.fields[i] + (i == 0 ? " on the x axis" : i == 1 ? " on the y axis" : " as color");
    list += " <";
    return "Step 1. Composite Views:\n" + composite_block(f) + "\nStep 2. Instructions:\n" + list +
           "\nStep 3. Instructions:\n" + list;
}

std::string lower_first(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
    return s;
}

std::string combine_reply(const RenderedPrompt& p) {
    std::vector<std::string> actions;
    for (const auto& item : split_list(substitution(p, "inst_first_concat"))) {
        auto close = item.find("]:");
        if (close == std::string::npos) continue;
        std::string action(trim(std::string_view(item).substr(close + 2)));
        while (!action.empty() && (action.back() == '<' || action.back() == ' ')) action.pop_back();
        if (!action.empty()) actions.push_back(action);
    }
    if (actions.empty()) actions.push_back("Show the data");
    std::vector<std::string> lowered;
    for (const auto& a : actions) lowered.push_back(lower_first(a));
    std::string primary = join(actions, "; ");
    return "View #1:\nStep 1. Primary Information: " + primary + "\nStep 2. Secondary Information: none" +
           "\nStep 3. Command: " + actions.front() + (actions.size() > 1 ? " and " + join(std::vector<std::string>(lowered.begin() + 1, lowered.end()), " and ") : "") +
           ".\nStep 4. Query: " + join(lowered, ", ") + "\nStep 5. Question: Can you " + join(lowered, " and ") + "?";
}

std::string question_reply(const RenderedPrompt& p) {
    ChartFacts f = chart_facts(p);
    const std::string& q = f.quantitative;
    const std::string& c = f.categorical;
    std::vector<StepEntry> steps = {
        {"Step 1.", "Decision", "Decide which " + c + " deserves the most attention."},
        {"Step 2.", "Conclusion", "The " + c + " with the highest " + q + " deserves the most attention."},
        {"Step 3.", "Specific Value", "The " + q + " of each " + c + "."},
        {"Step 4.", "Lookup Question", "What is the " + q + " of the first " + c + "?"},
        {"Step 5.", "Visual Attributes", "position of the " + f.mark + " marks"},
        {"Step 6.", "Paraphrased Question", "Where does the first " + f.mark + " mark sit on the " + q + " axis?"},
        {"Step 7.", "Operations", "max"},
        {"Step 8.", "Compositional Question", "Which " + c + " has the highest " + q + "?"},
        {"Step 9.", "Visual Attributes", "height of the " + f.mark + " marks"},
        {"Step 10.", "Paraphrased Question", "Which " + f.mark + " mark reaches the highest point?"},
        {"Step 11.", "Open-ended Question", "Which " + c + " should receive more attention, and why?"},
    };
    return render_steps(steps);
}

std::string coding_reply(const RenderedPrompt& p) {
    const std::string sent(trim(substitution(p, "sent")));
    std::vector<std::string> words;
    for (auto w : split(sent, ' '))
        if (!trim(w).empty()) words.emplace_back(to_lower_ascii(trim(w)));
    std::size_t letters = 0;
    for (const auto& w : words) letters += w.size();
    const double avg = words.empty() ? 0.0 : static_cast<double>(letters) / static_cast<double>(words.size());
    static const std::array<std::string_view, 10> kImperative = {"show", "create", "make", "plot", "draw",
                                                                 "display", "give", "list", "compare", "visualize"};
    const bool imperative = !words.empty() && std::find(kImperative.begin(), kImperative.end(), words[0]) != kImperative.end();
    const bool has_digit = std::any_of(sent.begin(), sent.end(), [](unsigned char ch) { return std::isdigit(ch); });
    const bool mentions_chart = find_icase(sent, "chart") != std::string::npos ||
                                find_icase(sent, "plot") != std::string::npos ||
                                find_icase(sent, "graph") != std::string::npos;
    std::vector<std::string> codes = {
        !sent.empty() && sent.back() == '?' ? "interrogative form" : imperative ? "imperative voice" : "declarative statement",
        has_digit ? "numeric detail" : "qualitative wording",
        avg > 6.0 ? "technical vocabulary" : "everyday vocabulary",
        words.size() > 15 ? "long sentence" : "concise phrasing",
        mentions_chart ? "chart reference" : "data focus",
    };
    return join(codes, "; ");
}

constexpr std::array<std::array<std::string_view, 5>, 4> kStylePrefixes = {{
    {"yo, ", "hey, ", "okay, ", "please note, ", "kindly observe, "},
    {"kinda, ", "roughly, ", "in short, ", "specifically, ", "to be exact, "},
    {"in plain words, ", "simply put, ", "generally, ", "analytically, ", "statistically, "},
    {"honestly, ", "I think ", "arguably, ", "evidently, ", "factually, "},
}};

std::string paraphrase_reply(const RenderedPrompt& p) {
    std::string sentence = substitution(p, "Example Sentence");
    std::string prefix;
    auto add = [&](const std::string& axis_key, const std::string& score_key) {
        const std::string axis_text = substitution(p, axis_key);
        const int score = std::atoi(substitution(p, score_key).c_str());
        for (AxisName a : kAllAxes) {
            if (language_axis(a).description == axis_text && score >= 1 && score <= 5)
                prefix += kStylePrefixes[static_cast<std::size_t>(a)][static_cast<std::size_t>(score - 1)];
        }
    };
    if (p.task == PromptTask::Paraphrase1) {
        add("Axis", "Score");
    } else {
        add("Axis-1", "Score-A");
        add("Axis-2", "Score-B");
    }
    if (!prefix.empty()) {
        prefix[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(prefix[0])));
        sentence = lower_first(sentence);
    }
    return prefix + sentence;
}

}  // namespace

std::string MockGateway::scaffold_reply(const RenderedPrompt& prompt) {
    switch (prompt.task) {
        case PromptTask::L1: return l1_reply(prompt);
        case PromptTask::L2Feature: return l2_feature_reply(prompt);
        case PromptTask::L2Answer: return "The answer cannot be read from the chart alone.";
        case PromptTask::L2Caption: return l2_caption_reply(prompt);
        case PromptTask::UtteranceInstr: return instruction_reply(prompt);
        case PromptTask::UtteranceCombine: return combine_reply(prompt);
        case PromptTask::Question: return question_reply(prompt);
        case PromptTask::Coding: return coding_reply(prompt);
        case PromptTask::Paraphrase1:
        case PromptTask::Paraphrase2: return paraphrase_reply(prompt);
    }
    return {};
}

}  // namespace chartnl
