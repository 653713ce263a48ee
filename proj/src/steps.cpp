#include "chartnl/errors.hpp"
#include "chartnl/llm_gateway.hpp"
#include "chartnl/text_util.hpp"

#include <cctype>
#include <charconv>

namespace chartnl {

namespace {

constexpr std::size_t kMaxTitleWords = 5;

struct Marker {
    std::size_t line = 0;
    int number = -1;  // -1 marks a terminator line
    std::string_view rest;
};

std::string_view skip_decoration(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '*' || s[i] == '_')) ++i;
    return s.substr(i);
}

std::optional<Marker> classify_line(std::string_view line, std::size_t index) {
    std::string_view raw = trim(line);
    if (raw.starts_with("##") || raw.starts_with("View #")) return Marker{index, -1, {}};
    std::string_view s = skip_decoration(line);
    if (s.size() < 5 || to_lower_ascii(s.substr(0, 4)) != "step") return std::nullopt;
    std::size_t i = 4;
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == start) return std::nullopt;
    int number = 0;
    std::from_chars(s.data() + start, s.data() + i, number);
    while (i < s.size() && s[i] == ' ') ++i;
    if (i >= s.size() || (s[i] != '.' && s[i] != ':')) return std::nullopt;
    ++i;
    while (i < s.size() && (s[i] == '*' || s[i] == '_')) ++i;
    return Marker{index, number, s.substr(i)};
}

int label_number(const std::string& label) {
    std::string_view s = trim(label);
    if (to_lower_ascii(s.substr(0, std::min<std::size_t>(4, s.size()))) != "step")
        throw MissingStepError("not a step label: " + label);
    s.remove_prefix(4);
    s = trim(s);
    int number = -1;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), number);
    if (ec != std::errc()) throw MissingStepError("not a step label: " + label);
    return number;
}

std::size_t word_count(std::string_view s) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : s) {
        bool space = c == ' ' || c == '\t';
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

// Splits "Title: body" when the part before the first colon looks like a heading.
std::pair<std::string, std::string_view> split_title(std::string_view rest) {
    rest = trim(rest);
    auto colon = rest.find(':');
    if (colon == std::string_view::npos) return {{}, rest};
    std::string_view head = trim(rest.substr(0, colon));
    while (!head.empty() && (head.back() == '*' || head.back() == '_')) head.remove_suffix(1);
    if (head.empty() || head.find_first_of("?.!") != std::string_view::npos || word_count(head) > kMaxTitleWords)
        return {{}, rest};
    std::string_view body = rest.substr(colon + 1);
    while (!body.empty() && (body.front() == '*' || body.front() == '_')) body.remove_prefix(1);
    return {std::string(head), body};
}

}  // namespace

const std::string& StepParse::body(std::string_view label) const {
    for (const auto& s : steps)
        if (s.label == label) return s.body;
    throw MissingStepError(std::string(label));
}

std::vector<std::string> step_labels(int n) {
    std::vector<std::string> out;
    for (int i = 1; i <= n; ++i) out.push_back("Step " + std::to_string(i) + ".");
    return out;
}

StepParse parse_steps(std::string_view text, const std::vector<std::string>& expected) {
    if (expected.empty()) throw MissingStepError("no step labels requested");
    const auto lines = split_lines(text);
    std::vector<Marker> markers;
    for (std::size_t i = 0; i < lines.size(); ++i)
        if (auto m = classify_line(lines[i], i)) markers.push_back(*m);

    StepParse out;
    out.raw = std::string(text);
    std::size_t next_marker = 0;
    for (const auto& label : expected) {
        const int number = label_number(label);
        std::size_t k = next_marker;
        while (k < markers.size() && markers[k].number != number) ++k;
        if (k == markers.size()) throw MissingStepError(label);

        const Marker& m = markers[k];
        const std::size_t end_line = k + 1 < markers.size() ? markers[k + 1].line : lines.size();
        auto [title, first] = split_title(m.rest);
        std::string body(first);
        for (std::size_t l = m.line + 1; l < end_line; ++l) {
            body.push_back('\n');
            body += lines[l];
        }
        StepEntry entry{label, std::move(title), std::string(trim(body))};
        if (entry.body.empty()) throw EmptyStepError(label);
        out.steps.push_back(std::move(entry));
        next_marker = k + 1;
    }
    return out;
}

std::string render_steps(const std::vector<StepEntry>& steps) {
    std::string out;
    for (const auto& s : steps) {
        out += s.label;
        out.push_back(' ');
        if (!s.title.empty()) out += s.title + ": ";
        out += s.body;
        out.push_back('\n');
    }
    return out;
}

std::vector<std::string> split_list(std::string_view body, char sep) {
    std::vector<std::string> out;
    for (auto part : split(body, sep)) {
        auto t = trim(part);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

std::string text_after_label(std::string_view text, std::string_view label) {
    auto pos = text.rfind(label);
    if (pos == std::string_view::npos) return std::string(trim(text));
    return std::string(trim(text.substr(pos + label.size())));
}

}  // namespace chartnl
