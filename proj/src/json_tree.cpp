#include "chartnl/json_tree.hpp"

#include "chartnl/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <unordered_set>

#include <json.hpp>

namespace chartnl {

bool SpecNode::is_string() const {
    return is_scalar() && std::holds_alternative<std::string>(scalar());
}

bool SpecNode::is_number() const {
    return is_scalar() &&
           (std::holds_alternative<std::int64_t>(scalar()) || std::holds_alternative<double>(scalar()));
}

bool SpecNode::is_bool() const {
    return is_scalar() && std::holds_alternative<bool>(scalar());
}

bool SpecNode::is_null() const {
    return is_scalar() && std::holds_alternative<std::nullptr_t>(scalar());
}

std::string_view SpecNode::as_string() const {
    if (!is_string()) return {};
    return std::get<std::string>(scalar());
}

double SpecNode::as_number() const {
    if (!is_scalar()) return std::numeric_limits<double>::quiet_NaN();
    if (auto* i = std::get_if<std::int64_t>(&scalar())) return static_cast<double>(*i);
    if (auto* d = std::get_if<double>(&scalar())) return *d;
    return std::numeric_limits<double>::quiet_NaN();
}

bool SpecNode::truthy() const {
    if (!is_scalar()) return true;
    const auto& s = scalar();
    if (std::holds_alternative<std::nullptr_t>(s)) return false;
    if (auto* b = std::get_if<bool>(&s)) return *b;
    if (auto* i = std::get_if<std::int64_t>(&s)) return *i != 0;
    if (auto* d = std::get_if<double>(&s)) return *d != 0.0;
    return !std::get<std::string>(s).empty();
}

const SpecNode* SpecNode::find(std::string_view key) const {
    if (!is_object()) return nullptr;
    for (const auto& m : object())
        if (m.key == key) return &m.value;
    return nullptr;
}

bool operator==(const SpecNode& a, const SpecNode& b) { return a.value_ == b.value_; }

namespace {

using nlohmann::json;

// Builds a SpecNode tree from nlohmann's SAX events so that member order and
// duplicate keys are both observable (the DOM types hide one or the other).
class TreeBuilder : public nlohmann::json_sax<json> {
public:
    bool null() override { return put(Scalar{nullptr}); }
    bool boolean(bool v) override { return put(Scalar{v}); }
    bool number_integer(number_integer_t v) override { return put(Scalar{std::int64_t{v}}); }
    bool number_unsigned(number_unsigned_t v) override {
        if (v <= static_cast<number_unsigned_t>(std::numeric_limits<std::int64_t>::max()))
            return put(Scalar{static_cast<std::int64_t>(v)});
        return put(Scalar{static_cast<double>(v)});
    }
    bool number_float(number_float_t v, const string_t&) override { return put(Scalar{double{v}}); }
    bool string(string_t& v) override { return put(Scalar{std::move(v)}); }
    bool binary(binary_t&) override { return put(Scalar{nullptr}); }

    bool start_object(std::size_t) override {
        frames_.push_back(Frame{SpecNode(Object{}), {}, {}});
        return true;
    }
    bool key(string_t& k) override {
        auto& f = frames_.back();
        if (!f.seen.insert(k).second) throw DuplicateKeyError("duplicate key \"" + k + "\"");
        f.pending_key = std::move(k);
        return true;
    }
    bool end_object() override { return close(); }
    bool start_array(std::size_t) override {
        frames_.push_back(Frame{SpecNode(Array{}), {}, {}});
        return true;
    }
    bool end_array() override { return close(); }

    bool parse_error(std::size_t position, const std::string&, const nlohmann::detail::exception& ex) override {
        throw ParseError(position, ex.what());
    }

    SpecNode take() { return std::move(result_); }

private:
    struct Frame {
        SpecNode node;
        std::string pending_key;
        std::unordered_set<std::string> seen;
    };

    bool put(SpecNode n) {
        if (frames_.empty()) {
            result_ = std::move(n);
            return true;
        }
        auto& f = frames_.back();
        if (f.node.is_object())
            f.node.object().push_back(Member{std::move(f.pending_key), std::move(n)});
        else
            f.node.array().push_back(std::move(n));
        return true;
    }

    bool close() {
        SpecNode done = std::move(frames_.back().node);
        frames_.pop_back();
        return put(std::move(done));
    }

    std::vector<Frame> frames_;
    SpecNode result_;
};

void write_string(std::string& out, std::string_view s) {
    static constexpr char kHex[] = "0123456789abcdef";
    out.push_back('"');
    for (unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (c < 0x20) {
                    out += "\\u00";
                    out.push_back(kHex[c >> 4]);
                    out.push_back(kHex[c & 0xF]);
                } else {
                    out.push_back(static_cast<char>(c));
                }
        }
    }
    out.push_back('"');
}

void write_scalar(std::string& out, const Scalar& s) {
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::nullptr_t>) out += "null";
            else if constexpr (std::is_same_v<T, bool>) out += v ? "true" : "false";
            else if constexpr (std::is_same_v<T, std::int64_t>) out += std::to_string(v);
            else if constexpr (std::is_same_v<T, double>) out += format_double(v);
            else write_string(out, v);
        },
        s);
}

void write_node(std::string& out, const SpecNode& n, bool sorted) {
    if (n.is_scalar()) {
        write_scalar(out, n.scalar());
        return;
    }
    if (n.is_array()) {
        out.push_back('[');
        bool first = true;
        for (const auto& item : n.array()) {
            if (!first) out.push_back(',');
            first = false;
            write_node(out, item, sorted);
        }
        out.push_back(']');
        return;
    }
    std::vector<const Member*> members;
    members.reserve(n.object().size());
    for (const auto& m : n.object()) members.push_back(&m);
    if (sorted)
        std::sort(members.begin(), members.end(),
                  [](const Member* a, const Member* b) { return a->key < b->key; });
    out.push_back('{');
    bool first = true;
    for (const Member* m : members) {
        if (!first) out.push_back(',');
        first = false;
        write_string(out, m->key);
        out.push_back(':');
        write_node(out, m->value, sorted);
    }
    out.push_back('}');
}

}  // namespace

SpecNode parse_json(std::string_view text) {
    TreeBuilder builder;
    try {
        json::sax_parse(text.begin(), text.end(), &builder);
    } catch (const json::exception& ex) {
        throw ParseError(0, ex.what());
    }
    return builder.take();
}

std::string to_json(const SpecNode& node) {
    std::string out;
    write_node(out, node, false);
    return out;
}

std::string to_json_sorted(const SpecNode& node) {
    std::string out;
    write_node(out, node, true);
    return out;
}

std::string json_quote(std::string_view s) {
    std::string out;
    write_string(out, s);
    return out;
}

std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, end);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string scalar_text(const Scalar& s) {
    if (std::holds_alternative<std::nullptr_t>(s)) return {};
    if (auto* str = std::get_if<std::string>(&s)) return *str;
    std::string out;
    write_scalar(out, s);
    return out;
}

}  // namespace chartnl
