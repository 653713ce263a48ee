#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace chartnl {

class SpecNode;

/// One key/value entry of an object node. Entry order is source order.
struct Member;

using Object = std::vector<Member>;
using Array = std::vector<SpecNode>;

/// A JSON scalar. Integers that fit in int64 stay integral so that
/// re-serialization does not turn `3` into `3.0`.
using Scalar = std::variant<std::nullptr_t, bool, std::int64_t, double, std::string>;

/// Immutable-by-convention JSON tree node: an object, an array or a scalar.
class SpecNode {
public:
    SpecNode() : value_(Scalar{nullptr}) {}
    SpecNode(Object o) : value_(std::move(o)) {}
    SpecNode(Array a) : value_(std::move(a)) {}
    SpecNode(Scalar s) : value_(std::move(s)) {}

    bool is_object() const { return std::holds_alternative<Object>(value_); }
    bool is_array() const { return std::holds_alternative<Array>(value_); }
    bool is_scalar() const { return std::holds_alternative<Scalar>(value_); }
    bool is_container() const { return !is_scalar(); }

    const Object& object() const { return std::get<Object>(value_); }
    const Array& array() const { return std::get<Array>(value_); }
    const Scalar& scalar() const { return std::get<Scalar>(value_); }
    Object& object() { return std::get<Object>(value_); }
    Array& array() { return std::get<Array>(value_); }

    bool is_string() const;
    bool is_number() const;
    bool is_bool() const;
    bool is_null() const;
    /// Returns the string value, or an empty view for non-strings.
    std::string_view as_string() const;
    double as_number() const;
    /// Truthiness in the Vega-Lite sense: false/null/absent are false;
    /// objects (e.g. `bin: {maxbins: 10}`) are true.
    bool truthy() const;

    /// Object member lookup; nullptr when absent or not an object.
    const SpecNode* find(std::string_view key) const;
    bool has(std::string_view key) const { return find(key) != nullptr; }

    friend bool operator==(const SpecNode& a, const SpecNode& b);

private:
    std::variant<Object, Array, Scalar> value_;
};

struct Member {
    std::string key;
    SpecNode value;

    friend bool operator==(const Member&, const Member&) = default;
};

/// Parses one JSON text. Object member order is preserved.
/// Throws ParseError (with byte position) on malformed input and
/// DuplicateKeyError when a single object repeats a key.
SpecNode parse_json(std::string_view text);

/// Compact serialization: no whitespace outside string literals,
/// member order preserved, floats in shortest round-trip form.
std::string to_json(const SpecNode& node);

/// Serialization with every object's members sorted by key (byte order).
std::string to_json_sorted(const SpecNode& node);

/// JSON string literal (with quotes) for `s`.
std::string json_quote(std::string_view s);

/// Shortest round-trip text for a double; always contains '.', 'e' or is
/// non-finite so the value re-parses as a float.
std::string format_double(double v);

/// Text of a scalar as it would appear in a CSV cell or a prompt:
/// strings raw, numbers in JSON form, booleans true/false, null empty.
std::string scalar_text(const Scalar& s);

}  // namespace chartnl
