#pragma once

#include "obda/diagnostics.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace obda {

/// Three-valued logic used by filters: true, false, unknown.
enum class Truth { True, False, Unknown };

inline Truth truthNot(Truth t) {
    switch (t) {
        case Truth::True: return Truth::False;
        case Truth::False: return Truth::True;
        default: return Truth::Unknown;
    }
}

inline Truth truthAnd(Truth a, Truth b) {
    if (a == Truth::False || b == Truth::False) return Truth::False;
    if (a == Truth::True && b == Truth::True) return Truth::True;
    return Truth::Unknown;
}

/// Declared column types. Dates are stored as ISO text, which makes the
/// text ordering coincide with the chronological one.
enum class ValueType { Int, Text, Date };

ValueType parseValueType(const std::string& name);
std::string valueTypeName(ValueType t);

/// A scalar value: null, a 64-bit integer, or text.
///
/// Values carry a total identity order (null < integers < text) used for
/// set-based storage. Filter comparisons live in valueEq/valueLt below and
/// follow the three-valued semantics instead.
class Value {
public:
    Value() = default;

    static Value null() { return Value(); }
    static Value integer(int64_t v) {
        Value r;
        r.rep_ = v;
        return r;
    }
    static Value text(std::string v) {
        Value r;
        r.rep_ = std::move(v);
        return r;
    }

    bool isNull() const { return rep_.index() == 0; }
    bool isInt() const { return rep_.index() == 1; }
    bool isText() const { return rep_.index() == 2; }

    int64_t asInt() const { return std::get<int64_t>(rep_); }
    const std::string& asText() const { return std::get<std::string>(rep_); }

    friend bool operator==(const Value& a, const Value& b) { return a.rep_ == b.rep_; }
    friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }
    friend bool operator<(const Value& a, const Value& b) { return a.rep_ < b.rep_; }

    /// Rendering used by templates, CSV output and diagnostics. Null renders
    /// as the empty string.
    std::string display() const {
        if (isNull()) return "";
        if (isInt()) return std::to_string(asInt());
        return asText();
    }

private:
    std::variant<std::monostate, int64_t, std::string> rep_;
};

using Tuple = std::vector<Value>;

/// Equality under the three-valued semantics: unknown if either side is
/// null, an error if the sides have different non-null types.
Truth valueEq(const Value& a, const Value& b);

/// Strict order under the three-valued semantics; same typing rules as
/// valueEq. Text compares lexicographically.
Truth valueLt(const Value& a, const Value& b);

} // namespace obda
