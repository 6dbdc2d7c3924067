#include "obda/value.hpp"

namespace obda {

ValueType parseValueType(const std::string& name) {
    if (name == "int") return ValueType::Int;
    if (name == "text") return ValueType::Text;
    if (name == "date") return ValueType::Date;
    throw SchemaError("unknown attribute type '" + name + "' (expected int, text or date)");
}

std::string valueTypeName(ValueType t) {
    switch (t) {
        case ValueType::Int: return "int";
        case ValueType::Text: return "text";
        default: return "date";
    }
}

namespace {

void requireComparable(const Value& a, const Value& b) {
    if (a.isInt() != b.isInt())
        throw TypeError("cannot compare " + std::string(a.isInt() ? "int" : "text") + " value '" + a.display() +
                        "' with " + std::string(b.isInt() ? "int" : "text") + " value '" + b.display() + "'");
}

} // namespace

Truth valueEq(const Value& a, const Value& b) {
    if (a.isNull() || b.isNull()) return Truth::Unknown;
    requireComparable(a, b);
    return a == b ? Truth::True : Truth::False;
}

Truth valueLt(const Value& a, const Value& b) {
    if (a.isNull() || b.isNull()) return Truth::Unknown;
    requireComparable(a, b);
    if (a.isInt()) return a.asInt() < b.asInt() ? Truth::True : Truth::False;
    return a.asText() < b.asText() ? Truth::True : Truth::False;
}

} // namespace obda
