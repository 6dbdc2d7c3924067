#pragma once

// Small builders shared by the test suites.

#include "obda/schema.hpp"

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

namespace obda::testsupport {

inline Value I(int64_t v) { return Value::integer(v); }
inline Value T(const std::string& s) { return Value::text(s); }
inline Value N() { return Value::null(); }

inline Relation mkRel(std::vector<std::string> attrs, std::initializer_list<Tuple> rows) {
    Relation r(std::move(attrs));
    for (const auto& t : rows) r.insert(t);
    return r;
}

/// Instance over a throwaway schema inferred from the relations (all
/// columns typed by the first non-null value seen; defaults to int).
inline Instance instanceOf(std::vector<std::pair<std::string, Relation>> rels) {
    auto schema = std::make_shared<Schema>();
    for (auto& [name, r] : rels) {
        std::vector<ValueType> types(r.attrs.size(), ValueType::Int);
        for (std::size_t i = 0; i < r.attrs.size(); ++i)
            for (const auto& row : r.rows)
                if (!row[i].isNull()) {
                    types[i] = row[i].isInt() ? ValueType::Int : ValueType::Text;
                    break;
                }
        schema->addRelation(name, r.attrs, types);
    }
    Instance inst(schema);
    for (auto& [name, r] : rels) inst.setRelation(name, std::move(r));
    return inst;
}

} // namespace obda::testsupport
