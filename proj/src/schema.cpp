#include "obda/schema.hpp"

#include "obda/diagnostics.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace obda {

std::size_t Relation::indexOf(const std::string& attr) const {
    for (std::size_t i = 0; i < attrs.size(); ++i)
        if (attrs[i] == attr) return i;
    throw SchemaError("unknown attribute '" + attr + "'");
}

bool Relation::hasAttr(const std::string& attr) const {
    return std::find(attrs.begin(), attrs.end(), attr) != attrs.end();
}

void Relation::insert(Tuple t) {
    if (t.size() != attrs.size()) throw SchemaError("tuple arity does not match relation arity");
    rows.insert(std::move(t));
}

std::size_t Schema::RelationDef::indexOf(const std::string& attr) const {
    for (std::size_t i = 0; i < attrs.size(); ++i)
        if (attrs[i] == attr) return i;
    throw SchemaError("unknown attribute '" + attr + "'");
}

bool Schema::RelationDef::hasAttr(const std::string& attr) const {
    return std::find(attrs.begin(), attrs.end(), attr) != attrs.end();
}

const Schema::RelationDef& Schema::relation(const std::string& name) const {
    auto it = relations.find(name);
    if (it == relations.end()) throw SchemaError("unknown relation '" + name + "'");
    return it->second;
}

void Schema::addRelation(const std::string& name, std::vector<std::string> attrs, std::vector<ValueType> types) {
    if (relations.count(name)) throw SchemaError("duplicate relation '" + name + "'");
    if (attrs.size() != types.size()) throw SchemaError("attribute/type count mismatch for '" + name + "'");
    std::set<std::string> seen;
    for (const auto& a : attrs)
        if (!seen.insert(a).second) throw SchemaError("duplicate attribute '" + a + "' in relation '" + name + "'");
    relations[name] = RelationDef{std::move(attrs), std::move(types)};
}

void Schema::addPrimaryKey(const std::string& rel, std::vector<std::string> attrs) {
    if (attrs.empty()) throw SchemaError("empty primary key for '" + rel + "'");
    primaryKeys[rel] = std::move(attrs);
}

void Schema::addUnique(const std::string& rel, std::vector<std::string> attrs) {
    if (attrs.empty()) throw SchemaError("empty unique set for '" + rel + "'");
    std::sort(attrs.begin(), attrs.end());
    uniqueSets[rel].insert(std::move(attrs));
}

void Schema::addNotNull(const std::string& rel, const std::string& attr) { notNullAttrs[rel].insert(attr); }

bool Schema::isNotNull(const std::string& rel, const std::string& attr) const {
    auto pk = primaryKeys.find(rel);
    if (pk != primaryKeys.end() &&
        std::find(pk->second.begin(), pk->second.end(), attr) != pk->second.end())
        return true;
    auto it = notNullAttrs.find(rel);
    return it != notNullAttrs.end() && it->second.count(attr) != 0;
}

void Schema::addInclusion(InclusionDep dep) {
    if (dep.fromAttrs.size() != dep.toAttrs.size())
        throw SchemaError("inclusion dependency arity mismatch between '" + dep.from + "' and '" + dep.to + "'");
    inclusionDeps.push_back(std::move(dep));
}

std::vector<std::vector<std::string>> Schema::uniqueSetsOf(const std::string& rel) const {
    std::vector<std::vector<std::string>> out;
    auto pk = primaryKeys.find(rel);
    if (pk != primaryKeys.end()) {
        auto sorted = pk->second;
        std::sort(sorted.begin(), sorted.end());
        out.push_back(sorted);
    }
    auto us = uniqueSets.find(rel);
    if (us != uniqueSets.end())
        for (const auto& s : us->second)
            if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    return out;
}

void Schema::validate() const {
    auto checkAttrs = [&](const std::string& rel, const std::vector<std::string>& attrs, const char* what) {
        const auto& def = relation(rel);
        for (const auto& a : attrs)
            if (!def.hasAttr(a))
                throw SchemaError(std::string(what) + " references unknown attribute '" + a + "' of relation '" +
                                  rel + "'");
    };
    for (const auto& [rel, key] : primaryKeys) {
        if (key.empty()) throw SchemaError("empty primary key for '" + rel + "'");
        checkAttrs(rel, key, "primary key");
    }
    for (const auto& [rel, sets] : uniqueSets)
        for (const auto& s : sets) checkAttrs(rel, s, "unique constraint");
    for (const auto& [rel, attrs] : notNullAttrs)
        checkAttrs(rel, std::vector<std::string>(attrs.begin(), attrs.end()), "not-null constraint");
    for (const auto& dep : inclusionDeps) {
        checkAttrs(dep.from, dep.fromAttrs, "inclusion dependency");
        checkAttrs(dep.to, dep.toAttrs, "inclusion dependency");
    }
}

const Relation& Instance::relation(const std::string& name) const {
    auto it = relations.find(name);
    if (it == relations.end()) throw SchemaError("no data loaded for relation '" + name + "'");
    return it->second;
}

void Instance::setRelation(const std::string& name, Relation rel) {
    if (schema) {
        const auto& def = schema->relation(name);
        if (rel.attrs != def.attrs)
            throw SchemaError("attribute list of loaded data for '" + name + "' does not match the schema");
        for (std::size_t i = 0; i < rel.attrs.size(); ++i) {
            if (!schema->isNotNull(name, rel.attrs[i])) continue;
            for (const auto& row : rel.rows)
                if (row[i].isNull())
                    throw SchemaError("null in not-null attribute '" + rel.attrs[i] + "' of relation '" + name + "'");
        }
        auto pk = schema->primaryKeys.find(name);
        if (pk != schema->primaryKeys.end()) {
            std::vector<std::size_t> idx;
            for (const auto& a : pk->second) idx.push_back(rel.indexOf(a));
            std::set<Tuple> seen;
            for (const auto& row : rel.rows) {
                Tuple key;
                for (auto i : idx) {
                    if (row[i].isNull())
                        throw SchemaError("null in primary-key attribute of relation '" + name + "'");
                    key.push_back(row[i]);
                }
                if (!seen.insert(std::move(key)).second)
                    throw SchemaError("primary-key violation in relation '" + name + "'");
            }
        }
    }
    relations[name] = std::move(rel);
}

namespace {

void hashCombine(std::uint64_t& h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace

std::string Instance::fingerprint() const {
    std::uint64_t h = 0;
    std::size_t total = 0;
    for (const auto& [name, rel] : relations) {
        hashCombine(h, fnv1a(name));
        total += rel.rows.size();
        for (const auto& row : rel.rows)
            for (const auto& v : row) hashCombine(h, fnv1a(v.isNull() ? "\x01null" : v.display()));
    }
    std::ostringstream out;
    out << total << " rows, hash " << std::hex << h;
    return out.str();
}

} // namespace obda
