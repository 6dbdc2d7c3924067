#pragma once

#include "obda/value.hpp"

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace obda {

/// A materialized relation: an ordered attribute list plus a set of tuples.
/// Set semantics throughout; tuple arity always equals attrs.size().
struct Relation {
    std::vector<std::string> attrs;
    std::set<Tuple> rows;

    Relation() = default;
    explicit Relation(std::vector<std::string> attrs) : attrs(std::move(attrs)) {}

    std::size_t arity() const { return attrs.size(); }

    /// Position of an attribute, or throws SchemaError.
    std::size_t indexOf(const std::string& attr) const;
    bool hasAttr(const std::string& attr) const;

    void insert(Tuple t);

    bool operator==(const Relation& other) const { return attrs == other.attrs && rows == other.rows; }
};

/// Database schema: relations with typed attributes, primary keys, unique
/// constraints and inclusion dependencies.
struct Schema {
    struct RelationDef {
        std::vector<std::string> attrs;
        std::vector<ValueType> types; // aligned with attrs

        std::size_t indexOf(const std::string& attr) const;
        bool hasAttr(const std::string& attr) const;
    };

    struct InclusionDep {
        std::string from;
        std::vector<std::string> fromAttrs;
        std::string to;
        std::vector<std::string> toAttrs;
    };

    std::map<std::string, RelationDef> relations;
    std::map<std::string, std::vector<std::string>> primaryKeys;
    std::map<std::string, std::set<std::vector<std::string>>> uniqueSets;
    std::map<std::string, std::set<std::string>> notNullAttrs;
    std::vector<InclusionDep> inclusionDeps;

    bool hasRelation(const std::string& name) const { return relations.count(name) != 0; }
    const RelationDef& relation(const std::string& name) const;

    void addRelation(const std::string& name, std::vector<std::string> attrs, std::vector<ValueType> types);
    void addPrimaryKey(const std::string& rel, std::vector<std::string> attrs);
    void addUnique(const std::string& rel, std::vector<std::string> attrs);
    void addNotNull(const std::string& rel, const std::string& attr);
    void addInclusion(InclusionDep dep);

    bool isNotNull(const std::string& rel, const std::string& attr) const;

    /// All declared unique attribute sets of a relation, primary key included.
    std::vector<std::vector<std::string>> uniqueSetsOf(const std::string& rel) const;

    /// Checks the structural invariants (keys and deps reference existing
    /// attributes, key sets non-empty). Throws SchemaError.
    void validate() const;
};

/// A database instance for a schema. Loading enforces primary-key
/// uniqueness and absence of nulls in key attributes.
struct Instance {
    std::shared_ptr<const Schema> schema;
    std::map<std::string, Relation> relations;

    explicit Instance(std::shared_ptr<const Schema> schema = nullptr) : schema(std::move(schema)) {}

    const Relation& relation(const std::string& name) const;

    /// Installs a relation after checking it against the schema (attribute
    /// set, key uniqueness, no null keys).
    void setRelation(const std::string& name, Relation rel);

    /// Row counts plus a content hash; used to stamp mining reports.
    std::string fingerprint() const;
};

} // namespace obda
