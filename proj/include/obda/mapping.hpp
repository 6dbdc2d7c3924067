#pragma once

#include "obda/ontology.hpp"
#include "obda/relalg.hpp"
#include "obda/schema.hpp"
#include "obda/uri_template.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace obda {

/// One mapping assertion: a class or property head with URI templates over
/// body attributes, and a relational body over the database schema.
///
/// Bodies are normalized at construction: a not-null filter over the
/// template attributes is inserted unless the schema already guarantees
/// them non-null. Body output attributes are the mapping's z tuple.
struct Mapping {
    std::string id;
    std::string predicate;
    std::string origin; // pre-split predicate name; empty = predicate
    bool classHead = true;
    Template subjectTemplate;
    Template objectTemplate; // property heads only
    RelExprPtr body;

    const std::string& displayName() const { return origin.empty() ? predicate : origin; }

    /// Subject attribute tuple x (the subject template's placeholders).
    const std::vector<std::string>& subjectAttrs() const { return subjectTemplate.placeholders(); }
    /// Object attribute tuple y.
    const std::vector<std::string>& objectAttrs() const { return objectTemplate.placeholders(); }
    /// Template attributes x ∪ y in order, duplicates removed.
    std::vector<std::string> templateAttrs() const;
};

/// Builds a class/property mapping, validating attribute coverage and
/// inserting the not-null guard.
Mapping makeClassMapping(std::string id, std::string klass, Template subject, RelExprPtr body, const Schema& schema);
Mapping makePropertyMapping(std::string id, std::string property, Template subject, Template object, RelExprPtr body,
                            const Schema& schema);

bool sameMappingShape(const Mapping& a, const Mapping& b);

/// An OBDA specification (T, M, Σ).
struct ObdaSpec {
    Ontology ontology;
    std::vector<Mapping> mappings;
    std::shared_ptr<const Schema> schema;

    std::vector<const Mapping*> mappingsOf(const std::string& predicate) const;
    void validate() const;
};

/// Constraint component C of a constrained specification.
struct ExactPredicate {
    std::string predicate;
};

struct Vfd {
    enum class Kind { Branching, Path };
    Kind kind;
    Template domainTemplate;
    std::vector<std::string> properties;
};

struct Oce {
    enum class Kind { Domain, Range };
    Kind kind;
    std::string property;
    std::string klass;
};

struct ConstraintSet {
    std::vector<ExactPredicate> exacts;
    std::vector<Vfd> vfds;
    std::vector<Oce> oces;

    bool empty() const { return exacts.empty() && vfds.empty() && oces.empty(); }
};

struct ConstrainedSpec {
    ObdaSpec spec;
    ConstraintSet constraints;

    void validate() const;
};

/// The virtual assertion set of the mappings over an instance. Nulls in
/// template attributes never produce assertions; set semantics.
AssertionSet virtualAssertions(const std::vector<Mapping>& mappings, const Instance& inst);

/// The RDF graph exposed by an instance: saturateAbox over the virtual
/// assertions of the original mappings.
AssertionSet saturatedVirtualGraph(const ObdaSpec& spec, const Instance& inst);

/// T-mapping construction. For every predicate, the original mappings are
/// kept and one mapping per non-reflexive generator is added (deduplicated
/// among themselves). Contract: for every instance, the virtual assertions
/// of the result equal the saturated virtual graph.
std::vector<Mapping> saturateTmappings(const Ontology& ont, const std::vector<Mapping>& mappings,
                                       const Schema& schema);

/// Replaces the T-mappings of each exact predicate by its original
/// mappings. Throws SpecError for an exact predicate without mappings.
std::vector<Mapping> applyExactPredicates(std::vector<Mapping> tmaps, const std::vector<ExactPredicate>& exacts,
                                          const std::vector<Mapping>& originals);

/// Merges mappings of one predicate that share a template pair into a
/// single mapping with a union body (the common attributes survive).
/// Precedes basic-ness analysis.
std::vector<Mapping> mergeSameTemplatePair(const std::vector<Mapping>& tmaps, const Schema& schema);

/// Splitting that lifts the basic-instance assumption: a predicate with k
/// distinct template pairs becomes k fresh predicates; the rewrite table
/// maps the original name to its fragments.
struct SplitResult {
    std::vector<Mapping> mappings;
    std::map<std::string, std::vector<std::string>> rewriteTable;
};
SplitResult splitMultiTemplate(const std::vector<Mapping>& tmaps);

/// Mapping file: one `map <id> : <head> <- <sql>` per line.
std::vector<Mapping> parseMappingsText(const std::string& text, const Schema& schema,
                                       const Ontology& ont, const std::string& source = "<mappings>");
std::vector<Mapping> loadMappingsFile(const std::filesystem::path& path, const Schema& schema, const Ontology& ont);

/// Constraint file: `exact`, `vfd branching|path`, `oce domain|range` lines.
ConstraintSet parseConstraintsText(const std::string& text, const std::string& source = "<constraints>");
ConstraintSet loadConstraintsFile(const std::filesystem::path& path);
std::string constraintsToText(const ConstraintSet& c);

/// SQL-subset parser for mapping bodies (SELECT-FROM-WHERE, inner joins by
/// shared attribute names, equality/inequality filters).
RelExprPtr parseSqlBody(const std::string& text, const Schema& schema, const std::string& source = "<sql>",
                        unsigned line = 1);

} // namespace obda
