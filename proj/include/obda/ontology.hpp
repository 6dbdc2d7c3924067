#pragma once

#include "obda/value.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace obda {

/// A class or property assertion; object is empty for class assertions.
struct Assertion {
    std::string predicate;
    Value subject;
    std::optional<Value> object;

    friend bool operator==(const Assertion& a, const Assertion& b) {
        return a.predicate == b.predicate && a.subject == b.subject && a.object == b.object;
    }
    friend bool operator<(const Assertion& a, const Assertion& b) {
        if (a.predicate != b.predicate) return a.predicate < b.predicate;
        if (!(a.subject == b.subject)) return a.subject < b.subject;
        if (a.object.has_value() != b.object.has_value()) return !a.object.has_value();
        if (a.object && !(*a.object == *b.object)) return *a.object < *b.object;
        return false;
    }
};

using AssertionSet = std::set<Assertion>;

/// Supported axiom forms: SubClass(A ⊑ B), SubProperty(P ⊑ Q),
/// Domain(P, A), Range(P, A). Equivalence parses as two subsumptions.
struct Axiom {
    enum class Kind { SubClass, SubProperty, Domain, Range };
    Kind kind;
    std::string lhs; // subclass / subproperty / property
    std::string rhs; // superclass / superproperty / class
};

struct Ontology {
    std::set<std::string> classNames;
    std::set<std::string> propertyNames;
    std::vector<Axiom> axioms;

    bool isClass(const std::string& n) const { return classNames.count(n) != 0; }
    bool isProperty(const std::string& n) const { return propertyNames.count(n) != 0; }
    bool isDeclared(const std::string& n) const { return isClass(n) || isProperty(n); }

    void declareClass(const std::string& n);
    void declareProperty(const std::string& n);
    void addAxiom(Axiom a);
};

/// Provenance of one inferred T-mapping: `target` is populated from the
/// mappings of `source`, restricted to the given position.
struct Generator {
    enum class Position { Self, SubjectOf, ObjectOf };
    std::string target;
    std::string source;
    Position position;

    friend bool operator<(const Generator& a, const Generator& b) {
        if (a.target != b.target) return a.target < b.target;
        if (a.source != b.source) return a.source < b.source;
        return a.position < b.position;
    }
    friend bool operator==(const Generator& a, const Generator& b) {
        return a.target == b.target && a.source == b.source && a.position == b.position;
    }
};

/// Classification output: per predicate, every generator feeding it,
/// including the reflexive one. Deterministically ordered.
struct Closure {
    std::map<std::string, std::vector<Generator>> generators;

    const std::vector<Generator>& of(const std::string& predicate) const;
};

/// Reflexive-transitive closure of the subsumption axioms, with domain and
/// range contributions folded in. Cycles are allowed.
Closure classify(const Ontology& ont);

/// Least fixpoint of the four axiom rules over an assertion set. No fresh
/// individuals are invented (the restricted entailment regime).
AssertionSet saturateAbox(const Ontology& ont, const AssertionSet& assertions);

/// Turtle-like subset, one axiom or declaration per line:
///   :Wellbore a owl:Class .
///   :isInWell a owl:ObjectProperty .
///   :ProdWellbore rdfs:subClassOf :DevelopWellbore .
///   :isInWell rdfs:domain :Wellbore .
Ontology parseOntologyText(const std::string& text, const std::string& source = "<ontology>");
Ontology loadOntologyFile(const std::filesystem::path& path);

} // namespace obda
