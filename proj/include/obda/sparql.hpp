#pragma once

#include "obda/filter.hpp"
#include "obda/mapping.hpp"
#include "obda/value.hpp"

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace obda {

/// RDF graphs are ternary relations over scalar values; class membership is
/// an rdf:type triple. Predicates of asserted triples are text values.
struct RdfTriple {
    Value subject;
    Value predicate;
    Value object;

    friend bool operator==(const RdfTriple& a, const RdfTriple& b) {
        return a.subject == b.subject && a.predicate == b.predicate && a.object == b.object;
    }
    friend bool operator<(const RdfTriple& a, const RdfTriple& b) {
        if (!(a.subject == b.subject)) return a.subject < b.subject;
        if (!(a.predicate == b.predicate)) return a.predicate < b.predicate;
        return a.object < b.object;
    }
};

struct RdfGraph {
    std::set<RdfTriple> triples;
};

inline const std::string kRdfType = "rdf:type";

RdfGraph graphOfAssertions(const AssertionSet& assertions);

/// A position in a triple pattern: a variable or a constant term.
struct Term {
    bool variable = false;
    std::string var;
    Value value;

    static Term v(std::string name) { return {true, std::move(name), Value()}; }
    static Term c(Value val) { return {false, {}, std::move(val)}; }
};

struct TriplePattern {
    Term subject;
    Term predicate;
    Term object;
};

/// Graph pattern AST. Filters reuse the relational three-valued filter
/// over variable names; bound(v) is encoded as not(isNull(v)).
struct GraphPattern;
using PatternPtr = std::shared_ptr<const GraphPattern>;

struct GraphPattern {
    enum class Kind { Bgp, Filter, Bind, Union, Join, Opt };
    Kind kind;
    std::vector<TriplePattern> triples;    // Bgp
    Filter condition = Filter::always();   // Filter; Opt's F
    std::string bindVar;                   // Bind
    Value bindValue;                       // Bind
    std::vector<PatternPtr> children;

    explicit GraphPattern(Kind k) : kind(k) {}
};

namespace pat {
PatternPtr bgp(std::vector<TriplePattern> triples);
PatternPtr filter(Filter condition, PatternPtr child);
PatternPtr bind(PatternPtr child, std::string var, Value value);
PatternPtr join(PatternPtr a, PatternPtr b);
PatternPtr setUnion(PatternPtr a, PatternPtr b);
PatternPtr opt(PatternPtr left, PatternPtr right, Filter condition);
} // namespace pat

/// Variables of a pattern in first-appearance order.
std::vector<std::string> patternVars(const GraphPattern& p);

/// Variables bound in every solution of the pattern.
std::set<std::string> alwaysBoundVars(const GraphPattern& p);

/// A parsed SELECT query: pattern plus answer variables.
struct Query {
    PatternPtr pattern;
    std::vector<std::string> answerVars;
};

/// Parses the supported SELECT fragment (BGP, FILTER with =, <, bound,
/// !, &&; OPTIONAL; UNION; BIND). Rejects aggregates, property paths and
/// subqueries with positioned diagnostics. Blank nodes become fresh
/// variables.
Query parseQuery(const std::string& text, const std::string& source = "<query>");

/// Partial solution mappings; absent variable = unbound.
using SolutionMapping = std::map<std::string, Value>;
using SolutionSet = std::set<SolutionMapping>;

/// Simple-entailment SPARQL evaluation of a pattern over a graph.
SolutionSet answer(const GraphPattern& pattern, const RdfGraph& graph);
inline SolutionSet answer(const PatternPtr& p, const RdfGraph& g) { return answer(*p, g); }

/// Restricts solutions to the answer variables (with set dedup).
SolutionSet projectSolutions(const SolutionSet& sols, const std::vector<std::string>& vars);

/// The relational form of a solution set: unbound variables padded with
/// null, attribute order = vars.
Relation solutionsToRelation(const SolutionSet& sols, const std::vector<std::string>& vars);

/// Ground truth for every translation: evaluates the query over the
/// saturated virtual RDF graph of the instance and projects the answer
/// variables.
SolutionSet oracleAnswer(const Query& q, const ObdaSpec& spec, const Instance& inst);
Relation oracleAnswerRelation(const Query& q, const ObdaSpec& spec, const Instance& inst);

} // namespace obda
