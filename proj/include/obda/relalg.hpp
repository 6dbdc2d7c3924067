#pragma once

#include "obda/filter.hpp"
#include "obda/schema.hpp"
#include "obda/uri_template.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace obda {

struct RelExpr;
using RelExprPtr = std::shared_ptr<const RelExpr>;

/// Output binding of a UriConstruct node: a fresh attribute filled either
/// from a template over input attributes or from a constant.
struct UriBinding {
    std::string var;
    Template tmpl;
    std::vector<std::string> attrs; // aligned with tmpl placeholders
    std::optional<Value> constant;  // set instead of tmpl/attrs for constant binds
};

/// Relational-algebra expression tree. Nodes are immutable and shared.
///
/// A zero-child Union with an explicit attribute list denotes the empty
/// relation over those attributes (unfolding of unmapped predicates and
/// pruned join branches normalize to it).
struct RelExpr {
    enum class Kind {
        Base,         // name
        Select,       // filter, children[0]
        Project,      // attrs, children[0]
        Rename,       // renames (new <- old), children[0]
        NaturalJoin,  // children (n-ary, shared attributes)
        EquiJoin,     // children[0], children[1], joinPairs; attr sets disjoint
        Union,        // children (n-ary, same attribute set); 0-ary = empty over attrs
        Difference,   // children[0] minus children[1]
        Padding,      // attrs (fresh, filled with null), children[0]
        UriConstruct, // uri, children[0]
        CteRef,       // name
        WithCte       // ctes, children[0] = body
    };

    Kind kind;
    std::string name;
    Filter filter = Filter::always();
    std::vector<std::string> attrs;
    std::vector<std::pair<std::string, std::string>> renames; // (new, old)
    std::vector<std::pair<std::string, std::string>> joinPairs; // (left attr, right attr)
    UriBinding uri;
    std::vector<std::pair<std::string, RelExprPtr>> ctes;
    std::vector<RelExprPtr> children;

    explicit RelExpr(Kind k) : kind(k) {}
};

namespace rel {

RelExprPtr base(std::string name);
RelExprPtr select(Filter f, RelExprPtr child);
/// Collapses nested projections.
RelExprPtr project(std::vector<std::string> attrs, RelExprPtr child);
RelExprPtr rename(std::vector<std::pair<std::string, std::string>> renames, RelExprPtr child);
RelExprPtr naturalJoin(std::vector<RelExprPtr> children);
RelExprPtr equiJoin(RelExprPtr left, RelExprPtr right, std::vector<std::pair<std::string, std::string>> pairs);
RelExprPtr setUnion(std::vector<RelExprPtr> children);
RelExprPtr empty(std::vector<std::string> attrs);
RelExprPtr difference(RelExprPtr left, RelExprPtr right);
RelExprPtr padding(std::vector<std::string> attrs, RelExprPtr child);
RelExprPtr uriConstruct(std::string var, Template tmpl, std::vector<std::string> attrs, RelExprPtr child);
RelExprPtr constBind(std::string var, Value constant, RelExprPtr child);
RelExprPtr cteRef(std::string name);
RelExprPtr withCte(std::vector<std::pair<std::string, RelExprPtr>> ctes, RelExprPtr body);

} // namespace rel

bool structurallyEqual(const RelExpr& a, const RelExpr& b);
inline bool structurallyEqual(const RelExprPtr& a, const RelExprPtr& b) { return structurallyEqual(*a, *b); }
std::size_t structuralHash(const RelExpr& e);

/// Output attributes of an expression over a schema; validates shape
/// constraints along the way (throws SchemaError / PlanError).
std::vector<std::string> outputAttrs(const RelExpr& e, const Schema& schema);

/// Conservative nullability: the output attributes that could carry null.
/// Declared not-null columns stay non-null through selects, projections,
/// renames and joins; padding columns are always nullable.
std::set<std::string> nullableAttrs(const RelExpr& e, const Schema& schema);

/// Expression size in union-of-joins terms.
/// `branches` multiplies across join children and sums across unions;
/// `joins` is the maximal per-branch join count. Both are invariant under
/// join-over-union distribution.
struct ExprStats {
    long long branches = 1;
    long long joins = 0;
    long long unions() const { return branches > 0 ? branches - 1 : 0; }
};
ExprStats exprStats(const RelExpr& e);

std::string prettyPrint(const RelExpr& e);

/// Replaces every structurally-equal occurrence of `target` by `replacement`.
RelExprPtr substitute(const RelExprPtr& e, const RelExprPtr& target, const RelExprPtr& replacement);

/// Number of structurally-equal occurrences of `target` in `e`.
std::size_t countOccurrences(const RelExprPtr& e, const RelExprPtr& target);

} // namespace obda
