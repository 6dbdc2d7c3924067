#pragma once

#include "obda/mapping.hpp"
#include "obda/relalg.hpp"
#include "obda/sparql.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace obda {

/// Compilation toggles. cteMode requires vfd; semantic key-based rewriting
/// operates on the union-of-joins form and is skipped when the structural
/// phase is off or aborted.
struct CompileOptions {
    bool structural = true;
    bool semanticKeys = true;
    bool exactPredicates = true;
    bool vfd = true;
    bool cteMode = false;
    bool explain = false;
    long long branchBudget = 512;

    void validate() const;

    /// All valid toggle combinations (cte only with vfd); used by the
    /// verifier and the soundness suite.
    static std::vector<CompileOptions> allCombinations();
    std::string label() const;
};

struct StageCounts {
    std::string stage;
    long long branches = 0;
    long long joins = 0;
    long long unions() const { return branches > 0 ? branches - 1 : 0; }
};

struct ExplainTrace {
    std::vector<StageCounts> stages;
    std::vector<std::string> notes;
    std::string expression; // pretty-print of the final expression
    std::string toText() const;
};

struct TranslateResult {
    RelExprPtr expr;
    std::string sql;
    ExplainTrace trace;
};

/// Schema and storage of the ternary triple relation used by tau.
extern const char* const kTripleRelation;
std::shared_ptr<Schema> tripleSchema();
Instance tripleInstance(const RdfGraph& g);

/// The simple-entailment SPARQL-to-SQL translation over the ternary
/// `triple` relation: for every graph G and pattern P, evaluating tau(P)
/// over triple(G) equals the relational answer to P over G.
RelExprPtr tau(const GraphPattern& pattern);

/// Deterministic SQL text for an expression. DISTINCT everywhere, JOIN ..
/// ON, UNION, EXCEPT (LEFT JOIN where the optional-pattern shape allows),
/// || concatenation for URI construction, WITH for CTE bindings.
std::string emitSql(const RelExpr& expr);
inline std::string emitSql(const RelExprPtr& e) { return emitSql(*e); }

/// Compilation stages, in pipeline order. Each stage includes the previous
/// ones; explain traces report expression sizes after each.
enum class Stage { Unfold = 0, Structural = 1, Vfd = 2, Semantic = 3 };

/// The compiler pipeline over a constrained specification: T-mapping
/// saturation, exact-predicate pruning, template-pair merging, multi-
/// template splitting, unfolding, structural/VFD/semantic optimization and
/// SQL emission.
class Translator {
public:
    Translator(const ConstrainedSpec& cspec, CompileOptions options);

    TranslateResult translate(const Query& q) const;

    /// Expression compiled with optimizations up to `stage` only (honoring
    /// the option toggles). Used for stage-size reporting and tests.
    RelExprPtr compileAtStage(const Query& q, Stage stage) const;

    const std::vector<Mapping>& basicTmaps() const { return tmaps_; }
    const std::map<std::string, std::vector<std::string>>& rewriteTable() const { return rewriteTable_; }
    const ConstraintSet& activeConstraints() const { return constraints_; }

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    const ConstrainedSpec cspec_;
    CompileOptions options_;
    std::vector<Mapping> tmaps_; // basic: merged + split
    std::map<std::string, std::vector<std::string>> rewriteTable_;
    ConstraintSet constraints_;
};

} // namespace obda
