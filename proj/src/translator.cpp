#include "obda/translator.hpp"

#include "obda/diagnostics.hpp"
#include "obda/eval.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace obda {

// ---------------------------------------------------------------------------
// Options and trace.

void CompileOptions::validate() const {
    if (cteMode && !vfd) throw SpecError("cte mode requires the VFD optimization to be enabled");
    if (branchBudget < 1) throw SpecError("branch budget must be positive");
}

std::vector<CompileOptions> CompileOptions::allCombinations() {
    std::vector<CompileOptions> out;
    for (bool structural : {false, true})
        for (bool semantic : {false, true})
            for (bool exact : {false, true})
                for (int vfdMode = 0; vfdMode < 3; ++vfdMode) {
                    CompileOptions o;
                    o.structural = structural;
                    o.semanticKeys = semantic;
                    o.exactPredicates = exact;
                    o.vfd = vfdMode > 0;
                    o.cteMode = vfdMode == 2;
                    out.push_back(o);
                }
    return out;
}

std::string CompileOptions::label() const {
    std::string s;
    s += structural ? "S" : "-";
    s += semanticKeys ? "K" : "-";
    s += exactPredicates ? "E" : "-";
    s += vfd ? "V" : "-";
    s += cteMode ? "C" : "-";
    return s;
}

std::string ExplainTrace::toText() const {
    std::ostringstream out;
    for (const auto& s : stages)
        out << "stage " << s.stage << ": " << s.branches << " union branches, " << s.unions() << " unions, "
            << s.joins << " joins\n";
    for (const auto& n : notes) out << "note: " << n << "\n";
    if (!expression.empty()) out << "expression:\n" << expression;
    return out.str();
}

// ---------------------------------------------------------------------------
// The ternary triple relation.

const char* const kTripleRelation = "triple";

std::shared_ptr<Schema> tripleSchema() {
    auto s = std::make_shared<Schema>();
    s->addRelation(kTripleRelation, {"subj", "pred", "obj"}, {ValueType::Text, ValueType::Text, ValueType::Text});
    s->addNotNull(kTripleRelation, "subj");
    s->addNotNull(kTripleRelation, "pred");
    s->addNotNull(kTripleRelation, "obj");
    return s;
}

Instance tripleInstance(const RdfGraph& g) {
    Instance inst(tripleSchema());
    Relation r({"subj", "pred", "obj"});
    for (const auto& t : g.triples) r.rows.insert({t.subject, t.predicate, t.object});
    inst.setRelation(kTripleRelation, std::move(r));
    return inst;
}

// ---------------------------------------------------------------------------
// Pattern combinators shared by tau and the unfolding path. A compiled
// pattern carries its variable list and the variables that may be unbound.

namespace {

struct Compiled {
    RelExprPtr expr;
    std::vector<std::string> vars;
    std::set<std::string> maybeNull;
};

std::vector<std::string> unionVars(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::string> out = a;
    for (const auto& v : b)
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    return out;
}

std::vector<std::string> sharedVars(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::string> out;
    for (const auto& v : a)
        if (std::find(b.begin(), b.end(), v) != b.end()) out.push_back(v);
    return out;
}

std::vector<std::string> minusVars(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::string> out;
    for (const auto& v : a)
        if (std::find(b.begin(), b.end(), v) == b.end()) out.push_back(v);
    return out;
}

/// μ-padding both sides onto the union of their attributes.
Compiled combineUnion(const Compiled& a, const Compiled& b) {
    auto vars = unionVars(a.vars, b.vars);
    auto padA = minusVars(vars, a.vars);
    auto padB = minusVars(vars, b.vars);
    Compiled out;
    out.vars = vars;
    out.expr = rel::setUnion({rel::padding(padA, a.expr), rel::padding(padB, b.expr)});
    out.maybeNull = a.maybeNull;
    out.maybeNull.insert(b.maybeNull.begin(), b.maybeNull.end());
    out.maybeNull.insert(padA.begin(), padA.end());
    out.maybeNull.insert(padB.begin(), padB.end());
    return out;
}

/// The null-case union over subsets of the shared variables: for every
/// disjoint pair V1, V2 of possibly-null shared variables, select the rows
/// where exactly those are null, drop the columns and join naturally.
Compiled combineJoin(const Compiled& a, const Compiled& b) {
    auto shared = sharedVars(a.vars, b.vars);
    std::vector<std::string> mn1, mn2;
    for (const auto& v : shared) {
        if (a.maybeNull.count(v)) mn1.push_back(v);
        if (b.maybeNull.count(v)) mn2.push_back(v);
    }
    std::vector<RelExprPtr> branches;
    auto side = [](const Compiled& c, const std::vector<std::string>& nulls) {
        RelExprPtr e = c.expr;
        if (!nulls.empty()) e = rel::select(Filter::isNull(nulls), e);
        if (!nulls.empty()) e = rel::project(minusVars(c.vars, nulls), e);
        return e;
    };
    for (std::size_t m1 = 0; m1 < (1u << mn1.size()); ++m1) {
        std::vector<std::string> v1;
        for (std::size_t i = 0; i < mn1.size(); ++i)
            if (m1 & (1u << i)) v1.push_back(mn1[i]);
        for (std::size_t m2 = 0; m2 < (1u << mn2.size()); ++m2) {
            std::vector<std::string> v2;
            for (std::size_t i = 0; i < mn2.size(); ++i)
                if (m2 & (1u << i)) v2.push_back(mn2[i]);
            bool disjoint = true;
            for (const auto& v : v2) disjoint &= std::find(v1.begin(), v1.end(), v) == v1.end();
            if (!disjoint) continue;
            branches.push_back(rel::naturalJoin({side(a, v1), side(b, v2)}));
        }
    }
    Compiled out;
    out.vars = unionVars(a.vars, b.vars);
    out.expr = rel::setUnion(std::move(branches));
    out.maybeNull = a.maybeNull;
    out.maybeNull.insert(b.maybeNull.begin(), b.maybeNull.end());
    return out;
}

/// Filters may reference variables outside the pattern; those evaluate
/// against null, so the columns are padded in and projected away again.
Compiled combineFilter(const Compiled& c, const Filter& f) {
    std::set<std::string> used;
    f.collectAttrs(used);
    std::vector<std::string> missing;
    for (const auto& v : used)
        if (std::find(c.vars.begin(), c.vars.end(), v) == c.vars.end()) missing.push_back(v);
    Compiled out = c;
    RelExprPtr e = rel::padding(missing, c.expr);
    e = rel::select(f, e);
    if (!missing.empty()) e = rel::project(c.vars, e);
    out.expr = e;
    return out;
}

Compiled combineBind(const Compiled& c, const std::string& var, const Value& value) {
    Compiled out;
    out.vars = c.vars;
    out.vars.push_back(var);
    out.maybeNull = c.maybeNull;
    out.expr = rel::constBind(var, value, c.expr);
    return out;
}

/// Opt translation: the filtered join, united with the unmatched part of
/// the left side padded with nulls. The subtrahend enumerates the subsets
/// of shared variables that may be unbound on the left.
Compiled combineOpt(const Compiled& a, const Compiled& b, const Filter& f) {
    auto shared = sharedVars(a.vars, b.vars);
    Compiled fj = combineFilter(combineJoin(a, b), f);

    std::vector<std::string> mn1;
    for (const auto& v : shared)
        if (a.maybeNull.count(v)) mn1.push_back(v);

    std::vector<RelExprPtr> pieces;
    for (std::size_t m = 0; m < (1u << mn1.size()); ++m) {
        std::vector<std::string> v1;
        for (std::size_t i = 0; i < mn1.size(); ++i)
            if (m & (1u << i)) v1.push_back(mn1[i]);
        Compiled a1 = a;
        std::vector<Filter> conds;
        if (!v1.empty()) conds.push_back(Filter::isNull(v1));
        for (const auto& v : minusVars(mn1, v1)) conds.push_back(Filter::negate(Filter::isNull({v})));
        if (!conds.empty()) a1.expr = rel::select(Filter::conj(std::move(conds)), a1.expr);
        a1.maybeNull = a.maybeNull;
        for (const auto& v : minusVars(shared, v1)) a1.maybeNull.erase(v);
        for (const auto& v : v1) a1.maybeNull.insert(v);
        Compiled inner = combineFilter(combineJoin(a1, b), f);
        RelExprPtr piece = rel::project(minusVars(a.vars, v1), inner.expr);
        piece = rel::padding(v1, piece);
        pieces.push_back(piece);
    }

    RelExprPtr unmatched = rel::difference(a.expr, rel::setUnion(std::move(pieces)));
    unmatched = rel::padding(minusVars(b.vars, a.vars), unmatched);

    Compiled out;
    out.vars = unionVars(a.vars, b.vars);
    out.expr = rel::setUnion({fj.expr, unmatched});
    out.maybeNull = a.maybeNull;
    out.maybeNull.insert(b.maybeNull.begin(), b.maybeNull.end());
    for (const auto& v : minusVars(b.vars, a.vars)) out.maybeNull.insert(v);
    return out;
}

// ---------------------------------------------------------------------------
// tau: leaves over the ternary triple relation.

Compiled tauTriple(const TriplePattern& tp) {
    const std::array<std::pair<const Term*, const char*>, 3> slots{
        {{&tp.subject, "subj"}, {&tp.predicate, "pred"}, {&tp.object, "obj"}}};
    std::vector<Filter> conds;
    std::vector<std::pair<std::string, std::string>> renames; // var <- column
    std::vector<std::string> vars;
    std::map<std::string, std::string> firstColumn;
    for (const auto& [term, column] : slots) {
        if (!term->variable) {
            conds.push_back(Filter::eq(column, term->value));
        } else if (firstColumn.count(term->var)) {
            conds.push_back(Filter::eqAttr(firstColumn[term->var], column));
        } else {
            firstColumn[term->var] = column;
            renames.emplace_back(term->var, column);
            vars.push_back(term->var);
        }
    }
    RelExprPtr e = rel::base(kTripleRelation);
    e = rel::select(Filter::conj(std::move(conds)), e);
    e = rel::rename(std::move(renames), e);
    e = rel::project(vars, e);
    return {e, vars, {}};
}

Compiled compileWith(const GraphPattern& p, const std::function<Compiled(const GraphPattern&)>& bgpLeaf) {
    switch (p.kind) {
        case GraphPattern::Kind::Bgp:
            return bgpLeaf(p);
        case GraphPattern::Kind::Filter:
            return combineFilter(compileWith(*p.children[0], bgpLeaf), p.condition);
        case GraphPattern::Kind::Bind:
            return combineBind(compileWith(*p.children[0], bgpLeaf), p.bindVar, p.bindValue);
        case GraphPattern::Kind::Union:
            return combineUnion(compileWith(*p.children[0], bgpLeaf), compileWith(*p.children[1], bgpLeaf));
        case GraphPattern::Kind::Join:
            return combineJoin(compileWith(*p.children[0], bgpLeaf), compileWith(*p.children[1], bgpLeaf));
        case GraphPattern::Kind::Opt:
            return combineOpt(compileWith(*p.children[0], bgpLeaf), compileWith(*p.children[1], bgpLeaf),
                              p.condition);
    }
    throw PlanError("unreachable pattern kind");
}

Compiled unitCompiled() {
    // the relation with a single empty tuple, as an empty projection over a
    // one-row helper relation installed by evaluate
    return {rel::base("#unit"), {}, {}};
}

} // namespace

RelExprPtr tau(const GraphPattern& pattern) {
    auto leaf = [](const GraphPattern& bgp) -> Compiled {
        if (bgp.triples.empty()) return unitCompiled();
        Compiled acc = tauTriple(bgp.triples[0]);
        for (std::size_t i = 1; i < bgp.triples.size(); ++i) acc = combineJoin(acc, tauTriple(bgp.triples[i]));
        return acc;
    };
    return compileWith(pattern, leaf).expr;
}

// ---------------------------------------------------------------------------
// Region model for BGP unfolding: each triple pattern unfolds to a set of
// alternative join legs (one per applicable mapping); a branch picks one
// leg per leaf. Hoisting is implicit: legs expose their relational cores
// and construct URIs at materialization time only.

namespace {

struct LegOut {
    Template tmpl;
    std::vector<std::string> attrs;
    std::optional<Value> constant;

    bool operator==(const LegOut& o) const {
        return tmpl == o.tmpl && attrs == o.attrs && constant.has_value() == o.constant.has_value() &&
               (!constant || *constant == *o.constant);
    }
};

struct Leg {
    RelExprPtr core;
    std::vector<std::string> coreAttrs;
    std::vector<Filter> coreConds; // over core attributes
    std::map<std::string, LegOut> outs;
    std::vector<Filter> guards; // over constructed outputs
};

bool legEqual(const Leg& a, const Leg& b) {
    if (!structurallyEqual(*a.core, *b.core)) return false;
    if (a.coreConds.size() != b.coreConds.size() || a.guards.size() != b.guards.size()) return false;
    for (std::size_t i = 0; i < a.coreConds.size(); ++i)
        if (!a.coreConds[i].structurallyEqual(b.coreConds[i])) return false;
    for (std::size_t i = 0; i < a.guards.size(); ++i)
        if (!a.guards[i].structurallyEqual(b.guards[i])) return false;
    if (a.outs.size() != b.outs.size()) return false;
    auto it = b.outs.begin();
    for (const auto& [v, o] : a.outs) {
        if (it->first != v || !(it->second == o)) return false;
        ++it;
    }
    return true;
}

struct Leaf {
    std::vector<Leg> legs;
    std::vector<std::string> vars;
};

struct Branch {
    std::vector<Leg> legs;
};

enum class InvertOutcome { Match, NoMatch, Ambiguous };

struct InvertResult {
    InvertOutcome outcome = InvertOutcome::NoMatch;
    std::vector<std::pair<std::string, std::string>> textByAttr;
};

/// Matches a constant against a template; on success yields the text each
/// placeholder must carry. Empty middle separators are ambiguous.
InvertResult invertTemplate(const Template& t, const Value& c) {
    if (t.isPassthrough()) return {InvertOutcome::Ambiguous, {}}; // handled by caller with typed equality
    if (!c.isText()) return {InvertOutcome::NoMatch, {}};
    const auto& lits = t.literals();
    const std::string& s = c.asText();
    if (s.size() < lits.front().size() || s.compare(0, lits.front().size(), lits.front()) != 0)
        return {InvertOutcome::NoMatch, {}};
    if (lits.size() >= 2 && s.size() < lits.front().size() + lits.back().size()) return {InvertOutcome::NoMatch, {}};
    if (!lits.back().empty() &&
        s.compare(s.size() - lits.back().size(), lits.back().size(), lits.back()) != 0)
        return {InvertOutcome::NoMatch, {}};
    for (std::size_t i = 1; i + 1 < lits.size(); ++i)
        if (lits[i].empty()) return {InvertOutcome::Ambiguous, {}};

    InvertResult r;
    std::size_t pos = lits.front().size();
    std::size_t end = s.size() - lits.back().size();
    for (std::size_t i = 0; i < t.arity(); ++i) {
        std::size_t stop;
        if (i + 1 == t.arity()) {
            stop = end;
        } else {
            stop = s.find(lits[i + 1], pos);
            if (stop == std::string::npos || stop > end) return {InvertOutcome::NoMatch, {}};
        }
        if (stop < pos) return {InvertOutcome::NoMatch, {}};
        r.textByAttr.emplace_back(t.placeholders()[i], s.substr(pos, stop - pos));
        pos = stop + (i + 1 == t.arity() ? 0 : lits[i + 1].size());
    }
    if (pos != end) return {InvertOutcome::NoMatch, {}};
    r.outcome = InvertOutcome::Match;
    return r;
}

/// Column types of a mapping-body expression; conservative (text) for
/// synthesized columns.
std::map<std::string, ValueType> coreTypes(const RelExpr& e, const Schema& schema) {
    std::map<std::string, ValueType> out;
    switch (e.kind) {
        case RelExpr::Kind::Base: {
            const auto& def = schema.relation(e.name);
            for (std::size_t i = 0; i < def.attrs.size(); ++i) out[def.attrs[i]] = def.types[i];
            return out;
        }
        case RelExpr::Kind::Select:
            return coreTypes(*e.children[0], schema);
        case RelExpr::Kind::Project: {
            auto in = coreTypes(*e.children[0], schema);
            for (const auto& a : e.attrs)
                if (in.count(a)) out[a] = in[a];
            return out;
        }
        case RelExpr::Kind::Rename: {
            auto in = coreTypes(*e.children[0], schema);
            for (const auto& [n, o] : e.renames)
                if (in.count(o)) {
                    in[n] = in[o];
                    in.erase(o);
                }
            return in;
        }
        case RelExpr::Kind::NaturalJoin:
        case RelExpr::Kind::EquiJoin:
        case RelExpr::Kind::Union: {
            for (const auto& c : e.children) {
                auto in = coreTypes(*c, schema);
                out.insert(in.begin(), in.end());
            }
            return out;
        }
        default:
            return out;
    }
}

Value typedSegment(const std::string& text, ValueType type) {
    if (type != ValueType::Int) return Value::text(text);
    try {
        std::size_t used = 0;
        long long v = std::stoll(text, &used);
        if (used != text.size()) return Value::null();
        return Value::integer(v);
    } catch (const std::exception&) {
        return Value::null(); // cannot be an int column value
    }
}

struct RegionContext {
    const Schema* schema = nullptr;
    std::map<std::string, std::vector<const Mapping*>> index; // predicate -> basic mappings
    const std::map<std::string, std::vector<std::string>>* rewriteTable = nullptr;
    std::vector<std::string>* notes = nullptr;
    unsigned synthCounter = 0;

    std::vector<const Mapping*> mappingsFor(const std::string& predicate) const {
        std::vector<const Mapping*> out;
        if (rewriteTable) {
            auto it = rewriteTable->find(predicate);
            if (it != rewriteTable->end()) {
                for (const auto& frag : it->second) {
                    auto mi = index.find(frag);
                    if (mi != index.end()) out.insert(out.end(), mi->second.begin(), mi->second.end());
                }
                return out;
            }
        }
        auto mi = index.find(predicate);
        if (mi != index.end()) out = mi->second;
        return out;
    }

    std::vector<const Mapping*> allMappings() const {
        std::vector<const Mapping*> out;
        for (const auto& [p, ms] : index) out.insert(out.end(), ms.begin(), ms.end());
        return out;
    }
};

/// Assigns an output binding for `var` on a leg, reconciling with any
/// previous binding. Returns false when the leg becomes infeasible.
bool assignOut(Leg& leg, RegionContext& ctx, const std::string& var, LegOut out,
               const std::map<std::string, ValueType>& types) {
    auto it = leg.outs.find(var);
    if (it == leg.outs.end()) {
        leg.outs.emplace(var, std::move(out));
        return true;
    }
    LegOut& prev = it->second;
    if (prev.constant && out.constant) return *prev.constant == *out.constant;
    if (!prev.constant && !out.constant) {
        if (!prev.tmpl.compatibleWith(out.tmpl)) return false; // incompatible templates never collide
        for (std::size_t i = 0; i < prev.attrs.size(); ++i)
            if (prev.attrs[i] != out.attrs[i]) leg.coreConds.push_back(Filter::eqAttr(prev.attrs[i], out.attrs[i]));
        return true;
    }
    // constant vs template: try to invert, else guard post-construction
    const LegOut& tm = prev.constant ? out : prev;
    const Value& c = prev.constant ? *prev.constant : *out.constant;
    if (tm.tmpl.isPassthrough()) {
        ValueType t = types.count(tm.attrs[0]) ? types.at(tm.attrs[0]) : ValueType::Text;
        if ((t == ValueType::Int) != c.isInt()) return false;
        leg.coreConds.push_back(Filter::eq(tm.attrs[0], c));
    } else {
        auto inv = invertTemplate(tm.tmpl, c);
        if (inv.outcome == InvertOutcome::NoMatch) return false;
        if (inv.outcome == InvertOutcome::Match) {
            for (const auto& [attr, text] : inv.textByAttr) {
                Value v = typedSegment(text, types.count(attr) ? types.at(attr) : ValueType::Text);
                if (v.isNull()) return false;
                leg.coreConds.push_back(Filter::eq(attr, v));
            }
        } else {
            std::string synth = "#g" + std::to_string(ctx.synthCounter++);
            leg.outs.emplace(synth, tm);
            leg.guards.push_back(Filter::eq(synth, c));
        }
    }
    return true;
}

/// Builds a term binding on the leg: variables become outputs, constants
/// become core conditions (via template inversion) or guards.
bool assignTerm(Leg& leg, RegionContext& ctx, const Term& term, const Template& tmpl,
                const std::vector<std::string>& attrs, const std::map<std::string, ValueType>& types) {
    if (term.variable) return assignOut(leg, ctx, term.var, LegOut{tmpl, attrs, std::nullopt}, types);
    if (tmpl.isPassthrough()) {
        ValueType t = types.count(attrs[0]) ? types.at(attrs[0]) : ValueType::Text;
        if ((t == ValueType::Int) != term.value.isInt()) return false;
        leg.coreConds.push_back(Filter::eq(attrs[0], term.value));
        return true;
    }
    auto inv = invertTemplate(tmpl, term.value);
    if (inv.outcome == InvertOutcome::NoMatch) return false;
    if (inv.outcome == InvertOutcome::Match) {
        for (const auto& [attr, text] : inv.textByAttr) {
            Value v = typedSegment(text, types.count(attr) ? types.at(attr) : ValueType::Text);
            if (v.isNull()) return false;
            leg.coreConds.push_back(Filter::eq(attr, v));
        }
        return true;
    }
    std::string synth = "#g" + std::to_string(ctx.synthCounter++);
    leg.outs.emplace(synth, LegOut{tmpl, attrs, std::nullopt});
    leg.guards.push_back(Filter::eq(synth, term.value));
    return true;
}

bool assignConstOut(Leg& leg, RegionContext& ctx, const Term& term, const Value& constant,
                    const std::map<std::string, ValueType>& types) {
    if (term.variable) return assignOut(leg, ctx, term.var, LegOut{Template(), {}, constant}, types);
    return term.value == constant;
}

/// Narrows a leg's core to the attributes it actually uses.
void finalizeLegCore(Leg& leg, const Mapping& m, const Schema& schema) {
    std::set<std::string> used;
    for (const auto& [v, o] : leg.outs)
        if (!o.constant) used.insert(o.attrs.begin(), o.attrs.end());
    for (const auto& f : leg.coreConds) f.collectAttrs(used);
    std::vector<std::string> attrs(used.begin(), used.end());
    leg.core = rel::project(attrs, m.body);
    leg.coreAttrs = std::move(attrs);
}

Leaf buildLeaf(const TriplePattern& tp, RegionContext& ctx) {
    Leaf leaf;
    std::set<std::string> seen;
    for (const Term* t : {&tp.subject, &tp.predicate, &tp.object})
        if (t->variable && seen.insert(t->var).second) leaf.vars.push_back(t->var);

    bool predIsVar = tp.predicate.variable;
    bool predIsType = !predIsVar && tp.predicate.value == Value::text(kRdfType);
    std::vector<const Mapping*> candidates;
    if (predIsVar || predIsType) {
        candidates = ctx.allMappings();
    } else {
        if (!tp.predicate.value.isText()) return leaf;
        candidates = ctx.mappingsFor(tp.predicate.value.asText());
    }

    for (const Mapping* m : candidates) {
        const std::string& display = m->origin.empty() ? m->predicate : m->origin;
        auto types = coreTypes(*m->body, *ctx.schema);
        Leg leg;
        bool ok = true;
        if (m->classHead) {
            // contributes rdf:type triples only
            if (!predIsVar && !predIsType) continue;
            if (predIsVar) ok &= assignConstOut(leg, ctx, tp.predicate, Value::text(kRdfType), types);
            ok = ok && assignConstOut(leg, ctx, tp.object, Value::text(display), types);
            ok = ok && assignTerm(leg, ctx, tp.subject, m->subjectTemplate, m->subjectAttrs(), types);
        } else {
            if (predIsType) continue;
            if (predIsVar) ok &= assignConstOut(leg, ctx, tp.predicate, Value::text(display), types);
            ok = ok && assignTerm(leg, ctx, tp.subject, m->subjectTemplate, m->subjectAttrs(), types);
            ok = ok && assignTerm(leg, ctx, tp.object, m->objectTemplate, m->objectAttrs(), types);
        }
        if (!ok) continue;
        finalizeLegCore(leg, *m, *ctx.schema);
        bool dup = false;
        for (const auto& other : leaf.legs) dup |= legEqual(other, leg);
        if (!dup) leaf.legs.push_back(std::move(leg));
    }
    return leaf;
}

// -- branch-level normalization -------------------------------------------

/// Reconciles the outputs for one variable across the legs of a branch:
/// incompatible templates prune the branch, constants are pushed into
/// template legs as core conditions or guards.
bool normalizeBranch(Branch& branch, RegionContext& ctx) {
    std::map<std::string, std::vector<std::pair<std::size_t, const LegOut*>>> byVar;
    for (std::size_t i = 0; i < branch.legs.size(); ++i)
        for (const auto& [v, o] : branch.legs[i].outs) byVar[v].emplace_back(i, &o);
    for (auto& [v, occurrences] : byVar) {
        if (occurrences.size() < 2) continue;
        const LegOut* constant = nullptr;
        for (const auto& [i, o] : occurrences)
            if (o->constant) constant = o;
        if (constant) {
            for (auto& [i, o] : occurrences) {
                if (o->constant) {
                    if (!(*o->constant == *constant->constant)) return false;
                    continue;
                }
                Leg& leg = branch.legs[i];
                auto types = coreTypes(*leg.core, *ctx.schema);
                LegOut templated = *o;
                leg.outs.erase(v);
                Term constTerm = Term::c(*constant->constant);
                if (!assignTerm(leg, ctx, constTerm, templated.tmpl, templated.attrs, types)) return false;
                leg.outs[v] = LegOut{Template(), {}, *constant->constant};
            }
        } else {
            const LegOut* rep = occurrences.front().second;
            for (const auto& [i, o] : occurrences)
                if (!o->constant && !rep->tmpl.compatibleWith(o->tmpl)) return false;
        }
    }
    return true;
}

bool branchEqual(const Branch& a, const Branch& b) {
    if (a.legs.size() != b.legs.size()) return false;
    for (std::size_t i = 0; i < a.legs.size(); ++i)
        if (!legEqual(a.legs[i], b.legs[i])) return false;
    return true;
}

// -- materialization --------------------------------------------------------

RelExprPtr materializeLegExpr(const Leg& leg, const std::string& prefix) {
    RelExprPtr e = leg.core;
    auto name = [&prefix](const std::string& a) { return prefix.empty() ? a : prefix + a; };
    if (!prefix.empty()) {
        std::vector<std::pair<std::string, std::string>> renames;
        for (const auto& a : leg.coreAttrs) renames.emplace_back(prefix + a, a);
        e = rel::rename(std::move(renames), e);
    }
    if (!leg.coreConds.empty()) {
        std::vector<Filter> conds;
        for (const auto& f : leg.coreConds) conds.push_back(f.renamed(name));
        e = rel::select(Filter::conj(std::move(conds)), e);
    }
    return e;
}

/// Joins the branch legs on the attribute tuples behind shared variables,
/// constructs each output variable once, applies guards and projects the
/// region variables. URI-level joins only remain where a leg's output is
/// opaque to inversion.
RelExprPtr materializeBranch(const Branch& branch, const std::vector<std::string>& regionVars) {
    bool single = branch.legs.size() == 1;
    auto prefixOf = [&](std::size_t i) { return single ? std::string() : "l" + std::to_string(i) + "_"; };

    RelExprPtr joined;
    std::map<std::string, std::pair<std::size_t, const LegOut*>> rep; // var -> first leg providing it
    for (std::size_t i = 0; i < branch.legs.size(); ++i) {
        const Leg& leg = branch.legs[i];
        RelExprPtr e = materializeLegExpr(leg, prefixOf(i));
        std::vector<std::pair<std::string, std::string>> pairs;
        for (const auto& [v, o] : leg.outs) {
            auto it = rep.find(v);
            if (it == rep.end()) {
                rep.emplace(v, std::make_pair(i, &o));
                continue;
            }
            const auto& [ri, ro] = it->second;
            if (ro->constant || o.constant) continue; // constants were normalized into conditions
            for (std::size_t k = 0; k < ro->attrs.size(); ++k)
                pairs.emplace_back(prefixOf(ri) + ro->attrs[k], prefixOf(i) + o.attrs[k]);
        }
        joined = joined ? rel::equiJoin(joined, e, std::move(pairs)) : e;
    }
    if (!joined) return rel::empty(regionVars);

    RelExprPtr e = joined;
    for (const auto& [v, r] : rep) {
        const auto& [i, out] = r;
        if (out->constant) {
            e = rel::constBind(v, *out->constant, e);
        } else {
            std::vector<std::string> attrs;
            for (const auto& a : out->attrs) attrs.push_back(prefixOf(i) + a);
            e = rel::uriConstruct(v, out->tmpl, attrs, e);
        }
    }
    std::vector<Filter> guards;
    for (const auto& leg : branch.legs)
        for (const auto& g : leg.guards) guards.push_back(g);
    e = rel::select(Filter::conj(std::move(guards)), e);
    return rel::project(regionVars, e);
}

RelExprPtr materializeLeaf(const Leaf& leaf) {
    std::vector<RelExprPtr> branches;
    for (const auto& leg : leaf.legs) branches.push_back(materializeBranch(Branch{{leg}}, leaf.vars));
    if (branches.empty()) return rel::empty(leaf.vars);
    return rel::setUnion(std::move(branches));
}

// -- semantic pass ----------------------------------------------------------

std::vector<std::vector<std::string>> uniqueSetsOfExpr(const RelExpr& e, const Schema& schema) {
    auto sorted = [](std::vector<std::string> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    switch (e.kind) {
        case RelExpr::Kind::Base:
            return schema.uniqueSetsOf(e.name);
        case RelExpr::Kind::Select:
            return uniqueSetsOfExpr(*e.children[0], schema);
        case RelExpr::Kind::Project: {
            auto in = uniqueSetsOfExpr(*e.children[0], schema);
            std::vector<std::vector<std::string>> out;
            for (auto& s : in) {
                bool kept = true;
                for (const auto& a : s) kept &= std::find(e.attrs.begin(), e.attrs.end(), a) != e.attrs.end();
                if (kept) out.push_back(std::move(s));
            }
            return out;
        }
        case RelExpr::Kind::Rename: {
            auto in = uniqueSetsOfExpr(*e.children[0], schema);
            for (auto& s : in)
                for (auto& a : s)
                    for (const auto& [n, o] : e.renames)
                        if (a == o) a = n;
            for (auto& s : in) s = sorted(std::move(s));
            return in;
        }
        case RelExpr::Kind::NaturalJoin:
        case RelExpr::Kind::EquiJoin: {
            // Joining 1:1 on a unique set of one side keeps the other side's
            // unique sets; the union of two sides' sets is always unique.
            std::vector<std::vector<std::vector<std::string>>> sides;
            std::vector<std::vector<std::string>> sideAttrs;
            for (const auto& c : e.children) {
                sides.push_back(uniqueSetsOfExpr(*c, schema));
                sideAttrs.push_back(outputAttrs(*c, schema));
            }
            if (sides.size() != 2) return {};
            std::vector<std::string> leftJoin, rightJoin;
            if (e.kind == RelExpr::Kind::EquiJoin) {
                for (const auto& [l, r] : e.joinPairs) {
                    leftJoin.push_back(l);
                    rightJoin.push_back(r);
                }
            } else {
                for (const auto& a : sideAttrs[0])
                    if (std::find(sideAttrs[1].begin(), sideAttrs[1].end(), a) != sideAttrs[1].end()) {
                        leftJoin.push_back(a);
                        rightJoin.push_back(a);
                    }
            }
            auto covers = [&](const std::vector<std::vector<std::string>>& sets, const std::vector<std::string>& by) {
                for (const auto& s : sets) {
                    bool all = true;
                    for (const auto& a : s) all &= std::find(by.begin(), by.end(), a) != by.end();
                    if (all) return true;
                }
                return false;
            };
            std::vector<std::vector<std::string>> out;
            if (covers(sides[1], rightJoin))
                for (const auto& s : sides[0]) out.push_back(s);
            if (covers(sides[0], leftJoin))
                for (const auto& s : sides[1])
                    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
            for (const auto& sa : sides[0])
                for (const auto& sb : sides[1]) {
                    auto u = sa;
                    u.insert(u.end(), sb.begin(), sb.end());
                    u = sorted(std::move(u));
                    u.erase(std::unique(u.begin(), u.end()), u.end());
                    if (std::find(out.begin(), out.end(), u) == out.end()) out.push_back(u);
                }
            return out;
        }
        default:
            return {};
    }
}

/// Peels the outer projection of a core; merged legs re-project the union.
std::pair<RelExprPtr, std::vector<std::string>> coreInner(const Leg& leg) {
    if (leg.core->kind == RelExpr::Kind::Project) return {leg.core->children[0], leg.core->attrs};
    return {leg.core, leg.coreAttrs};
}

/// Removes redundant self-joins: two legs over the same core joined on a
/// unique attribute set carry identical rows, so the later leg's outputs
/// can be served by the earlier one.
bool selfJoinMergeStep(Branch& branch, const Schema& schema) {
    for (std::size_t i = 0; i < branch.legs.size(); ++i) {
        for (std::size_t j = i + 1; j < branch.legs.size(); ++j) {
            Leg& a = branch.legs[i];
            Leg& b = branch.legs[j];
            auto [innerA, projA] = coreInner(a);
            auto [innerB, projB] = coreInner(b);
            if (!structurallyEqual(*innerA, *innerB)) continue;
            if (a.coreConds.size() != b.coreConds.size()) continue;
            bool condsEqual = true;
            for (std::size_t k = 0; k < a.coreConds.size(); ++k)
                condsEqual &= a.coreConds[k].structurallyEqual(b.coreConds[k]);
            if (!condsEqual) continue;

            std::vector<std::pair<std::string, std::string>> pairs;
            for (const auto& [v, oa] : a.outs) {
                auto it = b.outs.find(v);
                if (it == b.outs.end() || oa.constant || it->second.constant) continue;
                for (std::size_t k = 0; k < oa.attrs.size(); ++k)
                    pairs.emplace_back(oa.attrs[k], it->second.attrs[k]);
            }
            std::vector<std::string> samePairs;
            for (const auto& [x, y] : pairs)
                if (x == y) samePairs.push_back(x);
            std::sort(samePairs.begin(), samePairs.end());
            bool keyed = false;
            for (const auto& uset : uniqueSetsOfExpr(*innerA, schema)) {
                bool all = true;
                for (const auto& k : uset) all &= std::binary_search(samePairs.begin(), samePairs.end(), k);
                if (all) {
                    keyed = true;
                    break;
                }
            }
            if (!keyed) continue;

            // merge leg j into leg i
            for (const auto& [x, y] : pairs)
                if (x != y) a.coreConds.push_back(Filter::eqAttr(x, y));
            for (const auto& [v, ob] : b.outs)
                if (!a.outs.count(v)) a.outs.emplace(v, ob);
            for (const auto& g : b.guards) a.guards.push_back(g);
            auto merged = projA;
            for (const auto& p : projB)
                if (std::find(merged.begin(), merged.end(), p) == merged.end()) merged.push_back(p);
            std::sort(merged.begin(), merged.end());
            a.core = rel::project(merged, innerA);
            a.coreAttrs = merged;
            branch.legs.erase(branch.legs.begin() + static_cast<long>(j));
            return true;
        }
    }
    return false;
}

/// Structural comparison of two expressions modulo one base-relation
/// substitution with an attribute correspondence (from an inclusion
/// dependency). Conservative: shapes must match exactly.
bool equalModulo(const RelExpr& a, const RelExpr& b, const std::string& fromRel, const std::string& toRel,
                 const std::map<std::string, std::string>& attrMap) {
    auto mapName = [&](const std::string& s) {
        auto it = attrMap.find(s);
        return it == attrMap.end() ? s : it->second;
    };
    if (a.kind != b.kind) return false;
    if (a.kind == RelExpr::Kind::Base) return (a.name == fromRel ? toRel : a.name) == b.name;
    if (a.attrs.size() != b.attrs.size() || a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.attrs.size(); ++i)
        if (mapName(a.attrs[i]) != b.attrs[i]) return false;
    if (!a.filter.renamed(mapName).structurallyEqual(b.filter)) return false;
    if (a.kind == RelExpr::Kind::Rename || a.kind == RelExpr::Kind::EquiJoin || a.kind == RelExpr::Kind::WithCte ||
        a.kind == RelExpr::Kind::UriConstruct || a.kind == RelExpr::Kind::CteRef)
        return false; // out of scope for subsumption matching
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!equalModulo(*a.children[i], *b.children[i], fromRel, toRel, attrMap)) return false;
    return true;
}

bool legSubsumedBy(const Leg& a, const Leg& b, const Schema& schema) {
    if (legEqual(a, b)) return true;
    for (const auto& dep : schema.inclusionDeps) {
        std::map<std::string, std::string> attrMap;
        for (std::size_t i = 0; i < dep.fromAttrs.size(); ++i) attrMap[dep.fromAttrs[i]] = dep.toAttrs[i];
        // every attribute a's leg uses must be covered by the dependency
        bool covered = true;
        for (const auto& attr : a.coreAttrs) covered &= attrMap.count(attr) != 0;
        if (!covered) continue;
        if (!equalModulo(*a.core, *b.core, dep.from, dep.to, attrMap)) continue;
        bool same = a.coreConds.size() == b.coreConds.size() && a.outs.size() == b.outs.size() &&
                    a.guards.size() == b.guards.size();
        auto mapName = [&](const std::string& s) {
            auto it = attrMap.find(s);
            return it == attrMap.end() ? s : it->second;
        };
        for (std::size_t i = 0; same && i < a.coreConds.size(); ++i)
            same &= a.coreConds[i].renamed(mapName).structurallyEqual(b.coreConds[i]);
        for (std::size_t i = 0; same && i < a.guards.size(); ++i)
            same &= a.guards[i].structurallyEqual(b.guards[i]);
        if (same) {
            auto bi = b.outs.begin();
            for (const auto& [v, oa] : a.outs) {
                if (bi == b.outs.end() || bi->first != v) {
                    same = false;
                    break;
                }
                const LegOut& ob = bi->second;
                if (oa.constant.has_value() != ob.constant.has_value()) same = false;
                if (oa.constant && !(*oa.constant == *ob.constant)) same = false;
                if (!oa.constant) {
                    if (!(oa.tmpl == ob.tmpl) || oa.attrs.size() != ob.attrs.size()) same = false;
                    for (std::size_t k = 0; same && k < oa.attrs.size(); ++k)
                        same &= mapName(oa.attrs[k]) == ob.attrs[k];
                }
                ++bi;
            }
        }
        if (same) return true;
    }
    return false;
}

/// Union-subsumption via declared inclusion dependencies: a branch whose
/// only difference is a base relation contained in another branch's base
/// (on the used attributes) is dropped.
void subsumeBranches(std::vector<Branch>& branches, const Schema& schema) {
    if (schema.inclusionDeps.empty()) return;
    std::vector<Branch> kept;
    for (std::size_t i = 0; i < branches.size(); ++i) {
        bool subsumed = false;
        for (std::size_t j = 0; j < branches.size() && !subsumed; ++j) {
            if (i == j || branches[i].legs.size() != branches[j].legs.size()) continue;
            if (branchEqual(branches[i], branches[j]) && j < i) {
                subsumed = true; // exact duplicate, keep the earlier one
                break;
            }
            bool all = true;
            bool strictly = false;
            for (std::size_t k = 0; k < branches[i].legs.size() && all; ++k) {
                if (legEqual(branches[i].legs[k], branches[j].legs[k])) continue;
                if (legSubsumedBy(branches[i].legs[k], branches[j].legs[k], schema))
                    strictly = true;
                else
                    all = false;
            }
            subsumed = all && strictly;
        }
        if (!subsumed) kept.push_back(branches[i]);
    }
    branches = std::move(kept);
}

} // namespace

// ---------------------------------------------------------------------------
// VFD matching and the translator pipeline.

namespace {

struct VfdGroup {
    const Vfd* vfd = nullptr;
    const Mapping* anchor = nullptr;
    std::string subjectVar;
    // matched property triples in VFD list order: (leaf index, mapping, object var)
    std::vector<std::tuple<std::size_t, const Mapping*, std::string>> members;
};

struct VfdPlan {
    std::vector<VfdGroup> groups;
    std::set<std::size_t> coveredLeaves;  // property triples replaced
    std::set<std::size_t> droppedLeaves;  // class triples riding an OCE
};

bool hasOce(const ConstraintSet& cs, Oce::Kind kind, const std::string& property, const std::string& klass) {
    for (const auto& o : cs.oces)
        if (o.kind == kind && o.property == property && o.klass == klass) return true;
    return false;
}

/// Finds optimizable stars/chains in the BGP for the validated constraint
/// set. Longest property list wins; ties break by declaration order.
VfdPlan planVfds(const std::vector<TriplePattern>& triples, const ConstraintSet& constraints,
                 const RegionContext& ctx, std::vector<std::string>* notes) {
    VfdPlan plan;
    struct Candidate {
        std::size_t vfdIdx;
        VfdGroup group;
    };
    std::vector<Candidate> candidates;

    auto basicMapping = [&](const std::string& p) -> const Mapping* {
        auto ms = ctx.mappingsFor(p);
        if (ms.size() != 1) return nullptr;
        if (!(ms[0]->origin.empty() || ms[0]->origin == ms[0]->predicate)) return nullptr; // split fragment
        return ms[0];
    };

    // property triples with variable, pairwise-distinct subject/object vars
    auto usableProperty = [&](const TriplePattern& t) {
        return !t.predicate.variable && t.predicate.value.isText() &&
               !(t.predicate.value == Value::text(kRdfType)) && t.subject.variable && t.object.variable &&
               t.subject.var != t.object.var;
    };

    for (std::size_t vi = 0; vi < constraints.vfds.size(); ++vi) {
        const Vfd& vfd = constraints.vfds[vi];
        const Mapping* anchor = basicMapping(vfd.properties.front());
        if (!anchor) continue;
        auto anchorAttrs = outputAttrs(*anchor->body, *ctx.schema);
        auto zCovers = [&](const std::vector<std::string>& attrs) {
            for (const auto& a : attrs)
                if (std::find(anchorAttrs.begin(), anchorAttrs.end(), a) == anchorAttrs.end()) return false;
            return true;
        };

        if (vfd.kind == Vfd::Kind::Branching) {
            // group by subject variable
            std::map<std::string, std::vector<std::size_t>> bySubject;
            for (std::size_t ti = 0; ti < triples.size(); ++ti)
                if (usableProperty(triples[ti])) bySubject[triples[ti].subject.var].push_back(ti);
            for (const auto& [v, idxs] : bySubject) {
                VfdGroup g;
                g.vfd = &vfd;
                g.subjectVar = v;
                std::set<std::string> objVars{v};
                bool sane = true;
                for (const auto& prop : vfd.properties) {
                    // at most one triple per property may ride the star
                    std::vector<std::size_t> hits;
                    for (auto ti : idxs)
                        if (triples[ti].predicate.value == Value::text(prop)) hits.push_back(ti);
                    if (hits.size() != 1) continue;
                    const Mapping* m = basicMapping(prop);
                    if (!m || m->classHead) continue;
                    if (!m->subjectTemplate.compatibleWith(vfd.domainTemplate)) continue;
                    const auto& objVar = triples[hits[0]].object.var;
                    if (!objVars.insert(objVar).second) {
                        sane = false;
                        break;
                    }
                    if (!zCovers(m->objectAttrs())) {
                        if (notes)
                            notes->push_back("vfd rewrite skipped: anchor body of '" + vfd.properties.front() +
                                             "' does not project the object attributes of '" + prop + "'");
                        continue;
                    }
                    g.members.emplace_back(hits[0], m, objVar);
                }
                if (!sane || g.members.empty()) continue;
                // the anchor property must participate
                bool anchored = false;
                for (const auto& [ti, m, ov] : g.members) anchored |= m == anchor;
                if (!anchored) continue;
                g.anchor = anchor;
                candidates.push_back({vi, std::move(g)});
            }
        } else {
            // path chain ?v0 P1 ?v1 . ... ?v(n-1) Pn ?vn, full list only
            if (!anchor->subjectTemplate.compatibleWith(vfd.domainTemplate)) continue;
            for (std::size_t start = 0; start < triples.size(); ++start) {
                if (!usableProperty(triples[start])) continue;
                if (!(triples[start].predicate.value == Value::text(vfd.properties.front()))) continue;
                VfdGroup g;
                g.vfd = &vfd;
                g.anchor = anchor;
                g.subjectVar = triples[start].subject.var;
                std::set<std::string> seenVars{g.subjectVar};
                std::string cursor = g.subjectVar;
                bool ok = true;
                for (const auto& prop : vfd.properties) {
                    const Mapping* m = basicMapping(prop);
                    if (!m || m->classHead || !zCovers(m->objectAttrs())) {
                        ok = false;
                        break;
                    }
                    std::vector<std::size_t> hits;
                    for (std::size_t ti = 0; ti < triples.size(); ++ti)
                        if (usableProperty(triples[ti]) && triples[ti].subject.var == cursor &&
                            triples[ti].predicate.value == Value::text(prop))
                            hits.push_back(ti);
                    if (hits.size() != 1) {
                        ok = false;
                        break;
                    }
                    std::size_t found = hits[0];
                    const auto& objVar = triples[found].object.var;
                    if (!seenVars.insert(objVar).second) {
                        ok = false;
                        break;
                    }
                    g.members.emplace_back(found, m, objVar);
                    cursor = objVar;
                }
                if (ok) candidates.push_back({vi, std::move(g)});
            }
        }
    }

    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.group.members.size() != b.group.members.size())
            return a.group.members.size() > b.group.members.size();
        return a.vfdIdx < b.vfdIdx;
    });
    for (auto& c : candidates) {
        bool overlap = false;
        for (const auto& [ti, m, ov] : c.group.members) overlap |= plan.coveredLeaves.count(ti) != 0;
        if (overlap) continue;
        for (const auto& [ti, m, ov] : c.group.members) plan.coveredLeaves.insert(ti);
        plan.groups.push_back(std::move(c.group));
    }

    return plan;
}

/// Single leg standing in for a whole optimizable star or chain: the
/// anchor's body projected onto the subject and object attributes.
Leg buildGroupLeg(const VfdGroup& g, const Schema& schema) {
    Leg leg;
    leg.outs.emplace(g.subjectVar, LegOut{g.anchor->subjectTemplate, g.anchor->subjectAttrs(), std::nullopt});
    for (const auto& [ti, m, objVar] : g.members)
        leg.outs.emplace(objVar, LegOut{m->objectTemplate, m->objectAttrs(), std::nullopt});
    std::set<std::string> used;
    for (const auto& [v, o] : leg.outs) used.insert(o.attrs.begin(), o.attrs.end());
    std::vector<std::string> attrs(used.begin(), used.end());
    leg.core = rel::project(attrs, g.anchor->body);
    leg.coreAttrs = std::move(attrs);
    (void)schema;
    return leg;
}

} // namespace

// ---------------------------------------------------------------------------
// Translator.

struct Translator::Impl {
    std::shared_ptr<const Schema> schema;
    std::vector<Mapping> tmaps;
    std::map<std::string, std::vector<std::string>> rewriteTable;
    ConstraintSet constraints;
    CompileOptions options;

    RegionContext makeContext(std::vector<std::string>* notes) const {
        RegionContext ctx;
        ctx.schema = schema.get();
        for (const auto& m : tmaps) ctx.index[m.predicate].push_back(&m);
        ctx.rewriteTable = &rewriteTable;
        ctx.notes = notes;
        return ctx;
    }

    Compiled compileBgp(const GraphPattern& bgp, Stage stage, std::vector<std::string>* notes,
                        std::vector<std::pair<std::string, RelExprPtr>>* vfdSqls) const {
        RegionContext ctx = makeContext(notes);
        std::vector<std::string> regionVars;
        std::set<std::string> seen;
        for (const auto& t : bgp.triples)
            for (const Term* term : {&t.subject, &t.predicate, &t.object})
                if (term->variable && seen.insert(term->var).second) regionVars.push_back(term->var);

        if (bgp.triples.empty()) return unitCompiled();

        // VFD grouping replaces matched triples by a single group leaf and
        // drops class triples whose OCE is satisfied.
        VfdPlan plan;
        if (static_cast<int>(stage) >= static_cast<int>(Stage::Vfd) && options.vfd && !constraints.vfds.empty()) {
            plan = planVfds(bgp.triples, constraints, ctx, notes);
            for (std::size_t ti = 0; ti < bgp.triples.size(); ++ti) {
                const auto& t = bgp.triples[ti];
                if (t.predicate.variable || !(t.predicate.value == Value::text(kRdfType))) continue;
                if (!t.subject.variable || t.object.variable || !t.object.value.isText()) continue;
                const std::string& klass = t.object.value.asText();
                for (const auto& g : plan.groups) {
                    bool rides = false;
                    for (const auto& [mi, m, objVar] : g.members) {
                        const std::string& displayName = m->origin.empty() ? m->predicate : m->origin;
                        if (t.subject.var == g.subjectVar &&
                            hasOce(constraints, Oce::Kind::Domain, displayName, klass))
                            rides = true;
                        if (t.subject.var == objVar && hasOce(constraints, Oce::Kind::Range, displayName, klass))
                            rides = true;
                    }
                    if (rides) {
                        plan.droppedLeaves.insert(ti);
                        break;
                    }
                }
            }
        }

        std::vector<Leaf> leaves;
        std::set<std::size_t> grouped = plan.coveredLeaves;
        std::set<const VfdGroup*> emitted;
        for (std::size_t ti = 0; ti < bgp.triples.size(); ++ti) {
            if (plan.droppedLeaves.count(ti)) continue;
            if (grouped.count(ti)) {
                for (const auto& g : plan.groups) {
                    bool mine = false;
                    for (const auto& [mi, m, ov] : g.members) mine |= mi == ti;
                    if (mine && emitted.insert(&g).second) {
                        Leaf leaf;
                        leaf.legs.push_back(buildGroupLeg(g, *schema));
                        leaf.vars.push_back(g.subjectVar);
                        for (const auto& [mi, m, ov] : g.members) leaf.vars.push_back(ov);
                        leaves.push_back(std::move(leaf));
                        if (vfdSqls) {
                            std::string name = "vfd";
                            for (const auto& p : g.vfd->properties) {
                                name += "_";
                                for (char c : p)
                                    if (std::isalnum(static_cast<unsigned char>(c))) name += c;
                            }
                            vfdSqls->emplace_back(name, g.anchor->body);
                        }
                    }
                }
                continue;
            }
            leaves.push_back(buildLeaf(bgp.triples[ti], ctx));
        }
        if (leaves.empty()) return unitCompiled();

        bool distribute = static_cast<int>(stage) >= static_cast<int>(Stage::Structural) && options.structural;
        if (distribute) {
            long long product = 1;
            for (const auto& leaf : leaves) {
                product *= std::max<long long>(1, static_cast<long long>(leaf.legs.size()));
                if (product > options.branchBudget) break;
            }
            if (product > options.branchBudget) {
                distribute = false;
                if (notes)
                    notes->push_back("structural distribution aborted: " + std::to_string(product) +
                                     " branches exceed the budget of " + std::to_string(options.branchBudget));
            }
        }

        Compiled out;
        out.vars = regionVars;
        if (!distribute) {
            std::vector<RelExprPtr> exprs;
            for (const auto& leaf : leaves) exprs.push_back(materializeLeaf(leaf));
            out.expr = rel::naturalJoin(std::move(exprs));
            return out;
        }

        // distribution into branches, then prune / dedupe
        std::vector<Branch> branches{Branch{}};
        for (const auto& leaf : leaves) {
            std::vector<Branch> next;
            for (const auto& b : branches)
                for (const auto& leg : leaf.legs) {
                    Branch nb = b;
                    nb.legs.push_back(leg);
                    next.push_back(std::move(nb));
                }
            branches = std::move(next);
        }
        RegionContext normCtx = makeContext(notes);
        std::vector<Branch> pruned;
        for (auto& b : branches)
            if (normalizeBranch(b, normCtx)) pruned.push_back(std::move(b));
        branches = std::move(pruned);
        std::vector<Branch> dedup;
        for (auto& b : branches) {
            bool dup = false;
            for (const auto& seenB : dedup) dup |= branchEqual(seenB, b);
            if (!dup) dedup.push_back(std::move(b));
        }
        branches = std::move(dedup);

        if (static_cast<int>(stage) >= static_cast<int>(Stage::Semantic) && options.semanticKeys) {
            for (auto& b : branches)
                while (selfJoinMergeStep(b, *schema)) {
                }
            subsumeBranches(branches, *schema);
            std::vector<Branch> dedup2;
            for (auto& b : branches) {
                bool dup = false;
                for (const auto& seenB : dedup2) dup |= branchEqual(seenB, b);
                if (!dup) dedup2.push_back(std::move(b));
            }
            branches = std::move(dedup2);
        }

        std::vector<RelExprPtr> exprs;
        for (const auto& b : branches) exprs.push_back(materializeBranch(b, regionVars));
        out.expr = exprs.empty() ? rel::empty(regionVars) : rel::setUnion(std::move(exprs));
        return out;
    }

    RelExprPtr compile(const Query& q, Stage stage, std::vector<std::string>* notes,
                       std::vector<std::pair<std::string, RelExprPtr>>* vfdSqls) const {
        auto leaf = [&](const GraphPattern& bgp) { return compileBgp(bgp, stage, notes, vfdSqls); };
        Compiled c = compileWith(*q.pattern, leaf);
        // answer-variable projection: pad the missing ones with nulls
        std::vector<std::string> missing;
        for (const auto& v : q.answerVars)
            if (std::find(c.vars.begin(), c.vars.end(), v) == c.vars.end()) missing.push_back(v);
        RelExprPtr e = rel::padding(missing, c.expr);
        return rel::project(q.answerVars, e);
    }
};

Translator::Translator(const ConstrainedSpec& cspec, CompileOptions options) : cspec_(cspec), options_(options) {
    options.validate();
    cspec.validate();

    auto impl = std::make_shared<Impl>();
    impl->schema = cspec.spec.schema;
    impl->options = options;

    auto tmaps = saturateTmappings(cspec.spec.ontology, cspec.spec.mappings, *cspec.spec.schema);
    if (options.exactPredicates)
        tmaps = applyExactPredicates(std::move(tmaps), cspec.constraints.exacts, cspec.spec.mappings);
    tmaps = mergeSameTemplatePair(tmaps, *cspec.spec.schema);
    auto split = splitMultiTemplate(tmaps);
    impl->tmaps = std::move(split.mappings);
    impl->rewriteTable = std::move(split.rewriteTable);
    impl->constraints = cspec.constraints;
    if (!options.exactPredicates) impl->constraints.exacts.clear();
    if (!options.vfd) {
        impl->constraints.vfds.clear();
        impl->constraints.oces.clear();
    }

    tmaps_ = impl->tmaps;
    rewriteTable_ = impl->rewriteTable;
    constraints_ = impl->constraints;
    impl_ = std::move(impl);
}

RelExprPtr Translator::compileAtStage(const Query& q, Stage stage) const {
    std::vector<std::string> notes;
    return impl_->compile(q, stage, &notes, nullptr);
}

TranslateResult Translator::translate(const Query& q) const {
    TranslateResult result;
    static const char* stageNames[] = {"unfold", "structural", "vfd", "semantic"};
    std::vector<std::string> notes;
    RelExprPtr finalExpr;
    std::vector<std::pair<std::string, RelExprPtr>> vfdSqls;
    for (int s = 0; s <= static_cast<int>(Stage::Semantic); ++s) {
        std::vector<std::string>* stageNotes = s == static_cast<int>(Stage::Semantic) ? &notes : nullptr;
        auto collect = s == static_cast<int>(Stage::Semantic) ? &vfdSqls : nullptr;
        RelExprPtr e = impl_->compile(q, static_cast<Stage>(s), stageNotes, collect);
        auto stats = exprStats(*e);
        result.trace.stages.push_back({stageNames[s], stats.branches, stats.joins});
        finalExpr = e;
    }

    // CTE mode: hoist each optimizing SQL shared by at least two branches
    if (options_.cteMode) {
        std::vector<std::pair<std::string, RelExprPtr>> bindings;
        std::set<std::string> names;
        for (const auto& [name, body] : vfdSqls) {
            if (names.count(name)) continue;
            if (countOccurrences(finalExpr, body) >= 2) {
                names.insert(name);
                bindings.emplace_back(name, body);
            }
        }
        for (const auto& [name, body] : bindings) finalExpr = substitute(finalExpr, body, rel::cteRef(name));
        finalExpr = rel::withCte(bindings, finalExpr);
    }

    result.expr = finalExpr;
    result.trace.notes = std::move(notes);
    result.sql = emitSql(*finalExpr);
    if (options_.explain) result.trace.expression = prettyPrint(*finalExpr);
    return result;
}

} // namespace obda
