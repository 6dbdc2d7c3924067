#include "obda/mapping.hpp"

#include "obda/diagnostics.hpp"
#include "obda/eval.hpp"
#include "obda/loader.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace obda {

std::vector<std::string> Mapping::templateAttrs() const {
    std::vector<std::string> out = subjectAttrs();
    for (const auto& a : objectAttrs())
        if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
    return out;
}

namespace {

// Inserts the not-null guard over template attributes, skipping columns the
// schema already forces non-null. The guard merges into an existing select
// so that mappings derived from one another stay structurally comparable.
RelExprPtr guardNotNull(RelExprPtr body, const std::vector<std::string>& templateAttrs, const Schema& schema) {
    auto nullable = nullableAttrs(*body, schema);
    std::vector<std::string> needed;
    for (const auto& a : templateAttrs)
        if (nullable.count(a) && std::find(needed.begin(), needed.end(), a) == needed.end()) needed.push_back(a);
    if (needed.empty()) return body;
    Filter guard = Filter::notNull(needed);
    if (body->kind == RelExpr::Kind::Project) {
        auto inner = body->children[0];
        if (inner->kind == RelExpr::Kind::Select)
            return rel::project(body->attrs,
                                rel::select(Filter::conj({guard, inner->filter}), inner->children[0]));
        return rel::project(body->attrs, rel::select(guard, inner));
    }
    if (body->kind == RelExpr::Kind::Select)
        return rel::select(Filter::conj({guard, body->filter}), body->children[0]);
    return rel::select(guard, body);
}

void requireAttrsIn(const std::vector<std::string>& needed, const std::vector<std::string>& available,
                    const std::string& what) {
    for (const auto& a : needed)
        if (std::find(available.begin(), available.end(), a) == available.end())
            throw SpecError(what + " references attribute '" + a + "' that the body does not project");
}

} // namespace

Mapping makeClassMapping(std::string id, std::string klass, Template subject, RelExprPtr body, const Schema& schema) {
    auto outs = outputAttrs(*body, schema);
    requireAttrsIn(subject.placeholders(), outs, "subject template of '" + klass + "'");
    Mapping m;
    m.id = std::move(id);
    m.predicate = std::move(klass);
    m.classHead = true;
    m.subjectTemplate = subject;
    m.body = guardNotNull(std::move(body), subject.placeholders(), schema);
    return m;
}

Mapping makePropertyMapping(std::string id, std::string property, Template subject, Template object, RelExprPtr body,
                            const Schema& schema) {
    auto outs = outputAttrs(*body, schema);
    requireAttrsIn(subject.placeholders(), outs, "subject template of '" + property + "'");
    requireAttrsIn(object.placeholders(), outs, "object template of '" + property + "'");
    Mapping m;
    m.id = std::move(id);
    m.predicate = std::move(property);
    m.classHead = false;
    m.subjectTemplate = subject;
    m.objectTemplate = object;
    auto guarded = subject.placeholders();
    for (const auto& a : object.placeholders()) guarded.push_back(a);
    m.body = guardNotNull(std::move(body), guarded, schema);
    return m;
}

bool sameMappingShape(const Mapping& a, const Mapping& b) {
    return a.predicate == b.predicate && a.classHead == b.classHead && a.subjectTemplate == b.subjectTemplate &&
           a.objectTemplate == b.objectTemplate && structurallyEqual(*a.body, *b.body);
}

std::vector<const Mapping*> ObdaSpec::mappingsOf(const std::string& predicate) const {
    std::vector<const Mapping*> out;
    for (const auto& m : mappings)
        if (m.predicate == predicate) out.push_back(&m);
    return out;
}

void ObdaSpec::validate() const {
    if (!schema) throw SpecError("specification has no schema");
    schema->validate();
    for (const auto& m : mappings) {
        if (m.classHead && !ontology.isClass(m.predicate))
            throw SpecError("mapping '" + m.id + "' targets undeclared class '" + m.predicate + "'");
        if (!m.classHead && !ontology.isProperty(m.predicate))
            throw SpecError("mapping '" + m.id + "' targets undeclared property '" + m.predicate + "'");
        auto outs = outputAttrs(*m.body, *schema);
        requireAttrsIn(m.subjectAttrs(), outs, "mapping '" + m.id + "'");
        if (!m.classHead) requireAttrsIn(m.objectAttrs(), outs, "mapping '" + m.id + "'");
    }
}

void ConstrainedSpec::validate() const {
    spec.validate();
    for (const auto& e : constraints.exacts)
        if (!spec.ontology.isDeclared(e.predicate))
            throw SpecError("exact constraint references undeclared predicate '" + e.predicate + "'");
    for (const auto& v : constraints.vfds) {
        if (v.properties.empty()) throw SpecError("VFD constraint with empty property list");
        for (const auto& p : v.properties)
            if (!spec.ontology.isProperty(p))
                throw SpecError("VFD constraint references undeclared property '" + p + "'");
    }
    for (const auto& o : constraints.oces) {
        if (!spec.ontology.isProperty(o.property))
            throw SpecError("OCE constraint references undeclared property '" + o.property + "'");
        if (!spec.ontology.isClass(o.klass))
            throw SpecError("OCE constraint references undeclared class '" + o.klass + "'");
    }
}

AssertionSet virtualAssertions(const std::vector<Mapping>& mappings, const Instance& inst) {
    AssertionSet out;
    for (const auto& m : mappings) {
        Relation r = evaluate(*m.body, inst);
        std::vector<std::size_t> xi, yi;
        for (const auto& a : m.subjectAttrs()) xi.push_back(r.indexOf(a));
        if (!m.classHead)
            for (const auto& a : m.objectAttrs()) yi.push_back(r.indexOf(a));
        for (const auto& row : r.rows) {
            std::vector<Value> xs;
            xs.reserve(xi.size());
            for (auto i : xi) xs.push_back(row[i]);
            Value subj = m.subjectTemplate.fill(xs);
            if (subj.isNull()) continue;
            if (m.classHead) {
                out.insert({m.predicate, std::move(subj), std::nullopt});
            } else {
                std::vector<Value> ys;
                ys.reserve(yi.size());
                for (auto i : yi) ys.push_back(row[i]);
                Value obj = m.objectTemplate.fill(ys);
                if (obj.isNull()) continue;
                out.insert({m.predicate, std::move(subj), std::move(obj)});
            }
        }
    }
    return out;
}

AssertionSet saturatedVirtualGraph(const ObdaSpec& spec, const Instance& inst) {
    return saturateAbox(spec.ontology, virtualAssertions(spec.mappings, inst));
}

std::vector<Mapping> saturateTmappings(const Ontology& ont, const std::vector<Mapping>& mappings,
                                       const Schema& schema) {
    auto closure = classify(ont);
    std::map<std::string, std::vector<const Mapping*>> byPredicate;
    for (const auto& m : mappings) byPredicate[m.predicate].push_back(&m);

    std::vector<std::string> predicates(ont.classNames.begin(), ont.classNames.end());
    predicates.insert(predicates.end(), ont.propertyNames.begin(), ont.propertyNames.end());

    std::vector<Mapping> out;
    for (const auto& p : predicates) {
        auto own = byPredicate.find(p);
        if (own != byPredicate.end())
            for (const Mapping* m : own->second) out.push_back(*m);

        std::vector<Mapping> generated;
        for (const auto& g : closure.of(p)) {
            if (g.source == p) continue; // the reflexive generator reproduces the originals
            auto src = byPredicate.find(g.source);
            if (src == byPredicate.end()) continue;
            for (const Mapping* m : src->second) {
                Mapping d;
                d.id = m->id + ">" + p;
                d.predicate = p;
                switch (g.position) {
                    case Generator::Position::Self:
                        d.classHead = m->classHead;
                        d.subjectTemplate = m->subjectTemplate;
                        d.objectTemplate = m->objectTemplate;
                        d.body = m->body;
                        break;
                    case Generator::Position::SubjectOf:
                        if (m->classHead) continue;
                        d.classHead = true;
                        d.subjectTemplate = m->subjectTemplate;
                        d.body = rel::project(m->subjectAttrs(), m->body);
                        break;
                    case Generator::Position::ObjectOf:
                        if (m->classHead) continue;
                        d.classHead = true;
                        d.subjectTemplate = m->objectTemplate;
                        d.body = rel::project(m->objectAttrs(), m->body);
                        break;
                }
                bool duplicate = false;
                for (const auto& seen : generated) duplicate |= sameMappingShape(seen, d);
                if (!duplicate) generated.push_back(std::move(d));
            }
        }
        for (auto& d : generated) out.push_back(std::move(d));
        (void)schema;
    }
    return out;
}

std::vector<Mapping> applyExactPredicates(std::vector<Mapping> tmaps, const std::vector<ExactPredicate>& exacts,
                                          const std::vector<Mapping>& originals) {
    for (const auto& e : exacts) {
        std::vector<Mapping> own;
        for (const auto& m : originals)
            if (m.predicate == e.predicate) own.push_back(m);
        if (own.empty())
            throw SpecError("exact predicate '" + e.predicate + "' has no mapping in the specification");
        std::vector<Mapping> next;
        bool replaced = false;
        for (auto& m : tmaps) {
            if (m.predicate != e.predicate) {
                next.push_back(std::move(m));
            } else if (!replaced) {
                for (const auto& o : own) next.push_back(o);
                replaced = true;
            }
        }
        if (!replaced)
            for (const auto& o : own) next.push_back(o);
        tmaps = std::move(next);
    }
    return tmaps;
}

namespace {

// Positional renaming of one branch's template attributes onto canonical
// names. Returns false when the correspondence is contradictory (repeated
// placeholders mapping one attribute to two names).
bool branchRenaming(const Mapping& canon, const Mapping& m,
                    std::map<std::string, std::string>& renaming) {
    auto align = [&](const std::vector<std::string>& from, const std::vector<std::string>& to) {
        for (std::size_t i = 0; i < from.size(); ++i) {
            auto [it, inserted] = renaming.emplace(from[i], to[i]);
            if (!inserted && it->second != to[i]) return false;
        }
        return true;
    };
    if (!align(m.subjectAttrs(), canon.subjectAttrs())) return false;
    if (!m.classHead && !align(m.objectAttrs(), canon.objectAttrs())) return false;
    return true;
}

} // namespace

std::vector<Mapping> mergeSameTemplatePair(const std::vector<Mapping>& tmaps, const Schema& schema) {
    struct Group {
        Mapping canon;
        std::vector<RelExprPtr> bodies;       // aligned to canon names
        std::vector<std::vector<std::string>> outs; // their output attrs
    };
    std::map<std::string, std::vector<Group>> groups;
    std::vector<std::string> order;

    for (const auto& m : tmaps) {
        if (!groups.count(m.predicate)) order.push_back(m.predicate);
        auto& list = groups[m.predicate];
        bool placed = false;
        for (auto& g : list) {
            if (g.canon.classHead != m.classHead) continue;
            if (!g.canon.subjectTemplate.compatibleWith(m.subjectTemplate)) continue;
            if (!m.classHead && !g.canon.objectTemplate.compatibleWith(m.objectTemplate)) continue;
            std::map<std::string, std::string> renaming;
            if (!branchRenaming(g.canon, m, renaming)) continue;
            RelExprPtr body = m.body;
            bool identityNames = true;
            for (const auto& [from, to] : renaming) identityNames &= from == to;
            if (!identityNames) {
                // project to the template attributes, then rename positionally
                body = rel::project(m.templateAttrs(), body);
                std::vector<std::pair<std::string, std::string>> renames;
                for (const auto& [from, to] : renaming)
                    if (from != to) renames.emplace_back(to, from);
                body = rel::rename(std::move(renames), body);
            }
            g.bodies.push_back(body);
            g.outs.push_back(outputAttrs(*body, schema));
            placed = true;
            break;
        }
        if (!placed) {
            Group g;
            g.canon = m;
            g.bodies.push_back(m.body);
            g.outs.push_back(outputAttrs(*m.body, schema));
            list.push_back(std::move(g));
        }
    }

    std::vector<Mapping> out;
    for (const auto& p : order) {
        for (auto& g : groups[p]) {
            if (g.bodies.size() == 1) {
                Mapping m = g.canon;
                m.body = g.bodies[0];
                out.push_back(std::move(m));
                continue;
            }
            // survive with the attributes common to all branches
            std::set<std::string> common(g.outs[0].begin(), g.outs[0].end());
            for (std::size_t i = 1; i < g.outs.size(); ++i) {
                std::set<std::string> next;
                for (const auto& a : g.outs[i])
                    if (common.count(a)) next.insert(a);
                common = std::move(next);
            }
            std::vector<std::string> commonList(common.begin(), common.end());
            std::vector<RelExprPtr> branches;
            branches.reserve(g.bodies.size());
            for (const auto& b : g.bodies) branches.push_back(rel::project(commonList, b));
            Mapping m = g.canon;
            m.id = g.canon.id + "+merged";
            m.body = rel::setUnion(std::move(branches));
            out.push_back(std::move(m));
        }
    }
    return out;
}

SplitResult splitMultiTemplate(const std::vector<Mapping>& tmaps) {
    std::map<std::string, std::vector<std::size_t>> byPredicate;
    std::vector<std::string> order;
    for (std::size_t i = 0; i < tmaps.size(); ++i) {
        if (!byPredicate.count(tmaps[i].predicate)) order.push_back(tmaps[i].predicate);
        byPredicate[tmaps[i].predicate].push_back(i);
    }
    SplitResult result;
    for (const auto& p : order) {
        const auto& idx = byPredicate[p];
        if (idx.size() == 1) {
            result.mappings.push_back(tmaps[idx[0]]);
            continue;
        }
        std::vector<std::string> fragments;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            Mapping m = tmaps[idx[k]];
            m.predicate = p + "#" + std::to_string(k + 1);
            fragments.push_back(m.predicate);
            result.mappings.push_back(std::move(m));
        }
        result.rewriteTable[p] = std::move(fragments);
    }
    return result;
}

// ---------------------------------------------------------------------------
// SQL-subset parser for mapping bodies.

namespace {

struct SqlToken {
    enum class Kind { Ident, Number, Text, Star, Comma, Eq, Lt, Neq, End };
    Kind kind;
    std::string text;
    int64_t number = 0;
    unsigned column = 0;
};

struct SqlLexer {
    const std::string& src;
    const std::string& source;
    unsigned line;
    std::size_t pos = 0;

    SqlToken next() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
        unsigned col = static_cast<unsigned>(pos) + 1;
        if (pos >= src.size()) return {SqlToken::Kind::End, "", 0, col};
        char c = src[pos];
        if (c == ',') {
            ++pos;
            return {SqlToken::Kind::Comma, ",", 0, col};
        }
        if (c == '*') {
            ++pos;
            return {SqlToken::Kind::Star, "*", 0, col};
        }
        if (c == '=') {
            ++pos;
            return {SqlToken::Kind::Eq, "=", 0, col};
        }
        if (c == '<') {
            ++pos;
            if (pos < src.size() && src[pos] == '>') {
                ++pos;
                return {SqlToken::Kind::Neq, "<>", 0, col};
            }
            return {SqlToken::Kind::Lt, "<", 0, col};
        }
        if (c == '\'') {
            std::string text;
            ++pos;
            while (pos < src.size()) {
                if (src[pos] == '\'') {
                    if (pos + 1 < src.size() && src[pos + 1] == '\'') {
                        text.push_back('\'');
                        pos += 2;
                    } else {
                        ++pos;
                        return {SqlToken::Kind::Text, text, 0, col};
                    }
                } else {
                    text.push_back(src[pos++]);
                }
            }
            throw ParseError(source, line, col, "unterminated string literal");
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && pos + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[pos + 1])))) {
            std::size_t start = pos;
            if (c == '-') ++pos;
            while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
            std::string text = src.substr(start, pos - start);
            return {SqlToken::Kind::Number, text, std::stoll(text), col};
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos;
            while (pos < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_' || src[pos] == '.'))
                ++pos;
            return {SqlToken::Kind::Ident, src.substr(start, pos - start), 0, col};
        }
        throw ParseError(source, line, col, std::string("unexpected character '") + c + "' in SQL body");
    }
};

bool keywordIs(const SqlToken& t, const char* kw) {
    if (t.kind != SqlToken::Kind::Ident) return false;
    if (t.text.size() != std::string(kw).size()) return false;
    for (std::size_t i = 0; i < t.text.size(); ++i)
        if (std::toupper(static_cast<unsigned char>(t.text[i])) != kw[i]) return false;
    return true;
}

} // namespace

RelExprPtr parseSqlBody(const std::string& text, const Schema& schema, const std::string& source, unsigned line) {
    SqlLexer lex{text, source, line};
    auto tok = lex.next();
    auto fail = [&](const std::string& msg, const SqlToken& at) -> ParseError {
        return ParseError(source, line, at.column, msg);
    };
    if (!keywordIs(tok, "SELECT")) throw fail("mapping body must start with SELECT", tok);

    bool star = false;
    std::vector<std::string> cols;
    tok = lex.next();
    if (tok.kind == SqlToken::Kind::Star) {
        star = true;
        tok = lex.next();
    } else {
        while (true) {
            if (tok.kind != SqlToken::Kind::Ident) throw fail("expected column name", tok);
            cols.push_back(tok.text);
            tok = lex.next();
            if (tok.kind != SqlToken::Kind::Comma) break;
            tok = lex.next();
        }
    }
    if (!keywordIs(tok, "FROM")) throw fail("expected FROM", tok);

    std::vector<RelExprPtr> tables;
    tok = lex.next();
    while (true) {
        if (tok.kind != SqlToken::Kind::Ident) throw fail("expected table name", tok);
        if (!schema.hasRelation(tok.text)) throw fail("unknown relation '" + tok.text + "'", tok);
        tables.push_back(rel::base(tok.text));
        tok = lex.next();
        if (tok.kind != SqlToken::Kind::Comma) break;
        tok = lex.next();
    }
    RelExprPtr core = rel::naturalJoin(std::move(tables));
    auto coreAttrs = outputAttrs(*core, schema);
    auto requireAttr = [&](const SqlToken& t) {
        if (std::find(coreAttrs.begin(), coreAttrs.end(), t.text) == coreAttrs.end())
            throw fail("unknown attribute '" + t.text + "'", t);
    };

    std::vector<Filter> conds;
    if (keywordIs(tok, "WHERE")) {
        while (true) {
            auto lhs = lex.next();
            if (lhs.kind != SqlToken::Kind::Ident) throw fail("expected attribute in condition", lhs);
            requireAttr(lhs);
            auto op = lex.next();
            if (keywordIs(op, "IS")) {
                auto notTok = lex.next();
                auto nullTok = lex.next();
                if (!keywordIs(notTok, "NOT") || !keywordIs(nullTok, "NULL"))
                    throw fail("expected IS NOT NULL", notTok);
                conds.push_back(Filter::negate(Filter::isNull({lhs.text})));
            } else {
                auto rhs = lex.next();
                auto rhsValue = [&]() -> Value {
                    if (rhs.kind == SqlToken::Kind::Number) return Value::integer(rhs.number);
                    if (rhs.kind == SqlToken::Kind::Text) return Value::text(rhs.text);
                    throw fail("expected literal", rhs);
                };
                if (op.kind == SqlToken::Kind::Eq) {
                    if (rhs.kind == SqlToken::Kind::Ident) {
                        requireAttr(rhs);
                        conds.push_back(Filter::eqAttr(lhs.text, rhs.text));
                    } else {
                        conds.push_back(Filter::eq(lhs.text, rhsValue()));
                    }
                } else if (op.kind == SqlToken::Kind::Lt) {
                    conds.push_back(Filter::lt(lhs.text, rhsValue()));
                } else if (op.kind == SqlToken::Kind::Neq) {
                    conds.push_back(Filter::negate(Filter::eq(lhs.text, rhsValue())));
                } else {
                    throw fail("expected =, <, <> or IS NOT NULL", op);
                }
            }
            tok = lex.next();
            if (!keywordIs(tok, "AND")) break;
        }
    }
    if (tok.kind != SqlToken::Kind::End) throw fail("trailing input after SQL body", tok);

    RelExprPtr out = rel::select(Filter::conj(std::move(conds)), std::move(core));
    if (!star) {
        for (const auto& c : cols)
            if (std::find(coreAttrs.begin(), coreAttrs.end(), c) == coreAttrs.end())
                throw ParseError(source, line, 1, "projected column '" + c + "' does not exist");
        out = rel::project(cols, std::move(out));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Mapping and constraint files.

namespace {

std::string stripQuotes(const std::string& s) {
    if (s.size() >= 2 && s.front() == '\'' && s.back() == '\'') return s.substr(1, s.size() - 2);
    return s;
}

} // namespace

std::vector<Mapping> parseMappingsText(const std::string& text, const Schema& schema, const Ontology& ont,
                                       const std::string& source) {
    std::vector<Mapping> out;
    std::istringstream in(text);
    std::string raw;
    unsigned lineNo = 0;
    while (std::getline(in, raw)) {
        ++lineNo;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        std::istringstream probe(raw);
        std::string first;
        if (!(probe >> first)) continue;
        if (first != "map") throw ParseError(source, lineNo, 1, "expected 'map <id> : <head> <- <sql>'");

        auto arrow = raw.find("<-");
        if (arrow == std::string::npos) throw ParseError(source, lineNo, 1, "missing '<-' in mapping");
        std::string headPart = raw.substr(0, arrow);
        std::string sqlPart = raw.substr(arrow + 2);

        std::istringstream hs(headPart);
        std::string kw, id, colon;
        hs >> kw >> id >> colon;
        if (colon != ":") throw ParseError(source, lineNo, 1, "expected ':' after mapping id");
        std::vector<std::string> headToks;
        std::string t;
        while (hs >> t) headToks.push_back(t);
        if (headToks.size() != 3)
            throw ParseError(source, lineNo, 1, "head must be '<subject> <predicate> <object>'");

        Template subj;
        try {
            subj = Template::parse(stripQuotes(headToks[0]));
        } catch (const Error& e) {
            throw ParseError(source, lineNo, 1, e.what());
        }
        const std::string& pred = headToks[1];
        RelExprPtr body = parseSqlBody(sqlPart, schema, source, lineNo);

        try {
            if (pred == "a" || pred == "rdf:type") {
                const std::string& klass = headToks[2];
                if (!ont.isClass(klass))
                    throw SpecError("mapping head references undeclared class '" + klass + "'");
                out.push_back(makeClassMapping(id, klass, subj, std::move(body), schema));
            } else {
                if (!ont.isProperty(pred))
                    throw SpecError("mapping head references undeclared property '" + pred + "'");
                Template obj = Template::parse(stripQuotes(headToks[2]));
                out.push_back(makePropertyMapping(id, pred, subj, obj, std::move(body), schema));
            }
        } catch (const Error& e) {
            throw ParseError(source, lineNo, 1, e.what());
        }
    }
    return out;
}

std::vector<Mapping> loadMappingsFile(const std::filesystem::path& path, const Schema& schema, const Ontology& ont) {
    return parseMappingsText(readFile(path), schema, ont, path.string());
}

ConstraintSet parseConstraintsText(const std::string& text, const std::string& source) {
    ConstraintSet out;
    std::istringstream in(text);
    std::string raw;
    unsigned lineNo = 0;
    while (std::getline(in, raw)) {
        ++lineNo;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        std::istringstream ls(raw);
        std::string kw;
        if (!(ls >> kw)) continue;
        try {
            if (kw == "exact") {
                std::string pred;
                if (!(ls >> pred)) throw SpecError("expected predicate after 'exact'");
                out.exacts.push_back({pred});
            } else if (kw == "vfd") {
                std::string kind, tmpl, colon;
                ls >> kind >> tmpl >> colon;
                if (colon != ":") throw SpecError("expected 'vfd branching|path <template> : P1 P2 ...'");
                Vfd v;
                v.kind = kind == "branching" ? Vfd::Kind::Branching
                         : kind == "path"    ? Vfd::Kind::Path
                                             : throw SpecError("unknown VFD kind '" + kind + "'");
                v.domainTemplate = Template::parse(stripQuotes(tmpl));
                std::string p;
                while (ls >> p) v.properties.push_back(p);
                if (v.properties.empty()) throw SpecError("VFD with empty property list");
                out.vfds.push_back(std::move(v));
            } else if (kw == "oce") {
                std::string kind, prop, klass;
                if (!(ls >> kind >> prop >> klass)) throw SpecError("expected 'oce domain|range P C'");
                Oce o;
                o.kind = kind == "domain" ? Oce::Kind::Domain
                         : kind == "range" ? Oce::Kind::Range
                                           : throw SpecError("unknown OCE kind '" + kind + "'");
                o.property = prop;
                o.klass = klass;
                out.oces.push_back(std::move(o));
            } else {
                throw SpecError("unknown constraint directive '" + kw + "'");
            }
        } catch (const Error& e) {
            throw ParseError(source, lineNo, 1, e.what());
        }
    }
    return out;
}

ConstraintSet loadConstraintsFile(const std::filesystem::path& path) {
    return parseConstraintsText(readFile(path), path.string());
}

std::string constraintsToText(const ConstraintSet& c) {
    std::ostringstream out;
    for (const auto& e : c.exacts) out << "exact " << e.predicate << "\n";
    for (const auto& v : c.vfds) {
        out << "vfd " << (v.kind == Vfd::Kind::Branching ? "branching" : "path") << " " << v.domainTemplate.toString()
            << " :";
        for (const auto& p : v.properties) out << " " << p;
        out << "\n";
    }
    for (const auto& o : c.oces)
        out << "oce " << (o.kind == Oce::Kind::Domain ? "domain" : "range") << " " << o.property << " " << o.klass
            << "\n";
    return out.str();
}

} // namespace obda
