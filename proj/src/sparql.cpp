#include "obda/sparql.hpp"

#include "obda/diagnostics.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace obda {

RdfGraph graphOfAssertions(const AssertionSet& assertions) {
    RdfGraph g;
    for (const auto& a : assertions) {
        if (a.object)
            g.triples.insert({a.subject, Value::text(a.predicate), *a.object});
        else
            g.triples.insert({a.subject, Value::text(kRdfType), Value::text(a.predicate)});
    }
    return g;
}

namespace pat {

PatternPtr bgp(std::vector<TriplePattern> triples) {
    auto p = std::make_shared<GraphPattern>(GraphPattern::Kind::Bgp);
    p->triples = std::move(triples);
    return p;
}

PatternPtr filter(Filter condition, PatternPtr child) {
    auto p = std::make_shared<GraphPattern>(GraphPattern::Kind::Filter);
    p->condition = std::move(condition);
    p->children = {std::move(child)};
    return p;
}

PatternPtr bind(PatternPtr child, std::string var, Value value) {
    auto p = std::make_shared<GraphPattern>(GraphPattern::Kind::Bind);
    p->bindVar = std::move(var);
    p->bindValue = std::move(value);
    p->children = {std::move(child)};
    return p;
}

PatternPtr join(PatternPtr a, PatternPtr b) {
    auto p = std::make_shared<GraphPattern>(GraphPattern::Kind::Join);
    p->children = {std::move(a), std::move(b)};
    return p;
}

PatternPtr setUnion(PatternPtr a, PatternPtr b) {
    auto p = std::make_shared<GraphPattern>(GraphPattern::Kind::Union);
    p->children = {std::move(a), std::move(b)};
    return p;
}

PatternPtr opt(PatternPtr left, PatternPtr right, Filter condition) {
    auto p = std::make_shared<GraphPattern>(GraphPattern::Kind::Opt);
    p->condition = std::move(condition);
    p->children = {std::move(left), std::move(right)};
    return p;
}

} // namespace pat

namespace {

void collectVars(const GraphPattern& p, std::vector<std::string>& out, std::set<std::string>& seen) {
    auto add = [&](const std::string& v) {
        if (seen.insert(v).second) out.push_back(v);
    };
    for (const auto& t : p.triples)
        for (const Term* term : {&t.subject, &t.predicate, &t.object})
            if (term->variable) add(term->var);
    if (p.kind == GraphPattern::Kind::Filter || p.kind == GraphPattern::Kind::Opt) {
        std::set<std::string> fv;
        p.condition.collectAttrs(fv);
        // filter variables do not extend the pattern domain; skip
    }
    if (p.kind == GraphPattern::Kind::Bind) add(p.bindVar);
    for (const auto& c : p.children) collectVars(*c, out, seen);
    if (p.kind == GraphPattern::Kind::Bind) add(p.bindVar); // after child for appearance order
}

} // namespace

std::vector<std::string> patternVars(const GraphPattern& p) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    collectVars(p, out, seen);
    return out;
}

std::set<std::string> alwaysBoundVars(const GraphPattern& p) {
    switch (p.kind) {
        case GraphPattern::Kind::Bgp: {
            std::set<std::string> out;
            for (const auto& t : p.triples)
                for (const Term* term : {&t.subject, &t.predicate, &t.object})
                    if (term->variable) out.insert(term->var);
            return out;
        }
        case GraphPattern::Kind::Filter:
            return alwaysBoundVars(*p.children[0]);
        case GraphPattern::Kind::Bind: {
            auto out = alwaysBoundVars(*p.children[0]);
            if (!p.bindValue.isNull()) out.insert(p.bindVar);
            return out;
        }
        case GraphPattern::Kind::Join: {
            auto a = alwaysBoundVars(*p.children[0]);
            auto b = alwaysBoundVars(*p.children[1]);
            a.insert(b.begin(), b.end());
            return a;
        }
        case GraphPattern::Kind::Union: {
            auto a = alwaysBoundVars(*p.children[0]);
            auto b = alwaysBoundVars(*p.children[1]);
            std::set<std::string> out;
            for (const auto& v : a)
                if (b.count(v)) out.insert(v);
            return out;
        }
        case GraphPattern::Kind::Opt:
            return alwaysBoundVars(*p.children[0]);
    }
    return {};
}

// ---------------------------------------------------------------------------
// Evaluation.

namespace {

bool compatible(const SolutionMapping& a, const SolutionMapping& b) {
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    for (const auto& [v, val] : small) {
        auto it = large.find(v);
        if (it != large.end() && !(it->second == val)) return false;
    }
    return true;
}

SolutionMapping merge(const SolutionMapping& a, const SolutionMapping& b) {
    SolutionMapping out = a;
    out.insert(b.begin(), b.end());
    return out;
}

Truth evalFilterOnSolution(const Filter& f, const SolutionMapping& s) {
    std::set<std::string> vars;
    f.collectAttrs(vars);
    std::vector<std::string> names(vars.begin(), vars.end());
    Tuple t;
    t.reserve(names.size());
    for (const auto& v : names) {
        auto it = s.find(v);
        t.push_back(it == s.end() ? Value::null() : it->second);
    }
    auto pos = [&names](const std::string& a) -> std::size_t {
        return static_cast<std::size_t>(std::find(names.begin(), names.end(), a) - names.begin());
    };
    return f.eval(t, pos);
}

bool matchTerm(const Term& t, const Value& v, SolutionMapping& s) {
    if (!t.variable) return t.value == v;
    auto it = s.find(t.var);
    if (it != s.end()) return it->second == v;
    s.emplace(t.var, v);
    return true;
}

} // namespace

SolutionSet answer(const GraphPattern& p, const RdfGraph& g) {
    switch (p.kind) {
        case GraphPattern::Kind::Bgp: {
            SolutionSet acc{SolutionMapping{}};
            for (const auto& tp : p.triples) {
                SolutionSet next;
                for (const auto& s : acc)
                    for (const auto& tr : g.triples) {
                        SolutionMapping ext = s;
                        if (matchTerm(tp.subject, tr.subject, ext) && matchTerm(tp.predicate, tr.predicate, ext) &&
                            matchTerm(tp.object, tr.object, ext))
                            next.insert(std::move(ext));
                    }
                acc = std::move(next);
            }
            return acc;
        }
        case GraphPattern::Kind::Filter: {
            SolutionSet out;
            for (const auto& s : answer(*p.children[0], g))
                if (evalFilterOnSolution(p.condition, s) == Truth::True) out.insert(s);
            return out;
        }
        case GraphPattern::Kind::Bind: {
            SolutionSet out;
            for (const auto& s : answer(*p.children[0], g)) {
                SolutionMapping ext = s;
                ext.emplace(p.bindVar, p.bindValue);
                out.insert(std::move(ext));
            }
            return out;
        }
        case GraphPattern::Kind::Union: {
            auto out = answer(*p.children[0], g);
            auto b = answer(*p.children[1], g);
            out.insert(b.begin(), b.end());
            return out;
        }
        case GraphPattern::Kind::Join: {
            auto a = answer(*p.children[0], g);
            auto b = answer(*p.children[1], g);
            SolutionSet out;
            for (const auto& s1 : a)
                for (const auto& s2 : b)
                    if (compatible(s1, s2)) out.insert(merge(s1, s2));
            return out;
        }
        case GraphPattern::Kind::Opt: {
            auto a = answer(*p.children[0], g);
            auto b = answer(*p.children[1], g);
            SolutionSet out;
            for (const auto& s1 : a) {
                bool extended = false;
                for (const auto& s2 : b) {
                    if (!compatible(s1, s2)) continue;
                    auto m = merge(s1, s2);
                    if (evalFilterOnSolution(p.condition, m) == Truth::True) {
                        out.insert(std::move(m));
                        extended = true;
                    }
                }
                if (!extended) out.insert(s1);
            }
            return out;
        }
    }
    return {};
}

SolutionSet projectSolutions(const SolutionSet& sols, const std::vector<std::string>& vars) {
    SolutionSet out;
    for (const auto& s : sols) {
        SolutionMapping proj;
        for (const auto& v : vars) {
            auto it = s.find(v);
            if (it != s.end()) proj.insert(*it);
        }
        out.insert(std::move(proj));
    }
    return out;
}

Relation solutionsToRelation(const SolutionSet& sols, const std::vector<std::string>& vars) {
    Relation out(vars);
    for (const auto& s : sols) {
        Tuple t;
        t.reserve(vars.size());
        for (const auto& v : vars) {
            auto it = s.find(v);
            t.push_back(it == s.end() ? Value::null() : it->second);
        }
        out.rows.insert(std::move(t));
    }
    return out;
}

SolutionSet oracleAnswer(const Query& q, const ObdaSpec& spec, const Instance& inst) {
    auto graph = graphOfAssertions(saturatedVirtualGraph(spec, inst));
    return projectSolutions(answer(*q.pattern, graph), q.answerVars);
}

Relation oracleAnswerRelation(const Query& q, const ObdaSpec& spec, const Instance& inst) {
    return solutionsToRelation(oracleAnswer(q, spec, inst), q.answerVars);
}

// ---------------------------------------------------------------------------
// Parser.

namespace {

struct Token {
    enum class Kind { Var, Iri, Number, Text, Punct, Keyword, End };
    Kind kind;
    std::string text;
    int64_t number = 0;
    unsigned line = 1;
    unsigned column = 1;
};

const char* kRejectedKeywords[] = {"GROUP",     "ORDER",  "LIMIT",  "OFFSET", "HAVING", "COUNT",
                                   "SUM",       "AVG",    "MIN",    "MAX",    "ASK",    "CONSTRUCT",
                                   "DESCRIBE",  "PREFIX", "SERVICE", "MINUS",  "GRAPH",  "EXISTS",
                                   "VALUES"};

struct Lexer {
    const std::string& src;
    const std::string& source;
    std::size_t pos = 0;
    unsigned line = 1, col = 1;

    void advance(char c) {
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }

    Token next() {
        while (pos < src.size()) {
            char c = src[pos];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance(c);
            } else if (c == '#') {
                while (pos < src.size() && src[pos] != '\n') advance(src[pos]);
            } else {
                break;
            }
        }
        Token t;
        t.line = line;
        t.column = col;
        if (pos >= src.size()) {
            t.kind = Token::Kind::End;
            return t;
        }
        char c = src[pos];
        if (c == '{' || c == '}' || c == '.' || c == ';' || c == '(' || c == ')' || c == '=' || c == '<' ||
            c == '!' || c == ',') {
            if (c == '<' && pos + 1 < src.size() && src[pos + 1] != ' ' && src[pos + 1] != '?') {
                // angle-bracketed IRI
                std::string iri;
                advance(c);
                while (pos < src.size() && src[pos] != '>') {
                    iri.push_back(src[pos]);
                    advance(src[pos]);
                }
                if (pos >= src.size()) throw ParseError(source, t.line, t.column, "unterminated IRI");
                advance('>');
                t.kind = Token::Kind::Iri;
                t.text = iri;
                return t;
            }
            if (c == '&') {
            }
            advance(c);
            t.kind = Token::Kind::Punct;
            t.text = std::string(1, c);
            return t;
        }
        if (c == '&') {
            advance(c);
            if (pos < src.size() && src[pos] == '&') advance('&');
            t.kind = Token::Kind::Punct;
            t.text = "&&";
            return t;
        }
        if (c == '?' || c == '$') {
            advance(c);
            std::string name;
            while (pos < src.size() && (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_')) {
                name.push_back(src[pos]);
                advance(src[pos]);
            }
            if (name.empty()) throw ParseError(source, t.line, t.column, "empty variable name");
            t.kind = Token::Kind::Var;
            t.text = name;
            return t;
        }
        if (c == '\'' || c == '"') {
            char quote = c;
            advance(c);
            std::string text;
            while (pos < src.size() && src[pos] != quote) {
                text.push_back(src[pos]);
                advance(src[pos]);
            }
            if (pos >= src.size()) throw ParseError(source, t.line, t.column, "unterminated string literal");
            advance(quote);
            t.kind = Token::Kind::Text;
            t.text = text;
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && pos + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[pos + 1])))) {
            std::string num;
            if (c == '-') {
                num.push_back(c);
                advance(c);
            }
            while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
                num.push_back(src[pos]);
                advance(src[pos]);
            }
            t.kind = Token::Kind::Number;
            t.text = num;
            t.number = std::stoll(num);
            return t;
        }
        // bare word: keyword, prefixed name or blank node
        std::string word;
        while (pos < src.size() && !std::isspace(static_cast<unsigned char>(src[pos])) &&
               std::string("{}.;()=<!,").find(src[pos]) == std::string::npos) {
            word.push_back(src[pos]);
            advance(src[pos]);
        }
        if (word.empty()) throw ParseError(source, t.line, t.column, std::string("unexpected character '") + c + "'");
        std::string upper;
        for (char w : word) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(w))));
        if (upper == "SELECT" || upper == "WHERE" || upper == "FILTER" || upper == "OPTIONAL" || upper == "UNION" ||
            upper == "BIND" || upper == "AS" || upper == "BOUND" || upper == "DISTINCT" || upper == "A" ||
            upper == "*") {
            t.kind = Token::Kind::Keyword;
            t.text = upper;
            if (word == "a") t.text = "a"; // keep the triple-pattern keyword distinguishable
            return t;
        }
        for (const char* kw : kRejectedKeywords)
            if (upper == kw)
                throw ParseError(source, t.line, t.column,
                                 "unsupported construct '" + word + "' (the supported fragment is "
                                 "SELECT / BGP / FILTER / OPTIONAL / UNION / BIND)");
        t.kind = Token::Kind::Iri;
        t.text = word;
        return t;
    }
};

struct Parser {
    Lexer lex;
    Token tok;
    unsigned blankCounter = 0;

    explicit Parser(const std::string& src, const std::string& source) : lex{src, source} { tok = lex.next(); }

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(lex.source, tok.line, tok.column, msg); }

    void expectPunct(const std::string& p) {
        if (tok.kind != Token::Kind::Punct || tok.text != p) fail("expected '" + p + "'");
        tok = lex.next();
    }
    bool atPunct(const std::string& p) const { return tok.kind == Token::Kind::Punct && tok.text == p; }
    bool atKeyword(const std::string& k) const { return tok.kind == Token::Kind::Keyword && tok.text == k; }

    Term parseTerm() {
        if (tok.kind == Token::Kind::Var) {
            Term t = Term::v(tok.text);
            tok = lex.next();
            return t;
        }
        if (tok.kind == Token::Kind::Number) {
            Term t = Term::c(Value::integer(tok.number));
            tok = lex.next();
            return t;
        }
        if (tok.kind == Token::Kind::Text) {
            Term t = Term::c(Value::text(tok.text));
            tok = lex.next();
            return t;
        }
        if (tok.kind == Token::Kind::Iri) {
            if (tok.text.rfind("_:", 0) == 0) { // blank node -> fresh variable
                Term t = Term::v("_blank" + std::to_string(++blankCounter) + "_" + tok.text.substr(2));
                tok = lex.next();
                return t;
            }
            for (char c : tok.text)
                if (c == '|' || c == '+' || c == '*')
                    fail("property paths are not supported");
            Term t = Term::c(Value::text(tok.text));
            tok = lex.next();
            return t;
        }
        fail("expected RDF term or variable");
    }

    Term parsePredicate() {
        if (atKeyword("a")) {
            tok = lex.next();
            return Term::c(Value::text(kRdfType));
        }
        if (tok.kind == Token::Kind::Var || tok.kind == Token::Kind::Iri) return parseTerm();
        fail("expected predicate");
    }

    // filter grammar: conj of unary; unary := '!' unary | '(' expr ')' | atom
    Filter parseFilterExpr() {
        std::vector<Filter> parts{parseFilterUnary()};
        while (tok.kind == Token::Kind::Punct && tok.text == "&&") {
            tok = lex.next();
            parts.push_back(parseFilterUnary());
        }
        return Filter::conj(std::move(parts));
    }

    Filter parseFilterUnary() {
        if (atPunct("!")) {
            tok = lex.next();
            return Filter::negate(parseFilterUnary());
        }
        if (atPunct("(")) {
            tok = lex.next();
            Filter f = parseFilterExpr();
            expectPunct(")");
            return f;
        }
        if (atKeyword("BOUND")) {
            tok = lex.next();
            expectPunct("(");
            if (tok.kind != Token::Kind::Var) fail("bound() expects a variable");
            std::string v = tok.text;
            tok = lex.next();
            expectPunct(")");
            return Filter::negate(Filter::isNull({v}));
        }
        // comparison atom
        if (tok.kind != Token::Kind::Var) fail("filter atoms compare a variable with a term");
        std::string lhs = tok.text;
        tok = lex.next();
        bool less = false;
        if (atPunct("=")) {
            tok = lex.next();
        } else if (atPunct("<")) {
            less = true;
            tok = lex.next();
        } else {
            fail("expected '=' or '<' in filter");
        }
        if (tok.kind == Token::Kind::Var) {
            if (less) fail("'<' between two variables is not supported");
            std::string rhs = tok.text;
            tok = lex.next();
            return Filter::eqAttr(lhs, rhs);
        }
        Term rhs = parseTerm();
        return less ? Filter::lt(lhs, rhs.value) : Filter::eq(lhs, rhs.value);
    }

    PatternPtr parseGroup() {
        expectPunct("{");
        PatternPtr current;
        std::vector<TriplePattern> pending;
        std::vector<Filter> filters;

        auto flush = [&]() {
            if (!pending.empty()) {
                auto b = pat::bgp(std::move(pending));
                pending.clear();
                current = current ? pat::join(current, b) : b;
            }
        };

        while (!atPunct("}")) {
            if (tok.kind == Token::Kind::End) fail("unterminated group (missing '}')");
            if (atKeyword("FILTER")) {
                tok = lex.next();
                bool parens = atPunct("(");
                if (parens) tok = lex.next();
                filters.push_back(parseFilterExpr());
                if (parens) expectPunct(")");
                if (atPunct(".")) tok = lex.next();
            } else if (atKeyword("OPTIONAL")) {
                tok = lex.next();
                flush();
                if (!current) current = pat::bgp({});
                auto inner = parseGroup();
                if (inner->kind == GraphPattern::Kind::Filter)
                    current = pat::opt(current, inner->children[0], inner->condition);
                else
                    current = pat::opt(current, inner, Filter::always());
                if (atPunct(".")) tok = lex.next();
            } else if (atKeyword("BIND")) {
                tok = lex.next();
                expectPunct("(");
                Term value = parseTerm();
                if (value.variable) fail("BIND of a variable is not supported");
                if (!atKeyword("AS")) fail("expected AS in BIND");
                tok = lex.next();
                if (tok.kind != Token::Kind::Var) fail("expected variable after AS");
                std::string var = tok.text;
                tok = lex.next();
                expectPunct(")");
                flush();
                if (!current) current = pat::bgp({});
                auto vars = patternVars(*current);
                if (std::find(vars.begin(), vars.end(), var) != vars.end())
                    fail("BIND variable ?" + var + " is not fresh");
                current = pat::bind(current, var, value.value);
                if (atPunct(".")) tok = lex.next();
            } else if (atPunct("{")) {
                auto sub = parseGroup();
                while (atKeyword("UNION")) {
                    tok = lex.next();
                    sub = pat::setUnion(sub, parseGroup());
                }
                flush();
                current = current ? pat::join(current, sub) : sub;
                if (atPunct(".")) tok = lex.next();
            } else {
                // triple block: subject predicate object (';' predicate object)* '.'?
                Term subject = parseTerm();
                while (true) {
                    Term predicate = parsePredicate();
                    Term object = parseTerm();
                    pending.push_back({subject, predicate, object});
                    if (atPunct(";")) {
                        tok = lex.next();
                        continue;
                    }
                    break;
                }
                if (atPunct(".")) tok = lex.next();
            }
        }
        expectPunct("}");
        flush();
        if (!current) current = pat::bgp({});
        for (auto& f : filters) current = pat::filter(std::move(f), current);
        return current;
    }
};

} // namespace

Query parseQuery(const std::string& text, const std::string& source) {
    Parser p(text, source);
    if (!p.atKeyword("SELECT")) p.fail("query must start with SELECT");
    p.tok = p.lex.next();
    if (p.atKeyword("DISTINCT")) p.tok = p.lex.next(); // set semantics throughout

    bool star = false;
    std::vector<std::string> vars;
    if (p.atKeyword("*") || p.atPunct("*")) {
        star = true;
        p.tok = p.lex.next();
    } else {
        while (p.tok.kind == Token::Kind::Var) {
            vars.push_back(p.tok.text);
            p.tok = p.lex.next();
        }
        if (vars.empty()) p.fail("expected '*' or answer variables after SELECT");
    }
    if (!p.atKeyword("WHERE")) p.fail("expected WHERE");
    p.tok = p.lex.next();

    Query q;
    q.pattern = p.parseGroup();
    if (p.tok.kind != Token::Kind::End) p.fail("trailing input after query");
    q.answerVars = star ? patternVars(*q.pattern) : vars;
    return q;
}

} // namespace obda
