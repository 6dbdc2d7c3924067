#include "obda/relalg.hpp"

#include "obda/diagnostics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace obda {

namespace rel {

RelExprPtr base(std::string name) {
    auto e = std::make_shared<RelExpr>(RelExpr::Kind::Base);
    e->name = std::move(name);
    return e;
}

RelExprPtr select(Filter f, RelExprPtr child) {
    if (f.isTrue()) return child;
    auto e = std::make_shared<RelExpr>(RelExpr::Kind::Select);
    e->filter = std::move(f);
    e->children = {std::move(child)};
    return e;
}

RelExprPtr project(std::vector<std::string> attrs, RelExprPtr child) {
    if (child->kind == RelExpr::Kind::Project) {
        // Project over Project collapses to the outer attribute list.
        child = child->children[0];
    }
    auto e = std::make_shared<RelExpr>(RelExpr::Kind::Project);
    e->attrs = std::move(attrs);
    e->children = {std::move(child)};
    return e;
}

RelExprPtr rename(std::vector<std::pair<std::string, std::string>> renames, RelExprPtr child) {
    if (renames.empty()) return child;
    auto e = std::make_shared<RelExpr>(RelExpr::Kind::Rename);
    e->renames = std::move(renames);
    e->children = {std::move(child)};
    return e;
}

RelExprPtr naturalJoin(std::vector<RelExprPtr> children) {
    if (children.empty()) throw PlanError("natural join needs at least one child");
    if (children.size() == 1) return children[0];
    auto e = std::make_shared<RelExpr>(RelExpr::Kind::NaturalJoin);
    e->children = std::move(children);
    return e;
}

RelExprPtr equiJoin(RelExprPtr left, RelExprPtr right, std::vector<std::pair<std::string, std::string>> pairs) {
    auto e = std::make_shared<RelExpr>(RelExpr::Kind::EquiJoin);
    e->children = {std::move(left), std::move(right)};
    e->joinPairs = std::move(pairs);
    return e;
}

RelExprPtr setUnion(std::vector<RelExprPtr> children) {
    if (children.size() == 1) return children[0];
    auto e = std::make_shared<RelExpr>(RelExpr::Kind::Union);
    e->children = std::move(children);
    return e;
}

RelExprPtr empty(std::vector<std::string> attrs) {
    auto e = std::make_shared<RelExpr>(RelExpr::Kind::Union);
    e->attrs = std::move(attrs);
    return e;
}

RelExprPtr difference(RelExprPtr left, RelExprPtr right) {
    auto e = std::make_shared<RelExpr>(RelExpr::Kind::Difference);
    e->children = {std::move(left), std::move(right)};
    return e;
}

RelExprPtr padding(std::vector<std::string> attrs, RelExprPtr child) {
    if (attrs.empty()) return child;
    auto e = std::make_shared<RelExpr>(RelExpr::Kind::Padding);
    e->attrs = std::move(attrs);
    e->children = {std::move(child)};
    return e;
}

RelExprPtr uriConstruct(std::string var, Template tmpl, std::vector<std::string> attrs, RelExprPtr child) {
    if (attrs.size() != tmpl.arity()) throw PlanError("uri construct arity mismatch for '" + var + "'");
    auto e = std::make_shared<RelExpr>(RelExpr::Kind::UriConstruct);
    e->uri.var = std::move(var);
    e->uri.tmpl = std::move(tmpl);
    e->uri.attrs = std::move(attrs);
    e->children = {std::move(child)};
    return e;
}

RelExprPtr constBind(std::string var, Value constant, RelExprPtr child) {
    auto e = std::make_shared<RelExpr>(RelExpr::Kind::UriConstruct);
    e->uri.var = std::move(var);
    e->uri.constant = std::move(constant);
    e->children = {std::move(child)};
    return e;
}

RelExprPtr cteRef(std::string name) {
    auto e = std::make_shared<RelExpr>(RelExpr::Kind::CteRef);
    e->name = std::move(name);
    return e;
}

RelExprPtr withCte(std::vector<std::pair<std::string, RelExprPtr>> ctes, RelExprPtr body) {
    if (ctes.empty()) return body;
    auto e = std::make_shared<RelExpr>(RelExpr::Kind::WithCte);
    e->ctes = std::move(ctes);
    e->children = {std::move(body)};
    return e;
}

} // namespace rel

bool structurallyEqual(const RelExpr& a, const RelExpr& b) {
    if (&a == &b) return true;
    if (a.kind != b.kind || a.name != b.name || a.attrs != b.attrs || a.renames != b.renames ||
        a.joinPairs != b.joinPairs)
        return false;
    if (!a.filter.structurallyEqual(b.filter)) return false;
    if (a.uri.var != b.uri.var || a.uri.attrs != b.uri.attrs || !(a.uri.tmpl == b.uri.tmpl)) return false;
    if (a.uri.constant.has_value() != b.uri.constant.has_value()) return false;
    if (a.uri.constant && !(*a.uri.constant == *b.uri.constant)) return false;
    if (a.ctes.size() != b.ctes.size() || a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.ctes.size(); ++i) {
        if (a.ctes[i].first != b.ctes[i].first) return false;
        if (!structurallyEqual(*a.ctes[i].second, *b.ctes[i].second)) return false;
    }
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!structurallyEqual(*a.children[i], *b.children[i])) return false;
    return true;
}

std::size_t structuralHash(const RelExpr& e) {
    std::size_t h = static_cast<std::size_t>(e.kind) * 31 + 17;
    auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2); };
    auto mixStr = [&](const std::string& s) { mix(std::hash<std::string>{}(s)); };
    mixStr(e.name);
    for (const auto& a : e.attrs) mixStr(a);
    for (const auto& [n, o] : e.renames) {
        mixStr(n);
        mixStr(o);
    }
    for (const auto& [l, r] : e.joinPairs) {
        mixStr(l);
        mixStr(r);
    }
    mix(e.filter.structuralHash());
    mixStr(e.uri.var);
    mix(e.uri.tmpl.structuralHash());
    for (const auto& a : e.uri.attrs) mixStr(a);
    if (e.uri.constant) mixStr(e.uri.constant->isNull() ? "\x01" : e.uri.constant->display());
    for (const auto& [n, c] : e.ctes) {
        mixStr(n);
        mix(structuralHash(*c));
    }
    for (const auto& c : e.children) mix(structuralHash(*c));
    return h;
}

namespace {

using CteEnv = std::map<std::string, std::vector<std::string>>;

std::vector<std::string> attrsOfImpl(const RelExpr& e, const Schema& schema, CteEnv& env) {
    switch (e.kind) {
        case RelExpr::Kind::Base:
            return schema.relation(e.name).attrs;
        case RelExpr::Kind::Select: {
            auto attrs = attrsOfImpl(*e.children[0], schema, env);
            std::set<std::string> used;
            e.filter.collectAttrs(used);
            for (const auto& a : used)
                if (std::find(attrs.begin(), attrs.end(), a) == attrs.end())
                    throw SchemaError("filter references unknown attribute '" + a + "'");
            return attrs;
        }
        case RelExpr::Kind::Project: {
            auto attrs = attrsOfImpl(*e.children[0], schema, env);
            for (const auto& a : e.attrs)
                if (std::find(attrs.begin(), attrs.end(), a) == attrs.end())
                    throw SchemaError("projection references unknown attribute '" + a + "'");
            return e.attrs;
        }
        case RelExpr::Kind::Rename: {
            auto attrs = attrsOfImpl(*e.children[0], schema, env);
            for (const auto& [n, o] : e.renames) {
                auto it = std::find(attrs.begin(), attrs.end(), o);
                if (it == attrs.end()) throw SchemaError("rename references unknown attribute '" + o + "'");
                *it = n;
            }
            std::set<std::string> dedup(attrs.begin(), attrs.end());
            if (dedup.size() != attrs.size()) throw SchemaError("rename produces duplicate attributes");
            return attrs;
        }
        case RelExpr::Kind::NaturalJoin: {
            std::vector<std::string> attrs;
            for (const auto& c : e.children) {
                auto ca = attrsOfImpl(*c, schema, env);
                for (auto& a : ca)
                    if (std::find(attrs.begin(), attrs.end(), a) == attrs.end()) attrs.push_back(std::move(a));
            }
            return attrs;
        }
        case RelExpr::Kind::EquiJoin: {
            auto l = attrsOfImpl(*e.children[0], schema, env);
            auto r = attrsOfImpl(*e.children[1], schema, env);
            for (const auto& a : r)
                if (std::find(l.begin(), l.end(), a) != l.end())
                    throw SchemaError("equi-join sides share attribute '" + a + "'");
            for (const auto& [la, ra] : e.joinPairs) {
                if (std::find(l.begin(), l.end(), la) == l.end())
                    throw SchemaError("equi-join references unknown left attribute '" + la + "'");
                if (std::find(r.begin(), r.end(), ra) == r.end())
                    throw SchemaError("equi-join references unknown right attribute '" + ra + "'");
            }
            l.insert(l.end(), r.begin(), r.end());
            return l;
        }
        case RelExpr::Kind::Union: {
            if (e.children.empty()) return e.attrs;
            auto attrs = attrsOfImpl(*e.children[0], schema, env);
            std::set<std::string> ref(attrs.begin(), attrs.end());
            for (std::size_t i = 1; i < e.children.size(); ++i) {
                auto ca = attrsOfImpl(*e.children[i], schema, env);
                if (std::set<std::string>(ca.begin(), ca.end()) != ref)
                    throw SchemaError("union branches have different attribute sets");
            }
            return attrs;
        }
        case RelExpr::Kind::Difference: {
            auto l = attrsOfImpl(*e.children[0], schema, env);
            auto r = attrsOfImpl(*e.children[1], schema, env);
            if (std::set<std::string>(l.begin(), l.end()) != std::set<std::string>(r.begin(), r.end()))
                throw SchemaError("difference sides have different attribute sets");
            return l;
        }
        case RelExpr::Kind::Padding: {
            auto attrs = attrsOfImpl(*e.children[0], schema, env);
            for (const auto& a : e.attrs) {
                if (std::find(attrs.begin(), attrs.end(), a) != attrs.end())
                    throw SchemaError("padding attribute '" + a + "' already exists");
                attrs.push_back(a);
            }
            return attrs;
        }
        case RelExpr::Kind::UriConstruct: {
            auto attrs = attrsOfImpl(*e.children[0], schema, env);
            for (const auto& a : e.uri.attrs)
                if (std::find(attrs.begin(), attrs.end(), a) == attrs.end())
                    throw SchemaError("uri construct references unknown attribute '" + a + "'");
            if (std::find(attrs.begin(), attrs.end(), e.uri.var) != attrs.end())
                throw SchemaError("uri construct output '" + e.uri.var + "' is not fresh");
            attrs.push_back(e.uri.var);
            return attrs;
        }
        case RelExpr::Kind::CteRef: {
            auto it = env.find(e.name);
            if (it == env.end()) throw PlanError("unbound CTE name '" + e.name + "'");
            return it->second;
        }
        case RelExpr::Kind::WithCte: {
            CteEnv inner = env;
            for (const auto& [n, c] : e.ctes) inner[n] = attrsOfImpl(*c, schema, inner);
            return attrsOfImpl(*e.children[0], schema, inner);
        }
    }
    throw PlanError("unreachable expression kind");
}

} // namespace

std::vector<std::string> outputAttrs(const RelExpr& e, const Schema& schema) {
    CteEnv env;
    return attrsOfImpl(e, schema, env);
}

namespace {

std::set<std::string> nullableImpl(const RelExpr& e, const Schema& schema,
                                   std::map<std::string, std::set<std::string>>& cteNullable) {
    switch (e.kind) {
        case RelExpr::Kind::Base: {
            std::set<std::string> out;
            for (const auto& a : schema.relation(e.name).attrs)
                if (!schema.isNotNull(e.name, a)) out.insert(a);
            return out;
        }
        case RelExpr::Kind::Select: {
            auto out = nullableImpl(*e.children[0], schema, cteNullable);
            // Top-level not(isNull(a)) conjuncts force a non-null.
            auto strip = [&out](const Filter& f) {
                if (f.kind() == Filter::Kind::Not && f.children()[0].kind() == Filter::Kind::IsNull &&
                    f.children()[0].attrs().size() == 1)
                    out.erase(f.children()[0].attrs()[0]);
            };
            if (e.filter.kind() == Filter::Kind::And)
                for (const auto& c : e.filter.children()) strip(c);
            else
                strip(e.filter);
            return out;
        }
        case RelExpr::Kind::Project: {
            auto in = nullableImpl(*e.children[0], schema, cteNullable);
            std::set<std::string> out;
            for (const auto& a : e.attrs)
                if (in.count(a)) out.insert(a);
            return out;
        }
        case RelExpr::Kind::Rename: {
            auto in = nullableImpl(*e.children[0], schema, cteNullable);
            for (const auto& [n, o] : e.renames)
                if (in.erase(o)) in.insert(n);
            return in;
        }
        case RelExpr::Kind::NaturalJoin:
        case RelExpr::Kind::EquiJoin:
        case RelExpr::Kind::Union: {
            std::set<std::string> out;
            for (const auto& c : e.children) {
                auto cn = nullableImpl(*c, schema, cteNullable);
                out.insert(cn.begin(), cn.end());
            }
            return out;
        }
        case RelExpr::Kind::Difference:
            return nullableImpl(*e.children[0], schema, cteNullable);
        case RelExpr::Kind::Padding: {
            auto out = nullableImpl(*e.children[0], schema, cteNullable);
            out.insert(e.attrs.begin(), e.attrs.end());
            return out;
        }
        case RelExpr::Kind::UriConstruct: {
            auto out = nullableImpl(*e.children[0], schema, cteNullable);
            bool anyNullable = false;
            for (const auto& a : e.uri.attrs) anyNullable |= out.count(a) != 0;
            if (e.uri.constant ? e.uri.constant->isNull() : anyNullable) out.insert(e.uri.var);
            return out;
        }
        case RelExpr::Kind::CteRef: {
            auto it = cteNullable.find(e.name);
            if (it == cteNullable.end()) throw PlanError("unbound CTE name '" + e.name + "'");
            return it->second;
        }
        case RelExpr::Kind::WithCte: {
            auto inner = cteNullable;
            for (const auto& [n, c] : e.ctes) inner[n] = nullableImpl(*c, schema, inner);
            return nullableImpl(*e.children[0], schema, inner);
        }
    }
    throw PlanError("unreachable expression kind");
}

} // namespace

std::set<std::string> nullableAttrs(const RelExpr& e, const Schema& schema) {
    std::map<std::string, std::set<std::string>> env;
    return nullableImpl(e, schema, env);
}

ExprStats exprStats(const RelExpr& e) {
    switch (e.kind) {
        case RelExpr::Kind::Base:
        case RelExpr::Kind::CteRef:
            return {};
        case RelExpr::Kind::Union: {
            if (e.children.empty()) return {0, 0};
            ExprStats s{0, 0};
            for (const auto& c : e.children) {
                auto cs = exprStats(*c);
                s.branches += cs.branches;
                s.joins = std::max(s.joins, cs.joins);
            }
            return s;
        }
        case RelExpr::Kind::NaturalJoin:
        case RelExpr::Kind::EquiJoin: {
            ExprStats s{1, static_cast<long long>(e.children.size()) - 1};
            for (const auto& c : e.children) {
                auto cs = exprStats(*c);
                s.branches *= cs.branches;
                s.joins += cs.joins;
            }
            return s;
        }
        case RelExpr::Kind::Difference: {
            auto l = exprStats(*e.children[0]);
            auto r = exprStats(*e.children[1]);
            return {l.branches, std::max(l.joins, r.joins)};
        }
        case RelExpr::Kind::WithCte: {
            auto s = exprStats(*e.children[0]);
            for (const auto& [n, c] : e.ctes) s.joins = std::max(s.joins, exprStats(*c).joins);
            return s;
        }
        default:
            return exprStats(*e.children[0]);
    }
}

namespace {

void printImpl(const RelExpr& e, std::ostringstream& out, int indent) {
    auto pad = [&] { out << std::string(static_cast<std::size_t>(indent) * 2, ' '); };
    pad();
    switch (e.kind) {
        case RelExpr::Kind::Base:
            out << "Base " << e.name << "\n";
            return;
        case RelExpr::Kind::CteRef:
            out << "CteRef " << e.name << "\n";
            return;
        case RelExpr::Kind::Select:
            out << "Select [" << e.filter.toString() << "]\n";
            break;
        case RelExpr::Kind::Project: {
            out << "Project [";
            for (std::size_t i = 0; i < e.attrs.size(); ++i) out << (i ? "," : "") << e.attrs[i];
            out << "]\n";
            break;
        }
        case RelExpr::Kind::Rename: {
            out << "Rename [";
            for (std::size_t i = 0; i < e.renames.size(); ++i)
                out << (i ? "," : "") << e.renames[i].first << "<-" << e.renames[i].second;
            out << "]\n";
            break;
        }
        case RelExpr::Kind::NaturalJoin:
            out << "NaturalJoin\n";
            break;
        case RelExpr::Kind::EquiJoin: {
            out << "EquiJoin [";
            for (std::size_t i = 0; i < e.joinPairs.size(); ++i)
                out << (i ? "," : "") << e.joinPairs[i].first << "=" << e.joinPairs[i].second;
            out << "]\n";
            break;
        }
        case RelExpr::Kind::Union:
            if (e.children.empty()) {
                out << "Empty [";
                for (std::size_t i = 0; i < e.attrs.size(); ++i) out << (i ? "," : "") << e.attrs[i];
                out << "]\n";
                return;
            }
            out << "Union\n";
            break;
        case RelExpr::Kind::Difference:
            out << "Difference\n";
            break;
        case RelExpr::Kind::Padding: {
            out << "Padding [";
            for (std::size_t i = 0; i < e.attrs.size(); ++i) out << (i ? "," : "") << e.attrs[i];
            out << "]\n";
            break;
        }
        case RelExpr::Kind::UriConstruct:
            if (e.uri.constant)
                out << "Bind " << e.uri.var << " := "
                    << (e.uri.constant->isText() ? "'" + e.uri.constant->asText() + "'" : e.uri.constant->display())
                    << "\n";
            else
                out << "Construct " << e.uri.var << " := " << e.uri.tmpl.toString() << "\n";
            break;
        case RelExpr::Kind::WithCte: {
            out << "With\n";
            for (const auto& [n, c] : e.ctes) {
                pad();
                out << "  " << n << " :=\n";
                printImpl(*c, out, indent + 2);
            }
            break;
        }
    }
    for (const auto& c : e.children) printImpl(*c, out, indent + 1);
}

} // namespace

std::string prettyPrint(const RelExpr& e) {
    std::ostringstream out;
    printImpl(e, out, 0);
    return out.str();
}

RelExprPtr substitute(const RelExprPtr& e, const RelExprPtr& target, const RelExprPtr& replacement) {
    if (structurallyEqual(*e, *target)) return replacement;
    bool changed = false;
    auto copy = std::make_shared<RelExpr>(*e);
    for (auto& c : copy->children) {
        auto nc = substitute(c, target, replacement);
        if (nc != c) {
            c = nc;
            changed = true;
        }
    }
    for (auto& [n, c] : copy->ctes) {
        auto nc = substitute(c, target, replacement);
        if (nc != c) {
            c = nc;
            changed = true;
        }
    }
    return changed ? RelExprPtr(copy) : e;
}

std::size_t countOccurrences(const RelExprPtr& e, const RelExprPtr& target) {
    if (structurallyEqual(*e, *target)) return 1;
    std::size_t n = 0;
    for (const auto& c : e->children) n += countOccurrences(c, target);
    for (const auto& [name, c] : e->ctes) n += countOccurrences(c, target);
    return n;
}

} // namespace obda
