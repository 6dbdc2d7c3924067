#include "obda/eval.hpp"

#include "obda/diagnostics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

namespace obda {

namespace {

struct CteScope {
    std::map<std::string, Relation> bound;
};

std::size_t attrPos(const Relation& rel, const std::string& attr) { return rel.indexOf(attr); }

/// Hash-join helper: joins left and right on the given attribute positions.
/// Null join keys never match. `emit` receives the two source tuples.
template <typename Emit>
void hashJoin(const Relation& left, const Relation& right, const std::vector<std::size_t>& leftKey,
              const std::vector<std::size_t>& rightKey, Emit emit) {
    std::map<Tuple, std::vector<const Tuple*>> index;
    for (const auto& r : right.rows) {
        Tuple key;
        key.reserve(rightKey.size());
        bool nullKey = false;
        for (auto i : rightKey) {
            if (r[i].isNull()) {
                nullKey = true;
                break;
            }
            key.push_back(r[i]);
        }
        if (!nullKey) index[std::move(key)].push_back(&r);
    }
    for (const auto& l : left.rows) {
        Tuple key;
        key.reserve(leftKey.size());
        bool nullKey = false;
        for (auto i : leftKey) {
            if (l[i].isNull()) {
                nullKey = true;
                break;
            }
            key.push_back(l[i]);
        }
        if (nullKey) continue;
        auto it = index.find(key);
        if (it == index.end()) continue;
        for (const Tuple* r : it->second) emit(l, *r);
    }
}

Relation evalImpl(const RelExpr& e, const Instance& inst, CteScope& scope) {
    switch (e.kind) {
        case RelExpr::Kind::Base:
            return inst.relation(e.name);

        case RelExpr::Kind::CteRef: {
            auto it = scope.bound.find(e.name);
            if (it == scope.bound.end()) throw PlanError("unbound CTE name '" + e.name + "'");
            return it->second;
        }

        case RelExpr::Kind::WithCte: {
            CteScope inner = scope;
            for (const auto& [n, c] : e.ctes) inner.bound[n] = evalImpl(*c, inst, inner);
            return evalImpl(*e.children[0], inst, inner);
        }

        case RelExpr::Kind::Select: {
            Relation in = evalImpl(*e.children[0], inst, scope);
            Relation out(in.attrs);
            auto pos = [&in](const std::string& a) { return attrPos(in, a); };
            for (const auto& row : in.rows)
                if (e.filter.eval(row, pos) == Truth::True) out.rows.insert(row);
            return out;
        }

        case RelExpr::Kind::Project: {
            Relation in = evalImpl(*e.children[0], inst, scope);
            std::vector<std::size_t> idx;
            idx.reserve(e.attrs.size());
            for (const auto& a : e.attrs) idx.push_back(attrPos(in, a));
            Relation out(e.attrs);
            for (const auto& row : in.rows) {
                Tuple t;
                t.reserve(idx.size());
                for (auto i : idx) t.push_back(row[i]);
                out.rows.insert(std::move(t));
            }
            return out;
        }

        case RelExpr::Kind::Rename: {
            Relation in = evalImpl(*e.children[0], inst, scope);
            for (const auto& [n, o] : e.renames) {
                auto i = in.indexOf(o);
                in.attrs[i] = n;
            }
            std::set<std::string> dedup(in.attrs.begin(), in.attrs.end());
            if (dedup.size() != in.attrs.size()) throw SchemaError("rename produces duplicate attributes");
            return in;
        }

        case RelExpr::Kind::NaturalJoin: {
            Relation acc = evalImpl(*e.children[0], inst, scope);
            for (std::size_t ci = 1; ci < e.children.size(); ++ci) {
                Relation rhs = evalImpl(*e.children[ci], inst, scope);
                std::vector<std::string> shared;
                for (const auto& a : acc.attrs)
                    if (rhs.hasAttr(a)) shared.push_back(a);
                std::vector<std::size_t> lk, rk;
                for (const auto& a : shared) {
                    lk.push_back(acc.indexOf(a));
                    rk.push_back(rhs.indexOf(a));
                }
                std::vector<std::size_t> rhsExtra;
                Relation out(acc.attrs);
                for (std::size_t i = 0; i < rhs.attrs.size(); ++i)
                    if (!acc.hasAttr(rhs.attrs[i])) {
                        out.attrs.push_back(rhs.attrs[i]);
                        rhsExtra.push_back(i);
                    }
                if (shared.empty()) {
                    for (const auto& l : acc.rows)
                        for (const auto& r : rhs.rows) {
                            Tuple t = l;
                            for (auto i : rhsExtra) t.push_back(r[i]);
                            out.rows.insert(std::move(t));
                        }
                } else {
                    hashJoin(acc, rhs, lk, rk, [&](const Tuple& l, const Tuple& r) {
                        Tuple t = l;
                        for (auto i : rhsExtra) t.push_back(r[i]);
                        out.rows.insert(std::move(t));
                    });
                }
                acc = std::move(out);
            }
            return acc;
        }

        case RelExpr::Kind::EquiJoin: {
            Relation lhs = evalImpl(*e.children[0], inst, scope);
            Relation rhs = evalImpl(*e.children[1], inst, scope);
            for (const auto& a : rhs.attrs)
                if (lhs.hasAttr(a)) throw SchemaError("equi-join sides share attribute '" + a + "'");
            std::vector<std::size_t> lk, rk;
            for (const auto& [la, ra] : e.joinPairs) {
                lk.push_back(lhs.indexOf(la));
                rk.push_back(rhs.indexOf(ra));
            }
            Relation out(lhs.attrs);
            out.attrs.insert(out.attrs.end(), rhs.attrs.begin(), rhs.attrs.end());
            if (e.joinPairs.empty()) {
                for (const auto& l : lhs.rows)
                    for (const auto& r : rhs.rows) {
                        Tuple t = l;
                        t.insert(t.end(), r.begin(), r.end());
                        out.rows.insert(std::move(t));
                    }
            } else {
                hashJoin(lhs, rhs, lk, rk, [&](const Tuple& l, const Tuple& r) {
                    Tuple t = l;
                    t.insert(t.end(), r.begin(), r.end());
                    out.rows.insert(std::move(t));
                });
            }
            return out;
        }

        case RelExpr::Kind::Union: {
            if (e.children.empty()) return Relation(e.attrs);
            Relation acc = evalImpl(*e.children[0], inst, scope);
            for (std::size_t ci = 1; ci < e.children.size(); ++ci) {
                Relation r = evalImpl(*e.children[ci], inst, scope);
                if (std::set<std::string>(r.attrs.begin(), r.attrs.end()) !=
                    std::set<std::string>(acc.attrs.begin(), acc.attrs.end()))
                    throw SchemaError("union branches have different attribute sets");
                std::vector<std::size_t> idx;
                for (const auto& a : acc.attrs) idx.push_back(r.indexOf(a));
                for (const auto& row : r.rows) {
                    Tuple t;
                    t.reserve(idx.size());
                    for (auto i : idx) t.push_back(row[i]);
                    acc.rows.insert(std::move(t));
                }
            }
            return acc;
        }

        case RelExpr::Kind::Difference: {
            Relation lhs = evalImpl(*e.children[0], inst, scope);
            Relation rhs = evalImpl(*e.children[1], inst, scope);
            if (std::set<std::string>(rhs.attrs.begin(), rhs.attrs.end()) !=
                std::set<std::string>(lhs.attrs.begin(), lhs.attrs.end()))
                throw SchemaError("difference sides have different attribute sets");
            std::vector<std::size_t> idx;
            for (const auto& a : lhs.attrs) idx.push_back(rhs.indexOf(a));
            std::set<Tuple> sub;
            for (const auto& row : rhs.rows) {
                Tuple t;
                t.reserve(idx.size());
                for (auto i : idx) t.push_back(row[i]);
                sub.insert(std::move(t));
            }
            Relation out(lhs.attrs);
            for (const auto& row : lhs.rows)
                if (!sub.count(row)) out.rows.insert(row);
            return out;
        }

        case RelExpr::Kind::Padding: {
            Relation in = evalImpl(*e.children[0], inst, scope);
            Relation out(in.attrs);
            for (const auto& a : e.attrs) {
                if (out.hasAttr(a)) throw SchemaError("padding attribute '" + a + "' already exists");
                out.attrs.push_back(a);
            }
            for (const auto& row : in.rows) {
                Tuple t = row;
                t.resize(out.attrs.size(), Value::null());
                out.rows.insert(std::move(t));
            }
            return out;
        }

        case RelExpr::Kind::UriConstruct: {
            Relation in = evalImpl(*e.children[0], inst, scope);
            if (in.hasAttr(e.uri.var)) throw SchemaError("uri construct output '" + e.uri.var + "' is not fresh");
            std::vector<std::size_t> idx;
            for (const auto& a : e.uri.attrs) idx.push_back(in.indexOf(a));
            Relation out(in.attrs);
            out.attrs.push_back(e.uri.var);
            for (const auto& row : in.rows) {
                Tuple t = row;
                if (e.uri.constant) {
                    t.push_back(*e.uri.constant);
                } else {
                    std::vector<Value> vals;
                    vals.reserve(idx.size());
                    for (auto i : idx) vals.push_back(row[i]);
                    t.push_back(e.uri.tmpl.fill(vals));
                }
                out.rows.insert(std::move(t));
            }
            return out;
        }
    }
    throw PlanError("unreachable expression kind");
}

} // namespace

Relation evaluate(const RelExpr& expr, const Instance& inst) {
    CteScope scope;
    return evalImpl(expr, inst, scope);
}

bool checkFd(const Relation& rel, const std::vector<std::string>& x, const std::vector<std::string>& y) {
    std::vector<std::size_t> xi, yi;
    for (const auto& a : x) xi.push_back(rel.indexOf(a));
    for (const auto& a : y) yi.push_back(rel.indexOf(a));
    std::map<Tuple, Tuple> image;
    for (const auto& row : rel.rows) {
        bool hasNull = false;
        for (auto i : xi) hasNull |= row[i].isNull();
        for (auto i : yi) hasNull |= row[i].isNull();
        if (hasNull) continue;
        Tuple key, val;
        for (auto i : xi) key.push_back(row[i]);
        for (auto i : yi) val.push_back(row[i]);
        auto [it, inserted] = image.emplace(std::move(key), val);
        if (!inserted && it->second != val) return false;
    }
    return true;
}

bool checkContainment(const Relation& a, const Relation& b,
                      const std::vector<std::pair<std::string, std::string>>& colMap) {
    if (colMap.size() != a.arity() || colMap.size() != b.arity())
        throw SchemaError("containment column map does not cover both relations");
    std::vector<std::size_t> ai, bi;
    for (const auto& [fa, fb] : colMap) {
        ai.push_back(a.indexOf(fa));
        bi.push_back(b.indexOf(fb));
    }
    std::set<Tuple> bSet;
    for (const auto& row : b.rows) {
        Tuple t;
        for (auto i : bi) t.push_back(row[i]);
        bSet.insert(std::move(t));
    }
    for (const auto& row : a.rows) {
        Tuple t;
        for (auto i : ai) t.push_back(row[i]);
        if (!bSet.count(t)) return false;
    }
    return true;
}

} // namespace obda
