#include "obda/eval.hpp"
#include "obda/loader.hpp"
#include "obda/relalg.hpp"

#include "support/build.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <thread>

using namespace obda;
using namespace obda::testsupport;

TEST_CASE("select keeps the single matching tuple") {
    auto inst = instanceOf({{"t1", mkRel({"x", "y", "z"}, {{I(1), I(2), I(3)}})}});
    auto e = rel::select(Filter::eq("x", I(1)), rel::base("t1"));
    auto out = evaluate(e, inst);
    CHECK(out.rows == std::set<Tuple>{{I(1), I(2), I(3)}});

    auto none = evaluate(rel::select(Filter::eq("x", I(2)), rel::base("t1")), inst);
    CHECK(none.rows.empty());
}

TEST_CASE("union is idempotent under set semantics") {
    auto inst = instanceOf({{"t", mkRel({"a"}, {{I(1)}, {I(2)}})}});
    auto u = rel::setUnion({rel::base("t"), rel::base("t")});
    CHECK(evaluate(u, inst) == evaluate(rel::base("t"), inst));
}

// Appendix compatibility rule: tuples are compatible iff they agree on all
// shared attributes and none of those values is null. The oracle below
// enumerates pairs directly; the evaluator must match it.
namespace {

bool compatibleOracle(const Tuple& l, const Tuple& r, const std::vector<std::pair<std::size_t, std::size_t>>& shared) {
    for (auto [li, ri] : shared) {
        if (l[li].isNull() || r[ri].isNull()) return false;
        if (!(l[li] == r[ri])) return false;
    }
    return true;
}

} // namespace

TEST_CASE("natural join drops tuples with null in a shared attribute") {
    auto left = mkRel({"a", "b"}, {{I(1), I(10)}, {N(), I(20)}, {I(3), I(30)}});
    auto right = mkRel({"a", "c"}, {{I(1), I(100)}, {N(), I(200)}, {I(3), I(300)}});
    auto inst = instanceOf({{"l", left}, {"r", right}});

    auto out = evaluate(rel::naturalJoin({rel::base("l"), rel::base("r")}), inst);

    std::set<Tuple> expected;
    for (const auto& l : left.rows)
        for (const auto& r : right.rows)
            if (compatibleOracle(l, r, {{0, 0}})) expected.insert({l[0], l[1], r[1]});
    CHECK(out.attrs == std::vector<std::string>{"a", "b", "c"});
    CHECK(out.rows == expected);
    CHECK(out.rows.size() == 2);
}

TEST_CASE("filter three-valued semantics: only top rows survive a select") {
    // null = 1 evaluates to unknown, not false, and unknown rows are dropped;
    // negation of unknown stays unknown so the complement is dropped too.
    auto inst = instanceOf({{"t", mkRel({"a"}, {{I(1)}, {N()}})}});
    auto pos = evaluate(rel::select(Filter::eq("a", I(1)), rel::base("t")), inst);
    auto neg = evaluate(rel::select(Filter::negate(Filter::eq("a", I(1))), rel::base("t")), inst);
    CHECK(pos.rows.size() == 1);
    CHECK(neg.rows.empty());
}

TEST_CASE("three-valued connective tables") {
    using enum Truth;
    const Truth vals[3] = {True, False, Unknown};
    // not
    CHECK(truthNot(True) == False);
    CHECK(truthNot(False) == True);
    CHECK(truthNot(Unknown) == Unknown);
    // and, full 3x3 table
    for (Truth a : vals)
        for (Truth b : vals) {
            Truth expect = (a == False || b == False) ? False : (a == True && b == True) ? True : Unknown;
            CHECK(truthAnd(a, b) == expect);
        }
}

TEST_CASE("cross-type comparison is an error") {
    CHECK_THROWS_AS(valueEq(I(1), T("x")), TypeError);
    CHECK_THROWS_AS(valueLt(T("x"), I(1)), TypeError);
    CHECK(valueEq(N(), T("x")) == Truth::Unknown);
}

TEST_CASE("projection to all attributes is the identity") {
    auto inst = instanceOf({{"t", mkRel({"a", "b"}, {{I(1), I(2)}, {I(3), N()}})}});
    auto all = evaluate(rel::project({"a", "b"}, rel::base("t")), inst);
    CHECK(all == evaluate(rel::base("t"), inst));
}

TEST_CASE("check_fd basics") {
    CHECK(checkFd(mkRel({"x", "y", "z"}, {{I(1), I(2), I(3)}}), {"x"}, {"y"}));
    CHECK(checkFd(mkRel({"x", "y"}, {}), {"x"}, {"y"}));
    CHECK_FALSE(checkFd(mkRel({"x", "y"}, {{I(1), I(2)}, {I(1), I(3)}}), {"x"}, {"y"}));
    // rows with nulls in x or y are removed before the check
    CHECK(checkFd(mkRel({"x", "y"}, {{I(1), I(2)}, {I(1), N()}}), {"x"}, {"y"}));
    CHECK_THROWS_AS(checkFd(mkRel({"x"}, {}), {"nope"}, {"x"}), SchemaError);
}

TEST_CASE("check_fd agrees with the quadratic pairwise oracle") {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 60; ++round) {
        Relation r({"x", "y"});
        int n = static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) {
            auto draw = [&](int mod) {
                return (rng() % 5 == 0) ? N() : I(static_cast<int64_t>(rng() % static_cast<unsigned>(mod)));
            };
            r.rows.insert({draw(6), draw(4)});
        }
        // oracle: all pairs, null rows removed first
        std::vector<Tuple> clean;
        for (const auto& t : r.rows)
            if (!t[0].isNull() && !t[1].isNull()) clean.push_back(t);
        bool expect = true;
        for (const auto& u : clean)
            for (const auto& v : clean)
                if (u[0] == v[0] && !(u[1] == v[1])) expect = false;
        CHECK(checkFd(r, {"x"}, {"y"}) == expect);
    }
}

TEST_CASE("check_containment") {
    auto a = mkRel({"p", "q"}, {{I(1), I(2)}});
    auto b = mkRel({"r", "s"}, {{I(1), I(3)}});
    std::vector<std::pair<std::string, std::string>> id{{"p", "r"}, {"q", "s"}};
    CHECK(checkContainment(a, a, {{"p", "p"}, {"q", "q"}}));
    CHECK(checkContainment(mkRel({"p", "q"}, {}), b, id));
    CHECK_FALSE(checkContainment(a, b, id));
    CHECK_THROWS_AS(checkContainment(a, mkRel({"r"}, {}), id), SchemaError);
}

TEST_CASE("difference, padding and uri construction") {
    auto inst = instanceOf({{"t", mkRel({"a"}, {{I(1)}, {I(2)}})}, {"s", mkRel({"a"}, {{I(2)}})}});
    auto diff = evaluate(rel::difference(rel::base("t"), rel::base("s")), inst);
    CHECK(diff.rows == std::set<Tuple>{{I(1)}});

    auto padded = evaluate(rel::padding({"b"}, rel::base("s")), inst);
    CHECK(padded.attrs == std::vector<std::string>{"a", "b"});
    CHECK(padded.rows == std::set<Tuple>{{I(2), N()}});

    auto built = evaluate(rel::uriConstruct("u", Template::parse(":n-{a}"), {"a"}, rel::base("s")), inst);
    CHECK(built.rows == std::set<Tuple>{{I(2), T(":n-2")}});

    // passthrough template keeps the typed value
    auto passed = evaluate(rel::uriConstruct("u", Template::parse("{a}"), {"a"}, rel::base("s")), inst);
    CHECK(passed.rows == std::set<Tuple>{{I(2), I(2)}});
}

TEST_CASE("cte binding and unbound reference") {
    auto inst = instanceOf({{"t", mkRel({"a"}, {{I(1)}})}});
    auto e = rel::withCte({{"c", rel::base("t")}}, rel::naturalJoin({rel::cteRef("c"), rel::base("t")}));
    CHECK(evaluate(e, inst).rows.size() == 1);
    CHECK_THROWS_AS(evaluate(rel::cteRef("nope"), inst), PlanError);
}

TEST_CASE("equi join rejects shared attribute names") {
    auto inst = instanceOf({{"t", mkRel({"a"}, {{I(1)}})}});
    CHECK_THROWS_AS(evaluate(rel::equiJoin(rel::base("t"), rel::base("t"), {{"a", "a"}}), inst), SchemaError);
}

TEST_CASE("evaluation is pure and thread-safe over a shared instance") {
    Relation t({"a", "b"});
    for (int i = 0; i < 500; ++i) t.rows.insert({I(i % 50), I(i)});
    auto inst = instanceOf({{"t", t}});
    auto e = rel::project({"a"}, rel::select(Filter::lt("b", I(200)), rel::base("t")));
    auto expect = evaluate(e, inst);
    std::vector<std::thread> workers;
    std::vector<Relation> results(4);
    for (int i = 0; i < 4; ++i)
        workers.emplace_back([&, i] { results[static_cast<std::size_t>(i)] = evaluate(e, inst); });
    for (auto& w : workers) w.join();
    for (const auto& r : results) CHECK(r == expect);
}

TEST_CASE("expression stats in union-of-joins terms") {
    auto u = rel::setUnion({rel::base("a"), rel::base("b"), rel::base("c")});
    auto j = rel::naturalJoin({u, rel::base("d"), rel::base("e")});
    auto s = exprStats(*j);
    CHECK(s.branches == 3);
    CHECK(s.joins == 2);
    // distributing the join over the union must not change the stats
    auto dist = rel::setUnion({rel::naturalJoin({rel::base("a"), rel::base("d"), rel::base("e")}),
                               rel::naturalJoin({rel::base("b"), rel::base("d"), rel::base("e")}),
                               rel::naturalJoin({rel::base("c"), rel::base("d"), rel::base("e")})});
    auto ds = exprStats(*dist);
    CHECK(ds.branches == s.branches);
    CHECK(ds.joins == s.joins);
}

TEST_CASE("schema file and csv loading") {
    auto schema = parseSchemaText("# demo\n"
                                  "relation t : a int, b text, d date\n"
                                  "key t : a\n"
                                  "unique t : b\n"
                                  "relation s : a int\n"
                                  "include s(a) in t(a)\n");
    CHECK(schema->relations.size() == 2);
    CHECK(schema->primaryKeys.at("t") == std::vector<std::string>{"a"});
    CHECK(schema->inclusionDeps.size() == 1);

    auto r = parseCsvText(*schema, "t", "b,a,d\nx,1,2020-01-01\n\"y,z\",2,\n");
    CHECK(r.attrs == std::vector<std::string>{"a", "b", "d"});
    CHECK(r.rows == std::set<Tuple>{{I(1), T("x"), T("2020-01-01")}, {I(2), T("y,z"), N()}});

    // primary-key violation and null key are rejected
    Instance inst(schema);
    CHECK_THROWS_AS(inst.setRelation("t", mkRel({"a", "b", "d"}, {{I(1), T("x"), N()}, {I(1), T("y"), N()}})),
                    SchemaError);
    CHECK_THROWS_AS(inst.setRelation("t", mkRel({"a", "b", "d"}, {{N(), T("x"), N()}})), SchemaError);
}

TEST_CASE("structural equality and substitution") {
    auto a = rel::select(Filter::eq("x", I(1)), rel::base("t"));
    auto b = rel::select(Filter::eq("x", I(1)), rel::base("t"));
    auto c = rel::select(Filter::eq("x", I(2)), rel::base("t"));
    CHECK(structurallyEqual(a, b));
    CHECK_FALSE(structurallyEqual(a, c));
    CHECK(structuralHash(*a) == structuralHash(*b));

    auto whole = rel::setUnion({a, c});
    CHECK(countOccurrences(whole, b) == 1);
    auto swapped = substitute(whole, b, rel::base("u"));
    CHECK(countOccurrences(swapped, rel::base("u")) == 1);
}
