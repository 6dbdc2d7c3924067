#include "obda/loader.hpp"
#include "obda/sparql.hpp"

#include "support/build.hpp"

#include <doctest.h>

#include <random>

using namespace obda;
using namespace obda::testsupport;

namespace {

RdfGraph g3(std::initializer_list<RdfTriple> ts) {
    RdfGraph g;
    for (const auto& t : ts) g.triples.insert(t);
    return g;
}

ObdaSpec loadWellboreSpec() {
    ObdaSpec spec;
    spec.schema = loadSchemaFile(std::string(OBDA_DEMO_DIR) + "/wellbore/schema.txt");
    spec.ontology = loadOntologyFile(std::string(OBDA_DEMO_DIR) + "/wellbore/ontology.ttl");
    spec.mappings = loadMappingsFile(std::string(OBDA_DEMO_DIR) + "/wellbore/mappings.obda", *spec.schema,
                                     spec.ontology);
    return spec;
}

} // namespace

TEST_CASE("parsing the three-pattern wellbore query") {
    auto q = parseQuery("SELECT * WHERE { ?wlb a :Wellbore . ?wlb :completionDate ?cmpl . ?wlb :isInWell ?w . }");
    REQUIRE(q.pattern->kind == GraphPattern::Kind::Bgp);
    CHECK(q.pattern->triples.size() == 3);
    CHECK(q.answerVars == std::vector<std::string>{"wlb", "cmpl", "w"});
}

TEST_CASE("empty group parses to the empty BGP") {
    auto q = parseQuery("SELECT * WHERE {}");
    CHECK(q.pattern->kind == GraphPattern::Kind::Bgp);
    CHECK(q.pattern->triples.empty());
    // one empty solution
    CHECK(answer(q.pattern, RdfGraph{}) == SolutionSet{SolutionMapping{}});
}

TEST_CASE("unsupported constructs are rejected with positions") {
    CHECK_THROWS_AS(parseQuery("SELECT (COUNT(?x) AS ?n) WHERE { ?x a :C }"), ParseError);
    CHECK_THROWS_AS(parseQuery("SELECT * WHERE { ?x a :C } ORDER BY ?x"), ParseError);
    CHECK_THROWS_AS(parseQuery("SELECT * WHERE { ?x :p1|:p2 ?y }"), ParseError);
    CHECK_THROWS_AS(parseQuery("PREFIX : <http://x/> SELECT * WHERE { ?x a :C }"), ParseError);
    try {
        parseQuery("SELECT *\nWHERE { ?x a :C .\n GROUP BY ?x }");
        FAIL("expected rejection");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
}

TEST_CASE("semicolon predicate lists and blank nodes") {
    auto q = parseQuery("SELECT * WHERE { ?w a :Wellbore ; :isInWell _:b . }");
    REQUIRE(q.pattern->triples.size() == 2);
    CHECK(q.pattern->triples[1].object.variable); // blank node became a variable
}

TEST_CASE("single triple pattern answers") {
    auto g = g3({{T("a"), T(":P"), T("b")}});
    auto q = parseQuery("SELECT * WHERE { ?x :P ?y }");
    auto sols = answer(q.pattern, g);
    CHECK(sols == SolutionSet{{{"x", T("a")}, {"y", T("b")}}});
}

TEST_CASE("optional with empty right side leaves solutions unextended") {
    auto g = g3({{T("a"), T(":P"), T("b")}});
    auto q = parseQuery("SELECT * WHERE { ?x :P ?y OPTIONAL { ?y :Q ?z } }");
    auto sols = answer(q.pattern, g);
    CHECK(sols == SolutionSet{{{"x", T("a")}, {"y", T("b")}}});
}

TEST_CASE("join excludes incompatible solution pairs") {
    // enumerate by hand: left binds y to b; right requires y = c for x2
    auto g = g3({{T("a"), T(":P"), T("b")}, {T("c"), T(":Q"), T("d")}, {T("b"), T(":Q"), T("e")}});
    auto q = parseQuery("SELECT * WHERE { ?x :P ?y . ?y :Q ?z . }");
    auto sols = answer(q.pattern, g);
    CHECK(sols == SolutionSet{{{"x", T("a")}, {"y", T("b")}, {"z", T("e")}}});
}

TEST_CASE("filter with bound and comparison") {
    auto g = g3({{T("a"), T(":P"), I(1)}, {T("b"), T(":P"), I(5)}});
    auto q = parseQuery("SELECT * WHERE { ?x :P ?y FILTER(?y < 3) }");
    CHECK(answer(q.pattern, g) == SolutionSet{{{"x", T("a")}, {"y", I(1)}}});

    auto q2 = parseQuery("SELECT * WHERE { ?x :P ?y OPTIONAL { ?x :Q ?z } FILTER(!bound(?z)) }");
    auto g2 = g3({{T("a"), T(":P"), I(1)}, {T("a"), T(":Q"), I(2)}, {T("b"), T(":P"), I(3)}});
    CHECK(answer(q2.pattern, g2) == SolutionSet{{{"x", T("b")}, {"y", I(3)}}});
}

TEST_CASE("bind extends every solution with a constant") {
    auto g = g3({{T("a"), T(":P"), T("b")}});
    auto q = parseQuery("SELECT * WHERE { ?x :P ?y BIND(7 AS ?k) }");
    CHECK(answer(q.pattern, g) == SolutionSet{{{"x", T("a")}, {"y", T("b")}, {"k", I(7)}}});
    CHECK_THROWS_AS(parseQuery("SELECT * WHERE { ?x :P ?k BIND(7 AS ?k) }"), ParseError);
}

TEST_CASE("union merges branch solutions") {
    auto g = g3({{T("a"), T(":P"), T("b")}, {T("c"), T(":Q"), T("d")}});
    auto q = parseQuery("SELECT * WHERE { { ?x :P ?y } UNION { ?x :Q ?y } }");
    CHECK(answer(q.pattern, g).size() == 2);
}

TEST_CASE("answer is monotone in the graph for opt-free patterns") {
    std::mt19937_64 rng(11);
    auto randomGraph = [&](std::size_t n) {
        RdfGraph g;
        const char* preds[] = {":P", ":Q"};
        while (g.triples.size() < n)
            g.triples.insert({T("n" + std::to_string(rng() % 4)), T(preds[rng() % 2]),
                              T("n" + std::to_string(rng() % 4))});
        return g;
    };
    auto q = parseQuery("SELECT * WHERE { { ?x :P ?y . ?y :Q ?z } UNION { ?x :Q ?y } FILTER(bound(?x)) }");
    for (int round = 0; round < 30; ++round) {
        auto small = randomGraph(3 + rng() % 5);
        auto large = small;
        auto extra = randomGraph(3);
        large.triples.insert(extra.triples.begin(), extra.triples.end());
        auto sa = answer(q.pattern, small);
        auto sb = answer(q.pattern, large);
        for (const auto& s : sa) CHECK(sb.count(s) == 1);
    }
}

TEST_CASE("oracle on the wellbore example") {
    auto spec = loadWellboreSpec();
    auto inst = loadInstanceDir(spec.schema, std::string(OBDA_DEMO_DIR) + "/wellbore/data");
    auto q = parseQuery("SELECT * WHERE { ?wlb a :Wellbore . ?wlb :completionDate ?cmpl . ?wlb :isInWell ?w . }");
    auto sols = oracleAnswer(q, spec, inst);
    // hand trace: actual rows for wellbores 2, 5 and 7, one date and well each
    SolutionSet expected{
        {{"wlb", T(":Wellbore-2")}, {"cmpl", T("2009-4-1")}, {"w", T(":Well-1")}},
        {{"wlb", T(":Wellbore-5")}, {"cmpl", T("2011-1-15")}, {"w", T(":Well-1")}},
        {{"wlb", T(":Wellbore-7")}, {"cmpl", T("2012-6-30")}, {"w", T(":Well-2")}},
    };
    CHECK(sols == expected);

    Instance empty(spec.schema);
    for (const auto& [name, def] : spec.schema->relations) empty.setRelation(name, Relation(def.attrs));
    CHECK(oracleAnswer(q, spec, empty).empty());
}

TEST_CASE("oracle with and without saturation coincides for exact predicates") {
    auto spec = loadWellboreSpec();
    auto inst = loadInstanceDir(spec.schema, std::string(OBDA_DEMO_DIR) + "/wellbore/data");
    auto q = parseQuery("SELECT * WHERE { ?wlb a :Wellbore . }");

    ObdaSpec bare = spec;
    bare.ontology.axioms.clear(); // no inference: original mappings only
    CHECK(oracleAnswer(q, spec, inst) == oracleAnswer(q, bare, inst)); // :Wellbore is exact here
}

TEST_CASE("rdf:type round trip through graphOfAssertions") {
    AssertionSet as{{":C", T("i"), std::nullopt}, {":P", T("i"), I(4)}};
    auto g = graphOfAssertions(as);
    CHECK(g.triples.count({T("i"), T(kRdfType), T(":C")}) == 1);
    CHECK(g.triples.count({T("i"), T(":P"), I(4)}) == 1);
}
