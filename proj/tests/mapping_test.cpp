#include "obda/eval.hpp"
#include "obda/loader.hpp"
#include "obda/mapping.hpp"

#include "support/build.hpp"

#include <doctest.h>

#include <algorithm>

using namespace obda;
using namespace obda::testsupport;

namespace {

ObdaSpec loadWellboreSpec() {
    ObdaSpec spec;
    spec.schema = loadSchemaFile(std::string(OBDA_DEMO_DIR) + "/wellbore/schema.txt");
    spec.ontology = loadOntologyFile(std::string(OBDA_DEMO_DIR) + "/wellbore/ontology.ttl");
    spec.mappings = loadMappingsFile(std::string(OBDA_DEMO_DIR) + "/wellbore/mappings.obda", *spec.schema,
                                     spec.ontology);
    spec.validate();
    return spec;
}

Instance loadWellboreData(const ObdaSpec& spec) {
    return loadInstanceDir(spec.schema, std::string(OBDA_DEMO_DIR) + "/wellbore/data");
}

std::size_t countFor(const std::vector<Mapping>& ms, const std::string& pred) {
    std::size_t n = 0;
    for (const auto& m : ms) n += m.predicate == pred;
    return n;
}

} // namespace

TEST_CASE("virtual assertions of the wellbore example") {
    auto spec = loadWellboreSpec();
    auto inst = loadWellboreData(spec);
    auto va = virtualAssertions(spec.mappings, inst);

    CHECK(va.count({":Wellbore", T(":Wellbore-2"), std::nullopt}) == 1);
    CHECK(va.count({":completionDate", T(":Wellbore-2"), T("2009-4-1")}) == 1);
    // the historic row is filtered out by the mapping
    CHECK(va.count({":completionDate", T(":Wellbore-2"), T("2010-4-1")}) == 0);
    CHECK(va.count({":ProdWellbore", T(":Wellbore-2"), std::nullopt}) == 1);
    CHECK(va.count({":isInWell", T(":Wellbore-7"), T(":Well-2")}) == 1);
}

TEST_CASE("virtual assertions: empty instance, dedup, null suppression") {
    auto schema = parseSchemaText("relation t : a int, b int");
    Ontology ont;
    ont.declareClass(":C");
    auto m = makeClassMapping("m", ":C", Template::parse(":c-{a}"), rel::base("t"), *schema);

    Instance empty(schema);
    empty.setRelation("t", Relation({"a", "b"}));
    CHECK(virtualAssertions({m}, empty).empty());

    Instance inst(schema);
    inst.setRelation("t", mkRel({"a", "b"}, {{I(1), I(10)}, {I(1), I(20)}, {N(), I(30)}}));
    auto va = virtualAssertions({m}, inst);
    CHECK(va.size() == 1); // two rows share a=1, the null row is suppressed
    CHECK(va.count({":C", T(":c-1"), std::nullopt}) == 1);
}

TEST_CASE("t-mapping construction on the wellbore example") {
    auto spec = loadWellboreSpec();
    auto tmaps = saturateTmappings(spec.ontology, spec.mappings, *spec.schema);

    // :Wellbore keeps its original mapping and gains three distinct inferred
    // ones (isInWell/completionDate domains collapse to one, hasInterval
    // domain, ProdWellbore subclass).
    CHECK(countFor(tmaps, ":Wellbore") == 4);
    CHECK(countFor(tmaps, ":DevelopWellbore") == 1); // from ProdWellbore only
    CHECK(countFor(tmaps, ":Well") == 1);            // range of isInWell
    CHECK(countFor(tmaps, ":isInWell") == 1);
}

TEST_CASE("t-mapping correctness contract on the wellbore instance") {
    auto spec = loadWellboreSpec();
    auto inst = loadWellboreData(spec);
    auto tmaps = saturateTmappings(spec.ontology, spec.mappings, *spec.schema);
    CHECK(virtualAssertions(tmaps, inst) == saturatedVirtualGraph(spec, inst));
}

TEST_CASE("t-mappings with empty ontology are the input mappings") {
    auto schema = parseSchemaText("relation t : a int");
    Ontology ont;
    ont.declareClass(":C");
    auto m = makeClassMapping("m", ":C", Template::parse(":c-{a}"), rel::base("t"), *schema);
    auto tmaps = saturateTmappings(ont, {m}, *schema);
    REQUIRE(tmaps.size() == 1);
    CHECK(sameMappingShape(tmaps[0], m));
}

TEST_CASE("generator without source mapping is vacuous") {
    auto schema = parseSchemaText("relation t : a int");
    Ontology ont;
    ont.declareClass(":A");
    ont.declareProperty(":P");
    ont.addAxiom({Axiom::Kind::Domain, ":P", ":A"});
    auto m = makeClassMapping("m", ":A", Template::parse(":a-{a}"), rel::base("t"), *schema);
    auto tmaps = saturateTmappings(ont, {m}, *schema);
    CHECK(tmaps.size() == 1);
}

TEST_CASE("exact predicates collapse the wellbore t-mappings") {
    auto spec = loadWellboreSpec();
    auto inst = loadWellboreData(spec);
    auto tmaps = saturateTmappings(spec.ontology, spec.mappings, *spec.schema);

    auto pruned = applyExactPredicates(tmaps, {{":Wellbore"}}, spec.mappings);
    CHECK(countFor(pruned, ":Wellbore") == 1);
    CHECK(pruned.size() == tmaps.size() - 3);

    // graph preserved on this instance, where :Wellbore is genuinely exact
    CHECK(virtualAssertions(pruned, inst) == saturatedVirtualGraph(spec, inst));

    // identity for the empty exact set
    CHECK(applyExactPredicates(tmaps, {}, spec.mappings).size() == tmaps.size());

    CHECK_THROWS_AS(applyExactPredicates(tmaps, {{":Well"}}, spec.mappings), SpecError);
}

TEST_CASE("a wrongly declared exact predicate changes the graph") {
    // :B subclass of :A; :A's own mapping misses the member contributed by
    // :B, so :A is not exact and pruning loses an assertion.
    auto schema = parseSchemaText("relation ta : a int\nrelation tb : a int");
    Ontology ont;
    ont.declareClass(":A");
    ont.declareClass(":B");
    ont.addAxiom({Axiom::Kind::SubClass, ":B", ":A"});
    auto ma = makeClassMapping("ma", ":A", Template::parse(":u-{a}"), rel::base("ta"), *schema);
    auto mb = makeClassMapping("mb", ":B", Template::parse(":u-{a}"), rel::base("tb"), *schema);
    ObdaSpec spec{ont, {ma, mb}, schema};

    Instance inst(schema);
    inst.setRelation("ta", mkRel({"a"}, {{I(1)}}));
    inst.setRelation("tb", mkRel({"a"}, {{I(2)}}));

    auto tmaps = saturateTmappings(ont, spec.mappings, *schema);
    auto pruned = applyExactPredicates(tmaps, {{":A"}}, spec.mappings);
    CHECK(virtualAssertions(tmaps, inst) == saturatedVirtualGraph(spec, inst));
    CHECK(virtualAssertions(pruned, inst) != saturatedVirtualGraph(spec, inst));
}

TEST_CASE("not-null guard is inserted for nullable template attributes") {
    auto schema = parseSchemaText("relation t : a int, b int");
    Ontology ont;
    ont.declareProperty(":P");
    auto m = makePropertyMapping("m", ":P", Template::parse(":s-{a}"), Template::parse("{b}"), rel::base("t"),
                                 *schema);
    Instance inst(schema);
    inst.setRelation("t", mkRel({"a", "b"}, {{I(1), N()}, {I(2), I(3)}}));
    auto r = evaluate(*m.body, inst);
    CHECK(r.rows == std::set<Tuple>{{I(2), I(3)}});
}

TEST_CASE("merging same-template mappings produces one union mapping") {
    auto schema = parseSchemaText("relation t1 : id int!, v int!\nrelation t2 : id int!, v int!");
    Ontology ont;
    ont.declareProperty(":P");
    auto m1 = makePropertyMapping("m1", ":P", Template::parse(":s-{id}"), Template::parse("{v}"), rel::base("t1"),
                                  *schema);
    auto m2 = makePropertyMapping("m2", ":P", Template::parse(":s-{id}"), Template::parse("{v}"), rel::base("t2"),
                                  *schema);
    auto merged = mergeSameTemplatePair({m1, m2}, *schema);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].body->kind == RelExpr::Kind::Union);

    Instance inst(schema);
    inst.setRelation("t1", mkRel({"id", "v"}, {{I(1), I(10)}}));
    inst.setRelation("t2", mkRel({"id", "v"}, {{I(2), I(20)}}));
    auto va = virtualAssertions(merged, inst);
    CHECK(va == virtualAssertions({m1, m2}, inst));
}

TEST_CASE("splitting multi-template predicates") {
    auto schema = parseSchemaText("relation t1 : id int!\nrelation t2 : key int!");
    Ontology ont;
    ont.declareClass(":C");
    auto m1 = makeClassMapping("m1", ":C", Template::parse(":u-{id}"), rel::base("t1"), *schema);
    auto m2 = makeClassMapping("m2", ":C", Template::parse(":v-{key}"), rel::base("t2"), *schema);

    auto split = splitMultiTemplate({m1, m2});
    CHECK(split.mappings.size() == 2);
    REQUIRE(split.rewriteTable.count(":C") == 1);
    CHECK(split.rewriteTable.at(":C").size() == 2);
    CHECK(split.mappings[0].predicate == ":C#1");
    CHECK(split.mappings[1].predicate == ":C#2");

    // all-basic input passes through untouched
    auto basic = splitMultiTemplate({m1});
    CHECK(basic.rewriteTable.empty());
    CHECK(basic.mappings[0].predicate == ":C");
}

TEST_CASE("constraint files round-trip") {
    auto c = parseConstraintsText("exact :Wellbore\n"
                                  "vfd branching :Wellbore-{wellbore_s} : :completionDate :isInWell\n"
                                  "vfd path :p-{id} : :P1 :P2\n"
                                  "oce domain :completionDate :Wellbore\n"
                                  "oce range :isInWell :Well\n");
    CHECK(c.exacts.size() == 1);
    CHECK(c.vfds.size() == 2);
    CHECK(c.vfds[0].kind == Vfd::Kind::Branching);
    CHECK(c.vfds[1].kind == Vfd::Kind::Path);
    CHECK(c.oces.size() == 2);
    auto again = parseConstraintsText(constraintsToText(c));
    CHECK(constraintsToText(again) == constraintsToText(c));
}

TEST_CASE("sql body parser diagnostics") {
    auto schema = parseSchemaText("relation t : a int, b text");
    CHECK_THROWS_AS(parseSqlBody("SELECT c FROM t", *schema), ParseError);
    CHECK_THROWS_AS(parseSqlBody("SELECT a FROM nope", *schema), ParseError);
    CHECK_THROWS_AS(parseSqlBody("DELETE FROM t", *schema), ParseError);
    auto body = parseSqlBody("SELECT a FROM t WHERE b = 'x' AND a < 5 AND a <> 3 AND b IS NOT NULL", *schema);
    CHECK(outputAttrs(*body, *schema) == std::vector<std::string>{"a"});
}
