#include "obda/ontology.hpp"

#include "support/build.hpp"

#include <doctest.h>

using namespace obda;
using namespace obda::testsupport;

namespace {

Ontology wellboreOntology() {
    return parseOntologyText(R"(
:Wellbore a owl:Class .
:DevelopWellbore a owl:Class .
:ProdWellbore a owl:Class .
:Well a owl:Class .
:WellboreInterval a owl:Class .
:isInWell a owl:ObjectProperty .
:hasInterval a owl:ObjectProperty .
:completionDate a owl:DatatypeProperty .
:isInWell rdfs:domain :Wellbore .
:isInWell rdfs:range :Well .
:hasInterval rdfs:domain :Wellbore .
:hasInterval rdfs:range :WellboreInterval .
:completionDate rdfs:domain :Wellbore .
:ProdWellbore rdfs:subClassOf :DevelopWellbore .
:DevelopWellbore rdfs:subClassOf :Wellbore .
)");
}

bool hasGen(const Closure& c, const std::string& target, const std::string& source, Generator::Position pos) {
    for (const auto& g : c.of(target))
        if (g.source == source && g.position == pos) return true;
    return false;
}

} // namespace

TEST_CASE("classification closes subsumption transitively") {
    auto ont = wellboreOntology();
    auto closure = classify(ont);
    CHECK(hasGen(closure, ":Wellbore", ":ProdWellbore", Generator::Position::Self));
    CHECK(hasGen(closure, ":Wellbore", ":DevelopWellbore", Generator::Position::Self));
    CHECK(hasGen(closure, ":Wellbore", ":Wellbore", Generator::Position::Self));
    CHECK(hasGen(closure, ":Wellbore", ":isInWell", Generator::Position::SubjectOf));
    CHECK(hasGen(closure, ":Wellbore", ":completionDate", Generator::Position::SubjectOf));
    CHECK(hasGen(closure, ":Well", ":isInWell", Generator::Position::ObjectOf));
    CHECK_FALSE(hasGen(closure, ":ProdWellbore", ":Wellbore", Generator::Position::Self));
}

TEST_CASE("empty ontology generates only reflexively") {
    Ontology ont;
    ont.declareClass(":A");
    ont.declareProperty(":P");
    auto closure = classify(ont);
    CHECK(closure.of(":A").size() == 1);
    CHECK(closure.of(":A")[0] == Generator{":A", ":A", Generator::Position::Self});
    CHECK(closure.of(":P").size() == 1);
}

TEST_CASE("domain axiom yields subject-of generator") {
    Ontology ont;
    ont.declareClass(":Wellbore");
    ont.declareProperty(":isInWell");
    ont.addAxiom({Axiom::Kind::Domain, ":isInWell", ":Wellbore"});
    auto closure = classify(ont);
    CHECK(hasGen(closure, ":Wellbore", ":isInWell", Generator::Position::SubjectOf));
}

TEST_CASE("abox saturation applies domain and range axioms") {
    auto ont = wellboreOntology();
    AssertionSet abox{{":isInWell", T(":Wellbore-002"), T(":Well-1")}};
    auto sat = saturateAbox(ont, abox);
    CHECK(sat.count({":Wellbore", T(":Wellbore-002"), std::nullopt}) == 1);
    CHECK(sat.count({":Well", T(":Well-1"), std::nullopt}) == 1);
    CHECK(sat.count({":isInWell", T(":Wellbore-002"), T(":Well-1")}) == 1);
    CHECK(sat.size() == 3);
}

TEST_CASE("saturation with an empty tbox is the identity") {
    Ontology ont;
    ont.declareClass(":A");
    AssertionSet abox{{":A", T("x"), std::nullopt}};
    CHECK(saturateAbox(ont, abox) == abox);
}

TEST_CASE("subclass chain saturates by hand-computed fixpoint") {
    Ontology ont;
    ont.declareClass(":A");
    ont.declareClass(":B");
    ont.declareClass(":C");
    ont.addAxiom({Axiom::Kind::SubClass, ":A", ":B"});
    ont.addAxiom({Axiom::Kind::SubClass, ":B", ":C"});
    AssertionSet abox{{":A", T("a"), std::nullopt}};
    AssertionSet expected{{":A", T("a"), std::nullopt}, {":B", T("a"), std::nullopt}, {":C", T("a"), std::nullopt}};
    CHECK(saturateAbox(ont, abox) == expected);
}

TEST_CASE("saturation is extensive, monotone and idempotent") {
    auto ont = wellboreOntology();
    AssertionSet small{{":completionDate", T(":Wellbore-002"), T("2010-04-01")}};
    AssertionSet large = small;
    large.insert({":ProdWellbore", T(":Wellbore-007"), std::nullopt});

    auto satSmall = saturateAbox(ont, small);
    auto satLarge = saturateAbox(ont, large);
    for (const auto& a : small) CHECK(satSmall.count(a) == 1);           // extensive
    for (const auto& a : satSmall) CHECK(satLarge.count(a) == 1);        // monotone
    CHECK(saturateAbox(ont, satLarge) == satLarge);                      // idempotent
}

TEST_CASE("classification tolerates subsumption cycles") {
    Ontology ont;
    ont.declareClass(":A");
    ont.declareClass(":B");
    ont.addAxiom({Axiom::Kind::SubClass, ":A", ":B"});
    ont.addAxiom({Axiom::Kind::SubClass, ":B", ":A"});
    auto closure = classify(ont);
    CHECK(hasGen(closure, ":A", ":B", Generator::Position::Self));
    CHECK(hasGen(closure, ":B", ":A", Generator::Position::Self));
}

TEST_CASE("parser rejects unsupported constructs with diagnostics") {
    CHECK_THROWS_AS(parseOntologyText(":A rdfs:subClassOf [ owl:someValuesFrom :B ] ."), ParseError);
    CHECK_THROWS_AS(parseOntologyText(":P a owl:ObjectProperty .\n:Q a owl:ObjectProperty .\n:P owl:inverseOf :Q ."),
                    ParseError);
    CHECK_THROWS_AS(parseOntologyText(":A rdfs:subClassOf :B ."), ParseError); // undeclared names
}

TEST_CASE("equivalence is sugar for two subsumptions") {
    auto ont = parseOntologyText(":A a owl:Class .\n:B a owl:Class .\n:A owl:equivalentClass :B .");
    auto closure = classify(ont);
    CHECK(hasGen(closure, ":A", ":B", Generator::Position::Self));
    CHECK(hasGen(closure, ":B", ":A", Generator::Position::Self));
}
