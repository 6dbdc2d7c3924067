#include "obda/ontology.hpp"

#include "obda/diagnostics.hpp"
#include "obda/loader.hpp"

#include <algorithm>
#include <sstream>

namespace obda {

void Ontology::declareClass(const std::string& n) {
    if (isProperty(n)) throw SpecError("'" + n + "' is already declared as a property");
    classNames.insert(n);
}

void Ontology::declareProperty(const std::string& n) {
    if (isClass(n)) throw SpecError("'" + n + "' is already declared as a class");
    propertyNames.insert(n);
}

void Ontology::addAxiom(Axiom a) {
    auto requireClass = [&](const std::string& n) {
        if (!isClass(n)) throw SpecError("axiom references undeclared class '" + n + "'");
    };
    auto requireProperty = [&](const std::string& n) {
        if (!isProperty(n)) throw SpecError("axiom references undeclared property '" + n + "'");
    };
    switch (a.kind) {
        case Axiom::Kind::SubClass:
            requireClass(a.lhs);
            requireClass(a.rhs);
            break;
        case Axiom::Kind::SubProperty:
            requireProperty(a.lhs);
            requireProperty(a.rhs);
            break;
        case Axiom::Kind::Domain:
        case Axiom::Kind::Range:
            requireProperty(a.lhs);
            requireClass(a.rhs);
            break;
    }
    axioms.push_back(std::move(a));
}

const std::vector<Generator>& Closure::of(const std::string& predicate) const {
    static const std::vector<Generator> none;
    auto it = generators.find(predicate);
    return it == generators.end() ? none : it->second;
}

namespace {

// Reflexive-transitive closure over the given edges: sub -> set of supers.
std::map<std::string, std::set<std::string>> subsumptionClosure(const std::set<std::string>& names,
                                                                const std::vector<std::pair<std::string, std::string>>& edges) {
    std::map<std::string, std::set<std::string>> up;
    for (const auto& n : names) up[n].insert(n);
    for (const auto& [sub, super] : edges) up[sub].insert(super);
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto& [n, supers] : up) {
            std::set<std::string> next = supers;
            for (const auto& s : supers) {
                const auto& above = up[s];
                next.insert(above.begin(), above.end());
            }
            if (next.size() != supers.size()) {
                supers = std::move(next);
                changed = true;
            }
        }
    }
    return up;
}

} // namespace

Closure classify(const Ontology& ont) {
    std::vector<std::pair<std::string, std::string>> classEdges, propEdges;
    for (const auto& a : ont.axioms) {
        if (a.kind == Axiom::Kind::SubClass) classEdges.emplace_back(a.lhs, a.rhs);
        if (a.kind == Axiom::Kind::SubProperty) propEdges.emplace_back(a.lhs, a.rhs);
    }
    auto classUp = subsumptionClosure(ont.classNames, classEdges);
    auto propUp = subsumptionClosure(ont.propertyNames, propEdges);

    Closure out;
    std::map<std::string, std::set<Generator>> acc;
    for (const auto& c : ont.classNames)
        for (const auto& super : classUp[c]) acc[super].insert({super, c, Generator::Position::Self});
    for (const auto& p : ont.propertyNames)
        for (const auto& super : propUp[p]) acc[super].insert({super, p, Generator::Position::Self});
    for (const auto& a : ont.axioms) {
        if (a.kind != Axiom::Kind::Domain && a.kind != Axiom::Kind::Range) continue;
        auto pos = a.kind == Axiom::Kind::Domain ? Generator::Position::SubjectOf : Generator::Position::ObjectOf;
        // Domain(P, A): every subclass-ancestor of A is generated by every
        // sub-property of P in subject position (object for Range).
        for (const auto& target : classUp[a.rhs])
            for (const auto& [q, supers] : propUp)
                if (supers.count(a.lhs)) acc[target].insert({target, q, pos});
    }
    for (auto& [pred, gens] : acc) out.generators[pred] = std::vector<Generator>(gens.begin(), gens.end());
    return out;
}

AssertionSet saturateAbox(const Ontology& ont, const AssertionSet& assertions) {
    for (const auto& a : assertions)
        if (!ont.isDeclared(a.predicate))
            throw SpecError("assertion references undeclared predicate '" + a.predicate + "'");
    AssertionSet out = assertions;
    bool changed = true;
    while (changed) {
        changed = false;
        AssertionSet fresh;
        for (const auto& ax : ont.axioms) {
            for (const auto& a : out) {
                if (a.predicate != ax.lhs) continue;
                Assertion derived;
                switch (ax.kind) {
                    case Axiom::Kind::SubClass:
                        if (a.object) continue;
                        derived = {ax.rhs, a.subject, std::nullopt};
                        break;
                    case Axiom::Kind::SubProperty:
                        if (!a.object) continue;
                        derived = {ax.rhs, a.subject, a.object};
                        break;
                    case Axiom::Kind::Domain:
                        if (!a.object) continue;
                        derived = {ax.rhs, a.subject, std::nullopt};
                        break;
                    case Axiom::Kind::Range:
                        if (!a.object) continue;
                        derived = {ax.rhs, *a.object, std::nullopt};
                        break;
                }
                if (!out.count(derived)) fresh.insert(std::move(derived));
            }
        }
        if (!fresh.empty()) {
            out.insert(fresh.begin(), fresh.end());
            changed = true;
        }
    }
    return out;
}

namespace {

std::vector<std::string> tokenizeLine(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

} // namespace

Ontology parseOntologyText(const std::string& text, const std::string& source) {
    Ontology ont;
    std::istringstream in(text);
    std::string raw;
    unsigned lineNo = 0;
    std::vector<std::tuple<unsigned, std::string, std::string, std::string>> axiomLines;
    while (std::getline(in, raw)) {
        ++lineNo;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        auto toks = tokenizeLine(raw);
        if (toks.empty()) continue;
        if (!toks.empty() && toks.back() == ".") toks.pop_back();
        if (toks.size() == 3 && toks.back().size() > 1 && toks.back().back() == '.') {
            toks.back().pop_back();
        }
        if (toks.size() != 3)
            throw ParseError(source, lineNo, 1, "expected 'subject predicate object .'");
        const std::string& s = toks[0];
        const std::string& p = toks[1];
        const std::string& o = toks[2];
        if (o == "[" || o.front() == '[' || o == "owl:someValuesFrom" || s.front() == '[')
            throw ParseError(source, lineNo, 1,
                             "complex class/property expressions (existentials) are not supported");
        if (p == "a" || p == "rdf:type") {
            if (o == "owl:Class" || o == "rdfs:Class")
                ont.declareClass(s);
            else if (o == "owl:ObjectProperty" || o == "owl:DatatypeProperty" || o == "rdf:Property")
                ont.declareProperty(s);
            else
                throw ParseError(source, lineNo, 1, "unknown declaration type '" + o + "'");
        } else {
            axiomLines.emplace_back(lineNo, s, p, o);
        }
    }
    for (const auto& [ln, s, p, o] : axiomLines) {
        try {
            if (p == "rdfs:subClassOf") {
                ont.addAxiom({Axiom::Kind::SubClass, s, o});
            } else if (p == "rdfs:subPropertyOf") {
                ont.addAxiom({Axiom::Kind::SubProperty, s, o});
            } else if (p == "rdfs:domain") {
                ont.addAxiom({Axiom::Kind::Domain, s, o});
            } else if (p == "rdfs:range") {
                ont.addAxiom({Axiom::Kind::Range, s, o});
            } else if (p == "owl:equivalentClass") {
                ont.addAxiom({Axiom::Kind::SubClass, s, o});
                ont.addAxiom({Axiom::Kind::SubClass, o, s});
            } else if (p == "owl:equivalentProperty") {
                ont.addAxiom({Axiom::Kind::SubProperty, s, o});
                ont.addAxiom({Axiom::Kind::SubProperty, o, s});
            } else if (p == "owl:inverseOf") {
                throw SpecError("inverse properties are not part of the supported fragment");
            } else {
                throw SpecError("unknown axiom predicate '" + p + "'");
            }
        } catch (const SpecError& err) {
            throw ParseError(source, ln, 1, err.what());
        }
    }
    return ont;
}

Ontology loadOntologyFile(const std::filesystem::path& path) {
    return parseOntologyText(readFile(path), path.string());
}

} // namespace obda
