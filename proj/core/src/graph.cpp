#include "llm4cap/rdf/graph.hpp"

#include "llm4cap/rdf/vocab.hpp"

#include <set>
#include <stdexcept>

namespace llm4cap::rdf {

void Graph::add(Triple t) {
    if (t.predicate.value.empty()) {
        throw std::invalid_argument("triple predicate must be a non-empty IRI");
    }
    triples_.insert(std::move(t));
}

void Graph::add(SubjectTerm s, Iri p, Term o) {
    add(Triple{std::move(s), std::move(p), std::move(o)});
}

void Graph::set_prefix(const std::string& label, Iri ns) {
    prefixes_[label] = std::move(ns);
}

void Graph::set_base(Iri base) { base_ = std::move(base); }

bool Graph::contains(const Triple& t) const { return triples_.count(t) > 0; }

bool Graph::contains(const SubjectTerm& s, const Iri& p, const Term& o) const {
    return contains(Triple{s, p, o});
}

std::vector<Triple> Graph::match(const std::optional<SubjectTerm>& s, const std::optional<Iri>& p,
                                 const std::optional<Term>& o) const {
    std::vector<Triple> out;
    for (const auto& t : triples_) {
        if (s && t.subject != *s) continue;
        if (p && t.predicate != *p) continue;
        if (o && t.object != *o) continue;
        out.push_back(t);
    }
    return out;
}

std::vector<Term> Graph::objects_of(const SubjectTerm& s, const Iri& p) const {
    std::vector<Term> out;
    for (const auto& t : triples_) {
        if (t.subject == s && t.predicate == p) out.push_back(t.object);
    }
    return out;
}

std::vector<SubjectTerm> Graph::subjects_of(const Iri& p, const Term& o) const {
    std::vector<SubjectTerm> out;
    for (const auto& t : triples_) {
        if (t.predicate == p && t.object == o) out.push_back(t.subject);
    }
    return out;
}

std::optional<std::vector<Term>> Graph::read_list(const Term& head) const {
    const Iri first{std::string(vocab::rdf_first)};
    const Iri rest{std::string(vocab::rdf_rest)};
    const Iri nil{std::string(vocab::rdf_nil)};

    std::vector<Term> items;
    std::set<std::string> seen;
    Term node = head;
    for (;;) {
        if (const auto* iri = std::get_if<Iri>(&node); iri && *iri == nil) return items;
        auto subj = to_subject(node);
        if (!subj) return std::nullopt;
        if (!seen.insert(term_key(node)).second) return std::nullopt; // cycle
        auto firsts = objects_of(*subj, first);
        auto rests = objects_of(*subj, rest);
        if (firsts.size() != 1 || rests.size() != 1) return std::nullopt;
        items.push_back(firsts.front());
        node = rests.front();
    }
}

Graph Graph::merged(const Graph& a, const Graph& b) {
    Graph g;
    for (const auto& t : b.triples_) g.triples_.insert(t);
    for (const auto& t : a.triples_) g.triples_.insert(t);
    for (const auto& [label, ns] : b.prefixes_) g.prefixes_[label] = ns;
    for (const auto& [label, ns] : a.prefixes_) g.prefixes_[label] = ns;
    g.base_ = a.base_ ? a.base_ : b.base_;
    return g;
}

} // namespace llm4cap::rdf
