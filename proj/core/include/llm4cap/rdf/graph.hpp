#pragma once

#include "llm4cap/rdf/term.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace llm4cap::rdf {

/// An RDF graph: a set of triples (no duplicates) plus the prefix map and
/// optional base carried over from parsing. Treated as immutable once built;
/// the pipeline only ever shares const references across runs.
class Graph {
public:
    Graph() = default;

    /// Inserts a triple; duplicates collapse. Throws std::invalid_argument on
    /// an empty predicate IRI.
    void add(Triple t);
    void add(SubjectTerm s, Iri p, Term o);

    /// Declares or overwrites a prefix binding.
    void set_prefix(const std::string& label, Iri ns);
    void set_base(Iri base);

    bool contains(const Triple& t) const;
    bool contains(const SubjectTerm& s, const Iri& p, const Term& o) const;

    std::size_t size() const { return triples_.size(); }
    bool empty() const { return triples_.empty(); }

    const std::set<Triple>& triples() const { return triples_; }
    const std::map<std::string, Iri>& prefixes() const { return prefixes_; }
    const std::optional<Iri>& base() const { return base_; }

    // Pattern scans; nullopt matches anything. Small graphs, linear is fine.
    std::vector<Triple> match(const std::optional<SubjectTerm>& s, const std::optional<Iri>& p,
                              const std::optional<Term>& o) const;
    std::vector<Term> objects_of(const SubjectTerm& s, const Iri& p) const;
    std::vector<SubjectTerm> subjects_of(const Iri& p, const Term& o) const;

    /// Reads an rdf:first/rdf:rest chain starting at `head`. Returns nullopt
    /// on a malformed list (missing first/rest, cycle).
    std::optional<std::vector<Term>> read_list(const Term& head) const;

    /// Union of this graph's triples with another's; prefixes merged,
    /// left-hand binding wins on conflict.
    static Graph merged(const Graph& a, const Graph& b);

private:
    std::set<Triple> triples_;
    std::map<std::string, Iri> prefixes_;
    std::optional<Iri> base_;
};

} // namespace llm4cap::rdf
