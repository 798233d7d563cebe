#pragma once

#include <compare>
#include <optional>
#include <string>
#include <variant>

namespace llm4cap::rdf {

/// Absolute IRI. Construction does not validate; parser and Graph enforce
/// absoluteness and the no-whitespace invariant at their boundaries.
struct Iri {
    std::string value;

    Iri() = default;
    explicit Iri(std::string v) : value(std::move(v)) {}

    auto operator<=>(const Iri&) const = default;
};

/// Blank node with a document-scoped label. Labels are not stable across
/// serialize/parse round trips; identity is structural (see graph_isomorphic).
struct BlankNode {
    std::string label;

    BlankNode() = default;
    explicit BlankNode(std::string l) : label(std::move(l)) {}

    auto operator<=>(const BlankNode&) const = default;
};

/// RDF literal. `datatype` is always set: plain literals carry xsd:string,
/// language-tagged literals carry rdf:langString plus the tag.
struct Literal {
    std::string lexical;
    Iri datatype;
    std::optional<std::string> language;

    Literal() = default;
    Literal(std::string lex, Iri dt, std::optional<std::string> lang = std::nullopt)
        : lexical(std::move(lex)), datatype(std::move(dt)), language(std::move(lang)) {}

    auto operator<=>(const Literal&) const = default;
};

/// Subject position admits no literals; keep that illegal state unrepresentable.
using SubjectTerm = std::variant<Iri, BlankNode>;

using Term = std::variant<Iri, BlankNode, Literal>;

inline bool is_iri(const Term& t) { return std::holds_alternative<Iri>(t); }
inline bool is_blank(const Term& t) { return std::holds_alternative<BlankNode>(t); }
inline bool is_literal(const Term& t) { return std::holds_alternative<Literal>(t); }

inline Term to_term(const SubjectTerm& s) {
    if (std::holds_alternative<Iri>(s)) return std::get<Iri>(s);
    return std::get<BlankNode>(s);
}

/// Narrow a Term to subject position; nullopt for literals.
std::optional<SubjectTerm> to_subject(const Term& t);

struct Triple {
    SubjectTerm subject;
    Iri predicate;
    Term object;

    auto operator<=>(const Triple&) const = default;
};

/// N-Triples-like canonical key, injective over terms. Used for deterministic
/// ordering, digests, and report rendering.
std::string term_key(const Term& t);
std::string term_key(const SubjectTerm& t);
std::string triple_key(const Triple& t);

/// Escapes per N-Triples string rules (backslash, quote, control chars).
std::string escape_literal_lexical(const std::string& s);

} // namespace llm4cap::rdf
