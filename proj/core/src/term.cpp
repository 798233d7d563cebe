#include "llm4cap/rdf/term.hpp"

#include "llm4cap/rdf/vocab.hpp"

#include <sstream>

namespace llm4cap::rdf {

std::optional<SubjectTerm> to_subject(const Term& t) {
    if (const auto* iri = std::get_if<Iri>(&t)) return SubjectTerm{*iri};
    if (const auto* b = std::get_if<BlankNode>(&t)) return SubjectTerm{*b};
    return std::nullopt;
}

std::string escape_literal_lexical(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 8);
    for (char c : s) {
        switch (c) {
        case '\\': out += "\\\\"; break;
        case '"': out += "\\\""; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default: out += c; break;
        }
    }
    return out;
}

std::string term_key(const Term& t) {
    if (const auto* iri = std::get_if<Iri>(&t)) {
        return "<" + iri->value + ">";
    }
    if (const auto* b = std::get_if<BlankNode>(&t)) {
        return "_:" + b->label;
    }
    const auto& lit = std::get<Literal>(t);
    std::string key = "\"" + escape_literal_lexical(lit.lexical) + "\"";
    if (lit.language) {
        key += "@" + *lit.language;
    } else if (lit.datatype.value != vocab::xsd_string) {
        key += "^^<" + lit.datatype.value + ">";
    }
    return key;
}

std::string term_key(const SubjectTerm& t) { return term_key(to_term(t)); }

std::string triple_key(const Triple& t) {
    return term_key(t.subject) + " <" + t.predicate.value + "> " + term_key(t.object) + " .";
}

} // namespace llm4cap::rdf
