#pragma once

#include "llm4cap/rdf/graph.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace llm4cap::rdf {

enum class DiagnosticKind {
    UnexpectedChar,
    UndefinedPrefix,
    BadIri,
    BadLiteral,
    UnterminatedStatement,
    BadDirective,
};

std::string_view to_string(DiagnosticKind k);

struct SyntaxDiagnostic {
    int line = 1;   // 1-based
    int column = 1; // 1-based, counted in code points
    DiagnosticKind kind = DiagnosticKind::UnexpectedChar;
    std::string message;
};

/// `line:col: kind: message` — one line per diagnostic, in document order.
std::string render_diagnostics(const std::vector<SyntaxDiagnostic>& diags);

struct ParseResult {
    // Always set; holds the partial graph of recovered statements when
    // diagnostics is non-empty.
    std::optional<Graph> graph;
    std::vector<SyntaxDiagnostic> diagnostics;

    bool ok() const { return diagnostics.empty(); }
};

/// Turtle 1.1 parser. Total over arbitrary byte sequences: returns either a
/// graph or a non-empty diagnostic list, never throws on input content.
/// Recovers at top-level '.' boundaries so one pass can report several errors.
/// Supports @prefix/@base and SPARQL-style PREFIX/BASE; collections and blank
/// node property lists are expanded to triples. RDF-star is not supported.
ParseResult parse_turtle(std::string_view source);

/// Deterministic serializer: prefix directives first (sorted by label), then
/// one statement per triple sorted by subject/predicate/object canonical keys.
/// Output reparses to a graph isomorphic to the input.
std::string serialize_turtle(const Graph& g);

/// True iff some blank-node bijection maps a's triple set onto b's.
bool graph_isomorphic(const Graph& a, const Graph& b);

} // namespace llm4cap::rdf
