#pragma once

#include "llm4cap/rdf/graph.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace llm4cap::reason {

/// A pattern position: either a named variable or a ground term.
struct Var {
    std::string name;

    auto operator<=>(const Var&) const = default;
};

using PatternTerm = std::variant<Var, rdf::Term>;

struct TriplePattern {
    PatternTerm subject;
    PatternTerm predicate;
    PatternTerm object;
};

/// Forward rule over triple patterns. Guards keep conclusions well-formed
/// (literals never land in subject position regardless) and cut degenerate
/// derivations such as `x sameAs x`.
struct InferenceRule {
    std::string id;
    std::vector<TriplePattern> premisePatterns;
    TriplePattern conclusion;
    std::vector<std::pair<std::string, std::string>> distinctVars; // must bind differently
    std::vector<std::string> nonLiteralVars;                       // must not bind literals
};

/// Every conclusion variable must be bound by some premise.
bool rule_well_formed(const InferenceRule& rule);

/// The built-in rule set: rdfs2/3 (domain/range), rdfs5/7 (subPropertyOf),
/// rdfs9/11 (subClassOf), equivalentClass/equivalentProperty as mutual
/// sub-axioms, inverseOf, symmetric and transitive properties, sameAs
/// symmetry/transitivity and subject/object substitution, and functional /
/// inverse-functional sameAs inference between non-literal values.
const std::vector<InferenceRule>& standard_rule_set();

struct ReasonerOptions {
    std::size_t maxClosureTriples = 1'000'000;
};

/// Closure grew past ReasonerOptions::maxClosureTriples; signals a
/// pathological ontology rather than a hard failure of the engine.
struct ResourceBoundError : std::runtime_error {
    explicit ResourceBoundError(std::size_t cap)
        : std::runtime_error("closure exceeded the configured triple cap of " +
                             std::to_string(cap)),
          cap(cap) {}

    std::size_t cap;
};

/// union(data, schema) closed under the rules, reaching a fixpoint.
rdf::Graph compute_closure(const rdf::Graph& data, const rdf::Graph& schema,
                           const ReasonerOptions& options = {});
rdf::Graph compute_closure(const rdf::Graph& data, const rdf::Graph& schema,
                           const std::vector<InferenceRule>& rules,
                           const ReasonerOptions& options = {});

enum class ClashKind {
    DisjointClasses,
    NothingMember,
    SameDifferentConflict,
    NegativeAssertionViolated,
    IrreflexiveViolated,
    AsymmetricViolated,
    DisjointPropertiesViolated,
    FunctionalLiteralClash,
};

std::string_view to_string(ClashKind k);

struct Clash {
    ClashKind kind;
    std::vector<rdf::Triple> involvedTriples; // non-empty, all present in the closure
    std::string explanation;                  // names the individuals and classes/properties
};

struct ConsistencyResult {
    bool consistent = true; // iff clashes is empty
    std::vector<Clash> clashes;
    std::size_t closureSize = 0; // triples after fixpoint
};

/// Computes the closure, then scans it for every clash kind. Literal equality
/// in the functional-property check is lexical: identical datatype IRI plus
/// identical lexical form, so "1" and "01" clash.
ConsistencyResult check_consistency(const rdf::Graph& data, const rdf::Graph& schema,
                                    const ReasonerOptions& options = {});

/// One line per clash, deterministic order; feeds the repair prompt.
std::string render_clashes(const std::vector<Clash>& clashes);

} // namespace llm4cap::reason
