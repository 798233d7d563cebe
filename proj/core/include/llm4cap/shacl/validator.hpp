#pragma once

#include "llm4cap/rdf/graph.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace llm4cap::shacl {

enum class TargetKind { Class, Node, SubjectsOf, ObjectsOf };

struct Target {
    TargetKind kind;
    rdf::Term value; // class IRI, node term, or property IRI depending on kind
};

enum class NodeKind { IRI, Literal, BlankNode, BlankNodeOrIRI, IRIOrLiteral, BlankNodeOrLiteral };

/// Exactly one of the two forms: a plain predicate or its inverse.
struct PropertyPath {
    rdf::Iri predicate;
    bool inverse = false;

    auto operator<=>(const PropertyPath&) const = default;
};

struct PropertyShape {
    rdf::Term id;
    PropertyPath path;
    std::optional<int> minCount;
    std::optional<int> maxCount;
    std::optional<rdf::Iri> classConstraint;
    std::optional<rdf::Iri> datatypeConstraint;
    std::optional<NodeKind> nodeKind;
    std::optional<rdf::Term> hasValue;
    std::optional<std::vector<rdf::Term>> inValues;
};

enum class Severity { Violation, Warning, Info };

struct NodeShape {
    rdf::Term id;
    std::vector<Target> targets;
    bool closed = false;
    std::vector<rdf::Iri> ignoredProperties;
    std::vector<PropertyShape> propertyShapes;
    Severity severity = Severity::Violation;
};

/// Recognized-but-unsupported construct; recorded instead of silently dropped.
struct ShapeWarning {
    rdf::Term shape;
    std::string message;
};

struct ShapesGraph {
    std::vector<NodeShape> nodeShapes;
    std::vector<ShapeWarning> warnings;
};

/// Malformed shape definition (two path forms, negative counts, broken lists).
struct ShapeDefinitionError : std::runtime_error {
    ShapeDefinitionError(rdf::Term shape, const std::string& what);

    rdf::Term shapeId;
};

/// Captures every node shape that declares at least one target.
ShapesGraph parse_shapes(const rdf::Graph& shapesDoc);

enum class ConstraintComponent { MinCount, MaxCount, Class, Datatype, NodeKind, HasValue, In, Closed };

/// SHACL-core local component name, e.g. "MinCountConstraintComponent".
std::string_view to_string(ConstraintComponent c);
std::string_view to_string(Severity s);

struct ValidationResult {
    rdf::Term focusNode;
    std::optional<PropertyPath> path;
    std::optional<rdf::Term> value;
    ConstraintComponent constraintComponent;
    rdf::Term sourceShape;
    std::string message; // names the focus node
    Severity severity = Severity::Violation;
};

struct ValidationReport {
    bool conforms = true; // iff no result carries Severity::Violation
    std::vector<ValidationResult> results;
};

/// Validates union(data, schema); the schema supplies the rdfs:subClassOf
/// hierarchy used by targetClass selection and sh:class checks.
ValidationReport validate(const rdf::Graph& data, const rdf::Graph& schema,
                          const ShapesGraph& shapes);

/// One line per result in sorted focus-node order, final line
/// "conforms: true|false". Identical reports render byte-identically.
std::string render_report(const ValidationReport& report);

} // namespace llm4cap::shacl
