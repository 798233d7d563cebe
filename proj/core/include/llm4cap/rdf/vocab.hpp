#pragma once

#include <string_view>

// Well-known vocabulary IRIs. Plain string_views; wrap in Iri{} at use sites.
namespace llm4cap::rdf::vocab {

inline constexpr std::string_view rdf_ns = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view rdfs_ns = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view owl_ns = "http://www.w3.org/2002/07/owl#";
inline constexpr std::string_view xsd_ns = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view sh_ns = "http://www.w3.org/ns/shacl#";

inline constexpr std::string_view rdf_type = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view rdf_first = "http://www.w3.org/1999/02/22-rdf-syntax-ns#first";
inline constexpr std::string_view rdf_rest = "http://www.w3.org/1999/02/22-rdf-syntax-ns#rest";
inline constexpr std::string_view rdf_nil = "http://www.w3.org/1999/02/22-rdf-syntax-ns#nil";
inline constexpr std::string_view rdf_langString =
    "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";

inline constexpr std::string_view rdfs_subClassOf =
    "http://www.w3.org/2000/01/rdf-schema#subClassOf";
inline constexpr std::string_view rdfs_subPropertyOf =
    "http://www.w3.org/2000/01/rdf-schema#subPropertyOf";
inline constexpr std::string_view rdfs_domain = "http://www.w3.org/2000/01/rdf-schema#domain";
inline constexpr std::string_view rdfs_range = "http://www.w3.org/2000/01/rdf-schema#range";
inline constexpr std::string_view rdfs_label = "http://www.w3.org/2000/01/rdf-schema#label";
inline constexpr std::string_view rdfs_comment = "http://www.w3.org/2000/01/rdf-schema#comment";

inline constexpr std::string_view owl_Nothing = "http://www.w3.org/2002/07/owl#Nothing";
inline constexpr std::string_view owl_sameAs = "http://www.w3.org/2002/07/owl#sameAs";
inline constexpr std::string_view owl_differentFrom =
    "http://www.w3.org/2002/07/owl#differentFrom";
inline constexpr std::string_view owl_disjointWith = "http://www.w3.org/2002/07/owl#disjointWith";
inline constexpr std::string_view owl_AllDisjointClasses =
    "http://www.w3.org/2002/07/owl#AllDisjointClasses";
inline constexpr std::string_view owl_members = "http://www.w3.org/2002/07/owl#members";
inline constexpr std::string_view owl_equivalentClass =
    "http://www.w3.org/2002/07/owl#equivalentClass";
inline constexpr std::string_view owl_equivalentProperty =
    "http://www.w3.org/2002/07/owl#equivalentProperty";
inline constexpr std::string_view owl_inverseOf = "http://www.w3.org/2002/07/owl#inverseOf";
inline constexpr std::string_view owl_SymmetricProperty =
    "http://www.w3.org/2002/07/owl#SymmetricProperty";
inline constexpr std::string_view owl_AsymmetricProperty =
    "http://www.w3.org/2002/07/owl#AsymmetricProperty";
inline constexpr std::string_view owl_TransitiveProperty =
    "http://www.w3.org/2002/07/owl#TransitiveProperty";
inline constexpr std::string_view owl_FunctionalProperty =
    "http://www.w3.org/2002/07/owl#FunctionalProperty";
inline constexpr std::string_view owl_InverseFunctionalProperty =
    "http://www.w3.org/2002/07/owl#InverseFunctionalProperty";
inline constexpr std::string_view owl_IrreflexiveProperty =
    "http://www.w3.org/2002/07/owl#IrreflexiveProperty";
inline constexpr std::string_view owl_propertyDisjointWith =
    "http://www.w3.org/2002/07/owl#propertyDisjointWith";
inline constexpr std::string_view owl_NegativePropertyAssertion =
    "http://www.w3.org/2002/07/owl#NegativePropertyAssertion";
inline constexpr std::string_view owl_sourceIndividual =
    "http://www.w3.org/2002/07/owl#sourceIndividual";
inline constexpr std::string_view owl_assertionProperty =
    "http://www.w3.org/2002/07/owl#assertionProperty";
inline constexpr std::string_view owl_targetIndividual =
    "http://www.w3.org/2002/07/owl#targetIndividual";
inline constexpr std::string_view owl_targetValue = "http://www.w3.org/2002/07/owl#targetValue";

inline constexpr std::string_view xsd_string = "http://www.w3.org/2001/XMLSchema#string";
inline constexpr std::string_view xsd_boolean = "http://www.w3.org/2001/XMLSchema#boolean";
inline constexpr std::string_view xsd_integer = "http://www.w3.org/2001/XMLSchema#integer";
inline constexpr std::string_view xsd_decimal = "http://www.w3.org/2001/XMLSchema#decimal";
inline constexpr std::string_view xsd_double = "http://www.w3.org/2001/XMLSchema#double";

inline constexpr std::string_view sh_NodeShape = "http://www.w3.org/ns/shacl#NodeShape";
inline constexpr std::string_view sh_targetClass = "http://www.w3.org/ns/shacl#targetClass";
inline constexpr std::string_view sh_targetNode = "http://www.w3.org/ns/shacl#targetNode";
inline constexpr std::string_view sh_targetSubjectsOf =
    "http://www.w3.org/ns/shacl#targetSubjectsOf";
inline constexpr std::string_view sh_targetObjectsOf =
    "http://www.w3.org/ns/shacl#targetObjectsOf";
inline constexpr std::string_view sh_property = "http://www.w3.org/ns/shacl#property";
inline constexpr std::string_view sh_path = "http://www.w3.org/ns/shacl#path";
inline constexpr std::string_view sh_inversePath = "http://www.w3.org/ns/shacl#inversePath";
inline constexpr std::string_view sh_minCount = "http://www.w3.org/ns/shacl#minCount";
inline constexpr std::string_view sh_maxCount = "http://www.w3.org/ns/shacl#maxCount";
inline constexpr std::string_view sh_class = "http://www.w3.org/ns/shacl#class";
inline constexpr std::string_view sh_datatype = "http://www.w3.org/ns/shacl#datatype";
inline constexpr std::string_view sh_nodeKind = "http://www.w3.org/ns/shacl#nodeKind";
inline constexpr std::string_view sh_hasValue = "http://www.w3.org/ns/shacl#hasValue";
inline constexpr std::string_view sh_in = "http://www.w3.org/ns/shacl#in";
inline constexpr std::string_view sh_closed = "http://www.w3.org/ns/shacl#closed";
inline constexpr std::string_view sh_ignoredProperties =
    "http://www.w3.org/ns/shacl#ignoredProperties";
inline constexpr std::string_view sh_severity = "http://www.w3.org/ns/shacl#severity";
inline constexpr std::string_view sh_Violation = "http://www.w3.org/ns/shacl#Violation";
inline constexpr std::string_view sh_Warning = "http://www.w3.org/ns/shacl#Warning";
inline constexpr std::string_view sh_Info = "http://www.w3.org/ns/shacl#Info";
inline constexpr std::string_view sh_IRI = "http://www.w3.org/ns/shacl#IRI";
inline constexpr std::string_view sh_Literal = "http://www.w3.org/ns/shacl#Literal";
inline constexpr std::string_view sh_BlankNode = "http://www.w3.org/ns/shacl#BlankNode";
inline constexpr std::string_view sh_BlankNodeOrIRI =
    "http://www.w3.org/ns/shacl#BlankNodeOrIRI";
inline constexpr std::string_view sh_IRIOrLiteral = "http://www.w3.org/ns/shacl#IRIOrLiteral";
inline constexpr std::string_view sh_BlankNodeOrLiteral =
    "http://www.w3.org/ns/shacl#BlankNodeOrLiteral";

} // namespace llm4cap::rdf::vocab
