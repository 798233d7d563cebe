#include "llm4cap/shacl/validator.hpp"

#include "llm4cap/rdf/vocab.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace llm4cap::shacl {

using rdf::BlankNode;
using rdf::Graph;
using rdf::Iri;
using rdf::Literal;
using rdf::SubjectTerm;
using rdf::Term;
using rdf::Triple;
namespace vocab = rdf::vocab;

namespace {

Iri iri(std::string_view v) { return Iri{std::string(v)}; }

const std::set<std::string_view> kSupportedShapePredicates = {
    vocab::sh_targetClass, vocab::sh_targetNode,  vocab::sh_targetSubjectsOf,
    vocab::sh_targetObjectsOf, vocab::sh_property, vocab::sh_closed,
    vocab::sh_ignoredProperties, vocab::sh_severity,
};

const std::set<std::string_view> kSupportedPropertyPredicates = {
    vocab::sh_path,     vocab::sh_minCount, vocab::sh_maxCount, vocab::sh_class,
    vocab::sh_datatype, vocab::sh_nodeKind, vocab::sh_hasValue, vocab::sh_in,
    vocab::sh_severity,
};

const std::set<std::string_view> kUnsupportedPathPredicates = {
    "http://www.w3.org/ns/shacl#alternativePath",
    "http://www.w3.org/ns/shacl#zeroOrMorePath",
    "http://www.w3.org/ns/shacl#oneOrMorePath",
    "http://www.w3.org/ns/shacl#zeroOrOnePath",
};

struct ShapeParser {
    const Graph& g;
    ShapesGraph out;

    void warn(const Term& shape, std::string message) {
        out.warnings.push_back({shape, std::move(message)});
    }

    std::optional<int> read_count(const SubjectTerm& node, std::string_view pred,
                                  const Term& shapeId) {
        auto values = g.objects_of(node, iri(pred));
        if (values.empty()) return std::nullopt;
        if (values.size() > 1) {
            throw ShapeDefinitionError(shapeId, "multiple values for " + std::string(pred));
        }
        const auto* lit = std::get_if<Literal>(&values[0]);
        if (!lit) throw ShapeDefinitionError(shapeId, std::string(pred) + " must be an integer literal");
        try {
            std::size_t used = 0;
            int n = std::stoi(lit->lexical, &used);
            if (used != lit->lexical.size()) throw std::invalid_argument("trailing");
            if (n < 0) throw ShapeDefinitionError(shapeId, std::string(pred) + " must be non-negative");
            return n;
        } catch (const ShapeDefinitionError&) {
            throw;
        } catch (const std::exception&) {
            throw ShapeDefinitionError(shapeId, std::string(pred) + " is not a valid integer: \"" +
                                                    lit->lexical + "\"");
        }
    }

    Iri read_iri_constraint(const Term& value, std::string_view pred, const Term& shapeId) {
        const auto* v = std::get_if<Iri>(&value);
        if (!v) throw ShapeDefinitionError(shapeId, std::string(pred) + " must be an IRI");
        return *v;
    }

    std::optional<NodeKind> parse_node_kind(const Term& value, const Term& shapeId) {
        const auto* v = std::get_if<Iri>(&value);
        if (!v) throw ShapeDefinitionError(shapeId, "sh:nodeKind must be an IRI");
        if (v->value == vocab::sh_IRI) return NodeKind::IRI;
        if (v->value == vocab::sh_Literal) return NodeKind::Literal;
        if (v->value == vocab::sh_BlankNode) return NodeKind::BlankNode;
        if (v->value == vocab::sh_BlankNodeOrIRI) return NodeKind::BlankNodeOrIRI;
        if (v->value == vocab::sh_IRIOrLiteral) return NodeKind::IRIOrLiteral;
        if (v->value == vocab::sh_BlankNodeOrLiteral) return NodeKind::BlankNodeOrLiteral;
        throw ShapeDefinitionError(shapeId, "unknown sh:nodeKind value " + rdf::term_key(value));
    }

    Severity parse_severity(const SubjectTerm& node, const Term& shapeId) {
        auto values = g.objects_of(node, iri(vocab::sh_severity));
        if (values.empty()) return Severity::Violation;
        const auto* v = std::get_if<Iri>(&values[0]);
        if (!v) throw ShapeDefinitionError(shapeId, "sh:severity must be an IRI");
        if (v->value == vocab::sh_Violation) return Severity::Violation;
        if (v->value == vocab::sh_Warning) return Severity::Warning;
        if (v->value == vocab::sh_Info) return Severity::Info;
        warn(shapeId, "unknown sh:severity " + rdf::term_key(values[0]) + "; using Violation");
        return Severity::Violation;
    }

    // nullopt = unsupported path kind (already warned); throws on malformed
    std::optional<PropertyPath> parse_path(const Term& pathTerm, const Term& shapeId) {
        if (const auto* p = std::get_if<Iri>(&pathTerm)) return PropertyPath{*p, false};
        const auto* b = std::get_if<BlankNode>(&pathTerm);
        if (!b) throw ShapeDefinitionError(shapeId, "sh:path must be an IRI or a path node");

        auto inverse = g.objects_of(*b, iri(vocab::sh_inversePath));
        bool is_list = !g.objects_of(*b, iri(vocab::rdf_first)).empty();
        bool has_other = false;
        std::string other_kind;
        for (auto pred : kUnsupportedPathPredicates) {
            if (!g.objects_of(*b, iri(pred)).empty()) {
                has_other = true;
                other_kind = std::string(pred.substr(pred.find('#') + 1));
            }
        }
        if (inverse.size() > 1 || (!inverse.empty() && (is_list || has_other))) {
            throw ShapeDefinitionError(shapeId, "shape mixes multiple path forms");
        }
        if (inverse.size() == 1) {
            if (const auto* p = std::get_if<Iri>(&inverse[0])) return PropertyPath{*p, true};
            warn(shapeId, "unsupported nested sh:inversePath; property shape skipped");
            return std::nullopt;
        }
        if (is_list) {
            warn(shapeId, "unsupported sequence path; property shape skipped");
            return std::nullopt;
        }
        if (has_other) {
            warn(shapeId, "unsupported " + other_kind + "; property shape skipped");
            return std::nullopt;
        }
        throw ShapeDefinitionError(shapeId, "sh:path node has no recognizable path form");
    }

    void note_unsupported(const SubjectTerm& node, const Term& shapeId,
                          const std::set<std::string_view>& supported) {
        std::set<std::string> seen;
        for (const auto& t : g.match(node, std::nullopt, std::nullopt)) {
            const auto& p = t.predicate.value;
            if (p.rfind(vocab::sh_ns, 0) != 0) continue;
            if (supported.count(std::string_view(p))) continue;
            if (seen.insert(p).second) {
                warn(shapeId, "unsupported SHACL construct sh:" + p.substr(vocab::sh_ns.size()) +
                                  " ignored");
            }
        }
    }

    std::optional<PropertyShape> parse_property_shape(const Term& node, const Term& owner) {
        auto subj = rdf::to_subject(node);
        if (!subj) throw ShapeDefinitionError(owner, "sh:property value must be an IRI or blank node");

        PropertyShape ps;
        ps.id = node;
        auto paths = g.objects_of(*subj, iri(vocab::sh_path));
        if (paths.empty()) throw ShapeDefinitionError(node, "property shape has no sh:path");
        if (paths.size() > 1) throw ShapeDefinitionError(node, "property shape has two path forms");
        auto path = parse_path(paths[0], node);
        if (!path) return std::nullopt; // unsupported path kind, warned
        ps.path = *path;

        ps.minCount = read_count(*subj, vocab::sh_minCount, node);
        ps.maxCount = read_count(*subj, vocab::sh_maxCount, node);
        if (ps.minCount && ps.maxCount && *ps.minCount > *ps.maxCount) {
            throw ShapeDefinitionError(node, "sh:minCount exceeds sh:maxCount");
        }
        for (const auto& v : g.objects_of(*subj, iri(vocab::sh_class))) {
            ps.classConstraint = read_iri_constraint(v, "sh:class", node);
        }
        for (const auto& v : g.objects_of(*subj, iri(vocab::sh_datatype))) {
            ps.datatypeConstraint = read_iri_constraint(v, "sh:datatype", node);
        }
        for (const auto& v : g.objects_of(*subj, iri(vocab::sh_nodeKind))) {
            ps.nodeKind = parse_node_kind(v, node);
        }
        auto has = g.objects_of(*subj, iri(vocab::sh_hasValue));
        if (!has.empty()) ps.hasValue = has[0];
        auto ins = g.objects_of(*subj, iri(vocab::sh_in));
        if (!ins.empty()) {
            auto list = g.read_list(ins[0]);
            if (!list) throw ShapeDefinitionError(node, "sh:in is not a well-formed list");
            ps.inValues = *list;
        }
        note_unsupported(*subj, node, kSupportedPropertyPredicates);
        return ps;
    }

    void parse_node_shape(const SubjectTerm& subj) {
        NodeShape shape;
        shape.id = rdf::to_term(subj);

        for (const auto& v : g.objects_of(subj, iri(vocab::sh_targetClass))) {
            shape.targets.push_back({TargetKind::Class, v});
        }
        for (const auto& v : g.objects_of(subj, iri(vocab::sh_targetNode))) {
            shape.targets.push_back({TargetKind::Node, v});
        }
        for (const auto& v : g.objects_of(subj, iri(vocab::sh_targetSubjectsOf))) {
            shape.targets.push_back({TargetKind::SubjectsOf,
                                     Term{read_iri_constraint(v, "sh:targetSubjectsOf", shape.id)}});
        }
        for (const auto& v : g.objects_of(subj, iri(vocab::sh_targetObjectsOf))) {
            shape.targets.push_back({TargetKind::ObjectsOf,
                                     Term{read_iri_constraint(v, "sh:targetObjectsOf", shape.id)}});
        }
        if (shape.targets.empty()) return;

        for (const auto& v : g.objects_of(subj, iri(vocab::sh_closed))) {
            const auto* lit = std::get_if<Literal>(&v);
            if (!lit || (lit->lexical != "true" && lit->lexical != "false")) {
                throw ShapeDefinitionError(shape.id, "sh:closed must be a boolean literal");
            }
            shape.closed = lit->lexical == "true";
        }
        for (const auto& v : g.objects_of(subj, iri(vocab::sh_ignoredProperties))) {
            auto list = g.read_list(v);
            if (!list) {
                throw ShapeDefinitionError(shape.id, "sh:ignoredProperties is not a well-formed list");
            }
            for (const auto& m : *list) {
                shape.ignoredProperties.push_back(
                    read_iri_constraint(m, "sh:ignoredProperties member", shape.id));
            }
        }
        shape.severity = parse_severity(subj, shape.id);
        for (const auto& v : g.objects_of(subj, iri(vocab::sh_property))) {
            if (auto ps = parse_property_shape(v, shape.id)) {
                shape.propertyShapes.push_back(std::move(*ps));
            }
        }
        note_unsupported(subj, shape.id, kSupportedShapePredicates);
        out.nodeShapes.push_back(std::move(shape));
    }

    void run() {
        // a node shape is any subject declaring at least one target
        std::set<SubjectTerm> candidates;
        for (auto target : {vocab::sh_targetClass, vocab::sh_targetNode,
                            vocab::sh_targetSubjectsOf, vocab::sh_targetObjectsOf}) {
            for (const auto& t : g.match(std::nullopt, iri(target), std::nullopt)) {
                candidates.insert(t.subject);
            }
        }
        for (const auto& subj : candidates) parse_node_shape(subj);
        std::stable_sort(out.nodeShapes.begin(), out.nodeShapes.end(),
                         [](const NodeShape& a, const NodeShape& b) {
                             return rdf::term_key(a.id) < rdf::term_key(b.id);
                         });
    }
};

// --- validation ---------------------------------------------------------------

class Validator {
public:
    Validator(const Graph& data, const Graph& schema, const ShapesGraph& shapes)
        : graph_(Graph::merged(data, schema)), shapes_(shapes) {
        build_subclass_closure();
    }

    ValidationReport run() {
        for (const auto& shape : shapes_.nodeShapes) {
            for (const auto& focus : focus_nodes(shape)) check_focus(shape, focus);
        }
        std::stable_sort(report_.results.begin(), report_.results.end(),
                         [](const ValidationResult& a, const ValidationResult& b) {
                             return result_key(a) < result_key(b);
                         });
        report_.conforms =
            std::none_of(report_.results.begin(), report_.results.end(),
                         [](const ValidationResult& r) { return r.severity == Severity::Violation; });
        return std::move(report_);
    }

private:
    Graph graph_;
    const ShapesGraph& shapes_;
    ValidationReport report_;
    std::map<std::string, std::set<std::string>> superclasses_; // class key -> superclass keys

    static std::string result_key(const ValidationResult& r) {
        std::string k = rdf::term_key(r.focusNode);
        k += "|";
        if (r.path) k += (r.path->inverse ? "^" : "") + r.path->predicate.value;
        k += "|";
        k += to_string(r.constraintComponent);
        k += "|";
        if (r.value) k += rdf::term_key(*r.value);
        return k;
    }

    void build_subclass_closure() {
        // reflexive-transitive rdfs:subClassOf over the union graph
        std::map<std::string, std::set<std::string>> direct;
        for (const auto& t : graph_.match(std::nullopt, iri(vocab::rdfs_subClassOf), std::nullopt)) {
            if (const auto* c = std::get_if<Iri>(&t.subject)) {
                if (const auto* d = std::get_if<Iri>(&t.object)) direct[c->value].insert(d->value);
            }
        }
        for (const auto& [cls, supers] : direct) {
            std::set<std::string>& closed = superclasses_[cls];
            std::vector<std::string> work(supers.begin(), supers.end());
            closed.insert(cls);
            while (!work.empty()) {
                std::string cur = work.back();
                work.pop_back();
                if (!closed.insert(cur).second) continue;
                auto it = direct.find(cur);
                if (it != direct.end()) work.insert(work.end(), it->second.begin(), it->second.end());
            }
        }
    }

    bool is_instance_of(const Term& node, const Iri& cls) const {
        auto subj = rdf::to_subject(node);
        if (!subj) return false;
        for (const auto& type : graph_.objects_of(*subj, iri(vocab::rdf_type))) {
            const auto* t = std::get_if<Iri>(&type);
            if (!t) continue;
            if (*t == cls) return true;
            auto it = superclasses_.find(t->value);
            if (it != superclasses_.end() && it->second.count(cls.value)) return true;
        }
        return false;
    }

    std::vector<Term> focus_nodes(const NodeShape& shape) const {
        std::set<Term> focus;
        for (const auto& target : shape.targets) {
            switch (target.kind) {
            case TargetKind::Node:
                focus.insert(target.value);
                break;
            case TargetKind::Class: {
                const auto* cls = std::get_if<Iri>(&target.value);
                if (!cls) break;
                for (const auto& t :
                     graph_.match(std::nullopt, iri(vocab::rdf_type), std::nullopt)) {
                    Term node = rdf::to_term(t.subject);
                    if (is_instance_of(node, *cls)) focus.insert(node);
                }
                break;
            }
            case TargetKind::SubjectsOf: {
                const auto* p = std::get_if<Iri>(&target.value);
                if (!p) break;
                for (const auto& t : graph_.match(std::nullopt, *p, std::nullopt)) {
                    focus.insert(rdf::to_term(t.subject));
                }
                break;
            }
            case TargetKind::ObjectsOf: {
                const auto* p = std::get_if<Iri>(&target.value);
                if (!p) break;
                for (const auto& t : graph_.match(std::nullopt, *p, std::nullopt)) {
                    focus.insert(t.object);
                }
                break;
            }
            }
        }
        return {focus.begin(), focus.end()};
    }

    std::vector<Term> path_values(const Term& focus, const PropertyPath& path) const {
        std::vector<Term> values;
        if (path.inverse) {
            for (const auto& s : graph_.subjects_of(path.predicate, focus)) {
                values.push_back(rdf::to_term(s));
            }
        } else if (auto subj = rdf::to_subject(focus)) {
            values = graph_.objects_of(*subj, path.predicate);
        }
        return values;
    }

    void emit(const NodeShape& shape, const Term& focus, const std::optional<PropertyPath>& path,
              const std::optional<Term>& value, ConstraintComponent component,
              std::string message) {
        report_.results.push_back(
            {focus, path, value, component, shape.id, std::move(message), shape.severity});
    }

    static std::string render_path_text(const PropertyPath& p) {
        return (p.inverse ? "^<" : "<") + p.predicate.value + ">";
    }

    void check_property(const NodeShape& shape, const Term& focus, const PropertyShape& ps) {
        auto values = path_values(focus, ps.path);
        const std::string focus_name = rdf::term_key(focus);
        const std::string path_name = render_path_text(ps.path);

        if (ps.minCount && static_cast<int>(values.size()) < *ps.minCount) {
            emit(shape, focus, ps.path, std::nullopt, ConstraintComponent::MinCount,
                 focus_name + " has " + std::to_string(values.size()) + " values for " + path_name +
                     "; at least " + std::to_string(*ps.minCount) + " required");
        }
        if (ps.maxCount && static_cast<int>(values.size()) > *ps.maxCount) {
            emit(shape, focus, ps.path, std::nullopt, ConstraintComponent::MaxCount,
                 focus_name + " has " + std::to_string(values.size()) + " values for " + path_name +
                     "; at most " + std::to_string(*ps.maxCount) + " allowed");
        }
        if (ps.classConstraint) {
            for (const auto& v : values) {
                if (!is_instance_of(v, *ps.classConstraint)) {
                    emit(shape, focus, ps.path, v, ConstraintComponent::Class,
                         focus_name + " has value " + rdf::term_key(v) + " for " + path_name +
                             " that is not an instance of <" + ps.classConstraint->value + ">");
                }
            }
        }
        if (ps.datatypeConstraint) {
            for (const auto& v : values) {
                const auto* lit = std::get_if<Literal>(&v);
                if (!lit || lit->datatype != *ps.datatypeConstraint) {
                    emit(shape, focus, ps.path, v, ConstraintComponent::Datatype,
                         focus_name + " has value " + rdf::term_key(v) + " for " + path_name +
                             " without datatype <" + ps.datatypeConstraint->value + ">");
                }
            }
        }
        if (ps.nodeKind) {
            for (const auto& v : values) {
                if (!node_kind_matches(v, *ps.nodeKind)) {
                    emit(shape, focus, ps.path, v, ConstraintComponent::NodeKind,
                         focus_name + " has value " + rdf::term_key(v) + " for " + path_name +
                             " with the wrong node kind");
                }
            }
        }
        if (ps.hasValue) {
            if (std::find(values.begin(), values.end(), *ps.hasValue) == values.end()) {
                emit(shape, focus, ps.path, std::nullopt, ConstraintComponent::HasValue,
                     focus_name + " is missing required value " + rdf::term_key(*ps.hasValue) +
                         " for " + path_name);
            }
        }
        if (ps.inValues) {
            for (const auto& v : values) {
                if (std::find(ps.inValues->begin(), ps.inValues->end(), v) == ps.inValues->end()) {
                    emit(shape, focus, ps.path, v, ConstraintComponent::In,
                         focus_name + " has value " + rdf::term_key(v) + " for " + path_name +
                             " that is not in the allowed value list");
                }
            }
        }
    }

    static bool node_kind_matches(const Term& v, NodeKind kind) {
        bool i = rdf::is_iri(v), b = rdf::is_blank(v), l = rdf::is_literal(v);
        switch (kind) {
        case NodeKind::IRI: return i;
        case NodeKind::Literal: return l;
        case NodeKind::BlankNode: return b;
        case NodeKind::BlankNodeOrIRI: return b || i;
        case NodeKind::IRIOrLiteral: return i || l;
        case NodeKind::BlankNodeOrLiteral: return b || l;
        }
        return false;
    }

    void check_closed(const NodeShape& shape, const Term& focus) {
        std::set<std::string> allowed{std::string(vocab::rdf_type)};
        for (const auto& p : shape.ignoredProperties) allowed.insert(p.value);
        for (const auto& ps : shape.propertyShapes) {
            if (!ps.path.inverse) allowed.insert(ps.path.predicate.value);
        }
        auto subj = rdf::to_subject(focus);
        if (!subj) return;
        for (const auto& t : graph_.match(*subj, std::nullopt, std::nullopt)) {
            if (allowed.count(t.predicate.value)) continue;
            emit(shape, focus, PropertyPath{t.predicate, false}, t.object,
                 ConstraintComponent::Closed,
                 rdf::term_key(focus) + " uses predicate <" + t.predicate.value +
                     "> that a closed shape does not allow");
        }
    }

    void check_focus(const NodeShape& shape, const Term& focus) {
        for (const auto& ps : shape.propertyShapes) check_property(shape, focus, ps);
        if (shape.closed) check_closed(shape, focus);
    }
};

} // namespace

ShapeDefinitionError::ShapeDefinitionError(rdf::Term shape, const std::string& what)
    : std::runtime_error("shape " + rdf::term_key(shape) + ": " + what), shapeId(std::move(shape)) {}

ShapesGraph parse_shapes(const rdf::Graph& shapesDoc) {
    ShapeParser parser{shapesDoc, {}};
    parser.run();
    return std::move(parser.out);
}

std::string_view to_string(ConstraintComponent c) {
    switch (c) {
    case ConstraintComponent::MinCount: return "MinCountConstraintComponent";
    case ConstraintComponent::MaxCount: return "MaxCountConstraintComponent";
    case ConstraintComponent::Class: return "ClassConstraintComponent";
    case ConstraintComponent::Datatype: return "DatatypeConstraintComponent";
    case ConstraintComponent::NodeKind: return "NodeKindConstraintComponent";
    case ConstraintComponent::HasValue: return "HasValueConstraintComponent";
    case ConstraintComponent::In: return "InConstraintComponent";
    case ConstraintComponent::Closed: return "ClosedConstraintComponent";
    }
    return "ClosedConstraintComponent";
}

std::string_view to_string(Severity s) {
    switch (s) {
    case Severity::Violation: return "Violation";
    case Severity::Warning: return "Warning";
    case Severity::Info: return "Info";
    }
    return "Violation";
}

ValidationReport validate(const rdf::Graph& data, const rdf::Graph& schema,
                          const ShapesGraph& shapes) {
    Validator v(data, schema, shapes);
    return v.run();
}

std::string render_report(const ValidationReport& report) {
    std::ostringstream out;
    for (const auto& r : report.results) {
        out << rdf::term_key(r.focusNode) << " ";
        if (r.path) {
            out << (r.path->inverse ? "^<" : "<") << r.path->predicate.value << "> ";
        } else {
            out << "- ";
        }
        out << to_string(r.constraintComponent) << ": " << r.message;
        if (r.severity != Severity::Violation) out << " [" << to_string(r.severity) << "]";
        out << "\n";
    }
    out << "conforms: " << (report.conforms ? "true" : "false") << "\n";
    return out.str();
}

} // namespace llm4cap::shacl
