#include "llm4cap/reason/reasoner.hpp"

#include "llm4cap/rdf/vocab.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace llm4cap::reason {

using rdf::BlankNode;
using rdf::Graph;
using rdf::Iri;
using rdf::Literal;
using rdf::SubjectTerm;
using rdf::Term;
using rdf::Triple;
namespace vocab = rdf::vocab;

namespace {

PatternTerm var(const char* name) { return Var{name}; }
PatternTerm ground(std::string_view iri) { return Term{Iri{std::string(iri)}}; }

TriplePattern pat(PatternTerm s, PatternTerm p, PatternTerm o) {
    return {std::move(s), std::move(p), std::move(o)};
}

std::vector<InferenceRule> build_standard_rules() {
    const auto type = ground(vocab::rdf_type);
    std::vector<InferenceRule> rules;

    // class and property hierarchy
    rules.push_back({"rdfs2",
                     {pat(var("?p"), ground(vocab::rdfs_domain), var("?c")),
                      pat(var("?x"), var("?p"), var("?y"))},
                     pat(var("?x"), type, var("?c")),
                     {},
                     {}});
    rules.push_back({"rdfs3",
                     {pat(var("?p"), ground(vocab::rdfs_range), var("?c")),
                      pat(var("?x"), var("?p"), var("?y"))},
                     pat(var("?y"), type, var("?c")),
                     {},
                     {"?y"}});
    rules.push_back({"rdfs5",
                     {pat(var("?p"), ground(vocab::rdfs_subPropertyOf), var("?q")),
                      pat(var("?q"), ground(vocab::rdfs_subPropertyOf), var("?r"))},
                     pat(var("?p"), ground(vocab::rdfs_subPropertyOf), var("?r")),
                     {},
                     {}});
    rules.push_back({"rdfs7",
                     {pat(var("?p"), ground(vocab::rdfs_subPropertyOf), var("?q")),
                      pat(var("?x"), var("?p"), var("?y"))},
                     pat(var("?x"), var("?q"), var("?y")),
                     {},
                     {}});
    rules.push_back({"rdfs9",
                     {pat(var("?c"), ground(vocab::rdfs_subClassOf), var("?d")),
                      pat(var("?x"), type, var("?c"))},
                     pat(var("?x"), type, var("?d")),
                     {},
                     {}});
    rules.push_back({"rdfs11",
                     {pat(var("?c"), ground(vocab::rdfs_subClassOf), var("?d")),
                      pat(var("?d"), ground(vocab::rdfs_subClassOf), var("?e"))},
                     pat(var("?c"), ground(vocab::rdfs_subClassOf), var("?e")),
                     {},
                     {}});

    // equivalence as mutual sub-axioms
    rules.push_back({"eqc-sub1",
                     {pat(var("?a"), ground(vocab::owl_equivalentClass), var("?b"))},
                     pat(var("?a"), ground(vocab::rdfs_subClassOf), var("?b")),
                     {},
                     {}});
    rules.push_back({"eqc-sub2",
                     {pat(var("?a"), ground(vocab::owl_equivalentClass), var("?b"))},
                     pat(var("?b"), ground(vocab::rdfs_subClassOf), var("?a")),
                     {},
                     {"?b"}});
    rules.push_back({"eqp-sub1",
                     {pat(var("?a"), ground(vocab::owl_equivalentProperty), var("?b"))},
                     pat(var("?a"), ground(vocab::rdfs_subPropertyOf), var("?b")),
                     {},
                     {}});
    rules.push_back({"eqp-sub2",
                     {pat(var("?a"), ground(vocab::owl_equivalentProperty), var("?b"))},
                     pat(var("?b"), ground(vocab::rdfs_subPropertyOf), var("?a")),
                     {},
                     {"?b"}});

    // property characteristics
    rules.push_back({"inv1",
                     {pat(var("?p"), ground(vocab::owl_inverseOf), var("?q")),
                      pat(var("?x"), var("?p"), var("?y"))},
                     pat(var("?y"), var("?q"), var("?x")),
                     {},
                     {"?y"}});
    rules.push_back({"inv2",
                     {pat(var("?p"), ground(vocab::owl_inverseOf), var("?q")),
                      pat(var("?x"), var("?q"), var("?y"))},
                     pat(var("?y"), var("?p"), var("?x")),
                     {},
                     {"?y"}});
    rules.push_back({"sym",
                     {pat(var("?p"), type, ground(vocab::owl_SymmetricProperty)),
                      pat(var("?x"), var("?p"), var("?y"))},
                     pat(var("?y"), var("?p"), var("?x")),
                     {},
                     {"?y"}});
    rules.push_back({"trans",
                     {pat(var("?p"), type, ground(vocab::owl_TransitiveProperty)),
                      pat(var("?x"), var("?p"), var("?y")),
                      pat(var("?y"), var("?p"), var("?z"))},
                     pat(var("?x"), var("?p"), var("?z")),
                     {},
                     {}});

    // sameAs
    rules.push_back({"sameas-sym",
                     {pat(var("?x"), ground(vocab::owl_sameAs), var("?y"))},
                     pat(var("?y"), ground(vocab::owl_sameAs), var("?x")),
                     {},
                     {"?y"}});
    rules.push_back({"sameas-trans",
                     {pat(var("?x"), ground(vocab::owl_sameAs), var("?y")),
                      pat(var("?y"), ground(vocab::owl_sameAs), var("?z"))},
                     pat(var("?x"), ground(vocab::owl_sameAs), var("?z")),
                     {{"?x", "?z"}},
                     {}});
    rules.push_back({"eq-rep-s",
                     {pat(var("?x"), ground(vocab::owl_sameAs), var("?y")),
                      pat(var("?x"), var("?p"), var("?o"))},
                     pat(var("?y"), var("?p"), var("?o")),
                     {{"?x", "?y"}},
                     {"?y"}});
    rules.push_back({"eq-rep-o",
                     {pat(var("?x"), ground(vocab::owl_sameAs), var("?y")),
                      pat(var("?s"), var("?p"), var("?x"))},
                     pat(var("?s"), var("?p"), var("?y")),
                     {{"?x", "?y"}},
                     {}});

    // functional / inverse-functional: sameAs only between non-literal values
    rules.push_back({"prp-fp",
                     {pat(var("?p"), type, ground(vocab::owl_FunctionalProperty)),
                      pat(var("?x"), var("?p"), var("?y1")),
                      pat(var("?x"), var("?p"), var("?y2"))},
                     pat(var("?y1"), ground(vocab::owl_sameAs), var("?y2")),
                     {{"?y1", "?y2"}},
                     {"?y1", "?y2"}});
    rules.push_back({"prp-ifp",
                     {pat(var("?p"), type, ground(vocab::owl_InverseFunctionalProperty)),
                      pat(var("?x1"), var("?p"), var("?y")),
                      pat(var("?x2"), var("?p"), var("?y"))},
                     pat(var("?x1"), ground(vocab::owl_sameAs), var("?x2")),
                     {{"?x1", "?x2"}},
                     {"?x1", "?x2"}});

    return rules;
}

using Bindings = std::map<std::string, Term>;

std::optional<Term> resolve(const PatternTerm& p, const Bindings& b) {
    if (const auto* t = std::get_if<Term>(&p)) return *t;
    auto it = b.find(std::get<Var>(p).name);
    if (it != b.end()) return it->second;
    return std::nullopt;
}

bool bind_term(const PatternTerm& p, const Term& value, Bindings& b) {
    if (const auto* t = std::get_if<Term>(&p)) return *t == value;
    const auto& name = std::get<Var>(p).name;
    auto it = b.find(name);
    if (it != b.end()) return it->second == value;
    b[name] = value;
    return true;
}

class Engine {
public:
    Engine(Graph& closure, const std::vector<InferenceRule>& rules, std::size_t cap)
        : closure_(closure), rules_(rules), cap_(cap) {}

    void run() {
        bool changed = true;
        while (changed) {
            changed = false;
            pending_.clear();
            for (const auto& rule : rules_) {
                Bindings b;
                match_premises(rule, 0, b);
            }
            for (const auto& t : pending_) {
                if (!closure_.contains(t)) {
                    closure_.add(t);
                    changed = true;
                    if (closure_.size() > cap_) throw ResourceBoundError(cap_);
                }
            }
        }
    }

private:
    Graph& closure_;
    const std::vector<InferenceRule>& rules_;
    std::size_t cap_;
    std::set<Triple> pending_;

    void match_premises(const InferenceRule& rule, std::size_t idx, Bindings& b) {
        if (idx == rule.premisePatterns.size()) {
            emit(rule, b);
            return;
        }
        const auto& p = rule.premisePatterns[idx];
        auto s = resolve(p.subject, b);
        auto pr = resolve(p.predicate, b);
        auto o = resolve(p.object, b);
        // ground subject/predicate values of the wrong kind can never match
        std::optional<SubjectTerm> ms;
        if (s) {
            auto sub = rdf::to_subject(*s);
            if (!sub) return;
            ms = *sub;
        }
        std::optional<Iri> mp;
        if (pr) {
            const auto* iri = std::get_if<Iri>(&*pr);
            if (!iri) return;
            mp = *iri;
        }
        for (const auto& t : closure_.match(ms, mp, o)) {
            Bindings next = b;
            if (!bind_term(p.subject, rdf::to_term(t.subject), next)) continue;
            if (!bind_term(p.predicate, Term{t.predicate}, next)) continue;
            if (!bind_term(p.object, t.object, next)) continue;
            match_premises(rule, idx + 1, next);
        }
    }

    void emit(const InferenceRule& rule, const Bindings& b) {
        for (const auto& [x, y] : rule.distinctVars) {
            auto ix = b.find(x);
            auto iy = b.find(y);
            if (ix != b.end() && iy != b.end() && ix->second == iy->second) return;
        }
        for (const auto& v : rule.nonLiteralVars) {
            auto it = b.find(v);
            if (it != b.end() && rdf::is_literal(it->second)) return;
        }
        auto s = resolve(rule.conclusion.subject, b);
        auto p = resolve(rule.conclusion.predicate, b);
        auto o = resolve(rule.conclusion.object, b);
        if (!s || !p || !o) return; // unbound conclusion variable
        auto subject = rdf::to_subject(*s);
        if (!subject) return; // literals cannot be subjects
        const auto* predicate = std::get_if<Iri>(&*p);
        if (!predicate) return;
        Triple t{*subject, *predicate, *o};
        if (!closure_.contains(t)) pending_.insert(std::move(t));
    }
};

// --- clash scan --------------------------------------------------------------

struct ClashScan {
    const Graph& g;
    std::vector<Clash> out;

    Iri iri(std::string_view v) const { return Iri{std::string(v)}; }

    void add(ClashKind kind, std::vector<Triple> involved, std::string explanation) {
        out.push_back({kind, std::move(involved), std::move(explanation)});
    }

    std::vector<SubjectTerm> instances_of(const Term& cls) const {
        return g.subjects_of(iri(vocab::rdf_type), cls);
    }

    void disjoint_pair(const Term& a, const Term& b, const std::vector<Triple>& axiom) {
        if (a == b) return;
        for (const auto& x : instances_of(a)) {
            Triple ta{x, iri(vocab::rdf_type), a};
            Triple tb{x, iri(vocab::rdf_type), b};
            if (!g.contains(tb)) continue;
            std::vector<Triple> involved{ta, tb};
            involved.insert(involved.end(), axiom.begin(), axiom.end());
            add(ClashKind::DisjointClasses, std::move(involved),
                term_key(rdf::to_term(x)) + " belongs to disjoint classes " + term_key(a) +
                    " and " + term_key(b));
        }
    }

    void scan_disjoint_classes() {
        for (const auto& t : g.match(std::nullopt, iri(vocab::owl_disjointWith), std::nullopt)) {
            // scan one orientation only when the reverse axiom is also present
            if (auto rev_subj = rdf::to_subject(t.object)) {
                Triple reverse{*rev_subj, t.predicate, rdf::to_term(t.subject)};
                if (g.contains(reverse) && triple_key(reverse) < triple_key(t)) continue;
            }
            disjoint_pair(rdf::to_term(t.subject), t.object, {t});
        }
        for (const auto& t :
             g.match(std::nullopt, iri(vocab::rdf_type),
                     Term{iri(vocab::owl_AllDisjointClasses)})) {
            auto members = g.objects_of(t.subject, iri(vocab::owl_members));
            if (members.size() != 1) continue;
            auto list = g.read_list(members[0]);
            if (!list) continue;
            for (std::size_t i = 0; i < list->size(); ++i) {
                for (std::size_t j = i + 1; j < list->size(); ++j) {
                    disjoint_pair((*list)[i], (*list)[j], {t});
                }
            }
        }
    }

    void scan_nothing_member() {
        for (const auto& t :
             g.match(std::nullopt, iri(vocab::rdf_type), Term{iri(vocab::owl_Nothing)})) {
            add(ClashKind::NothingMember, {t},
                term_key(rdf::to_term(t.subject)) + " is asserted to be a member of owl:Nothing");
        }
    }

    void scan_same_different() {
        for (const auto& t :
             g.match(std::nullopt, iri(vocab::owl_differentFrom), std::nullopt)) {
            Term s = rdf::to_term(t.subject);
            if (s == t.object) {
                add(ClashKind::SameDifferentConflict, {t},
                    term_key(s) + " is declared different from itself");
                continue;
            }
            auto subj = rdf::to_subject(s);
            if (!subj) continue;
            Triple same{*subj, iri(vocab::owl_sameAs), t.object};
            if (g.contains(same)) {
                // report each unordered pair once; closure holds both orientations
                if (term_key(s) > term_key(t.object)) continue;
                add(ClashKind::SameDifferentConflict, {same, t},
                    term_key(s) + " and " + term_key(t.object) +
                        " are declared both sameAs and differentFrom");
            }
        }
    }

    void scan_negative_assertions() {
        for (const auto& t : g.match(std::nullopt, iri(vocab::rdf_type),
                                     Term{iri(vocab::owl_NegativePropertyAssertion)})) {
            auto src = g.objects_of(t.subject, iri(vocab::owl_sourceIndividual));
            auto prop = g.objects_of(t.subject, iri(vocab::owl_assertionProperty));
            if (src.size() != 1 || prop.size() != 1) continue;
            auto subj = rdf::to_subject(src[0]);
            const auto* p = std::get_if<Iri>(&prop[0]);
            if (!subj || !p) continue;
            auto targets = g.objects_of(t.subject, iri(vocab::owl_targetIndividual));
            auto values = g.objects_of(t.subject, iri(vocab::owl_targetValue));
            targets.insert(targets.end(), values.begin(), values.end());
            for (const auto& target : targets) {
                Triple asserted{*subj, *p, target};
                if (!g.contains(asserted)) continue;
                add(ClashKind::NegativeAssertionViolated, {asserted, t},
                    "negative assertion on " + term_key(Term{*p}) + " is violated by " +
                        term_key(src[0]) + " " + term_key(Term{*p}) + " " + term_key(target));
            }
        }
    }

    std::vector<Iri> properties_typed(std::string_view cls) const {
        std::vector<Iri> props;
        for (const auto& t : g.match(std::nullopt, iri(vocab::rdf_type), Term{iri(cls)})) {
            if (const auto* p = std::get_if<Iri>(&t.subject)) props.push_back(*p);
        }
        return props;
    }

    void scan_irreflexive() {
        for (const auto& p : properties_typed(vocab::owl_IrreflexiveProperty)) {
            Triple decl{p, iri(vocab::rdf_type), Term{iri(vocab::owl_IrreflexiveProperty)}};
            for (const auto& t : g.match(std::nullopt, p, std::nullopt)) {
                if (rdf::to_term(t.subject) != t.object) continue;
                add(ClashKind::IrreflexiveViolated, {t, decl},
                    "irreflexive property " + term_key(Term{p}) + " relates " +
                        term_key(t.object) + " to itself");
            }
        }
    }

    void scan_asymmetric() {
        for (const auto& p : properties_typed(vocab::owl_AsymmetricProperty)) {
            Triple decl{p, iri(vocab::rdf_type), Term{iri(vocab::owl_AsymmetricProperty)}};
            for (const auto& t : g.match(std::nullopt, p, std::nullopt)) {
                auto obj_subj = rdf::to_subject(t.object);
                if (!obj_subj) continue;
                Triple back{*obj_subj, p, rdf::to_term(t.subject)};
                if (!g.contains(back)) continue;
                // unordered pair reported once
                if (triple_key(back) < triple_key(t)) continue;
                add(ClashKind::AsymmetricViolated, {t, back, decl},
                    "asymmetric property " + term_key(Term{p}) + " holds in both directions between " +
                        term_key(rdf::to_term(t.subject)) + " and " + term_key(t.object));
            }
        }
    }

    void scan_disjoint_properties() {
        std::set<std::string> seen;
        for (const auto& axiom :
             g.match(std::nullopt, iri(vocab::owl_propertyDisjointWith), std::nullopt)) {
            const auto* p = std::get_if<Iri>(&axiom.subject);
            const auto* q = std::get_if<Iri>(&axiom.object);
            if (!p || !q || *p == *q) continue;
            for (const auto& t : g.match(std::nullopt, *p, std::nullopt)) {
                Triple other{t.subject, *q, t.object};
                if (!g.contains(other)) continue;
                std::string pair_id = triple_key(t) + "|" + triple_key(other);
                std::string rev_id = triple_key(other) + "|" + triple_key(t);
                if (seen.count(pair_id) || seen.count(rev_id)) continue;
                seen.insert(pair_id);
                add(ClashKind::DisjointPropertiesViolated, {t, other, axiom},
                    "disjoint properties " + term_key(Term{*p}) + " and " + term_key(Term{*q}) +
                        " both relate " + term_key(rdf::to_term(t.subject)) + " to " +
                        term_key(t.object));
            }
        }
    }

    void scan_functional_literals() {
        for (const auto& p : properties_typed(vocab::owl_FunctionalProperty)) {
            Triple decl{p, iri(vocab::rdf_type), Term{iri(vocab::owl_FunctionalProperty)}};
            // group literal objects by subject
            std::map<std::string, std::vector<Triple>> by_subject;
            for (const auto& t : g.match(std::nullopt, p, std::nullopt)) {
                if (rdf::is_literal(t.object)) {
                    by_subject[term_key(rdf::to_term(t.subject))].push_back(t);
                }
            }
            for (auto& [subject_key, ts] : by_subject) {
                (void)subject_key;
                std::sort(ts.begin(), ts.end(),
                          [](const Triple& a, const Triple& b) {
                              return triple_key(a) < triple_key(b);
                          });
                for (std::size_t i = 0; i < ts.size(); ++i) {
                    for (std::size_t j = i + 1; j < ts.size(); ++j) {
                        if (ts[i].object == ts[j].object) continue;
                        add(ClashKind::FunctionalLiteralClash, {ts[i], ts[j], decl},
                            "functional property " + term_key(Term{p}) + " gives " +
                                term_key(rdf::to_term(ts[i].subject)) +
                                " two distinct literal values " + term_key(ts[i].object) +
                                " and " + term_key(ts[j].object) +
                                " (literal equality is lexical: identical datatype and lexical form)");
                    }
                }
            }
        }
    }

    void run() {
        scan_disjoint_classes();
        scan_nothing_member();
        scan_same_different();
        scan_negative_assertions();
        scan_irreflexive();
        scan_asymmetric();
        scan_disjoint_properties();
        scan_functional_literals();
        std::stable_sort(out.begin(), out.end(), [](const Clash& a, const Clash& b) {
            if (a.kind != b.kind) return a.kind < b.kind;
            return a.explanation < b.explanation;
        });
    }
};

} // namespace

bool rule_well_formed(const InferenceRule& rule) {
    std::set<std::string> bound;
    for (const auto& p : rule.premisePatterns) {
        for (const auto* pt : {&p.subject, &p.predicate, &p.object}) {
            if (const auto* v = std::get_if<Var>(pt)) bound.insert(v->name);
        }
    }
    for (const auto* pt :
         {&rule.conclusion.subject, &rule.conclusion.predicate, &rule.conclusion.object}) {
        if (const auto* v = std::get_if<Var>(pt)) {
            if (!bound.count(v->name)) return false;
        }
    }
    return true;
}

const std::vector<InferenceRule>& standard_rule_set() {
    static const std::vector<InferenceRule> rules = build_standard_rules();
    return rules;
}

std::string_view to_string(ClashKind k) {
    switch (k) {
    case ClashKind::DisjointClasses: return "DisjointClasses";
    case ClashKind::NothingMember: return "NothingMember";
    case ClashKind::SameDifferentConflict: return "SameDifferentConflict";
    case ClashKind::NegativeAssertionViolated: return "NegativeAssertionViolated";
    case ClashKind::IrreflexiveViolated: return "IrreflexiveViolated";
    case ClashKind::AsymmetricViolated: return "AsymmetricViolated";
    case ClashKind::DisjointPropertiesViolated: return "DisjointPropertiesViolated";
    case ClashKind::FunctionalLiteralClash: return "FunctionalLiteralClash";
    }
    return "DisjointClasses";
}

rdf::Graph compute_closure(const rdf::Graph& data, const rdf::Graph& schema,
                           const std::vector<InferenceRule>& rules,
                           const ReasonerOptions& options) {
    Graph closure = Graph::merged(data, schema);
    if (closure.size() > options.maxClosureTriples) throw ResourceBoundError(options.maxClosureTriples);
    Engine engine(closure, rules, options.maxClosureTriples);
    engine.run();
    return closure;
}

rdf::Graph compute_closure(const rdf::Graph& data, const rdf::Graph& schema,
                           const ReasonerOptions& options) {
    return compute_closure(data, schema, standard_rule_set(), options);
}

ConsistencyResult check_consistency(const rdf::Graph& data, const rdf::Graph& schema,
                                    const ReasonerOptions& options) {
    Graph closure = compute_closure(data, schema, options);
    ClashScan scan{closure, {}};
    scan.run();
    ConsistencyResult result;
    result.clashes = std::move(scan.out);
    result.consistent = result.clashes.empty();
    result.closureSize = closure.size();
    return result;
}

std::string render_clashes(const std::vector<Clash>& clashes) {
    std::ostringstream out;
    for (const auto& c : clashes) {
        out << to_string(c.kind) << ": " << c.explanation << "\n";
    }
    return out.str();
}

} // namespace llm4cap::reason
