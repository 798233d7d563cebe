#include "llm4cap/rdf/turtle.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace llm4cap::rdf {

namespace {

bool has_blank(const Triple& t) {
    return std::holds_alternative<BlankNode>(t.subject) ||
           std::holds_alternative<BlankNode>(t.object);
}

// Per-node signature invariant under blank relabeling: the multiset of triple
// shapes the node participates in, with blank positions reduced to a marker.
std::string node_signature(const std::string& label, const std::vector<Triple>& triples) {
    std::vector<std::string> parts;
    for (const auto& t : triples) {
        const auto* sb = std::get_if<BlankNode>(&t.subject);
        const auto* ob = std::get_if<BlankNode>(&t.object);
        bool s_is = sb && sb->label == label;
        bool o_is = ob && ob->label == label;
        if (!s_is && !o_is) continue;
        std::string s = sb ? (s_is ? "S" : "_") : term_key(to_term(t.subject));
        std::string o = ob ? (o_is ? "O" : "_") : term_key(t.object);
        parts.push_back(s + "|" + term_key(Term{t.predicate}) + "|" + o);
    }
    std::sort(parts.begin(), parts.end());
    std::string sig;
    for (const auto& p : parts) {
        sig += p;
        sig += "\n";
    }
    return sig;
}

std::vector<std::string> blank_labels(const std::vector<Triple>& triples) {
    std::set<std::string> labels;
    for (const auto& t : triples) {
        if (const auto* b = std::get_if<BlankNode>(&t.subject)) labels.insert(b->label);
        if (const auto* b = std::get_if<BlankNode>(&t.object)) labels.insert(b->label);
    }
    return {labels.begin(), labels.end()};
}

struct Matcher {
    const std::vector<Triple>& ta;
    const std::set<Triple>& tb_set;
    std::vector<std::string> labels_a;
    std::map<std::string, std::vector<std::string>> candidates; // a-label -> b-labels
    std::map<std::string, std::string> assignment;
    std::set<std::string> used_b;

    bool mapped_triple_ok(const Triple& t) const {
        Triple m = t;
        if (const auto* b = std::get_if<BlankNode>(&m.subject)) {
            auto it = assignment.find(b->label);
            if (it == assignment.end()) return true; // not fully mapped yet
            m.subject = BlankNode{it->second};
        }
        if (const auto* b = std::get_if<BlankNode>(&m.object)) {
            auto it = assignment.find(b->label);
            if (it == assignment.end()) return true;
            m.object = BlankNode{it->second};
        }
        return tb_set.count(m) > 0;
    }

    bool consistent_with(const std::string& a_label) const {
        for (const auto& t : ta) {
            const auto* sb = std::get_if<BlankNode>(&t.subject);
            const auto* ob = std::get_if<BlankNode>(&t.object);
            bool touches = (sb && sb->label == a_label) || (ob && ob->label == a_label);
            if (!touches) continue;
            if (!mapped_triple_ok(t)) return false;
        }
        return true;
    }

    bool solve(std::size_t idx) {
        if (idx == labels_a.size()) return true;
        const auto& a_label = labels_a[idx];
        for (const auto& b_label : candidates.at(a_label)) {
            if (used_b.count(b_label)) continue;
            assignment[a_label] = b_label;
            used_b.insert(b_label);
            if (consistent_with(a_label) && solve(idx + 1)) return true;
            assignment.erase(a_label);
            used_b.erase(b_label);
        }
        return false;
    }
};

} // namespace

bool graph_isomorphic(const Graph& a, const Graph& b) {
    if (a.size() != b.size()) return false;

    std::vector<Triple> ground_a, ground_b, blank_a, blank_b;
    for (const auto& t : a.triples()) (has_blank(t) ? blank_a : ground_a).push_back(t);
    for (const auto& t : b.triples()) (has_blank(t) ? blank_b : ground_b).push_back(t);
    if (ground_a != ground_b) return false;
    if (blank_a.size() != blank_b.size()) return false;
    if (blank_a.empty()) return true;

    auto labels_a = blank_labels(blank_a);
    auto labels_b = blank_labels(blank_b);
    if (labels_a.size() != labels_b.size()) return false;

    std::map<std::string, std::string> sig_a, sig_b;
    for (const auto& l : labels_a) sig_a[l] = node_signature(l, blank_a);
    for (const auto& l : labels_b) sig_b[l] = node_signature(l, blank_b);

    // signature multisets must agree
    {
        std::vector<std::string> sa, sb;
        for (const auto& [l, s] : sig_a) sa.push_back(s);
        for (const auto& [l, s] : sig_b) sb.push_back(s);
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        if (sa != sb) return false;
    }

    Matcher m{blank_a, {blank_b.begin(), blank_b.end()}, labels_a, {}, {}, {}};
    for (const auto& la : labels_a) {
        std::vector<std::string> cands;
        for (const auto& lb : labels_b) {
            if (sig_a[la] == sig_b[lb]) cands.push_back(lb);
        }
        if (cands.empty()) return false;
        m.candidates[la] = std::move(cands);
    }
    // most-constrained first
    std::sort(m.labels_a.begin(), m.labels_a.end(), [&](const auto& x, const auto& y) {
        return m.candidates[x].size() < m.candidates[y].size();
    });
    return m.solve(0);
}

} // namespace llm4cap::rdf
