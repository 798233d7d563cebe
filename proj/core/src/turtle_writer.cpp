#include "llm4cap/rdf/turtle.hpp"
#include "llm4cap/rdf/vocab.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace llm4cap::rdf {

namespace {

bool is_pn_chars_base_cp(char32_t c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= 0x00C0 && c <= 0x00D6) ||
           (c >= 0x00D8 && c <= 0x00F6) || (c >= 0x00F8 && c <= 0x02FF) ||
           (c >= 0x0370 && c <= 0x037D) || (c >= 0x037F && c <= 0x1FFF) ||
           (c >= 0x200C && c <= 0x200D) || (c >= 0x2070 && c <= 0x218F) ||
           (c >= 0x2C00 && c <= 0x2FEF) || (c >= 0x3001 && c <= 0xD7FF) ||
           (c >= 0xF900 && c <= 0xFDCF) || (c >= 0xFDF0 && c <= 0xFFFD) ||
           (c >= 0x10000 && c <= 0xEFFFF);
}

bool is_pn_chars_u_cp(char32_t c) { return is_pn_chars_base_cp(c) || c == '_'; }

bool is_pn_chars_cp(char32_t c) {
    return is_pn_chars_u_cp(c) || c == '-' || (c >= '0' && c <= '9') || c == 0x00B7 ||
           (c >= 0x0300 && c <= 0x036F) || (c >= 0x203F && c <= 0x2040);
}

bool is_hex_char(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

bool is_local_escapable(char32_t c) {
    static const std::string chars = "_~.-!$&'()*+,;=/?#@%";
    return c < 128 && chars.find(static_cast<char>(c)) != std::string::npos;
}

std::vector<char32_t> decode_all(std::string_view s) {
    std::vector<char32_t> cps;
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c0 = static_cast<unsigned char>(s[i]);
        char32_t cp = 0xFFFD;
        std::size_t n = 1;
        if (c0 < 0x80) {
            cp = c0;
        } else if ((c0 & 0xE0) == 0xC0 && i + 1 < s.size()) {
            cp = ((c0 & 0x1FU) << 6) | (static_cast<unsigned char>(s[i + 1]) & 0x3F);
            n = 2;
        } else if ((c0 & 0xF0) == 0xE0 && i + 2 < s.size()) {
            cp = ((c0 & 0x0FU) << 12) | ((static_cast<unsigned char>(s[i + 1]) & 0x3F) << 6) |
                 (static_cast<unsigned char>(s[i + 2]) & 0x3F);
            n = 3;
        } else if ((c0 & 0xF8) == 0xF0 && i + 3 < s.size()) {
            cp = ((c0 & 0x07U) << 18) | ((static_cast<unsigned char>(s[i + 1]) & 0x3F) << 12) |
                 ((static_cast<unsigned char>(s[i + 2]) & 0x3F) << 6) |
                 (static_cast<unsigned char>(s[i + 3]) & 0x3F);
            n = 4;
        }
        cps.push_back(cp);
        i += n;
    }
    return cps;
}

void append_utf8_cp(std::string& out, char32_t cp) {
    if (cp <= 0x7F) {
        out += static_cast<char>(cp);
    } else if (cp <= 0x7FF) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp <= 0xFFFF) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

// Escapes the local part of a prefixed name; nullopt if some character cannot
// be represented in PN_LOCAL at all.
std::optional<std::string> escape_pn_local(const std::string& local) {
    auto cps = decode_all(local);
    std::string out;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        char32_t c = cps[i];
        bool first = i == 0;
        bool last = i + 1 == cps.size();
        if (c == '%') {
            // keep %HH verbatim, escape a bare '%'
            bool hex_follows = i + 2 < cps.size() && cps[i + 1] < 128 && cps[i + 2] < 128 &&
                               is_hex_char(static_cast<char>(cps[i + 1])) &&
                               is_hex_char(static_cast<char>(cps[i + 2]));
            if (hex_follows) {
                out += '%';
            } else {
                out += "\\%";
            }
            continue;
        }
        bool plain_ok;
        if (first) {
            plain_ok = is_pn_chars_u_cp(c) || c == ':' || (c >= '0' && c <= '9');
        } else if (last) {
            plain_ok = is_pn_chars_cp(c) || c == ':';
        } else {
            plain_ok = is_pn_chars_cp(c) || c == ':' || c == '.';
        }
        if (plain_ok) {
            append_utf8_cp(out, c);
        } else if (is_local_escapable(c)) {
            out += '\\';
            out += static_cast<char>(c);
        } else {
            return std::nullopt;
        }
    }
    return out;
}

bool is_valid_blank_label(const std::string& label) {
    auto cps = decode_all(label);
    if (cps.empty()) return false;
    if (!(is_pn_chars_u_cp(cps[0]) || (cps[0] >= '0' && cps[0] <= '9'))) return false;
    for (std::size_t i = 1; i < cps.size(); ++i) {
        if (!(is_pn_chars_cp(cps[i]) || cps[i] == '.')) return false;
    }
    return cps.back() != '.';
}

std::string write_iriref(const std::string& value) {
    std::string out = "<";
    for (char32_t c : decode_all(value)) {
        if (c <= 0x20 || c == '<' || c == '>' || c == '"' || c == '{' || c == '}' || c == '|' ||
            c == '^' || c == '`' || c == '\\') {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "\\u%04X", static_cast<unsigned>(c));
            out += buf;
        } else {
            append_utf8_cp(out, c);
        }
    }
    out += ">";
    return out;
}

std::string escape_string_value(const std::string& s) {
    std::string out;
    for (char32_t c : decode_all(s)) {
        switch (c) {
        case '\\': out += "\\\\"; break;
        case '"': out += "\\\""; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        case '\b': out += "\\b"; break;
        case '\f': out += "\\f"; break;
        default:
            if (c < 0x20) {
                char buf[16];
                std::snprintf(buf, sizeof(buf), "\\u%04X", static_cast<unsigned>(c));
                out += buf;
            } else {
                append_utf8_cp(out, c);
            }
        }
    }
    return out;
}

class Writer {
public:
    explicit Writer(const Graph& g) : graph_(g) {
        // longest namespace wins; ties resolved by label order
        for (const auto& [label, ns] : g.prefixes()) {
            if (ns.value.empty()) continue;
            auto it = by_ns_.find(ns.value);
            if (it == by_ns_.end()) by_ns_[ns.value] = label;
        }
        remap_invalid_blank_labels();
    }

    std::string run() {
        std::ostringstream out;
        for (const auto& [label, ns] : graph_.prefixes()) {
            out << "@prefix " << label << ": " << write_iriref(ns.value) << " .\n";
        }
        if (!graph_.prefixes().empty() && !graph_.triples().empty()) out << "\n";

        std::vector<const Triple*> sorted;
        sorted.reserve(graph_.triples().size());
        for (const auto& t : graph_.triples()) sorted.push_back(&t);
        std::stable_sort(sorted.begin(), sorted.end(), [this](const Triple* x, const Triple* y) {
            return sort_key(*x) < sort_key(*y);
        });
        for (const Triple* t : sorted) {
            out << write_subject(t->subject) << " " << write_iri(t->predicate) << " "
                << write_term(t->object) << " .\n";
        }
        return out.str();
    }

private:
    const Graph& graph_;
    std::map<std::string, std::string> by_ns_; // namespace -> label
    std::map<std::string, std::string> blank_rename_;

    void remap_invalid_blank_labels() {
        std::set<std::string> used;
        std::vector<std::string> invalid;
        auto note = [&](const std::string& label) {
            if (is_valid_blank_label(label)) {
                used.insert(label);
            } else {
                invalid.push_back(label);
            }
        };
        for (const auto& t : graph_.triples()) {
            if (const auto* b = std::get_if<BlankNode>(&t.subject)) note(b->label);
            if (const auto* b = std::get_if<BlankNode>(&t.object)) note(b->label);
        }
        std::sort(invalid.begin(), invalid.end());
        invalid.erase(std::unique(invalid.begin(), invalid.end()), invalid.end());
        int n = 0;
        for (const auto& label : invalid) {
            std::string fresh;
            do {
                fresh = "r" + std::to_string(n++);
            } while (used.count(fresh));
            used.insert(fresh);
            blank_rename_[label] = fresh;
        }
    }

    std::string sort_key(const Triple& t) const { return triple_key(t); }

    std::string write_iri(const Iri& iri) const {
        // longest declared namespace that prefixes this IRI
        std::string best_ns;
        for (const auto& [ns, label] : by_ns_) {
            if (iri.value.size() >= ns.size() && iri.value.compare(0, ns.size(), ns) == 0 &&
                ns.size() > best_ns.size()) {
                best_ns = ns;
            }
        }
        if (!best_ns.empty()) {
            std::string local = iri.value.substr(best_ns.size());
            if (auto escaped = escape_pn_local(local)) {
                return by_ns_.at(best_ns) + ":" + *escaped;
            }
        }
        return write_iriref(iri.value);
    }

    std::string write_blank(const BlankNode& b) const {
        auto it = blank_rename_.find(b.label);
        return "_:" + (it == blank_rename_.end() ? b.label : it->second);
    }

    std::string write_subject(const SubjectTerm& s) const {
        if (const auto* iri = std::get_if<Iri>(&s)) return write_iri(*iri);
        return write_blank(std::get<BlankNode>(s));
    }

    std::string write_term(const Term& t) const {
        if (const auto* iri = std::get_if<Iri>(&t)) return write_iri(*iri);
        if (const auto* b = std::get_if<BlankNode>(&t)) return write_blank(*b);
        const auto& lit = std::get<Literal>(t);
        std::string out = "\"" + escape_string_value(lit.lexical) + "\"";
        if (lit.language) {
            out += "@" + *lit.language;
        } else if (lit.datatype.value != vocab::xsd_string) {
            out += "^^" + write_iri(lit.datatype);
        }
        return out;
    }
};

} // namespace

std::string serialize_turtle(const Graph& g) {
    Writer w(g);
    return w.run();
}

} // namespace llm4cap::rdf
