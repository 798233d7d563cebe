#include "llm4cap/rdf/turtle.hpp"
#include "llm4cap/rdf/vocab.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace llm4cap::rdf {

namespace {

// ---------------------------------------------------------------------------
// IRI handling (RFC 3986 reference resolution)
// ---------------------------------------------------------------------------

struct IriParts {
    std::optional<std::string> scheme;
    std::optional<std::string> authority;
    std::string path;
    std::optional<std::string> query;
    std::optional<std::string> fragment;
};

bool has_scheme(std::string_view iri) {
    if (iri.empty() || !std::isalpha(static_cast<unsigned char>(iri[0]))) return false;
    for (std::size_t i = 1; i < iri.size(); ++i) {
        char c = iri[i];
        if (c == ':') return true;
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.')
            return false;
    }
    return false;
}

IriParts split_iri(std::string_view iri) {
    IriParts p;
    if (auto hash = iri.find('#'); hash != std::string_view::npos) {
        p.fragment = std::string(iri.substr(hash + 1));
        iri = iri.substr(0, hash);
    }
    if (auto q = iri.find('?'); q != std::string_view::npos) {
        p.query = std::string(iri.substr(q + 1));
        iri = iri.substr(0, q);
    }
    if (has_scheme(iri)) {
        auto colon = iri.find(':');
        p.scheme = std::string(iri.substr(0, colon));
        iri = iri.substr(colon + 1);
    }
    if (iri.substr(0, 2) == "//") {
        iri = iri.substr(2);
        auto slash = iri.find('/');
        if (slash == std::string_view::npos) {
            p.authority = std::string(iri);
            iri = "";
        } else {
            p.authority = std::string(iri.substr(0, slash));
            iri = iri.substr(slash);
        }
    }
    p.path = std::string(iri);
    return p;
}

std::string remove_dot_segments(std::string input) {
    std::string output;
    while (!input.empty()) {
        if (input.rfind("../", 0) == 0) {
            input.erase(0, 3);
        } else if (input.rfind("./", 0) == 0) {
            input.erase(0, 2);
        } else if (input.rfind("/./", 0) == 0) {
            input.erase(0, 2); // keep leading '/'
        } else if (input == "/.") {
            input = "/";
        } else if (input.rfind("/../", 0) == 0 || input == "/..") {
            input = (input == "/..") ? "/" : input.substr(3);
            auto last = output.find_last_of('/');
            output.erase(last == std::string::npos ? 0 : last);
        } else if (input == "." || input == "..") {
            input.clear();
        } else {
            std::size_t next = input.find('/', 1);
            if (next == std::string::npos) next = input.size();
            output += input.substr(0, next);
            input.erase(0, next);
        }
    }
    return output;
}

std::string recompose(const IriParts& p) {
    std::string out;
    if (p.scheme) out += *p.scheme + ":";
    if (p.authority) out += "//" + *p.authority;
    out += p.path;
    if (p.query) out += "?" + *p.query;
    if (p.fragment) out += "#" + *p.fragment;
    return out;
}

std::string resolve_reference(const std::string& base, const std::string& ref) {
    IriParts b = split_iri(base);
    IriParts r = split_iri(ref);
    IriParts t;
    if (r.scheme) {
        t = r;
        t.path = remove_dot_segments(t.path);
    } else {
        t.scheme = b.scheme;
        if (r.authority) {
            t.authority = r.authority;
            t.path = remove_dot_segments(r.path);
            t.query = r.query;
        } else {
            t.authority = b.authority;
            if (r.path.empty()) {
                t.path = b.path;
                t.query = r.query ? r.query : b.query;
            } else if (r.path[0] == '/') {
                t.path = remove_dot_segments(r.path);
                t.query = r.query;
            } else {
                std::string merged;
                if (b.authority && b.path.empty()) {
                    merged = "/" + r.path;
                } else {
                    auto last = b.path.find_last_of('/');
                    merged = (last == std::string::npos) ? r.path
                                                         : b.path.substr(0, last + 1) + r.path;
                }
                t.path = remove_dot_segments(merged);
                t.query = r.query;
            }
        }
        t.fragment = r.fragment;
    }
    return recompose(t);
}

// ---------------------------------------------------------------------------
// Code point classes (Turtle terminals)
// ---------------------------------------------------------------------------

bool is_pn_chars_base(char32_t c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= 0x00C0 && c <= 0x00D6) ||
           (c >= 0x00D8 && c <= 0x00F6) || (c >= 0x00F8 && c <= 0x02FF) ||
           (c >= 0x0370 && c <= 0x037D) || (c >= 0x037F && c <= 0x1FFF) ||
           (c >= 0x200C && c <= 0x200D) || (c >= 0x2070 && c <= 0x218F) ||
           (c >= 0x2C00 && c <= 0x2FEF) || (c >= 0x3001 && c <= 0xD7FF) ||
           (c >= 0xF900 && c <= 0xFDCF) || (c >= 0xFDF0 && c <= 0xFFFD) ||
           (c >= 0x10000 && c <= 0xEFFFF);
}

bool is_pn_chars_u(char32_t c) { return is_pn_chars_base(c) || c == '_'; }

bool is_pn_chars(char32_t c) {
    return is_pn_chars_u(c) || c == '-' || (c >= '0' && c <= '9') || c == 0x00B7 ||
           (c >= 0x0300 && c <= 0x036F) || (c >= 0x203F && c <= 0x2040);
}

bool is_ws(char32_t c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

bool is_digit(char32_t c) { return c >= '0' && c <= '9'; }

bool is_hex(char32_t c) {
    return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

bool is_local_esc(char32_t c) {
    static const std::string chars = "_~.-!$&'()*+,;=/?#@%";
    return c < 128 && chars.find(static_cast<char>(c)) != std::string::npos;
}

struct Decoded {
    char32_t cp;
    std::size_t len;
};

// Decodes one code point; invalid UTF-8 yields U+FFFD of length 1.
Decoded decode_utf8(std::string_view src, std::size_t pos) {
    if (pos >= src.size()) return {0, 0};
    unsigned char c0 = static_cast<unsigned char>(src[pos]);
    if (c0 < 0x80) return {c0, 1};
    auto cont = [&](std::size_t i) {
        return pos + i < src.size() && (static_cast<unsigned char>(src[pos + i]) & 0xC0) == 0x80;
    };
    auto byte = [&](std::size_t i) {
        return static_cast<char32_t>(static_cast<unsigned char>(src[pos + i]) & 0x3F);
    };
    if ((c0 & 0xE0) == 0xC0 && cont(1)) return {((c0 & 0x1FU) << 6) | byte(1), 2};
    if ((c0 & 0xF0) == 0xE0 && cont(1) && cont(2))
        return {((c0 & 0x0FU) << 12) | (byte(1) << 6) | byte(2), 3};
    if ((c0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3))
        return {((c0 & 0x07U) << 18) | (byte(1) << 12) | (byte(2) << 6) | byte(3), 4};
    return {0xFFFD, 1};
}

void append_utf8(std::string& out, char32_t cp) {
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

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct ParseError {
    SyntaxDiagnostic diagnostic;
};

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) { reserve_doc_labels(); }

    ParseResult run() {
        while (true) {
            skip_ws_and_comments();
            if (at_end()) break;
            try {
                parse_statement();
            } catch (const ParseError& e) {
                diagnostics_.push_back(e.diagnostic);
                recover_to_statement_boundary();
            }
        }
        ParseResult result;
        result.diagnostics = std::move(diagnostics_);
        result.graph = std::move(graph_); // partial graph survives recovery
        return result;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Graph graph_;
    std::vector<SyntaxDiagnostic> diagnostics_;
    std::set<std::string> reserved_labels_;
    int next_anon_ = 0;

    // Labels that appear as _:label anywhere in the byte stream are reserved
    // so generated labels for [] and () can never collide with them.
    void reserve_doc_labels() {
        for (std::size_t i = 0; i + 1 < src_.size(); ++i) {
            if (src_[i] == '_' && src_[i + 1] == ':') {
                std::size_t j = i + 2;
                std::string label;
                while (j < src_.size()) {
                    unsigned char c = static_cast<unsigned char>(src_[j]);
                    if (std::isalnum(c) || c == '_' || c == '-' || c == '.' || c >= 0x80) {
                        label += static_cast<char>(c);
                        ++j;
                    } else {
                        break;
                    }
                }
                if (!label.empty()) reserved_labels_.insert(label);
                i = j - 1;
            }
        }
    }

    BlankNode fresh_blank() {
        for (;;) {
            std::string label = "b" + std::to_string(next_anon_++);
            if (!reserved_labels_.count(label)) return BlankNode{label};
        }
    }

    // --- cursor --------------------------------------------------------

    bool at_end() const { return pos_ >= src_.size(); }

    char32_t peek(std::size_t* len = nullptr) const {
        auto [cp, n] = decode_utf8(src_, pos_);
        if (len) *len = n;
        return cp;
    }

    char32_t peek_at(std::size_t byte_offset) const {
        return decode_utf8(src_, pos_ + byte_offset).cp;
    }

    char32_t advance() {
        std::size_t n = 0;
        char32_t cp = peek(&n);
        pos_ += n;
        if (cp == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return cp;
    }

    bool eat(char32_t expected) {
        if (!at_end() && peek() == expected) {
            advance();
            return true;
        }
        return false;
    }

    void skip_ws_and_comments() {
        while (!at_end()) {
            char32_t c = peek();
            if (is_ws(c)) {
                advance();
            } else if (c == '#') {
                while (!at_end() && peek() != '\n') advance();
            } else {
                break;
            }
        }
    }

    [[noreturn]] void fail(DiagnosticKind kind, std::string message, int line = -1,
                           int col = -1) const {
        SyntaxDiagnostic d;
        d.line = line < 0 ? line_ : line;
        d.column = col < 0 ? col_ : col;
        d.kind = kind;
        d.message = std::move(message);
        throw ParseError{d};
    }

    // Skips to the next '.' outside strings/IRIs at bracket depth <= 0,
    // consuming it, so the next statement can be attempted.
    void recover_to_statement_boundary() {
        int depth = 0;
        while (!at_end()) {
            char32_t c = peek();
            if (c == '#') {
                while (!at_end() && peek() != '\n') advance();
                continue;
            }
            if (c == '"' || c == '\'') {
                skip_string_loose(c);
                continue;
            }
            if (c == '<') {
                advance();
                while (!at_end() && peek() != '>' && peek() != '\n') advance();
                eat('>');
                continue;
            }
            if (c == '[' || c == '(') {
                ++depth;
                advance();
                continue;
            }
            if (c == ']' || c == ')') {
                depth = std::max(0, depth - 1);
                advance();
                continue;
            }
            if (c == '.' && depth == 0) {
                advance();
                return;
            }
            advance();
        }
    }

    void skip_string_loose(char32_t quote) {
        advance(); // opening quote
        bool long_form = false;
        if (peek() == quote) {
            advance();
            if (peek() == quote) {
                advance();
                long_form = true;
            } else {
                return; // empty short string
            }
        }
        int run = 0;
        while (!at_end()) {
            char32_t c = peek();
            if (c == '\\') {
                advance();
                if (!at_end()) advance();
                run = 0;
                continue;
            }
            if (!long_form && c == '\n') return; // broken short string, stop here
            advance();
            if (c == quote) {
                if (!long_form) return;
                if (++run == 3) return;
            } else {
                run = 0;
            }
        }
    }

    // --- statements ----------------------------------------------------

    void parse_statement() {
        int l = line_, c = col_;
        if (peek() == '@') {
            parse_at_directive();
            return;
        }
        if (is_keyword_ahead("PREFIX")) {
            skip_keyword(6);
            parse_prefix_body(/*sparql_form=*/true, l, c);
            return;
        }
        if (is_keyword_ahead("BASE")) {
            skip_keyword(4);
            parse_base_body(/*sparql_form=*/true, l, c);
            return;
        }
        parse_triples();
        int el = line_, ec = col_; // just past the last token of the statement
        skip_ws_and_comments();
        if (!eat('.')) {
            fail(DiagnosticKind::UnterminatedStatement, "expected '.' at end of statement", el,
                 ec);
        }
        (void)l;
        (void)c;
    }

    bool is_keyword_ahead(std::string_view kw) const {
        if (pos_ + kw.size() > src_.size()) return false;
        for (std::size_t i = 0; i < kw.size(); ++i) {
            if (std::toupper(static_cast<unsigned char>(src_[pos_ + i])) != kw[i]) return false;
        }
        // must not be a longer bare word (e.g. a prefixed name "prefixed:x")
        if (pos_ + kw.size() < src_.size()) {
            char32_t next = peek_at(kw.size());
            if (is_pn_chars(next) || next == ':') return false;
        }
        return true;
    }

    void skip_keyword(std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) advance();
    }

    void parse_at_directive() {
        int l = line_, c = col_;
        advance(); // '@'
        std::string word;
        while (!at_end() && is_pn_chars_base(peek())) word += static_cast<char>(advance());
        if (word == "prefix") {
            parse_prefix_body(/*sparql_form=*/false, l, c);
        } else if (word == "base") {
            parse_base_body(/*sparql_form=*/false, l, c);
        } else {
            fail(DiagnosticKind::BadDirective, "unknown directive '@" + word + "'", l, c);
        }
    }

    void parse_prefix_body(bool sparql_form, int l, int c) {
        skip_ws_and_comments();
        std::string label = parse_prefix_label(l, c);
        skip_ws_and_comments();
        if (peek() != '<') {
            fail(DiagnosticKind::BadDirective, "expected namespace IRI in prefix directive", l, c);
        }
        Iri ns = parse_iriref();
        graph_.set_prefix(label, ns);
        prefix_map_[label] = ns.value;
        if (!sparql_form) {
            skip_ws_and_comments();
            if (!eat('.')) {
                fail(DiagnosticKind::BadDirective, "expected '.' after @prefix directive", l, c);
            }
        }
    }

    void parse_base_body(bool sparql_form, int l, int c) {
        skip_ws_and_comments();
        if (peek() != '<') {
            fail(DiagnosticKind::BadDirective, "expected IRI in base directive", l, c);
        }
        std::string raw = parse_iriref_raw();
        if (!has_scheme(raw)) {
            if (!base_) {
                fail(DiagnosticKind::BadIri, "base IRI must be absolute: <" + raw + ">", l, c);
            }
            raw = resolve_reference(*base_, raw);
        }
        base_ = raw;
        graph_.set_base(Iri{raw});
        if (!sparql_form) {
            skip_ws_and_comments();
            if (!eat('.')) {
                fail(DiagnosticKind::BadDirective, "expected '.' after @base directive", l, c);
            }
        }
    }

    std::string parse_prefix_label(int l, int c) {
        std::string label;
        if (peek() == ':') {
            advance();
            return label;
        }
        if (!is_pn_chars_base(peek())) {
            fail(DiagnosticKind::BadDirective, "expected prefix label in directive", l, c);
        }
        label += utf8_of(advance());
        while (!at_end() && (is_pn_chars(peek()) || peek() == '.')) {
            label += utf8_of(advance());
        }
        if (!label.empty() && label.back() == '.') {
            fail(DiagnosticKind::BadDirective, "prefix label may not end with '.'", l, c);
        }
        if (!eat(':')) {
            fail(DiagnosticKind::BadDirective, "expected ':' after prefix label", l, c);
        }
        return label;
    }

    static std::string utf8_of(char32_t cp) {
        std::string s;
        append_utf8(s, cp);
        return s;
    }

    // triples ::= subject predicateObjectList | blankNodePropertyList predicateObjectList?
    void parse_triples() {
        skip_ws_and_comments();
        if (peek() == '[') {
            std::size_t save = pos_;
            int sl = line_, sc = col_;
            advance();
            skip_ws_and_comments();
            if (eat(']')) {
                // ANON subject; property list is required
                SubjectTerm s{fresh_blank()};
                parse_predicate_object_list(s);
                return;
            }
            pos_ = save;
            line_ = sl;
            col_ = sc;
            SubjectTerm s{parse_blank_node_property_list()};
            skip_ws_and_comments();
            if (peek() != '.' && !at_end()) {
                parse_predicate_object_list(s);
            }
            return;
        }
        SubjectTerm s = parse_subject();
        parse_predicate_object_list(s);
    }

    SubjectTerm parse_subject() {
        skip_ws_and_comments();
        char32_t c = peek();
        int l = line_, cc = col_;
        if (c == '<') return SubjectTerm{resolve_iri(parse_iriref_raw(), l, cc)};
        if (c == '_') return SubjectTerm{parse_blank_node_label()};
        if (c == '(') {
            Term t = parse_collection(); // always rdf:nil or a blank list cell
            return *to_subject(t);
        }
        if (c == '"' || c == '\'' || is_digit(c) || c == '+' || c == '-') {
            fail(DiagnosticKind::UnexpectedChar, "literal is not allowed in subject position", l,
                 cc);
        }
        if (is_pn_chars_base(c) || c == ':') {
            Term t = parse_prefixed_name_or_keyword(/*allow_boolean=*/false);
            if (auto s = to_subject(t)) return *s;
            fail(DiagnosticKind::UnexpectedChar, "literal is not allowed in subject position", l,
                 cc);
        }
        if (at_end()) {
            fail(DiagnosticKind::UnterminatedStatement, "unexpected end of input in subject", l,
                 cc);
        }
        fail(DiagnosticKind::UnexpectedChar,
             "unexpected character '" + utf8_of(c) + "' in subject position", l, cc);
    }

    void parse_predicate_object_list(const SubjectTerm& subject) {
        for (;;) {
            skip_ws_and_comments();
            Iri predicate = parse_verb();
            parse_object_list(subject, predicate);
            skip_ws_and_comments();
            if (!eat(';')) break;
            skip_ws_and_comments();
            while (eat(';')) skip_ws_and_comments();
            char32_t c = peek();
            if (c == '.' || c == ']' || at_end()) break; // dangling ';'
        }
    }

    Iri parse_verb() {
        skip_ws_and_comments();
        int l = line_, c = col_;
        char32_t ch = peek();
        if (ch == '<') return resolve_iri(parse_iriref_raw(), l, c);
        if (ch == 'a') {
            char32_t next = peek_at(1);
            if (!is_pn_chars(next) && next != ':' && next != '.') {
                advance();
                return Iri{std::string(vocab::rdf_type)};
            }
        }
        if (is_pn_chars_base(ch) || ch == ':') {
            Term t = parse_prefixed_name_or_keyword(/*allow_boolean=*/false);
            if (const auto* iri = std::get_if<Iri>(&t)) return *iri;
            fail(DiagnosticKind::UnexpectedChar, "predicate must be an IRI", l, c);
        }
        if (ch == '_') {
            fail(DiagnosticKind::UnexpectedChar, "blank node is not allowed as predicate", l, c);
        }
        if (at_end()) {
            fail(DiagnosticKind::UnterminatedStatement, "unexpected end of input in predicate", l,
                 c);
        }
        fail(DiagnosticKind::UnexpectedChar,
             "unexpected character '" + utf8_of(ch) + "' in predicate position", l, c);
    }

    void parse_object_list(const SubjectTerm& subject, const Iri& predicate) {
        for (;;) {
            Term o = parse_object();
            graph_.add(subject, predicate, o);
            skip_ws_and_comments();
            if (!eat(',')) break;
        }
    }

    Term parse_object() {
        skip_ws_and_comments();
        int l = line_, c = col_;
        char32_t ch = peek();
        if (ch == '<') return resolve_iri(parse_iriref_raw(), l, c);
        if (ch == '_') return parse_blank_node_label();
        if (ch == '(') return parse_collection();
        if (ch == '[') {
            std::size_t save = pos_;
            int sl = line_, sc = col_;
            advance();
            skip_ws_and_comments();
            if (eat(']')) return fresh_blank();
            pos_ = save;
            line_ = sl;
            col_ = sc;
            return parse_blank_node_property_list();
        }
        if (ch == '"' || ch == '\'') return parse_rdf_literal();
        if (is_digit(ch) || ch == '+' || ch == '-' || (ch == '.' && is_digit(peek_at(1)))) {
            return parse_numeric_literal();
        }
        if (is_pn_chars_base(ch) || ch == ':') {
            return parse_prefixed_name_or_keyword(/*allow_boolean=*/true);
        }
        if (at_end()) {
            fail(DiagnosticKind::UnterminatedStatement, "unexpected end of input in object", l, c);
        }
        fail(DiagnosticKind::UnexpectedChar,
             "unexpected character '" + utf8_of(ch) + "' in object position", l, c);
    }

    BlankNode parse_blank_node_property_list() {
        int l = line_, c = col_;
        advance(); // '['
        BlankNode node = fresh_blank();
        skip_ws_and_comments();
        if (at_end()) {
            fail(DiagnosticKind::UnterminatedStatement, "unterminated blank node property list", l,
                 c);
        }
        parse_predicate_object_list(SubjectTerm{node});
        skip_ws_and_comments();
        if (!eat(']')) {
            fail(DiagnosticKind::UnterminatedStatement, "unterminated blank node property list", l,
                 c);
        }
        return node;
    }

    // collection ::= '(' object* ')'; expands to an rdf:first/rdf:rest chain.
    Term parse_collection() {
        int l = line_, c = col_;
        advance(); // '('
        const Iri first{std::string(vocab::rdf_first)};
        const Iri rest{std::string(vocab::rdf_rest)};
        const Term nil{Iri{std::string(vocab::rdf_nil)}};

        std::vector<Term> items;
        for (;;) {
            skip_ws_and_comments();
            if (at_end()) {
                fail(DiagnosticKind::UnterminatedStatement, "unterminated collection", l, c);
            }
            if (eat(')')) break;
            items.push_back(parse_object());
        }
        if (items.empty()) return nil;
        std::vector<BlankNode> cells;
        cells.reserve(items.size());
        for (std::size_t i = 0; i < items.size(); ++i) cells.push_back(fresh_blank());
        for (std::size_t i = 0; i < items.size(); ++i) {
            graph_.add(SubjectTerm{cells[i]}, first, items[i]);
            Term next = (i + 1 < items.size()) ? Term{cells[i + 1]} : nil;
            graph_.add(SubjectTerm{cells[i]}, rest, next);
        }
        return cells.front();
    }

    BlankNode parse_blank_node_label() {
        int l = line_, c = col_;
        advance(); // '_'
        if (!eat(':')) {
            fail(DiagnosticKind::UnexpectedChar, "expected ':' after '_' in blank node label", l,
                 c);
        }
        std::string label;
        char32_t ch = peek();
        if (!(is_pn_chars_u(ch) || is_digit(ch))) {
            fail(DiagnosticKind::UnexpectedChar, "invalid first character in blank node label", l,
                 c);
        }
        label += utf8_of(advance());
        while (!at_end() && (is_pn_chars(peek()) || peek() == '.')) {
            label += utf8_of(advance());
        }
        // trailing dots terminate the statement instead
        std::size_t trailing = 0;
        while (trailing < label.size() && label[label.size() - 1 - trailing] == '.') ++trailing;
        if (trailing > 0) {
            rewind_bytes(trailing);
            label.erase(label.size() - trailing);
        }
        if (label.empty()) {
            fail(DiagnosticKind::UnexpectedChar, "empty blank node label", l, c);
        }
        return BlankNode{label};
    }

    void rewind_bytes(std::size_t n) {
        // only ever used to give back ASCII '.' characters just consumed
        pos_ -= n;
        col_ -= static_cast<int>(n);
    }

    // --- IRIs ------------------------------------------------------------

    // Returns the raw (unresolved) IRI text of an IRIREF token.
    std::string parse_iriref_raw() {
        int l = line_, c = col_;
        advance(); // '<'
        std::string out;
        for (;;) {
            if (at_end()) {
                fail(DiagnosticKind::BadIri, "unterminated IRI", l, c);
            }
            char32_t ch = peek();
            if (ch == '>') {
                advance();
                break;
            }
            if (ch <= 0x20) {
                fail(DiagnosticKind::BadIri, "whitespace or control character inside IRI", l, c);
            }
            if (ch == '<' || ch == '"' || ch == '{' || ch == '}' || ch == '|' || ch == '^' ||
                ch == '`') {
                fail(DiagnosticKind::BadIri,
                     "character '" + utf8_of(ch) + "' is not allowed inside an IRI", l, c);
            }
            if (ch == '\\') {
                advance();
                char32_t esc = at_end() ? 0 : advance();
                std::size_t n = (esc == 'u') ? 4 : (esc == 'U') ? 8 : 0;
                if (n == 0) {
                    fail(DiagnosticKind::BadIri, "invalid escape in IRI (only \\u/\\U allowed)", l,
                         c);
                }
                char32_t cp = read_hex_escape(n, DiagnosticKind::BadIri, l, c);
                if (cp <= 0x20) {
                    fail(DiagnosticKind::BadIri, "escaped control/space character inside IRI", l,
                         c);
                }
                append_utf8(out, cp);
                continue;
            }
            append_utf8(out, advance());
        }
        return out;
    }

    char32_t read_hex_escape(std::size_t digits, DiagnosticKind kind, int l, int c) {
        char32_t cp = 0;
        for (std::size_t i = 0; i < digits; ++i) {
            if (at_end() || !is_hex(peek())) {
                fail(kind, "invalid \\u escape: expected " + std::to_string(digits) +
                               " hex digits",
                     l, c);
            }
            char32_t h = advance();
            cp <<= 4;
            if (h >= '0' && h <= '9')
                cp |= h - '0';
            else if (h >= 'a' && h <= 'f')
                cp |= h - 'a' + 10;
            else
                cp |= h - 'A' + 10;
        }
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            fail(kind, "escape denotes an invalid code point", l, c);
        }
        return cp;
    }

    Iri parse_iriref() {
        int l = line_, c = col_;
        return resolve_iri(parse_iriref_raw(), l, c);
    }

    Iri resolve_iri(const std::string& raw, int l, int c) {
        if (has_scheme(raw)) return Iri{raw};
        if (!base_) {
            fail(DiagnosticKind::BadIri,
                 "relative IRI <" + raw + "> with no base directive in scope", l, c);
        }
        std::string resolved = resolve_reference(*base_, raw);
        if (!has_scheme(resolved)) {
            fail(DiagnosticKind::BadIri, "IRI <" + raw + "> did not resolve to an absolute IRI", l,
                 c);
        }
        return Iri{resolved};
    }

    // --- prefixed names and keywords --------------------------------------

    Term parse_prefixed_name_or_keyword(bool allow_boolean) {
        int l = line_, c = col_;
        std::string prefix;
        if (peek() != ':') {
            prefix += utf8_of(advance());
            while (!at_end() && (is_pn_chars(peek()) || peek() == '.')) {
                if (peek() == '.') {
                    // '.' is only part of the prefix if more name chars follow
                    char32_t after = peek_at(1);
                    if (!is_pn_chars(after) && after != '.') break;
                }
                prefix += utf8_of(advance());
            }
        }
        if (peek() != ':') {
            if (allow_boolean && (prefix == "true" || prefix == "false")) {
                return Literal{prefix, Iri{std::string(vocab::xsd_boolean)}};
            }
            fail(DiagnosticKind::UnexpectedChar,
                 "bare word '" + prefix + "' is not a valid term (missing ':'?)", l, c);
        }
        advance(); // ':'
        std::string local = parse_pn_local(l, c);
        auto it = prefix_map_.find(prefix);
        if (it == prefix_map_.end()) {
            fail(DiagnosticKind::UndefinedPrefix, "undefined prefix '" + prefix + ":'", l, c);
        }
        return Iri{it->second + local};
    }

    std::string parse_pn_local(int l, int c) {
        std::string local;
        std::size_t pending_dots = 0;
        auto flush_dots = [&] {
            local.append(pending_dots, '.');
            pending_dots = 0;
        };
        bool first = true;
        for (;;) {
            if (at_end()) break;
            char32_t ch = peek();
            bool ok_first = is_pn_chars_u(ch) || ch == ':' || is_digit(ch) || ch == '%' ||
                            ch == '\\';
            bool ok_rest = is_pn_chars(ch) || ch == ':' || ch == '%' || ch == '\\' || ch == '.';
            if (first ? !ok_first : !ok_rest) break;
            if (ch == '.') {
                ++pending_dots;
                advance();
                continue;
            }
            flush_dots();
            if (ch == '%') {
                advance();
                std::string pct = "%";
                for (int i = 0; i < 2; ++i) {
                    if (at_end() || !is_hex(peek())) {
                        fail(DiagnosticKind::BadIri, "invalid %-escape in prefixed name", l, c);
                    }
                    pct += static_cast<char>(advance());
                }
                local += pct; // percent triples stay verbatim in the IRI
            } else if (ch == '\\') {
                advance();
                if (at_end() || !is_local_esc(peek())) {
                    fail(DiagnosticKind::BadIri, "invalid local-name escape in prefixed name", l,
                         c);
                }
                local += static_cast<char>(advance());
            } else {
                local += utf8_of(advance());
            }
            first = false;
        }
        // trailing unescaped dots belong to the statement, not the name
        if (pending_dots > 0) rewind_bytes(pending_dots);
        return local;
    }

    // --- literals ----------------------------------------------------------

    Term parse_rdf_literal() {
        int l = line_, c = col_;
        std::string lex = parse_string_body(l, c);
        if (peek() == '@') {
            advance();
            std::string tag;
            if (at_end() || !std::isalpha(static_cast<unsigned char>(peek()))) {
                fail(DiagnosticKind::BadLiteral, "invalid language tag", l, c);
            }
            while (!at_end() && std::isalpha(static_cast<unsigned char>(peek()))) {
                tag += static_cast<char>(advance());
            }
            while (peek() == '-') {
                advance();
                std::string part;
                while (!at_end() && std::isalnum(static_cast<unsigned char>(peek()))) {
                    part += static_cast<char>(advance());
                }
                if (part.empty()) {
                    fail(DiagnosticKind::BadLiteral, "invalid language tag", l, c);
                }
                tag += "-" + part;
            }
            return Literal{lex, Iri{std::string(vocab::rdf_langString)}, tag};
        }
        if (peek() == '^') {
            advance();
            if (!eat('^')) {
                fail(DiagnosticKind::BadLiteral, "expected '^^' before datatype IRI", l, c);
            }
            skip_ws_and_comments();
            char32_t ch = peek();
            Iri dt;
            if (ch == '<') {
                dt = parse_iriref();
            } else if (is_pn_chars_base(ch) || ch == ':') {
                Term t = parse_prefixed_name_or_keyword(/*allow_boolean=*/false);
                if (const auto* iri = std::get_if<Iri>(&t)) {
                    dt = *iri;
                } else {
                    fail(DiagnosticKind::BadLiteral, "datatype must be an IRI", l, c);
                }
            } else {
                fail(DiagnosticKind::BadLiteral, "expected datatype IRI after '^^'", l, c);
            }
            return Literal{lex, dt};
        }
        return Literal{lex, Iri{std::string(vocab::xsd_string)}};
    }

    std::string parse_string_body(int l, int c) {
        char32_t quote = advance(); // '"' or '\''
        bool long_form = false;
        if (peek() == quote) {
            advance();
            if (peek() == quote) {
                advance();
                long_form = true;
            } else {
                return ""; // empty short string
            }
        }
        std::string out;
        for (;;) {
            if (at_end()) {
                fail(DiagnosticKind::BadLiteral, "unterminated string literal", l, c);
            }
            char32_t ch = peek();
            if (!long_form && (ch == '\n' || ch == '\r')) {
                fail(DiagnosticKind::BadLiteral, "newline inside single-line string literal", l,
                     c);
            }
            if (ch == '\\') {
                advance();
                if (at_end()) {
                    fail(DiagnosticKind::BadLiteral, "unterminated escape in string literal", l,
                         c);
                }
                char32_t esc = advance();
                switch (esc) {
                case 't': out += '\t'; break;
                case 'b': out += '\b'; break;
                case 'n': out += '\n'; break;
                case 'r': out += '\r'; break;
                case 'f': out += '\f'; break;
                case '"': out += '"'; break;
                case '\'': out += '\''; break;
                case '\\': out += '\\'; break;
                case 'u': append_utf8(out, read_hex_escape(4, DiagnosticKind::BadLiteral, l, c));
                    break;
                case 'U': append_utf8(out, read_hex_escape(8, DiagnosticKind::BadLiteral, l, c));
                    break;
                default:
                    fail(DiagnosticKind::BadLiteral,
                         "invalid escape '\\" + utf8_of(esc) + "' in string literal", l, c);
                }
                continue;
            }
            if (ch == quote) {
                if (!long_form) {
                    advance();
                    return out;
                }
                // maximal quote run; a run of n >= 3 closes the string with
                // the final three quotes, the rest belong to the content
                std::size_t run = 0;
                while (pos_ + run < src_.size() &&
                       src_[pos_ + run] == static_cast<char>(quote)) {
                    ++run;
                }
                if (run >= 3) {
                    for (std::size_t i = 0; i + 3 < run; ++i) append_utf8(out, quote);
                    for (std::size_t i = 0; i < run; ++i) advance();
                    return out;
                }
                for (std::size_t i = 0; i < run; ++i) append_utf8(out, advance());
                continue;
            }
            append_utf8(out, advance());
        }
    }

    Term parse_numeric_literal() {
        int l = line_, c = col_;
        std::string lex;
        if (peek() == '+' || peek() == '-') lex += static_cast<char>(advance());
        std::size_t int_digits = 0;
        while (!at_end() && is_digit(peek())) {
            lex += static_cast<char>(advance());
            ++int_digits;
        }
        bool has_dot = false;
        std::size_t frac_digits = 0;
        if (peek() == '.') {
            char32_t after = peek_at(1);
            bool dot_is_numeric = is_digit(after) || ((after == 'e' || after == 'E') &&
                                                      int_digits > 0);
            if (dot_is_numeric) {
                has_dot = true;
                lex += static_cast<char>(advance());
                while (!at_end() && is_digit(peek())) {
                    lex += static_cast<char>(advance());
                    ++frac_digits;
                }
            }
        }
        bool has_exp = false;
        if (peek() == 'e' || peek() == 'E') {
            std::size_t off = 1;
            char32_t s1 = peek_at(1);
            if (s1 == '+' || s1 == '-') ++off;
            if (is_digit(peek_at(off))) {
                has_exp = true;
                lex += static_cast<char>(advance()); // e/E
                if (peek() == '+' || peek() == '-') lex += static_cast<char>(advance());
                while (!at_end() && is_digit(peek())) lex += static_cast<char>(advance());
            }
        }
        if (int_digits == 0 && frac_digits == 0) {
            fail(DiagnosticKind::BadLiteral, "malformed numeric literal", l, c);
        }
        std::string_view dt;
        if (has_exp) {
            dt = vocab::xsd_double;
        } else if (has_dot) {
            if (frac_digits == 0) {
                fail(DiagnosticKind::BadLiteral, "malformed decimal literal", l, c);
            }
            dt = vocab::xsd_decimal;
        } else {
            dt = vocab::xsd_integer;
        }
        return Literal{lex, Iri{std::string(dt)}};
    }

    std::map<std::string, std::string> prefix_map_;
    std::optional<std::string> base_;
};

} // namespace

std::string_view to_string(DiagnosticKind k) {
    switch (k) {
    case DiagnosticKind::UnexpectedChar: return "UnexpectedChar";
    case DiagnosticKind::UndefinedPrefix: return "UndefinedPrefix";
    case DiagnosticKind::BadIri: return "BadIri";
    case DiagnosticKind::BadLiteral: return "BadLiteral";
    case DiagnosticKind::UnterminatedStatement: return "UnterminatedStatement";
    case DiagnosticKind::BadDirective: return "BadDirective";
    }
    return "UnexpectedChar";
}

std::string render_diagnostics(const std::vector<SyntaxDiagnostic>& diags) {
    std::ostringstream out;
    for (const auto& d : diags) {
        out << d.line << ":" << d.column << ": " << to_string(d.kind) << ": " << d.message
            << "\n";
    }
    return out.str();
}

ParseResult parse_turtle(std::string_view source) {
    Parser p(source);
    return p.run();
}

} // namespace llm4cap::rdf
