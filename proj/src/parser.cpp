#include "ctfid/parser.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace ctfid {

namespace {

bool token_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

struct Cursor {
    const std::string& text;
    std::size_t pos = 0;
    int line = 1;
    int col = 1;

    [[noreturn]] void fail_at(int l, int c, const std::string& msg) const {
        std::ostringstream os;
        os << "line " << l << ", column " << c << ": " << msg;
        throw input_error(os.str());
    }
    [[noreturn]] void fail(const std::string& msg) const { fail_at(line, col, msg); }

    bool eof() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }

    void advance() {
        if (text[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) advance();
    }

    bool consume(char c) {
        skip_ws();
        if (eof() || peek() != c) return false;
        advance();
        return true;
    }

    void expect(char c, const std::string& what) {
        skip_ws();
        if (eof() || peek() != c) fail("expected '" + std::string(1, c) + "' " + what);
        advance();
    }

    std::string token(const std::string& what) {
        skip_ws();
        int l = line, c = col;
        std::string out;
        while (!eof() && token_char(peek())) {
            out.push_back(peek());
            advance();
        }
        if (out.empty()) fail_at(l, c, "expected " + what);
        return out;
    }

    bool next_is(char c) {
        skip_ws();
        return !eof() && peek() == c;
    }
};

NestedTerm parse_subscripted(Cursor& cur, const CausalDiagram& g, const std::string& base);

NestedValue parse_ivalue(Cursor& cur, const CausalDiagram& g, const std::string& target) {
    int l = cur.line, c = cur.col;
    std::string tok = cur.token("a value or counterfactual term");
    if (cur.next_is('[')) {
        if (!g.has_variable(tok)) cur.fail_at(l, c, "unknown variable " + tok);
        return std::make_shared<NestedTerm>(parse_subscripted(cur, g, tok));
    }
    const auto& domain = g.domain(target);
    if (std::find(domain.begin(), domain.end(), tok) != domain.end())
        return ValueRef::constant(tok);
    if (g.has_variable(tok)) return std::make_shared<NestedTerm>(NestedTerm{tok, {}});
    cur.fail_at(l, c, "value " + tok + " is not in the domain of " + target);
}

NestedTerm parse_subscripted(Cursor& cur, const CausalDiagram& g, const std::string& base) {
    NestedTerm term{base, {}};
    if (!cur.consume('[')) return term;
    do {
        int l = cur.line, c = cur.col;
        cur.skip_ws();
        l = cur.line;
        c = cur.col;
        std::string name = cur.token("an intervened variable name");
        if (!g.has_variable(name)) cur.fail_at(l, c, "unknown variable " + name);
        cur.expect('=', "after " + name);
        NestedValue value = parse_ivalue(cur, g, name);
        if (!term.subscript.emplace(name, std::move(value)).second)
            cur.fail_at(l, c, "duplicate intervention on " + name);
    } while (cur.consume(','));
    cur.expect(']', "to close the intervention list");
    return term;
}

NestedEvent parse_events(Cursor& cur, const CausalDiagram& g) {
    NestedEvent events;
    do {
        cur.skip_ws();
        int l = cur.line, c = cur.col;
        std::string name = cur.token("a variable name");
        if (!g.has_variable(name)) cur.fail_at(l, c, "unknown variable " + name);
        NestedTerm term = parse_subscripted(cur, g, name);
        cur.expect('=', "after the event variable");
        cur.skip_ws();
        l = cur.line;
        c = cur.col;
        std::string value = cur.token("a value");
        const auto& domain = g.domain(name);
        if (std::find(domain.begin(), domain.end(), value) == domain.end())
            cur.fail_at(l, c, "value " + value + " is not in the domain of " + name);
        events.push_back({std::move(term), ValueRef::constant(value)});
    } while (cur.consume(','));
    return events;
}

}  // namespace

Query parse_query(const std::string& text, const CausalDiagram& g) {
    Cursor cur{text};
    cur.skip_ws();
    int l = cur.line, c = cur.col;
    std::string head = cur.token("P");
    if (head != "P") cur.fail_at(l, c, "expected P");
    cur.expect('(', "after P");
    Query q;
    q.outcomes = parse_events(cur, g);
    if (cur.consume('|')) q.conditions = parse_events(cur, g);
    cur.expect(')', "to close the query");
    cur.skip_ws();
    if (!cur.eof()) cur.fail("unexpected input after the query");
    return q;
}

}  // namespace ctfid
