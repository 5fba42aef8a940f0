#include "absynth/parse.hpp"

#include <cctype>
#include <charconv>
#include <stdexcept>

#include "absynth/transform.hpp"

namespace absynth {

std::string to_string(const Diagnostic& d) {
    return std::to_string(d.line) + ":" + std::to_string(d.column) + ": " + d.message;
}

Signature Signature::of(const BAT& bat) {
    Signature sig;
    for (const auto& f : bat.fluents) {
        if (f.kind == FluentKind::Function)
            sig.functions.insert(f.name);
        else
            sig.predicates[f.name] = f.arity();
    }
    sig.objects.insert(bat.objects.begin(), bat.objects.end());
    for (const auto& a : bat.actions) sig.actions[a.name] = a.params.size();
    sig.strict = true;
    return sig;
}

const BAT* Document::low() const {
    for (const auto& b : bats)
        if (b.level == Level::Low) return &b;
    return nullptr;
}

const BAT* Document::high() const {
    for (const auto& b : bats)
        if (b.level == Level::High) return &b;
    return nullptr;
}

const RefinementMapping* Document::mapping() const { return mappings.empty() ? nullptr : &mappings.front(); }

namespace {

// ---------------------------------------------------------------- lexer

enum class Tok { Ident, Int, Sym, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int line = 1;
    int col = 1;
    bool glued = false;  // no whitespace before this token
};

struct ParseError {
    int line;
    int col;
    std::string message;
    std::size_t pos;
};

std::vector<Token> lex(std::string_view src) {
    static const char* const multi[] = {"<->", "->", "&&", "||", "!=", "<=", ">="};
    std::vector<Token> out;
    int line = 1;
    int col = 1;
    std::size_t i = 0;
    bool space = true;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            space = true;
            continue;
        }
        if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
            while (i < src.size() && src[i] != '\n') advance(1);
            space = true;
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        t.glued = !space;
        space = false;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            while (j < src.size() && src[j] == '\'') ++j;
            t.kind = Tok::Ident;
            t.text = std::string(src.substr(i, j - i));
            advance(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            t.kind = Tok::Int;
            t.text = std::string(src.substr(i, j - i));
            advance(j - i);
        } else {
            std::string sym;
            for (const char* m : multi) {
                if (src.substr(i).starts_with(m)) {
                    sym = m;
                    break;
                }
            }
            if (sym.empty()) {
                if (std::string_view("!=<>()[]{},.;:?|*+-").find(c) == std::string_view::npos)
                    throw ParseError{line, col, std::string("unexpected character '") + c + "'", out.size()};
                sym = std::string(1, c);
            }
            t.kind = Tok::Sym;
            t.text = sym;
            advance(sym.size());
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.kind = Tok::End;
    end.line = line;
    end.col = col;
    out.push_back(end);
    return out;
}

bool is_statement_keyword(const std::string& s) {
    return s == "objects" || s == "fluent" || s == "action" || s == "ssa" || s == "init" ||
           s == "constraint" || s == "witness" || s == "assume" || s == "add" || s == "del" || s == "set";
}

bool is_reserved(const std::string& s) {
    return s == "true" || s == "false" || s == "exists" || s == "forall" || s == "count" || s == "tc" ||
           s == "pi" || s == "nil" || s == "when" || s == "poss";
}

bool capitalised(const std::string& s) { return !s.empty() && std::isupper(static_cast<unsigned char>(s[0])); }

// ---------------------------------------------------------------- expression parser

enum class Expect { Any, Object, Integer };

struct PTerm {
    Term term;
    bool definite;
};

class Parser {
public:
    Parser(std::vector<Token> toks, const Signature* sig) : toks_(std::move(toks)), sig_(sig) {}

    // Token access.
    const Token& peek(std::size_t ahead = 0) const {
        std::size_t k = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[k];
    }
    bool at_end() const { return peek().kind == Tok::End; }
    bool is_sym(const char* s, std::size_t ahead = 0) const {
        return peek(ahead).kind == Tok::Sym && peek(ahead).text == s;
    }
    bool is_word(const char* s, std::size_t ahead = 0) const {
        return peek(ahead).kind == Tok::Ident && peek(ahead).text == s;
    }
    [[noreturn]] void fail(const std::string& msg) const { fail_at(peek(), msg); }
    [[noreturn]] void fail_at(const Token& t, const std::string& msg) const {
        throw ParseError{t.line, t.col, msg, pos_};
    }
    Token take() {
        Token t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }
    void expect_sym(const char* s) {
        if (!is_sym(s)) fail(std::string("expected '") + s + "'" + found());
        take();
    }
    std::string found() const {
        if (at_end()) return " but found end of input";
        return " but found '" + peek().text + "'";
    }
    std::string expect_ident(const char* what) {
        if (peek().kind != Tok::Ident) fail(std::string("expected ") + what + found());
        return take().text;
    }
    std::int64_t expect_int() {
        bool neg = false;
        if (is_sym("-")) {
            take();
            neg = true;
        }
        if (peek().kind != Tok::Int) fail("expected an integer" + found());
        const Token t = take();
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc()) fail_at(t, "integer literal out of range");
        return neg ? -v : v;
    }

    std::size_t pos() const { return pos_; }
    void reset(std::size_t p) { pos_ = p; }
    void set_signature(const Signature* sig) { sig_ = sig; }

    // Scopes of bound variables.
    struct Bound {
        Parser& p;
        std::size_t mark;
        Bound(Parser& parser, const std::vector<Var>& vars) : p(parser), mark(parser.scope_.size()) {
            p.scope_.insert(p.scope_.end(), vars.begin(), vars.end());
        }
        ~Bound() { p.scope_.resize(mark); }
    };

    std::vector<std::string> ident_list(const char* what) {
        std::vector<std::string> out{expect_ident(what)};
        while (is_sym(",")) {
            take();
            out.push_back(expect_ident(what));
        }
        return out;
    }

    // -------------------------------------------------------- formulas

    Formula formula() { return iff(); }

    Formula iff() {
        Formula a = implies();
        while (is_sym("<->")) {
            take();
            Formula b = implies();
            a = Formula::iff(a, b);
        }
        return a;
    }

    Formula implies() {
        Formula a = disjunction();
        if (is_sym("->")) {
            take();
            Formula b = implies();
            return Formula::implies(a, b);
        }
        return a;
    }

    Formula disjunction() {
        std::vector<Formula> parts{conjunction()};
        while (is_sym("||")) {
            take();
            parts.push_back(conjunction());
        }
        return parts.size() == 1 ? parts.front() : Formula::disj(std::move(parts));
    }

    Formula conjunction() {
        std::vector<Formula> parts{unary()};
        while (is_sym("&&")) {
            take();
            parts.push_back(unary());
        }
        return parts.size() == 1 ? parts.front() : Formula::conj(std::move(parts));
    }

    Formula unary() {
        if (is_sym("!")) {
            take();
            return Formula::negate(unary());
        }
        if (is_word("exists") || is_word("forall")) {
            const bool ex = take().text == "exists";
            std::vector<Var> vars;
            for (const auto& n : ident_list("a variable")) vars.push_back(Var{n, Sort::Object});
            expect_sym(".");
            std::optional<Bound> bound;
            bound.emplace(*this, vars);
            Formula body = formula();
            bound.reset();
            return ex ? Formula::exists(vars, std::move(body)) : Formula::forall(vars, std::move(body));
        }
        return atom();
    }

    bool comparison_follows(std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        if (t.kind != Tok::Sym) return false;
        return t.text == "=" || t.text == "!=" || t.text == "<" || t.text == "<=" || t.text == ">" ||
               t.text == ">=" || t.text == "+" || t.text == "-";
    }

    Formula atom() {
        if (is_word("true")) {
            take();
            return Formula::top();
        }
        if (is_word("false")) {
            take();
            return Formula::bottom();
        }
        if (is_word("tc") && is_sym("[", 1)) return closure();
        if (is_sym("(")) {
            const std::size_t start = pos_;
            std::optional<ParseError> first;
            try {
                take();
                Formula f = formula();
                expect_sym(")");
                if (!comparison_follows()) return f;
            } catch (const ParseError& e) {
                first = e;
            }
            reset(start);
            try {
                return comparison();
            } catch (const ParseError& e) {
                if (first && first->pos > e.pos) throw *first;
                throw;
            }
        }
        if (peek().kind == Tok::Ident && !is_reserved(peek().text)) {
            const std::string& name = peek().text;
            if ((is_sym("+", 1) || is_sym("*", 1)) && peek(1).glued && is_sym("(", 2)) return closure_sugar();
            if (is_sym("(", 1)) return predicate();
            if (!comparison_follows(1) && !names_term(name)) return predicate();
        }
        return comparison();
    }

    bool names_term(const std::string& name) const {
        if (lookup_var(name)) return true;
        if (sig_ && (sig_->objects.contains(name) || sig_->functions.contains(name))) return true;
        return false;
    }

    void check_predicate(const Token& at, const std::string& name, std::size_t arity) const {
        if (!sig_) return;
        auto it = sig_->predicates.find(name);
        if (it == sig_->predicates.end()) {
            if (sig_->strict) fail_at(at, "undeclared predicate '" + name + "'");
            return;
        }
        if (it->second != arity)
            fail_at(at, "predicate '" + name + "' expects " + std::to_string(it->second) + " argument(s), got " +
                            std::to_string(arity));
    }

    Formula predicate() {
        const Token at = peek();
        const std::string name = take().text;
        std::vector<Term> args;
        if (is_sym("(")) {
            take();
            if (!is_sym(")")) args = object_terms();
            expect_sym(")");
        }
        check_predicate(at, name, args.size());
        return Formula::pred(name, std::move(args));
    }

    std::vector<Term> object_terms() {
        std::vector<Term> out{object_term()};
        while (is_sym(",")) {
            take();
            out.push_back(object_term());
        }
        return out;
    }

    Term object_term() {
        const Token at = peek();
        PTerm t = term_expr(Expect::Object);
        return coerce(t, Sort::Object, at);
    }

    Formula closure_sugar() {
        const Token at = peek();
        const std::string name = take().text;
        const bool plus = take().text == "+";
        expect_sym("(");
        std::vector<Term> args = object_terms();
        expect_sym(")");
        if (args.size() % 2 != 0) fail_at(at, "closure of '" + name + "' needs an even number of arguments");
        check_predicate(at, name, args.size());
        const auto half = static_cast<std::ptrdiff_t>(args.size() / 2);
        std::vector<Term> lhs(args.begin(), args.begin() + half);
        std::vector<Term> rhs(args.begin() + half, args.end());
        return plus ? Formula::plus(name, std::move(lhs), std::move(rhs))
                    : Formula::star(name, std::move(lhs), std::move(rhs));
    }

    Formula closure() {
        const Token at = take();
        expect_sym("[");
        std::vector<Var> vars;
        for (const auto& n : ident_list("a variable")) vars.push_back(Var{n, Sort::Object});
        expect_sym(":");
        if (vars.size() % 2 != 0) fail_at(at, "tc needs two variable tuples of equal arity");
        std::optional<Bound> bound;
        bound.emplace(*this, vars);
        Formula body = formula();
        bound.reset();
        expect_sym("]");
        expect_sym("(");
        std::vector<Term> args = object_terms();
        expect_sym(")");
        if (args.size() != vars.size()) fail_at(at, "tc arguments do not match the closure arity");
        const auto k = static_cast<std::ptrdiff_t>(vars.size() / 2);
        return Formula::tc(std::vector<Var>(vars.begin(), vars.begin() + k), std::vector<Var>(vars.begin() + k, vars.end()),
                           std::move(body), std::vector<Term>(args.begin(), args.begin() + k),
                           std::vector<Term>(args.begin() + k, args.end()));
    }

    Formula comparison() {
        const Token at = peek();
        PTerm lhs = term_expr(Expect::Any);
        if (peek().kind != Tok::Sym) fail("expected a comparison" + found());
        const Token op_tok = take();
        const std::string op = op_tok.text;
        if (op == "=" && is_sym("[") && peek().glued) {
            take();
            const std::int64_t c = expect_int();
            expect_sym("]");
            if (c < 1) fail_at(op_tok, "congruence modulus must be positive");
            Term a = coerce(lhs, Sort::Integer, at);
            const Token rat = peek();
            Term b = coerce(term_expr(Expect::Integer), Sort::Integer, rat);
            return Formula::cong(c, a, b);
        }
        if (op == "<" || op == "<=" || op == ">" || op == ">=") {
            Term a = coerce(lhs, Sort::Integer, at);
            const Token rat = peek();
            Term b = coerce(term_expr(Expect::Integer), Sort::Integer, rat);
            if (op == "<") return Formula::lt(a, b);
            if (op == ">") return Formula::lt(b, a);
            if (op == "<=") return Formula::negate(Formula::lt(b, a));
            return Formula::negate(Formula::lt(a, b));
        }
        if (op == "=" || op == "!=") {
            const Token rat = peek();
            Term a = lhs.term;
            Term b = a;
            if (lhs.definite) {
                b = coerce(term_expr(lhs.term.sort() == Sort::Integer ? Expect::Integer : Expect::Object),
                           lhs.term.sort(), rat);
            } else {
                PTerm r = term_expr(Expect::Any);
                const Sort s = r.definite ? r.term.sort() : Sort::Object;
                a = coerce(lhs, s, at);
                b = coerce(r, s, rat);
            }
            Formula eq = Formula::eq(a, b);
            return op == "=" ? eq : Formula::negate(eq);
        }
        fail_at(op_tok, "expected a comparison operator but found '" + op + "'");
    }

    // -------------------------------------------------------- terms

    std::optional<Sort> lookup_var(const std::string& name) const {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (it->name == name) return it->sort;
        if (sig_) {
            auto it = sig_->variables.find(name);
            if (it != sig_->variables.end()) return it->second;
        }
        return std::nullopt;
    }

    Term coerce(const PTerm& t, Sort want, const Token& at) const {
        if (t.term.sort() == want) return t.term;
        if (!t.definite) {
            const std::string& n = t.term.name();
            if (t.term.kind() == TermKind::Var) return Term::var(n, want);
            if (want == Sort::Integer) return Term::fluent(n);
            if (want == Sort::Object) return Term::obj(n);
        }
        fail_at(at, "sort mismatch: expected " + std::string(to_string(want)) + " term, got " +
                        std::string(to_string(t.term.sort())));
    }

    PTerm term_expr(Expect expect) {
        const Token at = peek();
        PTerm lhs = term_primary(expect);
        while (is_sym("+") || is_sym("-")) {
            const bool add = take().text == "+";
            Term a = coerce(lhs, Sort::Integer, at);
            const Token rat = peek();
            Term b = coerce(term_primary(Expect::Integer), Sort::Integer, rat);
            lhs = PTerm{add ? Term::add(a, b) : Term::sub(a, b), true};
        }
        return lhs;
    }

    PTerm term_primary(Expect expect) {
        const Token at = peek();
        if (peek().kind == Tok::Int || (is_sym("-") && peek(1).kind == Tok::Int)) {
            return PTerm{Term::int_const(expect_int()), true};
        }
        if (is_sym("(")) {
            take();
            PTerm t = term_expr(expect);
            expect_sym(")");
            return t;
        }
        if (is_word("count")) {
            take();
            std::vector<Var> vars;
            for (const auto& n : ident_list("a variable")) vars.push_back(Var{n, Sort::Object});
            expect_sym(".");
            std::optional<Bound> bound;
            bound.emplace(*this, vars);
            Formula body = formula();
            bound.reset();
            return PTerm{Term::count(std::move(vars), std::move(body)), true};
        }
        if (peek().kind != Tok::Ident || is_reserved(peek().text)) fail("expected a term" + found());
        const std::string name = take().text;
        if (auto s = lookup_var(name)) return PTerm{Term::var(name, *s), true};
        if (sig_) {
            if (sig_->objects.contains(name)) return PTerm{Term::obj(name), true};
            if (sig_->functions.contains(name)) return PTerm{Term::fluent(name), true};
            if (sig_->predicates.contains(name)) fail_at(at, "predicate '" + name + "' used as a term");
        }
        if (capitalised(name)) {
            if (sig_ && sig_->strict) fail_at(at, "undeclared symbol '" + name + "'");
            if (expect == Expect::Integer) return PTerm{Term::fluent(name), true};
            return PTerm{Term::obj(name), expect != Expect::Any};
        }
        return PTerm{Term::var(name, expect == Expect::Integer ? Sort::Integer : Sort::Object), expect != Expect::Any};
    }

    // -------------------------------------------------------- programs

    Program program() {
        Program a = sequence();
        if (is_sym("|")) {
            take();
            return Program::choice(a, program());
        }
        return a;
    }

    bool sequence_continues() const {
        if (!is_sym(";")) return false;
        const Token& next = peek(1);
        if (next.kind == Tok::End) return false;
        if (next.kind == Tok::Sym && next.text == "}") return false;
        if (next.kind == Tok::Ident && is_statement_keyword(next.text)) return false;
        return true;
    }

    Program sequence() {
        Program a = iterated();
        if (sequence_continues()) {
            take();
            return Program::seq(a, sequence());
        }
        return a;
    }

    Program iterated() {
        Program p = primitive();
        while (is_sym("*")) {
            take();
            p = Program::star(p);
        }
        return p;
    }

    Program primitive() {
        if (is_word("nil")) {
            take();
            return Program::nil();
        }
        if (is_word("pi")) {
            take();
            std::vector<Var> vars;
            for (const auto& n : ident_list("a variable")) vars.push_back(Var{n, Sort::Object});
            expect_sym(".");
            std::optional<Bound> bound;
            bound.emplace(*this, vars);
            Program body = program();
            bound.reset();
            return Program::pick(vars, std::move(body));
        }
        const std::size_t start = pos_;
        std::optional<ParseError> first;
        try {
            Formula f = unary();
            if (is_sym("?")) {
                take();
                return Program::test(std::move(f));
            }
        } catch (const ParseError& e) {
            first = e;
        }
        reset(start);
        if (is_sym("(")) {
            take();
            Program p = program();
            expect_sym(")");
            return p;
        }
        if (peek().kind != Tok::Ident || is_reserved(peek().text)) {
            if (first) throw *first;
            fail("expected a program" + found());
        }
        const Token at = peek();
        const std::string name = take().text;
        std::vector<Term> args;
        if (is_sym("(")) {
            take();
            if (!is_sym(")")) args = object_terms();
            expect_sym(")");
        }
        if (sig_) {
            auto it = sig_->actions.find(name);
            if (it == sig_->actions.end()) {
                if (sig_->strict) fail_at(at, "undeclared action '" + name + "'");
            } else if (it->second != args.size()) {
                fail_at(at, "action '" + name + "' expects " + std::to_string(it->second) + " argument(s), got " +
                                std::to_string(args.size()));
            }
        }
        return Program::act(name, std::move(args));
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    const Signature* sig_;
    std::vector<Var> scope_;
};

template <class T, class F>
Parsed<T> parse_entry(std::string_view text, const Signature* sig, F&& entry) {
    Parsed<T> out;
    try {
        Parser p(lex(text), sig);
        T value = entry(p);
        if (!p.at_end()) p.fail("unexpected '" + p.peek().text + "' after end of input");
        out.value = std::move(value);
    } catch (const ParseError& e) {
        out.diagnostics.push_back({e.line, e.col, e.message});
    } catch (const std::invalid_argument& e) {
        out.diagnostics.push_back({1, 1, e.what()});
    }
    return out;
}

// ---------------------------------------------------------------- documents

class DocumentParser {
public:
    DocumentParser(std::vector<Token> toks, std::vector<Diagnostic>& diags)
        : p_(std::move(toks), nullptr), diags_(diags) {}

    Document run(const BAT* preset_low) {
        Document doc;
        preset_low_ = preset_low;
        while (!p_.at_end()) {
            const Token at = p_.peek();
            try {
                const std::string kw = p_.expect_ident("'bat', 'mapping' or 'project'");
                if (kw == "bat") {
                    doc.bats.push_back(bat_block());
                } else if (kw == "mapping") {
                    const BAT* low = preset_low_;
                    for (const auto& b : doc.bats)
                        if (b.level == Level::Low) low = &b;
                    if (!low) p_.fail_at(at, "mapping without a preceding low-level theory");
                    doc.mappings.push_back(mapping_block(*low));
                } else if (kw == "project") {
                    if (doc.project) p_.fail_at(at, "duplicate project block");
                    doc.project = project_block();
                } else {
                    p_.fail_at(at, "unknown block '" + kw + "'");
                }
            } catch (const ParseError& e) {
                diags_.push_back({e.line, e.col, e.message});
                skip_block();
            }
        }
        return doc;
    }

private:
    void report(const ParseError& e) { diags_.push_back({e.line, e.col, e.message}); }
    void report(const Token& at, const std::string& msg) { diags_.push_back({at.line, at.col, msg}); }

    // Skips to just after the next ';' at depth 0, or to the '}' closing the
    // current block (not consumed).
    void skip_statement() {
        int depth = 0;
        while (!p_.at_end()) {
            if (p_.is_sym("{") || p_.is_sym("(") || p_.is_sym("[")) {
                ++depth;
            } else if (p_.is_sym(")") || p_.is_sym("]")) {
                if (depth > 0) --depth;
            } else if (p_.is_sym("}")) {
                if (depth == 0) return;
                --depth;
                if (depth == 0) {
                    p_.take();
                    return;
                }
            } else if (p_.is_sym(";") && depth == 0) {
                p_.take();
                return;
            }
            p_.take();
        }
    }

    void skip_block() {
        int depth = 0;
        while (!p_.at_end()) {
            const bool open = p_.is_sym("{");
            const bool close = p_.is_sym("}");
            p_.take();
            if (open) ++depth;
            if (close && --depth <= 0) return;
        }
    }

    // Runs `body` for each statement of a `{ .. }` block with statement-level
    // recovery.
    template <class F>
    void statements(F&& body) {
        p_.expect_sym("{");
        while (!p_.is_sym("}")) {
            if (p_.at_end()) p_.fail("unterminated block");
            try {
                body();
            } catch (const ParseError& e) {
                report(e);
                skip_statement();
            } catch (const std::invalid_argument& e) {
                report(p_.peek(), e.what());
                skip_statement();
            }
        }
        p_.take();
    }

    std::vector<Var> param_list() {
        std::vector<Var> params;
        if (p_.is_sym("(")) {
            p_.take();
            if (!p_.is_sym(")"))
                for (const auto& n : p_.ident_list("a parameter")) params.push_back(Var{n, Sort::Object});
            p_.expect_sym(")");
        }
        return params;
    }

    // Collects declarations of a bat block ahead of parsing its formulas, so
    // statements may refer to symbols declared further down.
    void prescan(BAT& bat) {
        const std::size_t start = p_.pos();
        int depth = 0;
        while (!p_.at_end()) {
            if (p_.is_sym("{")) {
                ++depth;
            } else if (p_.is_sym("}")) {
                if (--depth == 0) break;
            } else if (depth == 1 && p_.peek().kind == Tok::Ident) {
                const std::string kw = p_.peek().text;
                try {
                    if (kw == "objects") {
                        p_.take();
                        for (auto& n : p_.ident_list("an object name")) bat.objects.push_back(n);
                        continue;
                    }
                    if (kw == "fluent") {
                        p_.take();
                        FluentDecl d;
                        d.name = p_.expect_ident("a fluent name");
                        d.params = param_list();
                        if (p_.is_sym(":")) {
                            p_.take();
                            if (p_.expect_ident("a sort") != "int") p_.fail("fluent sort must be 'int'");
                            d.kind = FluentKind::Function;
                        }
                        bat.fluents.push_back(std::move(d));
                        continue;
                    }
                    if (kw == "action") {
                        p_.take();
                        ActionDecl a;
                        a.name = p_.expect_ident("an action name");
                        a.params = param_list();
                        bat.actions.push_back(std::move(a));
                        continue;
                    }
                } catch (const ParseError&) {
                    // reported by the main pass
                }
            }
            p_.take();
        }
        p_.reset(start);
    }

    BAT bat_block() {
        BAT bat;
        const std::string level = p_.expect_ident("'low' or 'high'");
        if (level == "low")
            bat.level = Level::Low;
        else if (level == "high")
            bat.level = Level::High;
        else
            p_.fail("expected 'low' or 'high' but found '" + level + "'");
        bat.name = p_.expect_ident("a theory name");

        BAT decls;
        prescan(decls);
        Signature sig = Signature::of(decls);
        p_.set_signature(&sig);

        std::set<std::string> seen_fluents;
        std::set<std::string> seen_actions;
        bool have_init = false;
        statements([&] {
            const Token at = p_.peek();
            const std::string kw = p_.expect_ident("a statement");
            if (kw == "objects") {
                for (auto& n : p_.ident_list("an object name")) {
                    if (std::find(bat.objects.begin(), bat.objects.end(), n) != bat.objects.end())
                        p_.fail_at(at, "duplicate object '" + n + "'");
                    bat.objects.push_back(n);
                }
            } else if (kw == "fluent") {
                FluentDecl d;
                d.name = p_.expect_ident("a fluent name");
                d.params = param_list();
                if (p_.is_sym(":")) {
                    p_.take();
                    p_.expect_ident("a sort");
                    d.kind = FluentKind::Function;
                }
                if (!seen_fluents.insert(d.name).second) p_.fail_at(at, "duplicate fluent '" + d.name + "'");
                bat.fluents.push_back(std::move(d));
            } else if (kw == "action") {
                ActionDecl a;
                a.name = p_.expect_ident("an action name");
                a.params = param_list();
                if (!seen_actions.insert(a.name).second) p_.fail_at(at, "duplicate action '" + a.name + "'");
                if (p_.is_word("poss")) {
                    p_.take();
                    sig.variables.clear();
                    for (const auto& v : a.params) sig.variables[v.name] = v.sort;
                    a.poss = p_.formula();
                    sig.variables.clear();
                    for (const auto& v : free_vars(a.poss))
                        if (std::find(a.params.begin(), a.params.end(), v) == a.params.end())
                            p_.fail_at(at, "unbound variable '" + v.name + "' in precondition of '" + a.name + "'");
                }
                bat.actions.push_back(std::move(a));
            } else if (kw == "ssa") {
                bat.ssas.push_back(ssa_block(decls, sig, at));
                return;
            } else if (kw == "init") {
                if (have_init) p_.fail_at(at, "duplicate init");
                have_init = true;
                bat.init = p_.formula();
                for (const auto& v : free_vars(bat.init))
                    p_.fail_at(at, "unbound variable '" + v.name + "' in init");
            } else if (kw == "constraint") {
                bat.constraints.push_back(p_.formula());
            } else {
                p_.fail_at(at, "unknown statement '" + kw + "'");
            }
            p_.expect_sym(";");
        });
        p_.set_signature(nullptr);
        return bat;
    }

    SSA ssa_block(const BAT& decls, Signature& sig, const Token& at) {
        SSA ssa;
        ssa.fluent = p_.expect_ident("a fluent name");
        const FluentDecl* decl = decls.fluent(ssa.fluent);
        if (!decl) p_.fail_at(at, "ssa for undeclared fluent '" + ssa.fluent + "'");
        std::vector<Var> header = param_list();
        if (!header.empty() && header.size() != decl->arity())
            p_.fail_at(at, "ssa header of '" + ssa.fluent + "' has the wrong number of parameters");
        if (header.empty()) header = decl->params;
        // Clause variables are renamed to the declared parameter names.
        Binding to_decl;
        for (std::size_t i = 0; i < header.size(); ++i) to_decl.emplace(header[i], Term::var(decl->params[i]));
        const bool functional = decl->kind == FluentKind::Function;

        statements([&] {
            const Token cat = p_.peek();
            const std::string kw = p_.expect_ident("'add', 'del' or 'set'");
            if (kw != "add" && kw != "del" && kw != "set") p_.fail_at(cat, "expected 'add', 'del' or 'set'");
            EffectClause c;
            c.polarity = kw == "del" ? Polarity::Del : Polarity::Add;
            c.action = p_.expect_ident("an action name");
            sig.variables.clear();
            for (const auto& v : header) sig.variables[v.name] = Sort::Object;
            if (p_.is_sym("(")) {
                p_.take();
                if (!p_.is_sym(")")) {
                    do {
                        if (p_.is_sym(",")) p_.take();
                        if (p_.peek().kind == Tok::Ident && !sig.objects.contains(p_.peek().text))
                            sig.variables[p_.peek().text] = Sort::Object;
                        c.pattern.push_back(p_.object_term());
                    } while (p_.is_sym(","));
                }
                p_.expect_sym(")");
            }
            auto ait = sig.actions.find(c.action);
            if (ait == sig.actions.end()) p_.fail_at(cat, "undeclared action '" + c.action + "'");
            if (ait->second != c.pattern.size())
                p_.fail_at(cat, "action '" + c.action + "' expects " + std::to_string(ait->second) + " argument(s)");
            std::optional<Term> value;
            if (p_.is_sym("=")) {
                if (!functional) p_.fail_at(cat, "value given for predicate fluent '" + ssa.fluent + "'");
                if (kw == "del") p_.fail_at(cat, "delete clauses carry no value");
                p_.take();
                const Token vat = p_.peek();
                value = p_.term_expr(Expect::Integer).term;
                if (value->sort() != Sort::Integer) p_.fail_at(vat, "value must be an integer term");
            } else if (kw == "set") {
                p_.fail_at(cat, "'set' needs a value");
            } else if (functional && kw == "add") {
                p_.fail_at(cat, "add clause of functional fluent '" + ssa.fluent + "' needs a value");
            }
            Formula context;
            if (p_.is_word("when")) {
                p_.take();
                context = p_.formula();
            }
            sig.variables.clear();
            p_.expect_sym(";");

            VarSet allowed(header.begin(), header.end());
            for (const auto& t : c.pattern)
                for (const auto& v : free_vars(t)) allowed.insert(v);
            for (const auto& v : free_vars(context))
                if (!allowed.contains(v)) p_.fail_at(cat, "unbound variable '" + v.name + "' in effect context");
            if (value)
                for (const auto& v : free_vars(*value))
                    if (!allowed.contains(v)) p_.fail_at(cat, "unbound variable '" + v.name + "' in effect value");

            auto rename = [&](EffectClause e) {
                for (auto& t : e.pattern) t = substitute(t, to_decl);
                e.context = substitute(e.context, to_decl);
                if (e.value) e.value = substitute(*e.value, to_decl);
                return e;
            };
            c.context = context;
            c.value = value;
            if (kw == "set") {
                EffectClause del = c;
                del.polarity = Polarity::Del;
                del.value.reset();
                ssa.clauses.push_back(rename(c));
                ssa.clauses.push_back(rename(del));
            } else {
                ssa.clauses.push_back(rename(c));
            }
        });
        return ssa;
    }

    RefinementMapping mapping_block(const BAT& low) {
        RefinementMapping m;
        m.name = p_.expect_ident("a mapping name");
        Signature sig = Signature::of(low);
        p_.set_signature(&sig);
        std::set<std::string> fluents;
        std::set<std::string> actions;
        std::map<std::string, Token> witness_sites;
        statements([&] {
            const Token at = p_.peek();
            const std::string kw = p_.expect_ident("a statement");
            if (kw == "fluent") {
                FluentMapping f;
                f.name = p_.expect_ident("a fluent name");
                p_.expect_sym("=");
                if (p_.is_word("count")) {
                    const Token tat = p_.peek();
                    Term t = p_.term_expr(Expect::Integer).term;
                    if (t.kind() != TermKind::Count) p_.fail_at(tat, "functional fluents map to a counting term");
                    f.functional = true;
                    f.count = t;
                    for (const auto& v : free_vars(t)) p_.fail_at(at, "unbound variable '" + v.name + "'");
                } else {
                    f.formula = p_.formula();
                    for (const auto& v : free_vars(f.formula)) p_.fail_at(at, "unbound variable '" + v.name + "'");
                }
                if (!fluents.insert(f.name).second) p_.fail_at(at, "duplicate mapping for '" + f.name + "'");
                m.fluents.push_back(std::move(f));
            } else if (kw == "action") {
                ActionMapping a;
                a.name = p_.expect_ident("an action name");
                p_.expect_sym("=");
                a.program = p_.program();
                for (const auto& v : free_vars(a.program)) p_.fail_at(at, "unbound variable '" + v.name + "'");
                if (!actions.insert(a.name).second) p_.fail_at(at, "duplicate mapping for '" + a.name + "'");
                m.actions.push_back(std::move(a));
            } else if (kw == "witness") {
                const std::string target = p_.expect_ident("'init' or an action name");
                p_.expect_sym("=");
                Formula w = p_.formula();
                for (const auto& v : free_vars(w)) p_.fail_at(at, "unbound variable '" + v.name + "'");
                if (target == "init") {
                    if (m.init_witness) p_.fail_at(at, "duplicate init witness");
                    m.init_witness = w;
                } else if (m.action_witnesses.emplace(target, w).second) {
                    witness_sites.emplace(target, at);
                } else {
                    p_.fail_at(at, "duplicate witness for '" + target + "'");
                }
            } else if (kw == "assume") {
                Assumption a;
                a.action = p_.expect_ident("an action name");
                a.fluent = p_.expect_ident("a fluent name");
                p_.expect_sym("=");
                const Token lat = p_.peek();
                auto label = parse_label(p_.expect_ident("a classification label"));
                if (!label || *label == Label::Unknown) p_.fail_at(lat, "unknown classification label");
                a.label = *label;
                m.assumptions.push_back(a);
            } else {
                p_.fail_at(at, "unknown statement '" + kw + "'");
            }
            p_.expect_sym(";");
        });
        p_.set_signature(nullptr);
        for (const auto& [name, at] : witness_sites)
            if (!m.action(name)) report(at, "witness for unmapped action '" + name + "'");
        return m;
    }

    ProjectSettings project_block() {
        ProjectSettings s;
        statements([&] {
            const Token at = p_.peek();
            const std::string kw = p_.expect_ident("a setting");
            auto positive = [&](const char* what) {
                const Token vat = p_.peek();
                const std::int64_t v = p_.expect_int();
                if (v < 0) p_.fail_at(vat, std::string(what) + " must not be negative");
                return v;
            };
            if (kw == "bounds") {
                const std::int64_t lo = positive("bounds");
                p_.expect_sym(".");
                p_.expect_sym(".");
                const std::int64_t hi = positive("bounds");
                if (lo > hi) p_.fail_at(at, "empty bounds range");
                s.min_objects = static_cast<int>(lo);
                s.max_objects = static_cast<int>(hi);
            } else if (kw == "template_depth") {
                s.template_depth = static_cast<int>(positive("template_depth"));
            } else if (kw == "simplify") {
                const std::string v = p_.expect_ident("'on' or 'off'");
                if (v != "on" && v != "off") p_.fail_at(at, "simplify takes 'on' or 'off'");
                s.simplify = v == "on";
            } else if (kw == "budget") {
                s.budget = positive("budget");
            } else if (kw == "forget_max") {
                s.forget_max = static_cast<int>(positive("forget_max"));
            } else {
                p_.fail_at(at, "unknown setting '" + kw + "'");
            }
            p_.expect_sym(";");
        });
        return s;
    }

    Parser p_;
    std::vector<Diagnostic>& diags_;
    const BAT* preset_low_ = nullptr;
};

Parsed<Document> parse_doc(std::string_view text, const BAT* preset_low) {
    Parsed<Document> out;
    std::vector<Token> toks;
    try {
        toks = lex(text);
    } catch (const ParseError& e) {
        out.diagnostics.push_back({e.line, e.col, e.message});
        return out;
    }
    DocumentParser dp(std::move(toks), out.diagnostics);
    Document doc = dp.run(preset_low);
    if (out.diagnostics.empty()) out.value = std::move(doc);
    return out;
}

}  // namespace

Parsed<Formula> parse_formula(std::string_view text, const Signature* sig) {
    return parse_entry<Formula>(text, sig, [](Parser& p) { return p.formula(); });
}

Parsed<Term> parse_term(std::string_view text, const Signature* sig) {
    return parse_entry<Term>(text, sig, [](Parser& p) { return p.term_expr(Expect::Any).term; });
}

Parsed<Program> parse_program(std::string_view text, const Signature* sig) {
    return parse_entry<Program>(text, sig, [](Parser& p) { return p.program(); });
}

Parsed<Document> parse_document(std::string_view text) { return parse_doc(text, nullptr); }

Parsed<BAT> parse_bat(std::string_view text) {
    Parsed<BAT> out;
    auto doc = parse_doc(text, nullptr);
    out.diagnostics = doc.diagnostics;
    if (!doc.value) return out;
    if (doc.value->bats.size() != 1 || !doc.value->mappings.empty()) {
        out.diagnostics.push_back({1, 1, "expected exactly one bat block"});
        return out;
    }
    out.value = doc.value->bats.front();
    return out;
}

Parsed<RefinementMapping> parse_mapping(std::string_view text, const BAT& low) {
    Parsed<RefinementMapping> out;
    auto doc = parse_doc(text, &low);
    out.diagnostics = doc.diagnostics;
    if (!doc.value) return out;
    if (doc.value->mappings.size() != 1 || !doc.value->bats.empty()) {
        out.diagnostics.push_back({1, 1, "expected exactly one mapping block"});
        return out;
    }
    out.value = doc.value->mappings.front();
    return out;
}

}  // namespace absynth
