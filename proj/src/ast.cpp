#include "absynth/ast.hpp"

#include <stdexcept>
#include <utility>

namespace absynth {

std::string_view to_string(Sort sort) {
    switch (sort) {
    case Sort::Object: return "object";
    case Sort::Integer: return "int";
    case Sort::Action: return "action";
    case Sort::Boolean: return "bool";
    }
    return "?";
}

namespace {

std::shared_ptr<TermNode> make_term(TermKind kind, Sort sort) {
    auto n = std::make_shared<TermNode>();
    n->kind = kind;
    n->sort = sort;
    return n;
}

std::shared_ptr<FormulaNode> make_formula(FormulaKind kind) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = kind;
    return n;
}

std::shared_ptr<ProgramNode> make_program(ProgramKind kind) {
    auto n = std::make_shared<ProgramNode>();
    n->kind = kind;
    return n;
}

void require_integer(const Term& t, const char* what) {
    if (t.sort() != Sort::Integer)
        throw std::invalid_argument(std::string(what) + ": operand must have sort int");
}

const Formula& true_formula() {
    static const Formula f = Formula::top();
    return f;
}

}  // namespace

// ---------------------------------------------------------------- Term

Term Term::int_const(std::int64_t value) {
    auto n = make_term(TermKind::IntConst, Sort::Integer);
    n->value = value;
    return Term(std::move(n));
}

Term Term::obj(std::string name) {
    auto n = make_term(TermKind::ObjConst, Sort::Object);
    n->name = std::move(name);
    return Term(std::move(n));
}

Term Term::var(Var v) {
    auto n = make_term(TermKind::Var, v.sort);
    n->name = std::move(v.name);
    return Term(std::move(n));
}

Term Term::var(std::string name, Sort sort) { return var(Var{std::move(name), sort}); }

Term Term::add(Term lhs, Term rhs) {
    require_integer(lhs, "+");
    require_integer(rhs, "+");
    auto n = make_term(TermKind::Add, Sort::Integer);
    n->operands = {std::move(lhs), std::move(rhs)};
    return Term(std::move(n));
}

Term Term::sub(Term lhs, Term rhs) {
    require_integer(lhs, "-");
    require_integer(rhs, "-");
    auto n = make_term(TermKind::Sub, Sort::Integer);
    n->operands = {std::move(lhs), std::move(rhs)};
    return Term(std::move(n));
}

Term Term::fluent(std::string name) {
    auto n = make_term(TermKind::FluentFn, Sort::Integer);
    n->name = std::move(name);
    return Term(std::move(n));
}

Term Term::count(std::vector<Var> vars, Formula body) {
    if (vars.empty()) throw std::invalid_argument("count: binds no variable");
    for (const auto& v : vars)
        if (v.sort != Sort::Object)
            throw std::invalid_argument("count: bound variable '" + v.name + "' is not object-sorted");
    auto n = make_term(TermKind::Count, Sort::Integer);
    n->bound = std::move(vars);
    n->body.push_back(std::move(body));
    return Term(std::move(n));
}

TermKind Term::kind() const { return node_->kind; }
Sort Term::sort() const { return node_->sort; }
std::int64_t Term::value() const { return node_->value; }
const std::string& Term::name() const { return node_->name; }
Var Term::as_var() const { return Var{node_->name, node_->sort}; }
const Term& Term::lhs() const { return node_->operands.at(0); }
const Term& Term::rhs() const { return node_->operands.at(1); }
const std::vector<Var>& Term::bound() const { return node_->bound; }
const Formula& Term::body() const { return node_->body.at(0); }

// ---------------------------------------------------------------- Formula

Formula::Formula() : node_(true_formula().node_) {}

Formula Formula::top() {
    static const std::shared_ptr<const FormulaNode> n = make_formula(FormulaKind::True);
    return Formula(n);
}

Formula Formula::bottom() {
    static const std::shared_ptr<const FormulaNode> n = make_formula(FormulaKind::False);
    return Formula(n);
}

Formula Formula::pred(std::string name, std::vector<Term> args) {
    for (const auto& a : args)
        if (a.sort() != Sort::Object)
            throw std::invalid_argument("predicate '" + name + "': arguments must be object-sorted");
    auto n = make_formula(FormulaKind::Pred);
    n->name = std::move(name);
    n->terms = std::move(args);
    return Formula(std::move(n));
}

Formula Formula::eq(Term lhs, Term rhs) {
    if (lhs.sort() != rhs.sort()) throw std::invalid_argument("=: operands have different sorts");
    auto n = make_formula(FormulaKind::Eq);
    n->terms = {std::move(lhs), std::move(rhs)};
    return Formula(std::move(n));
}

Formula Formula::lt(Term lhs, Term rhs) {
    require_integer(lhs, "<");
    require_integer(rhs, "<");
    auto n = make_formula(FormulaKind::Lt);
    n->terms = {std::move(lhs), std::move(rhs)};
    return Formula(std::move(n));
}

Formula Formula::cong(std::int64_t modulus, Term lhs, Term rhs) {
    if (modulus < 1) throw std::invalid_argument("congruence modulus must be >= 1");
    require_integer(lhs, "congruence");
    require_integer(rhs, "congruence");
    auto n = make_formula(FormulaKind::CongMod);
    n->modulus = modulus;
    n->terms = {std::move(lhs), std::move(rhs)};
    return Formula(std::move(n));
}

Formula Formula::negate(Formula f) {
    auto n = make_formula(FormulaKind::Not);
    n->children = {std::move(f)};
    return Formula(std::move(n));
}

Formula Formula::conj(std::vector<Formula> parts) {
    if (parts.empty()) return top();
    if (parts.size() == 1) return std::move(parts.front());
    auto n = make_formula(FormulaKind::And);
    n->children = std::move(parts);
    return Formula(std::move(n));
}

Formula Formula::disj(std::vector<Formula> parts) {
    if (parts.empty()) return bottom();
    if (parts.size() == 1) return std::move(parts.front());
    auto n = make_formula(FormulaKind::Or);
    n->children = std::move(parts);
    return Formula(std::move(n));
}

Formula Formula::conj(Formula a, Formula b) { return conj(std::vector<Formula>{std::move(a), std::move(b)}); }
Formula Formula::disj(Formula a, Formula b) { return disj(std::vector<Formula>{std::move(a), std::move(b)}); }

Formula Formula::implies(Formula a, Formula b) { return disj(negate(std::move(a)), std::move(b)); }

Formula Formula::iff(Formula a, Formula b) {
    return disj(conj(a, b), conj(negate(a), negate(b)));
}

Formula Formula::exists(Var v, Formula body) {
    auto n = make_formula(FormulaKind::Exists);
    n->var = std::move(v);
    n->children = {std::move(body)};
    return Formula(std::move(n));
}

Formula Formula::forall(Var v, Formula body) {
    auto n = make_formula(FormulaKind::Forall);
    n->var = std::move(v);
    n->children = {std::move(body)};
    return Formula(std::move(n));
}

Formula Formula::exists(const std::vector<Var>& vs, Formula body) {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = exists(*it, std::move(body));
    return body;
}

Formula Formula::forall(const std::vector<Var>& vs, Formula body) {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = forall(*it, std::move(body));
    return body;
}

Formula Formula::tc(std::vector<Var> from, std::vector<Var> to, Formula body,
                    std::vector<Term> lhs, std::vector<Term> rhs) {
    if (from.empty() || from.size() != to.size())
        throw std::invalid_argument("tc: variable tuples must have equal non-zero arity");
    if (lhs.size() != from.size() || rhs.size() != from.size())
        throw std::invalid_argument("tc: argument tuples do not match the closure arity");
    for (const auto& v : from)
        if (v.sort != Sort::Object) throw std::invalid_argument("tc: variables must be object-sorted");
    for (const auto& v : to)
        if (v.sort != Sort::Object) throw std::invalid_argument("tc: variables must be object-sorted");
    for (const auto& t : lhs)
        if (t.sort() != Sort::Object) throw std::invalid_argument("tc: arguments must be object-sorted");
    for (const auto& t : rhs)
        if (t.sort() != Sort::Object) throw std::invalid_argument("tc: arguments must be object-sorted");
    auto n = make_formula(FormulaKind::TC);
    n->from = std::move(from);
    n->to = std::move(to);
    n->children = {std::move(body)};
    n->terms = std::move(lhs);
    n->rhs = std::move(rhs);
    return Formula(std::move(n));
}

Formula Formula::star(const std::string& pred_name, std::vector<Term> lhs, std::vector<Term> rhs) {
    const std::size_t k = lhs.size();
    std::vector<Var> from;
    std::vector<Var> to;
    std::vector<Term> args;
    for (std::size_t i = 0; i < k; ++i) {
        from.push_back(Var{"u" + std::to_string(i + 1), Sort::Object});
        args.push_back(Term::var(from.back()));
    }
    for (std::size_t i = 0; i < k; ++i) {
        to.push_back(Var{"v" + std::to_string(i + 1), Sort::Object});
        args.push_back(Term::var(to.back()));
    }
    return tc(std::move(from), std::move(to), pred(pred_name, std::move(args)), std::move(lhs), std::move(rhs));
}

Formula Formula::plus(const std::string& pred_name, std::vector<Term> lhs, std::vector<Term> rhs) {
    Formula neq = tuple_neq(lhs, rhs);
    return conj(star(pred_name, std::move(lhs), std::move(rhs)), std::move(neq));
}

Formula Formula::tuple_neq(const std::vector<Term>& lhs, const std::vector<Term>& rhs) {
    std::vector<Formula> parts;
    for (std::size_t i = 0; i < lhs.size(); ++i) parts.push_back(negate(eq(lhs[i], rhs[i])));
    return disj(std::move(parts));
}

FormulaKind Formula::kind() const { return node_->kind; }
const std::string& Formula::name() const { return node_->name; }
const std::vector<Term>& Formula::args() const { return node_->terms; }
const Term& Formula::lhs() const { return node_->terms.at(0); }
const Term& Formula::rhs() const { return node_->terms.at(1); }
std::int64_t Formula::modulus() const { return node_->modulus; }
const std::vector<Formula>& Formula::children() const { return node_->children; }
const Formula& Formula::child() const { return node_->children.at(0); }
const Var& Formula::var() const { return node_->var; }
const Formula& Formula::body() const { return node_->children.at(0); }
const std::vector<Var>& Formula::tc_from() const { return node_->from; }
const std::vector<Var>& Formula::tc_to() const { return node_->to; }
const std::vector<Term>& Formula::tc_lhs() const { return node_->terms; }
const std::vector<Term>& Formula::tc_rhs() const { return node_->rhs; }

// ---------------------------------------------------------------- Program

Program::Program() : Program(nil()) {}

Program Program::nil() {
    static const std::shared_ptr<const ProgramNode> n = make_program(ProgramKind::Nil);
    return Program(n);
}

Program Program::act(std::string name, std::vector<Term> args) {
    for (const auto& a : args)
        if (a.sort() != Sort::Object)
            throw std::invalid_argument("action '" + name + "': arguments must be object-sorted");
    auto n = make_program(ProgramKind::Act);
    n->name = std::move(name);
    n->args = std::move(args);
    return Program(std::move(n));
}

Program Program::test(Formula f) {
    auto n = make_program(ProgramKind::Test);
    n->formula = {std::move(f)};
    return Program(std::move(n));
}

Program Program::seq(Program a, Program b) {
    auto n = make_program(ProgramKind::Seq);
    n->children = {std::move(a), std::move(b)};
    return Program(std::move(n));
}

Program Program::choice(Program a, Program b) {
    auto n = make_program(ProgramKind::Choice);
    n->children = {std::move(a), std::move(b)};
    return Program(std::move(n));
}

Program Program::pick(Var v, Program body) {
    if (v.sort != Sort::Object) throw std::invalid_argument("pi: picked variable must be object-sorted");
    auto n = make_program(ProgramKind::Pick);
    n->var = std::move(v);
    n->children = {std::move(body)};
    return Program(std::move(n));
}

Program Program::pick(const std::vector<Var>& vs, Program body) {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = pick(*it, std::move(body));
    return body;
}

Program Program::star(Program body) {
    auto n = make_program(ProgramKind::Star);
    n->children = {std::move(body)};
    return Program(std::move(n));
}

ProgramKind Program::kind() const { return node_->kind; }
const std::string& Program::name() const { return node_->name; }
const std::vector<Term>& Program::args() const { return node_->args; }
const Formula& Program::formula() const { return node_->formula.at(0); }
const Program& Program::first() const { return node_->children.at(0); }
const Program& Program::second() const { return node_->children.at(1); }
const Var& Program::var() const { return node_->var; }
const Program& Program::body() const { return node_->children.at(0); }

// ---------------------------------------------------------------- ordering

namespace {

template <typename T>
std::strong_ordering compare_seq(const std::vector<T>& a, const std::vector<T>& b) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i)
        if (auto c = compare(a[i], b[i]); c != 0) return c;
    return a.size() <=> b.size();
}

std::strong_ordering compare_vars(const std::vector<Var>& a, const std::vector<Var>& b) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i)
        if (auto c = a[i] <=> b[i]; c != 0) return c;
    return a.size() <=> b.size();
}

int formula_rank(FormulaKind k) {
    switch (k) {
    case FormulaKind::True: return 0;
    case FormulaKind::False: return 1;
    case FormulaKind::Pred: return 2;
    case FormulaKind::TC: return 3;
    case FormulaKind::Eq: return 4;
    case FormulaKind::Lt: return 5;
    case FormulaKind::CongMod: return 6;
    case FormulaKind::Not: return 7;
    case FormulaKind::And: return 8;
    case FormulaKind::Or: return 9;
    case FormulaKind::Exists: return 10;
    case FormulaKind::Forall: return 11;
    }
    return 12;
}

std::strong_ordering compare_core(const FormulaNode& a, const FormulaNode& b) {
    if (a.kind != b.kind) return formula_rank(a.kind) <=> formula_rank(b.kind);
    switch (a.kind) {
    case FormulaKind::True:
    case FormulaKind::False:
        return std::strong_ordering::equal;
    case FormulaKind::Pred:
        if (auto c = a.name <=> b.name; c != 0) return c;
        return compare_seq(a.terms, b.terms);
    case FormulaKind::Eq:
    case FormulaKind::Lt:
        return compare_seq(a.terms, b.terms);
    case FormulaKind::CongMod:
        if (auto c = a.modulus <=> b.modulus; c != 0) return c;
        return compare_seq(a.terms, b.terms);
    case FormulaKind::Not:
    case FormulaKind::And:
    case FormulaKind::Or:
        return compare_seq(a.children, b.children);
    case FormulaKind::Exists:
    case FormulaKind::Forall:
        if (auto c = a.var <=> b.var; c != 0) return c;
        return compare_seq(a.children, b.children);
    case FormulaKind::TC:
        if (auto c = compare_seq(a.terms, b.terms); c != 0) return c;
        if (auto c = compare_seq(a.rhs, b.rhs); c != 0) return c;
        if (auto c = compare_vars(a.from, b.from); c != 0) return c;
        if (auto c = compare_vars(a.to, b.to); c != 0) return c;
        return compare_seq(a.children, b.children);
    }
    return std::strong_ordering::equal;
}

}  // namespace

std::strong_ordering compare(const Term& a, const Term& b) {
    const TermNode& x = *a.node();
    const TermNode& y = *b.node();
    if (&x == &y) return std::strong_ordering::equal;
    if (x.kind != y.kind) return static_cast<int>(x.kind) <=> static_cast<int>(y.kind);
    switch (x.kind) {
    case TermKind::IntConst:
        return x.value <=> y.value;
    case TermKind::ObjConst:
    case TermKind::FluentFn:
        return x.name <=> y.name;
    case TermKind::Var:
        if (auto c = x.name <=> y.name; c != 0) return c;
        return x.sort <=> y.sort;
    case TermKind::Add:
    case TermKind::Sub:
        return compare_seq(x.operands, y.operands);
    case TermKind::Count:
        if (auto c = compare_vars(x.bound, y.bound); c != 0) return c;
        return compare_seq(x.body, y.body);
    }
    return std::strong_ordering::equal;
}

std::strong_ordering compare(const Formula& a, const Formula& b) {
    if (a.node() == b.node()) return std::strong_ordering::equal;
    const FormulaNode* x = a.node();
    const FormulaNode* y = b.node();
    const bool neg_x = x->kind == FormulaKind::Not;
    const bool neg_y = y->kind == FormulaKind::Not;
    if (neg_x) x = x->children.front().node();
    if (neg_y) y = y->children.front().node();
    if (auto c = compare_core(*x, *y); c != 0) return c;
    return neg_x <=> neg_y;
}

std::strong_ordering compare(const Program& a, const Program& b) {
    const ProgramNode& x = *a.node();
    const ProgramNode& y = *b.node();
    if (&x == &y) return std::strong_ordering::equal;
    if (x.kind != y.kind) return static_cast<int>(x.kind) <=> static_cast<int>(y.kind);
    switch (x.kind) {
    case ProgramKind::Nil:
        return std::strong_ordering::equal;
    case ProgramKind::Act:
        if (auto c = x.name <=> y.name; c != 0) return c;
        return compare_seq(x.args, y.args);
    case ProgramKind::Test:
        return compare_seq(x.formula, y.formula);
    case ProgramKind::Seq:
    case ProgramKind::Choice:
    case ProgramKind::Star:
        return compare_seq(x.children, y.children);
    case ProgramKind::Pick:
        if (auto c = x.var <=> y.var; c != 0) return c;
        return compare_seq(x.children, y.children);
    }
    return std::strong_ordering::equal;
}

}  // namespace absynth
