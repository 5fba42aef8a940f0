#include "absynth/print.hpp"

#include <sstream>

#include "absynth/transform.hpp"

namespace absynth {

namespace {

// Binding strength of printed formulas; a child is wrapped in parentheses
// when it binds more loosely than its context requires.
constexpr int kQuant = 0;
constexpr int kOr = 1;
constexpr int kAnd = 2;
constexpr int kNot = 3;
constexpr int kAtom = 4;

std::string join_vars(const std::vector<Var>& vs) {
    std::string out;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i) out += ", ";
        out += vs[i].name;
    }
    return out;
}

std::string join_terms(const std::vector<Term>& ts);

// Operand of + or - or of a comparison.
std::string print_operand(const Term& t) {
    if (t.kind() == TermKind::Count) return "(" + print(t) + ")";
    return print(t);
}

std::string join_terms(const std::vector<Term>& ts) {
    std::string out;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i) out += ", ";
        out += print(ts[i]);
    }
    return out;
}

// P(u1..uk, v1..vk) closed over (u, v): the P* shape.
const std::string* star_pred(const Formula& f) {
    if (f.kind() != FormulaKind::TC) return nullptr;
    const Formula& body = f.body();
    if (body.kind() != FormulaKind::Pred) return nullptr;
    const std::size_t k = f.tc_from().size();
    if (body.args().size() != 2 * k) return nullptr;
    VarSet seen;
    for (std::size_t i = 0; i < 2 * k; ++i) {
        const Term& a = body.args()[i];
        const Var& want = i < k ? f.tc_from()[i] : f.tc_to()[i - k];
        if (a.kind() != TermKind::Var || a.as_var() != want) return nullptr;
        if (!seen.insert(want).second) return nullptr;
    }
    return &body.name();
}

bool is_tuple_neq_of(const Formula& g, const Formula& tc) {
    return g == Formula::tuple_neq(tc.tc_lhs(), tc.tc_rhs());
}

// And(P*(a, b), a != b): the P+ shape.
const std::string* plus_pred(const Formula& f) {
    if (f.kind() != FormulaKind::And || f.children().size() != 2) return nullptr;
    const Formula& a = f.children()[0];
    const Formula& b = f.children()[1];
    if (const std::string* p = star_pred(a); p && is_tuple_neq_of(b, a)) return p;
    if (const std::string* p = star_pred(b); p && is_tuple_neq_of(a, b)) return p;
    return nullptr;
}

std::string closure_app(const std::string& pred, char op, const Formula& tc) {
    return pred + op + "(" + join_terms(tc.tc_lhs()) + ", " + join_terms(tc.tc_rhs()) + ")";
}

int precedence(const Formula& f) {
    switch (f.kind()) {
    case FormulaKind::Or:
        return kOr;
    case FormulaKind::And:
        return plus_pred(f) ? kAtom : kAnd;
    case FormulaKind::Not: {
        const Formula& c = f.child();
        if (c.kind() == FormulaKind::Eq || c.kind() == FormulaKind::Lt) return kAtom;
        return kNot;
    }
    case FormulaKind::Exists:
    case FormulaKind::Forall:
        return kQuant;
    default:
        return kAtom;
    }
}

void emit(std::ostringstream& os, const Formula& f, int context);

void emit_child(std::ostringstream& os, const Formula& f, int context) {
    if (precedence(f) < context) {
        os << '(';
        emit(os, f, kQuant);
        os << ')';
    } else {
        emit(os, f, context);
    }
}

void emit_comparison(std::ostringstream& os, const Term& a, const char* op, const Term& b) {
    os << print_operand(a) << ' ' << op << ' ' << print_operand(b);
}

void emit_and(std::ostringstream& os, const Formula& f) {
    const auto& cs = f.children();
    std::vector<bool> used(cs.size(), false);
    bool first = true;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (used[i]) continue;
        if (!first) os << " && ";
        first = false;
        if (const std::string* p = star_pred(cs[i])) {
            std::size_t j = 0;
            for (; j < cs.size(); ++j)
                if (j != i && !used[j] && is_tuple_neq_of(cs[j], cs[i])) break;
            if (j < cs.size()) {
                used[j] = true;
                os << closure_app(*p, '+', cs[i]);
                continue;
            }
        }
        emit_child(os, cs[i], kAnd + 1);
    }
}

void emit(std::ostringstream& os, const Formula& f, int context) {
    (void)context;
    switch (f.kind()) {
    case FormulaKind::True:
        os << "true";
        return;
    case FormulaKind::False:
        os << "false";
        return;
    case FormulaKind::Pred:
        os << f.name();
        if (!f.args().empty()) os << '(' << join_terms(f.args()) << ')';
        return;
    case FormulaKind::Eq:
        emit_comparison(os, f.lhs(), "=", f.rhs());
        return;
    case FormulaKind::Lt:
        if (f.lhs().kind() == TermKind::IntConst && f.rhs().kind() != TermKind::IntConst)
            emit_comparison(os, f.rhs(), ">", f.lhs());
        else
            emit_comparison(os, f.lhs(), "<", f.rhs());
        return;
    case FormulaKind::CongMod: {
        std::string op = "=[" + std::to_string(f.modulus()) + "]";
        emit_comparison(os, f.lhs(), op.c_str(), f.rhs());
        return;
    }
    case FormulaKind::Not: {
        const Formula& c = f.child();
        if (c.kind() == FormulaKind::Eq) {
            emit_comparison(os, c.lhs(), "!=", c.rhs());
        } else if (c.kind() == FormulaKind::Lt) {
            if (c.lhs().kind() == TermKind::IntConst && c.rhs().kind() != TermKind::IntConst)
                emit_comparison(os, c.rhs(), "<=", c.lhs());
            else
                emit_comparison(os, c.lhs(), ">=", c.rhs());
        } else {
            os << '!';
            emit_child(os, c, kNot);
        }
        return;
    }
    case FormulaKind::And:
        emit_and(os, f);
        return;
    case FormulaKind::Or:
        for (std::size_t i = 0; i < f.children().size(); ++i) {
            if (i) os << " || ";
            emit_child(os, f.children()[i], kOr + 1);
        }
        return;
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
        std::vector<Var> vars{f.var()};
        const Formula* body = &f.body();
        while (body->kind() == f.kind()) {
            vars.push_back(body->var());
            body = &body->body();
        }
        os << (f.kind() == FormulaKind::Exists ? "exists " : "forall ") << join_vars(vars) << ". ";
        emit(os, *body, kQuant);
        return;
    }
    case FormulaKind::TC: {
        if (const std::string* p = star_pred(f)) {
            os << closure_app(*p, '*', f);
            return;
        }
        os << "tc[" << join_vars(f.tc_from()) << ", " << join_vars(f.tc_to()) << ": ";
        emit(os, f.body(), kQuant);
        os << "](" << join_terms(f.tc_lhs()) << ", " << join_terms(f.tc_rhs()) << ')';
        return;
    }
    }
}

// Programs: choice binds loosest, then sequence; pick extends to the right.
constexpr int kPick = 0;
constexpr int kChoice = 1;
constexpr int kSeq = 2;
constexpr int kPrim = 3;

int precedence(const Program& p) {
    switch (p.kind()) {
    case ProgramKind::Choice:
        return kChoice;
    case ProgramKind::Seq:
        return kSeq;
    case ProgramKind::Pick:
        return kPick;
    default:
        return kPrim;
    }
}

void emit(std::ostringstream& os, const Program& p);

void emit_child(std::ostringstream& os, const Program& p, int context) {
    if (precedence(p) < context) {
        os << '(';
        emit(os, p);
        os << ')';
    } else {
        emit(os, p);
    }
}

void emit(std::ostringstream& os, const Program& p) {
    switch (p.kind()) {
    case ProgramKind::Nil:
        os << "nil";
        return;
    case ProgramKind::Act:
        os << p.name();
        if (!p.args().empty()) os << '(' << join_terms(p.args()) << ')';
        return;
    case ProgramKind::Test:
        if (precedence(p.formula()) == kAtom)
            os << print(p.formula()) << '?';
        else
            os << '(' << print(p.formula()) << ")?";
        return;
    case ProgramKind::Seq:
        emit_child(os, p.first(), kSeq + 1);
        os << "; ";
        emit_child(os, p.second(), kSeq);
        return;
    case ProgramKind::Choice:
        emit_child(os, p.first(), kChoice + 1);
        os << " | ";
        emit_child(os, p.second(), kChoice);
        return;
    case ProgramKind::Pick: {
        std::vector<Var> vars{p.var()};
        const Program* body = &p.body();
        while (body->kind() == ProgramKind::Pick) {
            vars.push_back(body->var());
            body = &body->body();
        }
        os << "pi " << join_vars(vars) << ". ";
        emit(os, *body);
        return;
    }
    case ProgramKind::Star:
        os << '(';
        emit(os, p.body());
        os << ")*";
        return;
    }
}

}  // namespace

std::string print(const Term& t) {
    switch (t.kind()) {
    case TermKind::IntConst:
        return std::to_string(t.value());
    case TermKind::ObjConst:
    case TermKind::Var:
    case TermKind::FluentFn:
        return t.name();
    case TermKind::Add:
    case TermKind::Sub: {
        std::string rhs = print_operand(t.rhs());
        if (t.rhs().kind() == TermKind::Add || t.rhs().kind() == TermKind::Sub) rhs = "(" + rhs + ")";
        return print_operand(t.lhs()) + (t.kind() == TermKind::Add ? " + " : " - ") + rhs;
    }
    case TermKind::Count:
        return "count " + join_vars(t.bound()) + ". " + print(t.body());
    }
    return {};
}

std::string print(const Formula& f) {
    std::ostringstream os;
    emit(os, f, kQuant);
    return os.str();
}

std::string print(const Program& p) {
    std::ostringstream os;
    emit(os, p);
    return os.str();
}

namespace {

std::string pattern_text(const EffectClause& c) {
    std::string out = c.action;
    if (!c.pattern.empty()) out += "(" + join_terms(c.pattern) + ")";
    return out;
}

std::string when_text(const EffectClause& c) {
    if (c.context.kind() == FormulaKind::True) return {};
    return " when " + print(c.context);
}

bool same_trigger(const EffectClause& a, const EffectClause& b) {
    return a.action == b.action && a.pattern == b.pattern && a.context == b.context;
}

std::string head(const std::string& name, const std::vector<Var>& params) {
    if (params.empty()) return name;
    return name + "(" + join_vars(params) + ")";
}

}  // namespace

std::string print(const BAT& bat) {
    std::ostringstream os;
    os << "bat " << to_string(bat.level) << ' ' << bat.name << " {\n";
    if (!bat.objects.empty()) {
        os << "  objects ";
        for (std::size_t i = 0; i < bat.objects.size(); ++i) os << (i ? ", " : "") << bat.objects[i];
        os << ";\n";
    }
    for (const auto& fl : bat.fluents) {
        os << "  fluent " << head(fl.name, fl.params);
        if (fl.kind == FluentKind::Function) os << " : int";
        os << ";\n";
    }
    for (const auto& a : bat.actions) os << "  action " << head(a.name, a.params) << " poss " << print(a.poss) << ";\n";
    for (const auto& fl : bat.fluents) {
        const SSA* ssa = bat.ssa(fl.name);
        if (!ssa) continue;
        os << "  ssa " << head(fl.name, fl.params) << " {";
        const auto& cs = ssa->clauses;
        std::vector<bool> done(cs.size(), false);
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (done[i]) continue;
            const EffectClause& c = cs[i];
            os << "\n    ";
            if (c.value) {
                std::size_t j = 0;
                for (; j < cs.size(); ++j)
                    if (!done[j] && cs[j].polarity == Polarity::Del && same_trigger(cs[j], c)) break;
                if (j < cs.size()) {
                    done[j] = true;
                    os << "set " << pattern_text(c) << " = " << print(*c.value) << when_text(c) << ';';
                    continue;
                }
                os << "add " << pattern_text(c) << " = " << print(*c.value) << when_text(c) << ';';
                continue;
            }
            os << (c.polarity == Polarity::Add ? "add " : "del ") << pattern_text(c) << when_text(c) << ';';
        }
        os << (cs.empty() ? "}\n" : "\n  }\n");
    }
    os << "  init " << print(bat.init) << ";\n";
    for (const auto& c : bat.constraints) os << "  constraint " << print(c) << ";\n";
    os << "}\n";
    return os.str();
}

std::string print(const RefinementMapping& m) {
    std::ostringstream os;
    os << "mapping " << m.name << " {\n";
    for (const auto& f : m.fluents)
        os << "  fluent " << f.name << " = " << (f.functional ? print(f.count) : print(f.formula)) << ";\n";
    for (const auto& a : m.actions) os << "  action " << a.name << " = " << print(a.program) << ";\n";
    if (m.init_witness) os << "  witness init = " << print(*m.init_witness) << ";\n";
    for (const auto& [name, w] : m.action_witnesses) os << "  witness " << name << " = " << print(w) << ";\n";
    for (const auto& a : m.assumptions)
        os << "  assume " << a.action << ' ' << a.fluent << " = " << to_string(a.label) << ";\n";
    os << "}\n";
    return os.str();
}

}  // namespace absynth
