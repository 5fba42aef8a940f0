#include "absynth/transform.hpp"

#include <algorithm>
#include <stdexcept>

namespace absynth {

// ---------------------------------------------------------------- free variables

namespace {

void collect_free(const Formula& f, VarSet& bound, VarSet& out);

void collect_free(const Term& t, VarSet& bound, VarSet& out) {
    switch (t.kind()) {
    case TermKind::IntConst:
    case TermKind::ObjConst:
    case TermKind::FluentFn:
        return;
    case TermKind::Var: {
        Var v = t.as_var();
        if (!bound.contains(v)) out.insert(std::move(v));
        return;
    }
    case TermKind::Add:
    case TermKind::Sub:
        collect_free(t.lhs(), bound, out);
        collect_free(t.rhs(), bound, out);
        return;
    case TermKind::Count: {
        VarSet inner = bound;
        inner.insert(t.bound().begin(), t.bound().end());
        collect_free(t.body(), inner, out);
        return;
    }
    }
}

void collect_free(const Formula& f, VarSet& bound, VarSet& out) {
    switch (f.kind()) {
    case FormulaKind::True:
    case FormulaKind::False:
        return;
    case FormulaKind::Pred:
    case FormulaKind::Eq:
    case FormulaKind::Lt:
    case FormulaKind::CongMod:
        for (const auto& a : f.args()) collect_free(a, bound, out);
        return;
    case FormulaKind::Not:
    case FormulaKind::And:
    case FormulaKind::Or:
        for (const auto& c : f.children()) collect_free(c, bound, out);
        return;
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
        VarSet inner = bound;
        inner.insert(f.var());
        collect_free(f.body(), inner, out);
        return;
    }
    case FormulaKind::TC: {
        VarSet inner = bound;
        inner.insert(f.tc_from().begin(), f.tc_from().end());
        inner.insert(f.tc_to().begin(), f.tc_to().end());
        collect_free(f.body(), inner, out);
        for (const auto& a : f.tc_lhs()) collect_free(a, bound, out);
        for (const auto& a : f.tc_rhs()) collect_free(a, bound, out);
        return;
    }
    }
}

void collect_free(const Program& p, VarSet& bound, VarSet& out) {
    switch (p.kind()) {
    case ProgramKind::Nil:
        return;
    case ProgramKind::Act:
        for (const auto& a : p.args()) collect_free(a, bound, out);
        return;
    case ProgramKind::Test:
        collect_free(p.formula(), bound, out);
        return;
    case ProgramKind::Seq:
    case ProgramKind::Choice:
        collect_free(p.first(), bound, out);
        collect_free(p.second(), bound, out);
        return;
    case ProgramKind::Pick: {
        VarSet inner = bound;
        inner.insert(p.var());
        collect_free(p.body(), inner, out);
        return;
    }
    case ProgramKind::Star:
        collect_free(p.body(), bound, out);
        return;
    }
}

}  // namespace

VarSet free_vars(const Term& t) {
    VarSet bound, out;
    collect_free(t, bound, out);
    return out;
}

VarSet free_vars(const Formula& f) {
    VarSet bound, out;
    collect_free(f, bound, out);
    return out;
}

VarSet free_vars(const Program& p) {
    VarSet bound, out;
    collect_free(p, bound, out);
    return out;
}

std::string fresh_name(const std::string& base, const std::set<std::string>& used) {
    std::string name = base + "'";
    while (used.contains(name)) name += "'";
    return name;
}

// ---------------------------------------------------------------- substitution

namespace {

void check_binding(const Binding& binding) {
    for (const auto& [v, t] : binding)
        if (v.sort != t.sort())
            throw std::invalid_argument("substitution of '" + v.name + "' violates its sort");
}

Term subst(const Term& t, const Binding& b);
Formula subst(const Formula& f, const Binding& b);
Program subst(const Program& p, const Binding& b);

// Prepares the binding for a scope binding `vars`: shadowed entries are
// dropped and binders that would capture are renamed. Returns the new binder
// list and updates `inner`.
std::vector<Var> enter_scope(const std::vector<Var>& vars, const VarSet& free_below,
                             const Binding& outer, Binding& inner) {
    inner = outer;
    for (const auto& v : vars) inner.erase(v);

    std::set<std::string> range_names;
    for (const auto& [v, t] : inner) {
        if (!free_below.contains(v)) continue;
        for (const auto& w : free_vars(t)) range_names.insert(w.name);
    }
    std::set<std::string> used = range_names;
    for (const auto& v : free_below) used.insert(v.name);
    for (const auto& v : vars) used.insert(v.name);

    std::vector<Var> renamed;
    for (const auto& v : vars) {
        if (range_names.contains(v.name)) {
            Var fresh{fresh_name(v.name, used), v.sort};
            used.insert(fresh.name);
            inner.insert_or_assign(v, Term::var(fresh));
            renamed.push_back(std::move(fresh));
        } else {
            renamed.push_back(v);
        }
    }
    return renamed;
}

Term subst(const Term& t, const Binding& b) {
    if (b.empty()) return t;
    switch (t.kind()) {
    case TermKind::IntConst:
    case TermKind::ObjConst:
    case TermKind::FluentFn:
        return t;
    case TermKind::Var: {
        auto it = b.find(t.as_var());
        return it == b.end() ? t : it->second;
    }
    case TermKind::Add:
        return Term::add(subst(t.lhs(), b), subst(t.rhs(), b));
    case TermKind::Sub:
        return Term::sub(subst(t.lhs(), b), subst(t.rhs(), b));
    case TermKind::Count: {
        Binding inner;
        auto vars = enter_scope(t.bound(), free_vars(t.body()), b, inner);
        return Term::count(std::move(vars), subst(t.body(), inner));
    }
    }
    return t;
}

std::vector<Term> subst_all(const std::vector<Term>& ts, const Binding& b) {
    std::vector<Term> out;
    out.reserve(ts.size());
    for (const auto& t : ts) out.push_back(subst(t, b));
    return out;
}

Formula subst(const Formula& f, const Binding& b) {
    if (b.empty()) return f;
    switch (f.kind()) {
    case FormulaKind::True:
    case FormulaKind::False:
        return f;
    case FormulaKind::Pred:
        return Formula::pred(f.name(), subst_all(f.args(), b));
    case FormulaKind::Eq:
        return Formula::eq(subst(f.lhs(), b), subst(f.rhs(), b));
    case FormulaKind::Lt:
        return Formula::lt(subst(f.lhs(), b), subst(f.rhs(), b));
    case FormulaKind::CongMod:
        return Formula::cong(f.modulus(), subst(f.lhs(), b), subst(f.rhs(), b));
    case FormulaKind::Not:
        return Formula::negate(subst(f.child(), b));
    case FormulaKind::And:
    case FormulaKind::Or: {
        std::vector<Formula> parts;
        for (const auto& c : f.children()) parts.push_back(subst(c, b));
        return f.kind() == FormulaKind::And ? Formula::conj(std::move(parts))
                                            : Formula::disj(std::move(parts));
    }
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
        Binding inner;
        auto vars = enter_scope({f.var()}, free_vars(f.body()), b, inner);
        Formula body = subst(f.body(), inner);
        return f.kind() == FormulaKind::Exists ? Formula::exists(vars.front(), std::move(body))
                                               : Formula::forall(vars.front(), std::move(body));
    }
    case FormulaKind::TC: {
        std::vector<Var> all = f.tc_from();
        all.insert(all.end(), f.tc_to().begin(), f.tc_to().end());
        Binding inner;
        auto vars = enter_scope(all, free_vars(f.body()), b, inner);
        const std::size_t k = f.tc_from().size();
        std::vector<Var> from(vars.begin(), vars.begin() + static_cast<std::ptrdiff_t>(k));
        std::vector<Var> to(vars.begin() + static_cast<std::ptrdiff_t>(k), vars.end());
        return Formula::tc(std::move(from), std::move(to), subst(f.body(), inner),
                           subst_all(f.tc_lhs(), b), subst_all(f.tc_rhs(), b));
    }
    }
    return f;
}

Program subst(const Program& p, const Binding& b) {
    if (b.empty()) return p;
    switch (p.kind()) {
    case ProgramKind::Nil:
        return p;
    case ProgramKind::Act:
        return Program::act(p.name(), subst_all(p.args(), b));
    case ProgramKind::Test:
        return Program::test(subst(p.formula(), b));
    case ProgramKind::Seq:
        return Program::seq(subst(p.first(), b), subst(p.second(), b));
    case ProgramKind::Choice:
        return Program::choice(subst(p.first(), b), subst(p.second(), b));
    case ProgramKind::Pick: {
        Binding inner;
        auto vars = enter_scope({p.var()}, free_vars(p.body()), b, inner);
        return Program::pick(vars.front(), subst(p.body(), inner));
    }
    case ProgramKind::Star:
        return Program::star(subst(p.body(), b));
    }
    return p;
}

}  // namespace

Term substitute(const Term& t, const Binding& binding) {
    check_binding(binding);
    return subst(t, binding);
}

Formula substitute(const Formula& f, const Binding& binding) {
    check_binding(binding);
    return subst(f, binding);
}

Program substitute(const Program& p, const Binding& binding) {
    check_binding(binding);
    return subst(p, binding);
}

// ---------------------------------------------------------------- normalize

Term normalize(const Term& t) {
    switch (t.kind()) {
    case TermKind::Add:
        return Term::add(normalize(t.lhs()), normalize(t.rhs()));
    case TermKind::Sub:
        return Term::sub(normalize(t.lhs()), normalize(t.rhs()));
    case TermKind::Count:
        return Term::count(t.bound(), normalize(t.body()));
    default:
        return t;
    }
}

namespace {

std::vector<Term> normalize_all(const std::vector<Term>& ts) {
    std::vector<Term> out;
    out.reserve(ts.size());
    for (const auto& t : ts) out.push_back(normalize(t));
    return out;
}

Formula normalize_junction(const Formula& f) {
    const bool is_and = f.kind() == FormulaKind::And;
    const FormulaKind unit = is_and ? FormulaKind::True : FormulaKind::False;
    const FormulaKind zero = is_and ? FormulaKind::False : FormulaKind::True;
    std::vector<Formula> parts;
    for (const auto& c : f.children()) {
        Formula n = normalize(c);
        if (n.kind() == unit) continue;
        if (n.kind() == zero) return n;
        if (n.kind() == f.kind()) {
            parts.insert(parts.end(), n.children().begin(), n.children().end());
        } else {
            parts.push_back(std::move(n));
        }
    }
    std::sort(parts.begin(), parts.end(), [](const Formula& a, const Formula& b) { return compare(a, b) < 0; });
    parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
    return is_and ? Formula::conj(std::move(parts)) : Formula::disj(std::move(parts));
}

}  // namespace

Formula normalize(const Formula& f) {
    switch (f.kind()) {
    case FormulaKind::True:
    case FormulaKind::False:
        return f;
    case FormulaKind::Pred:
        return Formula::pred(f.name(), normalize_all(f.args()));
    case FormulaKind::Eq:
        return Formula::eq(normalize(f.lhs()), normalize(f.rhs()));
    case FormulaKind::Lt:
        return Formula::lt(normalize(f.lhs()), normalize(f.rhs()));
    case FormulaKind::CongMod:
        return Formula::cong(f.modulus(), normalize(f.lhs()), normalize(f.rhs()));
    case FormulaKind::Not: {
        Formula c = normalize(f.child());
        if (c.kind() == FormulaKind::True) return Formula::bottom();
        if (c.kind() == FormulaKind::False) return Formula::top();
        return Formula::negate(std::move(c));
    }
    case FormulaKind::And:
    case FormulaKind::Or:
        return normalize_junction(f);
    case FormulaKind::Exists:
        return Formula::exists(f.var(), normalize(f.body()));
    case FormulaKind::Forall:
        return Formula::forall(f.var(), normalize(f.body()));
    case FormulaKind::TC:
        return Formula::tc(f.tc_from(), f.tc_to(), normalize(f.body()), normalize_all(f.tc_lhs()),
                           normalize_all(f.tc_rhs()));
    }
    return f;
}

// ---------------------------------------------------------------- LIA fragment

bool is_lia_definable(const Term& t) {
    switch (t.kind()) {
    case TermKind::IntConst:
    case TermKind::FluentFn:
        return true;
    case TermKind::Var:
        return t.sort() == Sort::Integer;
    case TermKind::Add:
    case TermKind::Sub:
        return is_lia_definable(t.lhs()) && is_lia_definable(t.rhs());
    case TermKind::ObjConst:
    case TermKind::Count:
        return false;
    }
    return false;
}

bool is_lia_definable(const Formula& f) {
    switch (f.kind()) {
    case FormulaKind::True:
    case FormulaKind::False:
        return true;
    case FormulaKind::Pred:
        return f.args().empty();
    case FormulaKind::Eq:
    case FormulaKind::Lt:
    case FormulaKind::CongMod:
        return f.lhs().sort() == Sort::Integer && is_lia_definable(f.lhs()) && is_lia_definable(f.rhs());
    case FormulaKind::Not:
    case FormulaKind::And:
    case FormulaKind::Or:
        return std::all_of(f.children().begin(), f.children().end(),
                           [](const Formula& c) { return is_lia_definable(c); });
    case FormulaKind::Exists:
    case FormulaKind::Forall:
    case FormulaKind::TC:
        return false;
    }
    return false;
}

// ---------------------------------------------------------------- alpha equality

namespace {

using Env = std::vector<std::pair<Var, Var>>;

bool same_var(const Var& a, const Var& b, const Env& env) {
    for (auto it = env.rbegin(); it != env.rend(); ++it) {
        const bool ha = it->first == a;
        const bool hb = it->second == b;
        if (ha || hb) return ha && hb;
    }
    return a == b;
}

bool aeq(const Formula& a, const Formula& b, Env& env);

bool aeq(const Term& a, const Term& b, Env& env) {
    if (a.kind() != b.kind() || a.sort() != b.sort()) return false;
    switch (a.kind()) {
    case TermKind::IntConst:
        return a.value() == b.value();
    case TermKind::ObjConst:
    case TermKind::FluentFn:
        return a.name() == b.name();
    case TermKind::Var:
        return same_var(a.as_var(), b.as_var(), env);
    case TermKind::Add:
    case TermKind::Sub:
        return aeq(a.lhs(), b.lhs(), env) && aeq(a.rhs(), b.rhs(), env);
    case TermKind::Count: {
        if (a.bound().size() != b.bound().size()) return false;
        const std::size_t mark = env.size();
        for (std::size_t i = 0; i < a.bound().size(); ++i) env.emplace_back(a.bound()[i], b.bound()[i]);
        const bool ok = aeq(a.body(), b.body(), env);
        env.resize(mark);
        return ok;
    }
    }
    return false;
}

bool aeq_terms(const std::vector<Term>& a, const std::vector<Term>& b, Env& env) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!aeq(a[i], b[i], env)) return false;
    return true;
}

bool aeq(const Formula& a, const Formula& b, Env& env) {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
    case FormulaKind::True:
    case FormulaKind::False:
        return true;
    case FormulaKind::Pred:
        return a.name() == b.name() && aeq_terms(a.args(), b.args(), env);
    case FormulaKind::Eq:
    case FormulaKind::Lt:
        return aeq_terms(a.args(), b.args(), env);
    case FormulaKind::CongMod:
        return a.modulus() == b.modulus() && aeq_terms(a.args(), b.args(), env);
    case FormulaKind::Not:
    case FormulaKind::And:
    case FormulaKind::Or: {
        if (a.children().size() != b.children().size()) return false;
        for (std::size_t i = 0; i < a.children().size(); ++i)
            if (!aeq(a.children()[i], b.children()[i], env)) return false;
        return true;
    }
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
        if (a.var().sort != b.var().sort) return false;
        env.emplace_back(a.var(), b.var());
        const bool ok = aeq(a.body(), b.body(), env);
        env.pop_back();
        return ok;
    }
    case FormulaKind::TC: {
        if (a.tc_from().size() != b.tc_from().size()) return false;
        if (!aeq_terms(a.tc_lhs(), b.tc_lhs(), env) || !aeq_terms(a.tc_rhs(), b.tc_rhs(), env)) return false;
        const std::size_t mark = env.size();
        for (std::size_t i = 0; i < a.tc_from().size(); ++i) env.emplace_back(a.tc_from()[i], b.tc_from()[i]);
        for (std::size_t i = 0; i < a.tc_to().size(); ++i) env.emplace_back(a.tc_to()[i], b.tc_to()[i]);
        const bool ok = aeq(a.body(), b.body(), env);
        env.resize(mark);
        return ok;
    }
    }
    return false;
}

}  // namespace

bool alpha_equal(const Formula& a, const Formula& b, const std::vector<std::pair<Var, Var>>& pairs) {
    Env env(pairs.begin(), pairs.end());
    return aeq(a, b, env);
}

bool alpha_equal(const Term& a, const Term& b, const std::vector<std::pair<Var, Var>>& pairs) {
    Env env(pairs.begin(), pairs.end());
    return aeq(a, b, env);
}

// ---------------------------------------------------------------- symbol sets

namespace {

struct SymbolCollector {
    std::set<std::string>* preds = nullptr;
    std::set<std::string>* fns = nullptr;
    std::set<std::string>* objs = nullptr;

    void term(const Term& t) {
        switch (t.kind()) {
        case TermKind::ObjConst:
            if (objs) objs->insert(t.name());
            return;
        case TermKind::FluentFn:
            if (fns) fns->insert(t.name());
            return;
        case TermKind::Add:
        case TermKind::Sub:
            term(t.lhs());
            term(t.rhs());
            return;
        case TermKind::Count:
            formula(t.body());
            return;
        default:
            return;
        }
    }

    void formula(const Formula& f) {
        switch (f.kind()) {
        case FormulaKind::Pred:
            if (preds) preds->insert(f.name());
            for (const auto& a : f.args()) term(a);
            return;
        case FormulaKind::Eq:
        case FormulaKind::Lt:
        case FormulaKind::CongMod:
            for (const auto& a : f.args()) term(a);
            return;
        case FormulaKind::Not:
        case FormulaKind::And:
        case FormulaKind::Or:
            for (const auto& c : f.children()) formula(c);
            return;
        case FormulaKind::Exists:
        case FormulaKind::Forall:
            formula(f.body());
            return;
        case FormulaKind::TC:
            formula(f.body());
            for (const auto& a : f.tc_lhs()) term(a);
            for (const auto& a : f.tc_rhs()) term(a);
            return;
        default:
            return;
        }
    }

    void program(const Program& p) {
        switch (p.kind()) {
        case ProgramKind::Act:
            for (const auto& a : p.args()) term(a);
            return;
        case ProgramKind::Test:
            formula(p.formula());
            return;
        case ProgramKind::Seq:
        case ProgramKind::Choice:
            program(p.first());
            program(p.second());
            return;
        case ProgramKind::Pick:
        case ProgramKind::Star:
            program(p.body());
            return;
        default:
            return;
        }
    }
};

}  // namespace

std::set<std::string> predicate_symbols(const Formula& f) {
    std::set<std::string> out;
    SymbolCollector{&out, nullptr, nullptr}.formula(f);
    return out;
}

std::set<std::string> predicate_symbols(const Term& t) {
    std::set<std::string> out;
    SymbolCollector{&out, nullptr, nullptr}.term(t);
    return out;
}

std::set<std::string> function_symbols(const Formula& f) {
    std::set<std::string> out;
    SymbolCollector{nullptr, &out, nullptr}.formula(f);
    return out;
}

std::set<std::string> function_symbols(const Term& t) {
    std::set<std::string> out;
    SymbolCollector{nullptr, &out, nullptr}.term(t);
    return out;
}

std::set<std::string> object_constants(const Formula& f) {
    std::set<std::string> out;
    SymbolCollector{nullptr, nullptr, &out}.formula(f);
    return out;
}

std::set<std::string> object_constants(const Program& p) {
    std::set<std::string> out;
    SymbolCollector{nullptr, nullptr, &out}.program(p);
    return out;
}

ExistsPrefix strip_exists(const Formula& f) {
    ExistsPrefix out{{}, f};
    while (out.body.kind() == FormulaKind::Exists) {
        out.vars.push_back(out.body.var());
        Formula next = out.body.body();
        out.body = std::move(next);
    }
    return out;
}

bool strip_exists(const Formula& f, std::size_t count, ExistsPrefix& out) {
    out = ExistsPrefix{{}, f};
    for (std::size_t i = 0; i < count; ++i) {
        if (out.body.kind() != FormulaKind::Exists) return false;
        out.vars.push_back(out.body.var());
        Formula next = out.body.body();
        out.body = std::move(next);
    }
    return true;
}

}  // namespace absynth
