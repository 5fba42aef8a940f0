#include "absynth/bat.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "absynth/print.hpp"
#include "absynth/report.hpp"
#include "absynth/transform.hpp"

namespace absynth {

std::string_view to_string(Level level) { return level == Level::Low ? "low" : "high"; }

const FluentDecl* BAT::fluent(const std::string& n) const {
    for (const auto& f : fluents)
        if (f.name == n) return &f;
    return nullptr;
}

const ActionDecl* BAT::action(const std::string& n) const {
    for (const auto& a : actions)
        if (a.name == n) return &a;
    return nullptr;
}

const SSA* BAT::ssa(const std::string& f) const {
    for (const auto& s : ssas)
        if (s.fluent == f) return &s;
    return nullptr;
}

bool BAT::has_object(const std::string& n) const { return std::find(objects.begin(), objects.end(), n) != objects.end(); }

Formula BAT::constraint() const {
    std::vector<Formula> parts;
    for (const auto& c : constraints) {
        VarSet fv = free_vars(c);
        parts.push_back(Formula::forall(std::vector<Var>(fv.begin(), fv.end()), c));
    }
    return Formula::conj(std::move(parts));
}

std::string to_string(const GroundAction& a) {
    std::string out = a.name;
    if (!a.args.empty()) {
        out += "(";
        for (std::size_t i = 0; i < a.args.size(); ++i) out += (i ? ", " : "") + a.args[i];
        out += ")";
    }
    return out;
}

// ---------------------------------------------------------------- validation

namespace {

class Validator {
public:
    explicit Validator(const BAT& bat) : bat_(bat) {}

    CertReport run() {
        declarations();
        for (const auto& a : bat_.actions) {
            const std::string where = "precondition of " + a.name;
            VarSet allowed(a.params.begin(), a.params.end());
            formula(a.poss, allowed, where);
            if (high()) lia(a.poss, where);
        }
        formula(bat_.init, {}, "initial KB");
        if (high()) lia(bat_.init, "initial KB");
        for (std::size_t i = 0; i < bat_.constraints.size(); ++i) {
            const Formula& c = bat_.constraints[i];
            VarSet fv = free_vars(c);
            formula(c, fv, "constraint " + std::to_string(i + 1));
        }
        ssas();
        if (report_.checks.empty()) {
            report_.add("validate", Verdict::Pass,
                        std::string("well-formed ") + (high() ? "high-level theory" : "low-level theory") + " '" +
                            bat_.name + "'");
        }
        return std::move(report_);
    }

private:
    bool high() const { return bat_.level == Level::High; }

    void fail(const std::string& rule, const std::string& where, const std::string& message) {
        Check c;
        c.name = rule;
        c.verdict = Verdict::Fail;
        c.detail = where + ": " + message;
        report_.add(std::move(c));
    }

    void declarations() {
        std::set<std::string> seen;
        for (const auto& o : bat_.objects)
            if (!seen.insert(o).second) fail("unique-declarations", "object " + o, "declared twice");
        for (const auto& f : bat_.fluents) {
            if (!seen.insert(f.name).second) fail("unique-declarations", "fluent " + f.name, "name already in use");
            for (const auto& p : f.params)
                if (p.sort != Sort::Object) fail("sorts", "fluent " + f.name, "parameters must be objects");
            if (high() && f.kind == FluentKind::Predicate && f.arity() != 0)
                fail("libat-predicate-arity", "fluent " + f.name, "high-level predicate fluents take no object arguments");
            if (high() && f.kind == FluentKind::Function && f.arity() != 0)
                fail("libat-function-arity", "fluent " + f.name, "high-level functional fluents take no object arguments");
            if (!high() && f.kind == FluentKind::Function)
                fail("low-fluent-kind", "fluent " + f.name, "low-level theories have relational fluents only");
        }
        for (const auto& a : bat_.actions) {
            if (!seen.insert(a.name).second) fail("unique-declarations", "action " + a.name, "name already in use");
            for (const auto& p : a.params)
                if (p.sort != Sort::Object) fail("sorts", "action " + a.name, "parameters must be objects");
            if (high() && !a.params.empty())
                fail("libat-action-arity", "action " + a.name, "high-level actions take no parameters");
        }
    }

    void lia(const Formula& f, const std::string& where) {
        if (!is_lia_definable(f)) fail("libat-lia", where, "not a quantifier-free linear integer formula");
    }

    void term(const Term& t, const VarSet& bound, const std::string& where) {
        switch (t.kind()) {
        case TermKind::IntConst:
            return;
        case TermKind::ObjConst:
            if (!bat_.has_object(t.name())) fail("declarations", where, "undeclared object '" + t.name() + "'");
            return;
        case TermKind::Var:
            if (!bound.contains(t.as_var())) fail("closedness", where, "unbound variable '" + t.name() + "'");
            return;
        case TermKind::Add:
        case TermKind::Sub:
            term(t.lhs(), bound, where);
            term(t.rhs(), bound, where);
            return;
        case TermKind::FluentFn: {
            const FluentDecl* d = bat_.fluent(t.name());
            if (!d || d->kind != FluentKind::Function)
                fail("declarations", where, "undeclared functional fluent '" + t.name() + "'");
            return;
        }
        case TermKind::Count: {
            VarSet inner = bound;
            inner.insert(t.bound().begin(), t.bound().end());
            formula(t.body(), inner, where);
            return;
        }
        }
    }

    void formula(const Formula& f, const VarSet& bound, const std::string& where) {
        switch (f.kind()) {
        case FormulaKind::True:
        case FormulaKind::False:
            return;
        case FormulaKind::Pred: {
            const FluentDecl* d = bat_.fluent(f.name());
            if (!d || d->kind != FluentKind::Predicate) {
                fail("declarations", where, "undeclared predicate fluent '" + f.name() + "'");
            } else if (d->arity() != f.args().size()) {
                fail("arity", where,
                     "fluent '" + f.name() + "' expects " + std::to_string(d->arity()) + " argument(s), got " +
                         std::to_string(f.args().size()));
            }
            for (const auto& a : f.args()) {
                if (a.sort() != Sort::Object) fail("sorts", where, "argument of '" + f.name() + "' is not an object");
                term(a, bound, where);
            }
            return;
        }
        case FormulaKind::Eq:
        case FormulaKind::Lt:
        case FormulaKind::CongMod:
            if (f.kind() != FormulaKind::Eq && (f.lhs().sort() != Sort::Integer || f.rhs().sort() != Sort::Integer))
                fail("sorts", where, "ordering and congruence need integer operands");
            if (f.lhs().sort() != f.rhs().sort()) fail("sorts", where, "comparison of different sorts");
            term(f.lhs(), bound, where);
            term(f.rhs(), bound, where);
            return;
        case FormulaKind::Not:
        case FormulaKind::And:
        case FormulaKind::Or:
            for (const auto& c : f.children()) formula(c, bound, where);
            return;
        case FormulaKind::Exists:
        case FormulaKind::Forall: {
            VarSet inner = bound;
            inner.insert(f.var());
            formula(f.body(), inner, where);
            return;
        }
        case FormulaKind::TC: {
            for (const auto& t : f.tc_lhs()) term(t, bound, where);
            for (const auto& t : f.tc_rhs()) term(t, bound, where);
            VarSet inner = bound;
            inner.insert(f.tc_from().begin(), f.tc_from().end());
            inner.insert(f.tc_to().begin(), f.tc_to().end());
            formula(f.body(), inner, where);
            return;
        }
        }
    }

    void ssas() {
        std::set<std::string> seen;
        for (const auto& s : bat_.ssas) {
            const std::string where = "ssa of " + s.fluent;
            const FluentDecl* d = bat_.fluent(s.fluent);
            if (!d) {
                fail("declarations", where, "undeclared fluent");
                continue;
            }
            if (!seen.insert(s.fluent).second) fail("ssa-unique", where, "fluent has more than one ssa");
            const bool functional = d->kind == FluentKind::Function;
            for (const auto& c : s.clauses) {
                const ActionDecl* a = bat_.action(c.action);
                if (!a) {
                    fail("declarations", where, "undeclared action '" + c.action + "'");
                    continue;
                }
                if (a->params.size() != c.pattern.size())
                    fail("arity", where, "action '" + c.action + "' used with the wrong number of arguments");
                VarSet allowed(d->params.begin(), d->params.end());
                for (const auto& t : c.pattern) {
                    if (t.kind() == TermKind::Var && t.sort() == Sort::Object)
                        allowed.insert(t.as_var());
                    else if (t.kind() != TermKind::ObjConst)
                        fail("ssa-shape", where, "action patterns hold object variables or constants");
                    else if (!bat_.has_object(t.name()))
                        fail("declarations", where, "undeclared object '" + t.name() + "'");
                }
                formula(c.context, allowed, where);
                if (high()) lia(c.context, where);
                if (functional && c.polarity == Polarity::Add && !c.value)
                    fail("ssa-shape", where, "add clause without a value");
                if (!functional && c.value) fail("ssa-shape", where, "predicate fluents take no values");
                if (c.value) {
                    if (c.value->sort() != Sort::Integer) fail("sorts", where, "value is not an integer term");
                    term(*c.value, allowed, where);
                    if (high() && !is_lia_definable(*c.value))
                        fail("libat-lia", where, "value is not a linear integer term");
                }
            }
            if (functional) functional_form(s, where);
        }
        for (const auto& f : bat_.fluents)
            if (!seen.contains(f.name)) fail("ssa-unique", "fluent " + f.name, "fluent has no ssa");
    }

    // Each value-setting action has one value clause and one matching
    // deletion; the default branch keeps the old value.
    void functional_form(const SSA& s, const std::string& where) {
        std::map<std::string, std::pair<std::vector<const EffectClause*>, std::vector<const EffectClause*>>> by;
        for (const auto& c : s.clauses) (c.polarity == Polarity::Add ? by[c.action].first : by[c.action].second).push_back(&c);
        for (const auto& [action, cs] : by) {
            const auto& [adds, dels] = cs;
            if (adds.size() > 1) {
                fail("functional-consistency", where, "several values for action '" + action + "'");
            } else if (adds.empty()) {
                fail("functional-consistency", where, "action '" + action + "' removes the value without setting one");
            } else if (dels.size() != 1 || dels[0]->pattern != adds[0]->pattern ||
                       !alpha_equal(dels[0]->context, adds[0]->context)) {
                fail("functional-consistency", where,
                     "action '" + action + "' must replace the value under the same condition (use 'set')");
            }
        }
    }

    const BAT& bat_;
    CertReport report_;
};

Formula fold_object_equalities(const Formula& f) {
    switch (f.kind()) {
    case FormulaKind::Eq:
        if (f.lhs().kind() == TermKind::ObjConst && f.rhs().kind() == TermKind::ObjConst)
            return f.lhs().name() == f.rhs().name() ? Formula::top() : Formula::bottom();
        return f;
    case FormulaKind::Not:
        return Formula::negate(fold_object_equalities(f.child()));
    case FormulaKind::And:
    case FormulaKind::Or: {
        std::vector<Formula> parts;
        for (const auto& c : f.children()) parts.push_back(fold_object_equalities(c));
        return f.kind() == FormulaKind::And ? Formula::conj(std::move(parts)) : Formula::disj(std::move(parts));
    }
    case FormulaKind::Exists:
        return Formula::exists(f.var(), fold_object_equalities(f.body()));
    case FormulaKind::Forall:
        return Formula::forall(f.var(), fold_object_equalities(f.body()));
    default:
        return f;
    }
}

// Condition under which clause `c` fires for the ground action; nullopt if
// the pattern cannot match.
std::optional<Formula> instantiate(const FluentDecl& decl, const EffectClause& c, const GroundAction& a,
                                   std::optional<Term>* value) {
    if (c.action != a.name || c.pattern.size() != a.args.size()) return std::nullopt;
    Binding extras;
    std::vector<Formula> eqs;
    for (std::size_t i = 0; i < c.pattern.size(); ++i) {
        const Term& t = c.pattern[i];
        const Term obj = Term::obj(a.args[i]);
        if (t.kind() == TermKind::ObjConst) {
            if (t.name() != a.args[i]) return std::nullopt;
            continue;
        }
        const Var v = t.as_var();
        if (std::find(decl.params.begin(), decl.params.end(), v) != decl.params.end()) {
            eqs.push_back(Formula::eq(t, obj));
            continue;
        }
        auto it = extras.find(v);
        if (it != extras.end()) {
            if (it->second.name() != a.args[i]) return std::nullopt;
            continue;
        }
        extras.emplace(v, obj);
    }
    eqs.push_back(substitute(c.context, extras));
    if (value && c.value) *value = substitute(*c.value, extras);
    return normalize(fold_object_equalities(Formula::conj(std::move(eqs))));
}

}  // namespace

CertReport validate(const BAT& bat) { return Validator(bat).run(); }

Formula simplify_for_action(const BAT& bat, const std::string& fluent, const GroundAction& a) {
    const FluentDecl* decl = bat.fluent(fluent);
    if (!decl) throw std::invalid_argument("undeclared fluent '" + fluent + "'");
    if (!bat.action(a.name)) throw std::invalid_argument("undeclared action '" + a.name + "'");
    const SSA* ssa = bat.ssa(fluent);
    std::vector<Formula> fire;
    std::vector<Formula> keep;
    const bool functional = decl->kind == FluentKind::Function;
    const Term y = Term::var(ssa_value_var());
    if (ssa) {
        for (const auto& c : ssa->clauses) {
            std::optional<Term> value;
            auto cond = instantiate(*decl, c, a, &value);
            if (!cond) continue;
            if (c.polarity == Polarity::Add) {
                fire.push_back(functional ? Formula::conj(Formula::eq(y, *value), *cond) : *cond);
            } else {
                keep.push_back(Formula::negate(*cond));
            }
        }
    }
    std::vector<Term> args;
    for (const auto& p : decl->params) args.push_back(Term::var(p));
    const Formula old = functional ? Formula::eq(y, Term::fluent(fluent)) : Formula::pred(fluent, args);
    keep.insert(keep.begin(), old);
    fire.push_back(Formula::conj(std::move(keep)));
    return normalize(Formula::disj(std::move(fire)));
}

std::string render_ssa(const BAT& bat, const std::string& fluent) {
    const FluentDecl* decl = bat.fluent(fluent);
    if (!decl) throw std::invalid_argument("undeclared fluent '" + fluent + "'");
    const bool functional = decl->kind == FluentKind::Function;
    std::string args;
    for (const auto& p : decl->params) args += p.name + ", ";
    const std::string now = fluent + "(" + args + "s)";
    std::vector<std::string> fire;
    std::vector<std::string> keep;
    if (const SSA* ssa = bat.ssa(fluent)) {
        for (const auto& c : ssa->clauses) {
            std::string trigger = "a = " + c.action;
            if (!c.pattern.empty()) {
                trigger += "(";
                for (std::size_t i = 0; i < c.pattern.size(); ++i) trigger += (i ? ", " : "") + print(c.pattern[i]);
                trigger += ")";
            }
            if (c.context.kind() != FormulaKind::True) trigger += " && " + print(c.context) + "[s]";
            VarSet pv;
            for (const auto& t : c.pattern)
                for (const auto& v : free_vars(t)) pv.insert(v);
            std::string ex;
            for (const auto& v : pv)
                if (std::find(decl->params.begin(), decl->params.end(), v) == decl->params.end())
                    ex += (ex.empty() ? "exists " : ", ") + v.name;
            if (!ex.empty()) trigger = ex + ". " + trigger;
            if (c.polarity == Polarity::Add) {
                fire.push_back(functional ? "(y = " + print(*c.value) + "[s] && " + trigger + ")" : "(" + trigger + ")");
            } else {
                keep.push_back("!(" + trigger + ")");
            }
        }
    }
    std::string frame = functional ? "y = " + now : now;
    for (const auto& k : keep) frame += " && " + k;
    std::string rhs;
    for (const auto& f : fire) rhs += f + " || ";
    rhs += keep.empty() ? frame : "(" + frame + ")";
    const std::string lhs = functional ? fluent + "(" + args + "do(a, s)) = y" : fluent + "(" + args + "do(a, s))";
    return lhs + " <-> " + rhs;
}

}  // namespace absynth
