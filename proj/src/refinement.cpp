#include "absynth/refinement.hpp"

#include <algorithm>

#include "absynth/print.hpp"
#include "absynth/transform.hpp"

namespace absynth {

Program GuardedAction::program() const {
    Program body = Program::act(action, args);
    if (guard.kind() != FormulaKind::True) body = Program::seq(Program::test(guard), body);
    return vars.empty() ? body : Program::pick(vars, body);
}

std::optional<GuardedAction> as_guarded(const Program& p) {
    GuardedAction g;
    const Program* cur = &p;
    while (cur->kind() == ProgramKind::Pick) {
        g.vars.push_back(cur->var());
        cur = &cur->body();
    }
    const Program* act = cur;
    if (cur->kind() == ProgramKind::Seq) {
        if (cur->first().kind() != ProgramKind::Test) return std::nullopt;
        g.guard = cur->first().formula();
        act = &cur->second();
    }
    if (act->kind() != ProgramKind::Act) return std::nullopt;
    g.action = act->name();
    g.args = act->args();
    const VarSet picked(g.vars.begin(), g.vars.end());
    if (picked.size() != g.vars.size()) return std::nullopt;
    for (const auto& v : free_vars(g.guard))
        if (!picked.contains(v)) return std::nullopt;
    for (const auto& a : g.args) {
        if (a.kind() == TermKind::ObjConst) continue;
        if (a.kind() != TermKind::Var || !picked.contains(a.as_var())) return std::nullopt;
    }
    return g;
}

Formula executability_condition(const BAT& low, const GuardedAction& g) {
    const ActionDecl* a = low.action(g.action);
    if (!a) throw MappingError("undeclared action '" + g.action + "'");
    if (a->params.size() != g.args.size()) throw MappingError("arity mismatch for action '" + g.action + "'");
    Binding b;
    for (std::size_t i = 0; i < g.args.size(); ++i) b.emplace(a->params[i], g.args[i]);
    return Formula::exists(g.vars, Formula::conj(g.guard, substitute(a->poss, b)));
}

Formula mapping_formula(const RefinementMapping& m) {
    std::vector<Formula> parts;
    for (const auto& f : m.fluents) {
        if (f.functional)
            parts.push_back(Formula::eq(Term::fluent(f.name), f.count));
        else
            parts.push_back(Formula::iff(Formula::pred(f.name), f.formula));
    }
    return Formula::conj(std::move(parts));
}

Term apply_mapping(const RefinementMapping& m, const Term& t) {
    switch (t.kind()) {
    case TermKind::FluentFn: {
        const FluentMapping* f = m.fluent(t.name());
        if (!f || !f->functional) throw MappingError("functional fluent '" + t.name() + "' is not mapped");
        return f->count;
    }
    case TermKind::Add:
        return Term::add(apply_mapping(m, t.lhs()), apply_mapping(m, t.rhs()));
    case TermKind::Sub:
        return Term::sub(apply_mapping(m, t.lhs()), apply_mapping(m, t.rhs()));
    case TermKind::Count:
        return Term::count(t.bound(), apply_mapping(m, t.body()));
    default:
        return t;
    }
}

Formula apply_mapping(const RefinementMapping& m, const Formula& f) {
    switch (f.kind()) {
    case FormulaKind::True:
    case FormulaKind::False:
        return f;
    case FormulaKind::Pred: {
        const FluentMapping* p = m.fluent(f.name());
        if (!p || p->functional || !f.args().empty())
            throw MappingError("predicate fluent '" + f.name() + "' is not mapped");
        return p->formula;
    }
    case FormulaKind::Eq:
        return Formula::eq(apply_mapping(m, f.lhs()), apply_mapping(m, f.rhs()));
    case FormulaKind::Lt:
        return Formula::lt(apply_mapping(m, f.lhs()), apply_mapping(m, f.rhs()));
    case FormulaKind::CongMod:
        return Formula::cong(f.modulus(), apply_mapping(m, f.lhs()), apply_mapping(m, f.rhs()));
    case FormulaKind::Not:
        return Formula::negate(apply_mapping(m, f.child()));
    case FormulaKind::And:
    case FormulaKind::Or: {
        std::vector<Formula> parts;
        for (const auto& c : f.children()) parts.push_back(apply_mapping(m, c));
        return f.kind() == FormulaKind::And ? Formula::conj(std::move(parts)) : Formula::disj(std::move(parts));
    }
    case FormulaKind::Exists:
    case FormulaKind::Forall:
    case FormulaKind::TC:
        throw MappingError("high-level formulas are quantifier-free");
    }
    return f;
}

namespace {

std::vector<std::pair<Var, Var>> zip(const std::vector<Var>& a, const std::vector<Var>& b) {
    std::vector<std::pair<Var, Var>> out;
    for (std::size_t i = 0; i < a.size(); ++i) out.emplace_back(a[i], b[i]);
    return out;
}

void add_entry(std::vector<PhiEntry>& out, std::vector<Var> vars, Formula body, PhiSource src) {
    for (auto& e : out) {
        if (e.vars.size() == vars.size() && alpha_equal(e.body, body, zip(e.vars, vars))) {
            e.sources.push_back(std::move(src));
            return;
        }
    }
    out.push_back({std::move(vars), std::move(body), {std::move(src)}});
}

}  // namespace

std::vector<PhiEntry> phi_set(const RefinementMapping& m) {
    std::vector<PhiEntry> out;
    for (const auto& f : m.fluents) {
        if (f.functional) {
            if (f.count.kind() != TermKind::Count)
                throw MappingError("image of '" + f.name + "' is not a counting term");
            add_entry(out, f.count.bound(), f.count.body(), {f.name, true});
        } else {
            ExistsPrefix p = strip_exists(f.formula);
            if (p.vars.empty()) throw MappingError("image of '" + f.name + "' has no existential prefix");
            add_entry(out, p.vars, p.body, {f.name, false});
        }
    }
    return out;
}

std::optional<std::size_t> match_phi_atom(const Formula& f, const std::vector<PhiEntry>& phi) {
    for (std::size_t i = 0; i < phi.size(); ++i) {
        ExistsPrefix p;
        if (!strip_exists(f, phi[i].vars.size(), p)) continue;
        if (alpha_equal(phi[i].body, p.body, zip(phi[i].vars, p.vars))) return i;
    }
    return std::nullopt;
}

namespace {

bool prop_exists(const Formula& f, const std::vector<PhiEntry>& phi) {
    switch (f.kind()) {
    case FormulaKind::True:
    case FormulaKind::False:
        return true;
    case FormulaKind::Not:
    case FormulaKind::And:
    case FormulaKind::Or:
        return std::all_of(f.children().begin(), f.children().end(),
                           [&](const Formula& c) { return prop_exists(c, phi); });
    default:
        return match_phi_atom(f, phi).has_value();
    }
}

Formula invert(const Formula& f, const std::vector<PhiEntry>& phi) {
    switch (f.kind()) {
    case FormulaKind::True:
    case FormulaKind::False:
        return f;
    case FormulaKind::Not:
        return Formula::negate(invert(f.child(), phi));
    case FormulaKind::And:
    case FormulaKind::Or: {
        std::vector<Formula> parts;
        for (const auto& c : f.children()) parts.push_back(invert(c, phi));
        return f.kind() == FormulaKind::And ? Formula::conj(std::move(parts)) : Formula::disj(std::move(parts));
    }
    default: {
        auto i = match_phi_atom(f, phi);
        if (!i) throw MappingError("'" + print(f) + "' is not an existential closure of a mapped body");
        const auto& sources = phi[*i].sources;
        if (sources.size() > 1) {
            std::string names;
            for (const auto& s : sources) names += (names.empty() ? "" : ", ") + s.fluent;
            throw MappingError("'" + print(f) + "' is ambiguous: the body backs " + names);
        }
        const PhiSource& s = sources.front();
        if (s.functional) return Formula::lt(Term::int_const(0), Term::fluent(s.fluent));
        return Formula::pred(s.fluent);
    }
    }
}

}  // namespace

bool is_prop_exists(const Formula& f, const RefinementMapping& m) { return prop_exists(f, phi_set(m)); }

Formula inverse_atoms(const Formula& f, const RefinementMapping& m) { return invert(f, phi_set(m)); }

Formula inverse_translate(const Formula& f, const RefinementMapping& m) {
    Formula psi = inverse_atoms(f, m);
    std::vector<Formula> parts{psi};
    for (const auto& fn : function_symbols(psi))
        parts.push_back(Formula::negate(Formula::lt(Term::fluent(fn), Term::int_const(0))));
    return Formula::conj(std::move(parts));
}

CertReport validate_mapping(const BAT& low, const RefinementMapping& m) {
    CertReport r;
    auto fail = [&](std::string rule, std::string detail) { r.add("mapping-" + rule, Verdict::Fail, std::move(detail)); };
    for (const auto& f : m.fluents) {
        if (f.functional) {
            if (!free_vars(f.count).empty()) fail("closedness", "image of " + f.name + " has free variables");
            if (f.count.kind() != TermKind::Count) fail("shape", f.name + " is not mapped to a counting term");
        } else if (!is_closed(f.formula)) {
            fail("closedness", "image of " + f.name + " has free variables");
        }
    }
    for (const auto& a : m.actions) {
        if (!is_closed(a.program)) fail("closedness", "image of " + a.name + " has free variables");
        auto g = as_guarded(a.program);
        if (!g) {
            fail("shape", a.name + " is not mapped to a guarded action");
            continue;
        }
        const ActionDecl* d = low.action(g->action);
        if (!d)
            fail("declarations", a.name + " refines to undeclared action " + g->action);
        else if (d->params.size() != g->args.size())
            fail("arity", a.name + " calls " + g->action + " with " + std::to_string(g->args.size()) + " arguments, expected " +
                              std::to_string(d->params.size()));
    }
    if (m.init_witness && !is_closed(*m.init_witness)) fail("closedness", "initial witness has free variables");
    for (const auto& [name, w] : m.action_witnesses) {
        if (!m.action(name)) fail("declarations", "witness for unmapped action " + name);
        if (!is_closed(w)) fail("closedness", "witness for " + name + " has free variables");
    }
    for (const auto& a : m.assumptions) {
        if (!m.action(a.action) || !m.fluent(a.fluent))
            fail("declarations", "assumption names unmapped pair (" + a.action + ", " + a.fluent + ")");
        if (a.label == Label::Unknown) fail("shape", "assumption for (" + a.action + ", " + a.fluent + ") has no label");
    }
    if (r.checks.empty()) r.add("validate-mapping", Verdict::Pass);
    return r;
}

}  // namespace absynth
