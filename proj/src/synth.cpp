#include "absynth/synth.hpp"

#include <limits>
#include <optional>

#include "absynth/print.hpp"
#include "absynth/refinement.hpp"
#include "absynth/transform.hpp"

namespace absynth {

namespace {

// f >= k read off an atom, when it has that shape.
struct LowerBound {
    std::string fluent;
    std::int64_t k;
};

std::optional<LowerBound> lower_bound(const Formula& f) {
    auto fn = [](const Term& t) { return t.kind() == TermKind::FluentFn; };
    auto num = [](const Term& t) { return t.kind() == TermKind::IntConst; };
    switch (f.kind()) {
    case FormulaKind::Lt:
        if (num(f.lhs()) && fn(f.rhs()) && f.lhs().value() < std::numeric_limits<std::int64_t>::max())
            return LowerBound{f.rhs().name(), f.lhs().value() + 1};
        break;
    case FormulaKind::Not:
        if (f.child().is(FormulaKind::Lt) && fn(f.child().lhs()) && num(f.child().rhs()))
            return LowerBound{f.child().lhs().name(), f.child().rhs().value()};
        break;
    case FormulaKind::Eq:
        if (fn(f.lhs()) && num(f.rhs())) return LowerBound{f.lhs().name(), f.rhs().value()};
        if (num(f.lhs()) && fn(f.rhs())) return LowerBound{f.rhs().name(), f.lhs().value()};
        break;
    default:
        break;
    }
    return std::nullopt;
}

Formula prune(const Formula& f) {
    switch (f.kind()) {
    case FormulaKind::Not:
        return Formula::negate(prune(f.child()));
    case FormulaKind::Or: {
        std::vector<Formula> parts;
        for (const auto& c : f.children()) parts.push_back(prune(c));
        return Formula::disj(std::move(parts));
    }
    case FormulaKind::And: {
        std::vector<Formula> parts;
        for (const auto& c : f.children()) parts.push_back(prune(c));
        std::vector<Formula> kept;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            auto b = lower_bound(parts[i]);
            bool redundant = false;
            if (b && b->k == 0) {
                for (std::size_t j = 0; j < parts.size() && !redundant; ++j) {
                    if (j == i) continue;
                    auto o = lower_bound(parts[j]);
                    // Of two identical bounds keep the first.
                    redundant = o && o->fluent == b->fluent && o->k >= 0 && (o->k > 0 || parts[j].kind() == FormulaKind::Eq || j < i);
                }
            }
            if (!redundant) kept.push_back(parts[i]);
        }
        return Formula::conj(std::move(kept));
    }
    default:
        return f;
    }
}

Formula finish(const Formula& f, const SynthOptions& opts) {
    Formula out = normalize(f);
    return opts.simplify ? simplify_bounds(out) : out;
}

const char* label_text(Label l) { return to_string(l).data(); }

}  // namespace

Formula simplify_bounds(const Formula& f) { return normalize(prune(normalize(f))); }

std::vector<SSA> synth_ssa(const RefinementMapping& m, const Classification& c) {
    std::vector<SSA> out;
    for (const auto& f : m.fluents) {
        SSA ssa;
        ssa.fluent = f.name;
        for (const auto& a : m.actions) {
            const Label l = c.label(a.name, f.name);
            EffectClause add;
            add.action = a.name;
            add.polarity = Polarity::Add;
            EffectClause del = add;
            del.polarity = Polarity::Del;
            switch (l) {
            case Label::Unknown:
                throw SynthError("(" + a.name + ", " + f.name + ") has no classification");
            case Label::Enabling:
            case Label::Disabling:
            case Label::Invariant:
                if (f.functional) throw SynthError("(" + a.name + ", " + f.name + ") is labelled " + label_text(l) + " but " + f.name + " is functional");
                if (l == Label::Enabling) ssa.clauses.push_back(add);
                if (l == Label::Disabling) ssa.clauses.push_back(del);
                break;
            case Label::Incremental:
            case Label::Decremental:
            case Label::FnInvariant:
                if (!f.functional) throw SynthError("(" + a.name + ", " + f.name + ") is labelled " + label_text(l) + " but " + f.name + " is a predicate");
                if (l != Label::FnInvariant) {
                    const Term one = Term::int_const(1);
                    const Term now = Term::fluent(f.name);
                    add.value = l == Label::Incremental ? Term::add(now, one) : Term::sub(now, one);
                    ssa.clauses.push_back(add);
                    ssa.clauses.push_back(del);
                }
                break;
            }
        }
        out.push_back(std::move(ssa));
    }
    return out;
}

Formula synth_init(const RefinementMapping& m, const SynthOptions& opts) {
    if (!m.init_witness) throw SynthError("no witness for the initial KB");
    if (!is_prop_exists(*m.init_witness, m))
        throw SynthError("initial witness is not a propositional existential formula");
    return finish(inverse_translate(*m.init_witness, m), opts);
}

Formula synth_precond(const RefinementMapping& m, const std::string& action, const SynthOptions& opts) {
    const Formula* w = m.witness(action);
    if (!w) throw SynthError("no executability witness for " + action);
    if (!is_prop_exists(*w, m)) throw SynthError("witness for " + action + " is not a propositional existential formula");
    return finish(inverse_translate(*w, m), opts);
}

SynthesisResult synthesize(const SynthesisInput& in, const SynthOptions& opts) {
    if (!in.low || !in.m || !in.classification) throw SynthError("incomplete synthesis input");
    const RefinementMapping& m = *in.m;
    if (in.restrictions) {
        for (const auto& c : in.restrictions->checks)
            if (c.verdict == Verdict::Fail) throw SynthError("restriction '" + c.name + "' failed: " + c.detail);
    }
    SynthesisResult r;
    BAT& h = r.high;
    h.name = m.name;
    h.level = Level::High;
    for (const auto& f : m.fluents) h.fluents.push_back({f.name, f.functional ? FluentKind::Function : FluentKind::Predicate, {}});

    std::string bounds;
    if (in.restrictions)
        if (const Check* c = in.restrictions->find("complete")) bounds = c->bound;
    auto note = [&](std::string name, std::string detail, std::string how) {
        Check c;
        c.name = std::move(name);
        c.verdict = Verdict::Pass;
        c.detail = std::move(detail);
        c.provenance = std::move(how);
        c.bound = bounds;
        r.provenance.add(std::move(c));
    };

    for (const auto& a : m.actions) {
        ActionDecl d;
        d.name = a.name;
        d.poss = synth_precond(m, a.name, opts);
        if (d.poss.is(FormulaKind::False)) r.warnings.push_back("Poss(" + a.name + ") is false: the action is never executable");
        note("poss " + a.name, print(d.poss), "inverse translation of witness " + print(*m.witness(a.name)));
        h.actions.push_back(std::move(d));
    }
    h.ssas = synth_ssa(m, *in.classification);
    for (const auto& s : h.ssas) {
        std::string labels;
        for (const auto& a : m.actions) {
            const ClassEntry* e = in.classification->find(a.name, s.fluent);
            labels += (labels.empty() ? "" : ", ") + a.name + "=" + std::string(to_string(in.classification->label(a.name, s.fluent)));
            if (e && e->assumed) labels += " (assumed)";
        }
        note("ssa " + s.fluent, labels, "classification");
    }
    h.init = synth_init(m, opts);
    if (h.init.is(FormulaKind::False)) r.warnings.push_back("initial KB is false: the theory is inconsistent");
    note("init", print(h.init), "inverse translation of witness " + print(*m.init_witness));

    const CertReport v = validate(h);
    if (!v.passed()) throw SynthError("internal error: synthesized theory is not a valid LIBAT:\n" + v.to_text());
    return r;
}

bool same_ssa(const BAT& a, const BAT& b, const std::string& fluent) {
    for (const auto& act : a.actions) {
        if (!b.action(act.name)) return false;
        const GroundAction g{act.name, {}};
        if (normalize(simplify_for_action(a, fluent, g)) != normalize(simplify_for_action(b, fluent, g))) return false;
    }
    return a.actions.size() == b.actions.size();
}

}  // namespace absynth
