#include "absynth/verifier.hpp"

#include <algorithm>
#include <cstdlib>

#include "absynth/print.hpp"
#include "absynth/transform.hpp"
#include "parallel.hpp"

namespace absynth {

std::string DomainBounds::describe() const {
    std::string s = std::to_string(min_objects) + ".." + std::to_string(max_objects) + " objects beyond constants";
    if (scope == Scope::All) s += ", all ground actions";
    return s;
}

unsigned default_jobs() {
    if (const char* env = std::getenv("ABSYNTH_JOBS")) {
        const int v = std::atoi(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return 1;
}

// ---------------------------------------------------------------- instances

Instances::Instances(const BAT& low, DomainBounds bounds) : low_(low), bounds_(std::move(bounds)) {}

Instances::PerSize& Instances::at(int n) {
    PerSize& p = sizes_[n];
    if (!p.machine) p.machine = std::make_unique<Machine>(low_, Domain::make(low_.objects, static_cast<std::size_t>(n)));
    return p;
}

const Machine& Instances::machine(int n) { return *at(n).machine; }

const std::vector<FiniteState>& Instances::initial(int n) {
    PerSize& p = at(n);
    if (!p.initial) {
        auto it = bounds_.explicit_initial.find(n);
        if (it != bounds_.explicit_initial.end()) {
            p.initial = it->second;
        } else {
            try {
                p.initial = admissible_initial_states(*p.machine, bounds_.budget).admissible;
            } catch (const EvalError& e) {
                throw BudgetExceeded(e.what());
            }
        }
    }
    return *p.initial;
}

const std::vector<FiniteState>& Instances::executable(int n) {
    PerSize& p = at(n);
    if (!p.executable) {
        Reachability r = reachable(*p.machine, initial(n), StepMode::PossOnly, std::nullopt, bounds_.budget);
        if (!r.complete) throw BudgetExceeded("executable states over " + std::to_string(n) + " objects exceed the budget");
        p.executable = std::move(r.states);
    }
    return *p.executable;
}

const std::vector<FiniteState>& Instances::scope_states(int n) {
    if (bounds_.scope == Scope::Executable) return executable(n);
    PerSize& p = at(n);
    if (!p.all) {
        Reachability r = reachable(*p.machine, initial(n), StepMode::AllGroundActions, std::nullopt, bounds_.budget);
        if (!r.complete) throw BudgetExceeded("states over " + std::to_string(n) + " objects exceed the budget");
        p.all = std::move(r.states);
    }
    return *p.all;
}

const std::vector<FiniteState>& Instances::constraint_states(int n) {
    PerSize& p = at(n);
    if (!p.constrained) p.constrained = absynth::constraint_states(*p.machine);
    return *p.constrained;
}

// ---------------------------------------------------------------- guarded-action properties

namespace {

enum class Kind { Alt, Single, Invariant };

// Odometer over domain^k.
bool next_tuple(std::vector<std::int64_t>& t, std::int64_t n) {
    for (std::size_t i = t.size(); i-- > 0;) {
        if (++t[i] < n) return true;
        t[i] = 0;
    }
    return false;
}

std::string tuple_text(const Domain& d, const std::vector<std::int64_t>& t) {
    std::string s = "(";
    for (std::size_t i = 0; i < t.size(); ++i) s += (i ? ", " : "") + d.objects[static_cast<std::size_t>(t[i])];
    return s + ")";
}

struct Compiled {
    CompiledFormula guard;
    CompiledFormula phi;
    std::vector<std::size_t> y_in_x;
};

std::vector<std::size_t> positions(const std::vector<Var>& y, const std::vector<Var>& x) {
    std::vector<std::size_t> out;
    for (const auto& v : y) {
        auto it = std::find(x.begin(), x.end(), v);
        if (it == x.end()) throw MappingError("variable '" + v.name + "' is not picked by the guarded action");
        out.push_back(static_cast<std::size_t>(it - x.begin()));
    }
    return out;
}

void require_closed_over(const Formula& phi, const std::vector<Var>& y) {
    for (const auto& v : free_vars(phi))
        if (std::find(y.begin(), y.end(), v) == y.end())
            throw MappingError("'" + print(phi) + "' has free variable '" + v.name + "' outside its tuple");
}

GroundAction ground(const Machine& m, const GuardedAction& g, const std::vector<std::int64_t>& x) {
    GroundAction a{g.action, {}};
    for (const auto& t : g.args) {
        if (t.kind() == TermKind::ObjConst) {
            a.args.push_back(t.name());
        } else {
            const auto i = static_cast<std::size_t>(std::find(g.vars.begin(), g.vars.end(), t.as_var()) - g.vars.begin());
            a.args.push_back(m.domain().objects[static_cast<std::size_t>(x[i])]);
        }
    }
    return a;
}

// Checks one state; returns a counterexample on violation.
std::optional<Counterexample> check_state(const Machine& m, const GuardedAction& g, const Compiled& c, Kind kind,
                                          const FiniteState& s) {
    const auto n = static_cast<std::int64_t>(m.domain().size());
    if (!g.vars.empty() && n == 0) return std::nullopt;
    EvalCache before(s);
    std::vector<std::int64_t> x(g.vars.size(), 0);
    const std::size_t k = kind == Kind::Invariant ? 0 : c.y_in_x.size();
    do {
        const GroundAction a = ground(m, g, x);
        if (!m.poss(before, a) || !c.guard.holds(before, x)) continue;
        const FiniteState t = m.successor(s, a);
        EvalCache after(t);
        auto fail = [&](std::string why) {
            Counterexample cx;
            cx.state = s;
            cx.action = a;
            for (std::size_t i = 0; i < g.vars.size(); ++i)
                cx.bindings[g.vars[i].name] = m.domain().objects[static_cast<std::size_t>(x[i])];
            cx.explanation = std::move(why);
            return cx;
        };
        std::vector<std::int64_t> y;
        if (kind != Kind::Invariant) {
            for (std::size_t i : c.y_in_x) y.push_back(x[i]);
            if (c.phi.holds(before, y)) return fail("formula already holds before the action");
            if (!c.phi.holds(after, y)) return fail("formula does not hold after the action");
            if (kind == Kind::Alt) continue;
        }
        // Frame over all other tuples (every tuple for invariance).
        const std::size_t arity = kind == Kind::Invariant ? c.y_in_x.size() : k;
        std::vector<std::int64_t> z(arity, 0);
        if (arity > 0 && n == 0) continue;
        do {
            if (kind != Kind::Invariant && z == y) continue;
            const bool b = c.phi.holds(before, z);
            if (b != c.phi.holds(after, z))
                return fail(std::string("value at ") + tuple_text(m.domain(), z) + " changes from " +
                            (b ? "true" : "false") + " to " + (b ? "false" : "true"));
        } while (next_tuple(z, n));
    } while (next_tuple(x, n));
    return std::nullopt;
}

Check guarded_check(Instances& inst, const GuardedAction& g, const Formula& phi, const std::vector<Var>& y, Kind kind,
                    std::string name) {
    require_closed_over(phi, y);
    Check check;
    check.name = std::move(name);
    check.bound = inst.bounds().describe();
    std::size_t total = 0;
    for (int n = inst.bounds().min_objects; n <= inst.bounds().max_objects; ++n) {
        const Machine& m = inst.machine(n);
        Compiled c;
        c.guard = m.compile(g.guard, g.vars);
        c.phi = m.compile(phi, y);
        if (kind != Kind::Invariant) {
            c.y_in_x = positions(y, g.vars);
        } else {
            c.y_in_x.assign(y.size(), 0);
        }
        const auto& states = inst.scope_states(n);
        total += states.size();
        std::vector<std::optional<Counterexample>> found(states.size());
        detail::parallel_for(states.size(), inst.bounds().jobs,
                             [&](std::size_t i) { found[i] = check_state(m, g, c, kind, states[i]); });
        for (auto& f : found) {
            if (!f) continue;
            check.verdict = Verdict::Fail;
            check.bound = std::to_string(n) + " objects beyond constants";
            check.counterexample = std::move(f);
            return check;
        }
    }
    check.verdict = Verdict::Pass;
    check.provenance = "exhaustive over " + std::to_string(total) +
                       (inst.bounds().scope == Scope::All ? " reachable states" : " executable states");
    return check;
}

std::string vars_text(const std::vector<Var>& vs) {
    std::string s;
    for (const auto& v : vs) s += (s.empty() ? "" : ", ") + v.name;
    return s;
}

std::string property_name(const std::string& kind, const GuardedAction& g, const Formula& phi) {
    return g.action + "(" + [&] {
        std::string s;
        for (const auto& a : g.args) s += (s.empty() ? "" : ", ") + print(a);
        return s;
    }() + ") " + kind + " " + print(phi) + " under " + print(g.guard);
}

}  // namespace

Check check_alt_enabling(Instances& inst, const GuardedAction& g, const Formula& phi, const std::vector<Var>& y) {
    return guarded_check(inst, g, phi, y, Kind::Alt, property_name("alternately enabling", g, phi));
}

Check check_single_enabling(Instances& inst, const GuardedAction& g, const Formula& phi, const std::vector<Var>& y) {
    return guarded_check(inst, g, phi, y, Kind::Single, property_name("singly enabling", g, phi));
}

Check check_invariant(Instances& inst, const GuardedAction& g, const Formula& phi, const std::vector<Var>& y) {
    return guarded_check(inst, g, phi, y, Kind::Invariant, property_name("invariant", g, phi));
}

Check check_exclusive(Instances& inst, const Formula& phi, const std::vector<Var>& x) {
    require_closed_over(phi, x);
    Check check;
    check.name = "exclusive " + print(phi) + " over (" + vars_text(x) + ")";
    check.bound = inst.bounds().describe();
    std::size_t total = 0;
    for (int n = inst.bounds().min_objects; n <= inst.bounds().max_objects; ++n) {
        const Machine& m = inst.machine(n);
        const CompiledFormula c = m.compile(phi, x);
        const auto size = static_cast<std::int64_t>(m.domain().size());
        const auto& states = inst.executable(n);
        total += states.size();
        std::vector<std::optional<Counterexample>> found(states.size());
        detail::parallel_for(states.size(), inst.bounds().jobs, [&](std::size_t i) {
            if (!x.empty() && size == 0) return;
            EvalCache cache(states[i]);
            std::vector<std::int64_t> t(x.size(), 0);
            std::vector<std::vector<std::int64_t>> hits;
            do {
                if (c.holds(cache, t)) hits.push_back(t);
                if (hits.size() == 2) {
                    Counterexample cx;
                    cx.state = states[i];
                    cx.explanation = "satisfied by " + tuple_text(m.domain(), hits[0]) + " and " +
                                     tuple_text(m.domain(), hits[1]);
                    for (std::size_t j = 0; j < x.size(); ++j) {
                        cx.bindings[x[j] .name + "#1"] = m.domain().objects[static_cast<std::size_t>(hits[0][j])];
                        cx.bindings[x[j].name + "#2"] = m.domain().objects[static_cast<std::size_t>(hits[1][j])];
                    }
                    found[i] = std::move(cx);
                    return;
                }
            } while (next_tuple(t, size));
        });
        for (auto& f : found) {
            if (!f) continue;
            check.verdict = Verdict::Fail;
            check.bound = std::to_string(n) + " objects beyond constants";
            check.counterexample = std::move(f);
            return check;
        }
    }
    check.verdict = Verdict::Pass;
    check.provenance = "exhaustive over " + std::to_string(total) + " executable states";
    return check;
}

bool replay_counterexample(const BAT& low, const Check& c, const GuardedAction& g, const Formula& phi,
                           const std::vector<Var>& y, const std::string& kind) {
    if (c.verdict != Verdict::Fail || !c.counterexample || !c.counterexample->state) return false;
    const Counterexample& cx = *c.counterexample;
    const FiniteState& s = *cx.state;
    Machine m(low, s.layout().domain);
    auto obj = [&](const std::string& name) { return static_cast<std::int64_t>(*s.domain().index(name)); };
    const auto n = static_cast<std::int64_t>(s.domain().size());
    const CompiledFormula f = m.compile(phi, y);
    if (kind == "exclusive") {
        std::vector<std::int64_t> t(y.size(), 0);
        int hits = 0;
        do {
            if (f.holds(s, t)) ++hits;
        } while (next_tuple(t, n));
        return hits > 1;
    }
    if (!cx.action) return false;
    std::vector<std::int64_t> x;
    for (const auto& v : g.vars) x.push_back(obj(cx.bindings.at(v.name)));
    if (!m.poss(s, *cx.action) || !m.compile(g.guard, g.vars).holds(s, x)) return false;
    const FiniteState t = m.successor(s, *cx.action);
    auto differs_somewhere = [&](const std::optional<std::vector<std::int64_t>>& skip) {
        std::vector<std::int64_t> z(y.size(), 0);
        do {
            if (skip && z == *skip) continue;
            if (f.holds(s, z) != f.holds(t, z)) return true;
        } while (next_tuple(z, n));
        return false;
    };
    if (kind == "invariant") return differs_somewhere(std::nullopt);
    std::vector<std::int64_t> yv;
    for (std::size_t i : positions(y, g.vars)) yv.push_back(x[i]);
    if (f.holds(s, yv) || !f.holds(t, yv)) return true;
    return kind == "single" && differs_somewhere(yv);
}

// ---------------------------------------------------------------- classification

const ClassEntry* Classification::find(const std::string& action, const std::string& fluent) const {
    for (const auto& e : entries)
        if (e.action == action && e.fluent == fluent) return &e;
    return nullptr;
}

Label Classification::label(const std::string& action, const std::string& fluent) const {
    const ClassEntry* e = find(action, fluent);
    return e ? e->label : Label::Unknown;
}

ClassEntry classify(Instances& inst, const RefinementMapping& m, const std::string& action, const std::string& fluent) {
    ClassEntry e;
    e.action = action;
    e.fluent = fluent;
    if (auto a = m.assumed(action, fluent)) {
        e.label = *a;
        e.passing = {*a};
        e.assumed = true;
        e.detail = "user-assumed";
        return e;
    }
    const ActionMapping* am = m.action(action);
    const FluentMapping* fm = m.fluent(fluent);
    if (!am || !fm) {
        e.detail = "not mapped";
        return e;
    }
    auto g = as_guarded(am->program);
    if (!g) {
        e.detail = "image of " + action + " is not a guarded action";
        return e;
    }
    std::vector<Var> y;
    Formula phi;
    if (fm->functional) {
        y = fm->count.bound();
        phi = fm->count.body();
    } else {
        ExistsPrefix p = strip_exists(fm->formula);
        y = p.vars;
        phi = p.body;
    }
    const bool nested = std::all_of(y.begin(), y.end(), [&](const Var& v) {
        return std::find(g->vars.begin(), g->vars.end(), v) != g->vars.end();
    });
    const Formula neg = Formula::negate(phi);
    auto run = [&](Label label, std::vector<Check> checks) {
        bool ok = true;
        for (auto& c : checks) {
            ok = ok && c.verdict == Verdict::Pass;
            c.name = std::string(to_string(label)) + ": " + c.name;
            e.evidence.add(std::move(c));
        }
        if (ok) e.passing.push_back(label);
    };
    if (nested) {
        if (fm->functional) {
            run(Label::Incremental, {check_single_enabling(inst, *g, phi, y)});
            run(Label::Decremental, {check_single_enabling(inst, *g, neg, y)});
        } else {
            run(Label::Enabling, {check_alt_enabling(inst, *g, phi, y)});
            run(Label::Disabling, {check_alt_enabling(inst, *g, neg, y), check_exclusive(inst, phi, y)});
        }
    } else {
        e.detail = "body variables are not all picked; only invariance applies";
    }
    run(fm->functional ? Label::FnInvariant : Label::Invariant, {check_invariant(inst, *g, phi, y)});
    if (e.passing.size() == 1) {
        e.label = e.passing.front();
    } else if (e.passing.size() > 1) {
        std::string names;
        for (Label l : e.passing) names += (names.empty() ? "" : ", ") + std::string(to_string(l));
        e.detail = "contradictory labels " + names + " (is the guarded action ever executable?)";
    } else if (e.detail.empty()) {
        e.detail = "no label holds";
    }
    return e;
}

Classification classify_all(Instances& inst, const RefinementMapping& m) {
    Classification c;
    for (const auto& a : m.actions)
        for (const auto& f : m.fluents) c.entries.push_back(classify(inst, m, a.name, f.name));
    return c;
}

// ---------------------------------------------------------------- forgetting

Forgetter::Forgetter(const BAT& low, const RefinementMapping& m, std::size_t budget)
    : low_(low), m_(m), budget_(budget), vocab_(Vocabulary::of(m)) {
    for (const auto& e : phi_set(m)) atoms_.push_back(Formula::exists(e.vars, e.body));
}

const Forgetter::Profile& Forgetter::profile(const Formula& constraint, int size) {
    const auto key = std::make_pair(print(constraint), size);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Profile p;
    const int extra = size - static_cast<int>(low_.objects.size());
    if (extra >= 0) {
        auto layout = Layout::make(Vocabulary::of(low_), Domain::make(low_.objects, static_cast<std::size_t>(extra)));
        std::vector<CompiledFormula> atoms;
        for (const auto& a : atoms_) atoms.push_back(CompiledFormula::compile(a, *layout));
        const Abstractor abstractor(m_, layout);
        std::map<std::vector<bool>, std::size_t> index;
        std::size_t seen = 0;
        enumerate_states(layout, constraint, [&](const FiniteState& s) {
            if (++seen > budget_) throw BudgetExceeded("forgetting over " + std::to_string(size) + " objects exceeds the budget");
            EvalCache cache(s);
            std::vector<bool> bits;
            for (const auto& a : atoms) bits.push_back(a.holds(cache));
            AbstractState h = abstractor(cache);
            for (std::size_t f = 0; f < vocab_->funcs.size(); ++f) {
                auto [mv, inserted] = p.max_values.emplace(vocab_->funcs[f], h.value(f));
                if (!inserted) mv->second = std::max(mv->second, h.value(f));
            }
            auto [ix, fresh] = index.emplace(bits, p.classes.size());
            if (fresh) p.classes.push_back({s, {}});
            p.classes[ix->second].second.insert(std::move(h));
            return true;
        });
    }
    return cache_.emplace(key, std::move(p)).first->second;
}

AbstractSet Forgetter::project(const Formula& constraint, const Formula& phi, int size) {
    if (!is_prop_exists(phi, m_)) throw std::invalid_argument("'" + print(phi) + "' is not a propositional existential formula");
    const Profile& p = profile(constraint, size);
    AbstractSet out;
    for (const auto& [rep, images] : p.classes) {
        if (CompiledFormula::compile(phi, rep.layout()).holds(rep)) out.insert(images.begin(), images.end());
    }
    return out;
}

std::map<std::string, std::int64_t> Forgetter::max_values(const Formula& constraint, int size) {
    return profile(constraint, size).max_values;
}

AbstractSet forget_project(const BAT& low, const RefinementMapping& m, const Formula& constraint, const Formula& phi,
                           int size) {
    return Forgetter(low, m).project(constraint, phi, size);
}

std::vector<Formula> prop_exists_templates(const RefinementMapping& m, int depth) {
    std::vector<Formula> all{Formula::top(), Formula::bottom()};
    for (const auto& e : phi_set(m)) all.push_back(Formula::exists(e.vars, e.body));
    std::set<std::string> keys;
    for (const auto& f : all) keys.insert(print(normalize(f)));
    for (int d = 1; d <= depth; ++d) {
        const std::vector<Formula> prev = all;
        auto add = [&](const Formula& f) {
            if (keys.insert(print(normalize(f))).second) all.push_back(f);
        };
        for (const auto& f : prev) add(Formula::negate(f));
        for (const auto& f : prev)
            for (const auto& g : prev) {
                add(Formula::conj(f, g));
                add(Formula::disj(f, g));
            }
    }
    return all;
}

// ---------------------------------------------------------------- restrictions

namespace {

Check check_flat(const BAT& low, const RefinementMapping& m) {
    Check c;
    c.name = "flat";
    c.provenance = "syntactic";
    std::vector<std::string> problems;
    for (const auto& a : m.actions) {
        auto g = as_guarded(a.program);
        if (!g) {
            problems.push_back(a.name + " is not mapped to a guarded action");
            continue;
        }
        if (!low.action(g->action)) problems.push_back(a.name + " refines to undeclared action " + g->action);
    }
    for (const auto& f : m.fluents) {
        if (f.functional) {
            if (f.count.kind() != TermKind::Count) problems.push_back(f.name + " is not mapped to a counting term");
        } else if (strip_exists(f.formula).vars.empty()) {
            problems.push_back(f.name + " is not mapped to an existential formula");
        }
    }
    c.verdict = problems.empty() ? Verdict::Pass : Verdict::Fail;
    for (const auto& p : problems) c.detail += (c.detail.empty() ? "" : "; ") + p;
    if (problems.empty()) c.detail = "every action is a guarded action, every fluent an existential or counting image";
    return c;
}

Check check_syntax_irrelevant(const RefinementMapping& m) {
    Check c;
    c.name = "syntax-irrelevant";
    c.provenance = "syntactic";
    std::vector<PhiEntry> phi;
    try {
        phi = phi_set(m);
    } catch (const MappingError& e) {
        c.detail = e.what();
        return c;
    }
    for (std::size_t i = 0; i < phi.size(); ++i)
        for (std::size_t j = i + 1; j < phi.size(); ++j) {
            std::set<std::string> a = predicate_symbols(phi[i].body);
            std::set<std::string> shared;
            for (const auto& s : predicate_symbols(phi[j].body))
                if (a.contains(s)) shared.insert(s);
            if (!shared.empty()) {
                c.verdict = Verdict::Fail;
                c.detail = "bodies of " + phi[i].sources.front().fluent + " and " + phi[j].sources.front().fluent +
                           " share " + *shared.begin();
                return c;
            }
        }
    c.verdict = Verdict::Pass;
    c.detail = "bodies use pairwise disjoint fluents";
    return c;
}

Check check_consistent(Instances& inst, const RefinementMapping& m) {
    Check c;
    c.name = "consistent";
    c.bound = inst.bounds().describe();
    std::vector<PhiEntry> phi;
    try {
        phi = phi_set(m);
    } catch (const MappingError& e) {
        c.detail = e.what();
        return c;
    }
    std::vector<std::string> missing;
    for (const auto& e : phi) {
        const Formula ex = Formula::exists(e.vars, e.body);
        bool found = false;
        for (int n = inst.bounds().min_objects; n <= inst.bounds().max_objects && !found; ++n) {
            const Machine& mach = inst.machine(n);
            found = !enumerate_states(mach.layout(), Formula::conj(inst.low().constraint(), ex),
                                      [](const FiniteState&) { return false; });
        }
        if (!found) missing.push_back(print(ex));
    }
    if (missing.empty()) {
        c.verdict = Verdict::Pass;
        c.detail = "each existential closure has a model of the constraints";
    } else {
        c.verdict = Verdict::Unknown;
        c.detail = "no model found for " + missing.front();
    }
    return c;
}

// Bounded equivalence of a witness with a low formula over constraint states.
std::optional<Counterexample> find_difference(Instances& inst, const Formula& witness, const Formula& target) {
    for (int n = inst.bounds().min_objects; n <= inst.bounds().max_objects; ++n) {
        const Machine& mach = inst.machine(n);
        const CompiledFormula w = mach.compile(witness);
        const CompiledFormula t = mach.compile(target);
        for (const auto& s : inst.constraint_states(n)) {
            const bool a = w.holds(s);
            if (a != t.holds(s)) {
                Counterexample cx;
                cx.state = s;
                cx.explanation = std::string("witness is ") + (a ? "true" : "false") + " but the condition is " +
                                 (a ? "false" : "true");
                return cx;
            }
        }
    }
    return std::nullopt;
}

Check check_prop_exists_definable(Instances& inst, const RefinementMapping& m) {
    Check c;
    c.name = "prop-exists-definable";
    c.bound = inst.bounds().describe();
    std::vector<std::string> missing;
    auto verify = [&](const std::string& what, const Formula* w, const Formula& target) -> bool {
        if (!w) {
            missing.push_back(what);
            return true;
        }
        if (!is_prop_exists(*w, m)) {
            c.verdict = Verdict::Fail;
            c.detail = "witness for " + what + " is not a propositional existential formula";
            return false;
        }
        if (auto cx = find_difference(inst, *w, target)) {
            c.verdict = Verdict::Fail;
            c.detail = "witness for " + what + " differs from " + print(target);
            c.counterexample = std::move(cx);
            return false;
        }
        return true;
    };
    try {
        const Formula* iw = m.init_witness ? &*m.init_witness : nullptr;
        if (!verify("init", iw, inst.low().init)) return c;
        for (const auto& a : m.actions) {
            auto g = as_guarded(a.program);
            if (!g) {
                c.detail = a.name + " is not a guarded action";
                return c;
            }
            if (!verify(a.name, m.witness(a.name), executability_condition(inst.low(), *g))) return c;
        }
    } catch (const MappingError& e) {
        c.detail = e.what();
        return c;
    }
    if (!missing.empty()) {
        std::string names;
        for (const auto& s : missing) names += (names.empty() ? "" : ", ") + s;
        c.detail = "missing witness for " + names;
        return c;
    }
    c.verdict = Verdict::Pass;
    c.detail = "witnesses agree with the initial KB and every executability condition on all constraint states";
    return c;
}

Check check_executability_preserving(Instances& inst, const RefinementMapping& m, const CertReport& four) {
    Check c;
    c.name = "executability-preserving";
    c.bound = inst.bounds().describe();
    // Direct spot check: executability of each refinement is a function of
    // the abstract state.
    try {
        for (int n = inst.bounds().min_objects; n <= inst.bounds().max_objects; ++n) {
            const Machine& mach = inst.machine(n);
            const Abstractor abstractor(m, mach.layout());
            std::vector<std::pair<std::string, CompiledFormula>> conds;
            for (const auto& a : m.actions) {
                auto g = as_guarded(a.program);
                if (!g) throw MappingError(a.name + " is not a guarded action");
                conds.emplace_back(a.name, mach.compile(executability_condition(inst.low(), *g)));
            }
            std::map<AbstractState, std::pair<std::vector<bool>, FiniteState>> seen;
            for (const auto& s : inst.executable(n)) {
                EvalCache cache(s);
                std::vector<bool> ex;
                for (const auto& [name, f] : conds) ex.push_back(f.holds(cache));
                auto [it, fresh] = seen.emplace(abstractor(cache), std::make_pair(ex, s));
                if (fresh || it->second.first == ex) continue;
                std::size_t k = 0;
                while (it->second.first[k] == ex[k]) ++k;
                c.verdict = Verdict::Fail;
                c.detail = "two executable states with abstract state " + to_string(it->first) + " disagree on " +
                           conds[k].first;
                Counterexample cx;
                cx.state = s;
                cx.explanation = conds[k].first + (ex[k] ? " executable here but not in " : " not executable here but in ") +
                                 to_string(it->second.second);
                c.counterexample = std::move(cx);
                return c;
            }
        }
    } catch (const MappingError& e) {
        c.detail = e.what();
        return c;
    }
    std::vector<std::string> open;
    for (const char* name : {"consistent", "syntax-irrelevant", "simply-forgettable", "prop-exists-definable"}) {
        const Check* k = four.find(name);
        if (!k || k->verdict != Verdict::Pass) open.push_back(name);
    }
    if (open.empty()) {
        c.verdict = Verdict::Pass;
        c.provenance = "implied by consistent, syntax-irrelevant, simply-forgettable and prop-exists-definable";
        c.detail = "direct spot check agrees on every abstract state";
    } else {
        std::string names;
        for (const auto& s : open) names += (names.empty() ? "" : ", ") + s;
        c.detail = "spot check found no disagreement, but " + names + " did not pass";
    }
    return c;
}

}  // namespace

Check check_simply_forgettable(const BAT& low, const RefinementMapping& m, const DomainBounds& bounds) {
    Check c;
    c.name = "simply-forgettable";
    const int lo = static_cast<int>(low.objects.size());
    const int hi = bounds.forget_max;
    c.bound = "templates of depth " + std::to_string(bounds.template_depth) + ", " + std::to_string(lo) + ".." +
              std::to_string(hi) + " objects in total";
    c.provenance = "sampled propositional existential formulas; unconstrained images over n-1 objects must be "
                   "constrained images over n objects";
    std::vector<Formula> templates;
    try {
        templates = prop_exists_templates(m, bounds.template_depth);
    } catch (const MappingError& e) {
        c.detail = e.what();
        return c;
    }
    Forgetter fg(low, m, bounds.budget);
    const Formula con = low.constraint();
    const Formula top = Formula::top();
    for (const auto& phi : templates) {
        AbstractSet ucon;
        AbstractSet utop;
        AbstractSet utop_prev;
        for (int n = lo; n <= hi; ++n) {
            utop_prev = utop;
            AbstractSet a = fg.project(con, phi, n);
            AbstractSet b = fg.project(top, phi, n);
            ucon.insert(a.begin(), a.end());
            utop.insert(b.begin(), b.end());
            auto missing = [](const AbstractSet& sub, const AbstractSet& sup) -> std::optional<AbstractState> {
                for (const auto& s : sub)
                    if (!sup.contains(s)) return s;
                return std::nullopt;
            };
            std::optional<AbstractState> bad = missing(ucon, utop);
            std::string why = "realized with the constraints but not without";
            if (!bad && n > lo) {
                bad = missing(utop_prev, ucon);
                why = "realized without the constraints over " + std::to_string(n - 1) +
                      " objects but not with them over " + std::to_string(n);
            }
            if (bad) {
                c.verdict = Verdict::Fail;
                c.detail = "for " + print(phi) + ": " + to_string(*bad) + " " + why;
                Counterexample cx;
                cx.explanation = c.detail;
                c.counterexample = std::move(cx);
                return c;
            }
        }
    }
    c.verdict = Verdict::Pass;
    c.detail = std::to_string(templates.size()) + " formulas checked";
    return c;
}

RestrictionResult check_restrictions(Instances& inst, const RefinementMapping& m) {
    RestrictionResult r;
    r.report.add(check_flat(inst.low(), m));
    r.classification = classify_all(inst, m);
    {
        Check c;
        c.name = "complete";
        c.bound = inst.bounds().describe();
        c.verdict = Verdict::Pass;
        bool assumed = false;
        for (const auto& e : r.classification.entries) {
            assumed = assumed || e.assumed;
            if (e.label != Label::Unknown) continue;
            const Verdict v = e.passing.empty() ? Verdict::Fail : Verdict::Unknown;
            if (c.verdict == Verdict::Pass || v == Verdict::Fail) {
                c.verdict = v;
                c.detail = "(" + e.action + ", " + e.fluent + "): " + e.detail;
                for (const auto& k : e.evidence.checks)
                    if (k.counterexample && !c.counterexample) c.counterexample = k.counterexample;
            }
        }
        if (c.verdict == Verdict::Pass) {
            for (const auto& e : r.classification.entries)
                c.detail += (c.detail.empty() ? "" : ", ") + e.action + "/" + e.fluent + "=" + std::string(to_string(e.label));
            c.provenance = assumed ? "verified up to bound, with user assumptions" : "verified up to bound";
        }
        r.report.add(std::move(c));
    }
    CertReport four;
    four.add(check_consistent(inst, m));
    four.add(check_syntax_irrelevant(m));
    four.add(check_simply_forgettable(inst.low(), m, inst.bounds()));
    four.add(check_prop_exists_definable(inst, m));
    r.report.merge(four);
    r.report.add(check_executability_preserving(inst, m, four));
    return r;
}

}  // namespace absynth
