#include "absynth/bisim.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "absynth/print.hpp"
#include "absynth/refinement.hpp"
#include "parallel.hpp"

namespace absynth {

std::vector<std::size_t> TransitionSystem::post(std::size_t from, std::size_t label) const {
    std::vector<std::size_t> out;
    auto it = std::lower_bound(edges.begin(), edges.end(), Edge{from, label, 0});
    for (; it != edges.end() && it->from == from && it->label == label; ++it) out.push_back(it->to);
    return out;
}

std::string TransitionSystem::dump() const {
    std::string out;
    for (const auto& e : edges)
        out += std::to_string(e.from) + " " + labels[e.label] + " " + std::to_string(e.to) + "\n";
    for (std::size_t i = 0; i < states.size(); ++i)
        out += std::to_string(i) + (i == initial ? " initial " : " ") + to_string(states[i]) + "\n";
    return out;
}

namespace {

// Copies a 0-domain state into another layout by fluent names.
FiniteState rehome(const FiniteState& s, const std::shared_ptr<const Layout>& layout) {
    FiniteState out(layout);
    const Vocabulary& from = s.vocab();
    for (std::size_t p = 0; p < from.preds.size(); ++p) {
        if (from.preds[p].arity != 0) throw std::invalid_argument("not a high-level state");
        out.set(from.preds[p].name, {}, s.atom(s.layout().atom(p, {})) == Truth::True);
    }
    for (std::size_t f = 0; f < from.funcs.size(); ++f) out.set_value(from.funcs[f], s.value(f));
    return out;
}

struct Explorer {
    std::unordered_map<FiniteState, std::size_t, StateHash> id;
    TransitionSystem ts;
    std::deque<std::size_t> frontier;
    std::size_t budget;

    std::size_t intern(FiniteState s) {
        auto it = id.find(s);
        if (it != id.end()) return it->second;
        if (ts.states.size() >= budget) return SIZE_MAX;
        const std::size_t k = ts.states.size();
        id.emplace(s, k);
        ts.states.push_back(std::move(s));
        frontier.push_back(k);
        return k;
    }
};

}  // namespace

TransitionSystem build_low_ts(const Machine& low, const RefinementMapping& m, const FiniteState& initial,
                              std::size_t budget) {
    if (!low.init().holds(initial)) throw std::invalid_argument("initial state " + to_string(initial) + " violates the initial KB");
    std::vector<ProgramRunner> runners;
    Explorer x;
    x.budget = budget;
    for (const auto& a : m.actions) {
        x.ts.labels.push_back(a.name);
        runners.emplace_back(low, a.program);
    }
    x.intern(initial);
    while (!x.frontier.empty()) {
        const std::size_t k = x.frontier.front();
        x.frontier.pop_front();
        const FiniteState s = x.ts.states[k];
        for (std::size_t a = 0; a < runners.size(); ++a) {
            for (auto& t : runners[a].run(s)) {
                const std::size_t j = x.intern(std::move(t));
                if (j == SIZE_MAX) throw BudgetExceeded("low transition system exceeds " + std::to_string(budget) + " states");
                x.ts.edges.push_back({k, a, j});
            }
        }
    }
    std::sort(x.ts.edges.begin(), x.ts.edges.end());
    return std::move(x.ts);
}

TransitionSystem build_high_ts(const BAT& high, const AbstractState& initial, std::size_t budget,
                               std::optional<std::int64_t> value_cap) {
    const Machine machine(high, Domain::make({}, 0));
    const FiniteState start = rehome(initial, machine.layout());
    if (!machine.init().holds(start)) throw std::invalid_argument("initial state " + to_string(start) + " violates the initial KB");
    Explorer x;
    x.budget = budget;
    for (const auto& a : high.actions) x.ts.labels.push_back(a.name);
    const Vocabulary& vocab = *machine.layout()->vocab;
    auto growth = [&]() {
        std::string name;
        std::int64_t widest = -1;
        for (std::size_t f = 0; f < vocab.funcs.size(); ++f) {
            std::int64_t lo = INT64_MAX;
            std::int64_t hi = INT64_MIN;
            for (const auto& s : x.ts.states) {
                lo = std::min(lo, s.value(f));
                hi = std::max(hi, s.value(f));
            }
            if (hi - lo > widest) {
                widest = hi - lo;
                name = vocab.funcs[f];
            }
        }
        return name.empty() ? std::string("no functional fluent") : "fluent " + name + " appears unbounded";
    };
    x.intern(start);
    while (!x.frontier.empty()) {
        const std::size_t k = x.frontier.front();
        x.frontier.pop_front();
        const FiniteState s = x.ts.states[k];
        if (value_cap && std::any_of(s.ints().begin(), s.ints().end(),
                                     [&](std::int64_t v) { return v > *value_cap || v < -*value_cap; }))
            continue;
        for (std::size_t a = 0; a < high.actions.size(); ++a) {
            const GroundAction g{high.actions[a].name, {}};
            if (!machine.poss(s, g)) continue;
            FiniteState t = machine.successor(s, g);
            const std::size_t j = x.intern(std::move(t));
            if (j == SIZE_MAX)
                throw BudgetExceeded("high transition system exceeds " + std::to_string(budget) + " states; " + growth());
            x.ts.edges.push_back({k, a, j});
        }
    }
    std::sort(x.ts.edges.begin(), x.ts.edges.end());
    return std::move(x.ts);
}

std::string_view to_string(BisimClause c) {
    switch (c) {
    case BisimClause::Atom: return "atom";
    case BisimClause::Forth: return "forth";
    case BisimClause::Back: return "back";
    }
    return "?";
}

Counterexample BisimCounterexample::to_counterexample() const {
    Counterexample cx;
    cx.state = low.back();
    cx.path = path;
    cx.bindings["initial"] = to_string(low.front());
    cx.bindings["high"] = to_string(high.back());
    switch (clause) {
    case BisimClause::Atom:
        cx.explanation = "atom: low state maps to a different abstract state than the high state";
        break;
    case BisimClause::Forth:
        cx.explanation = "forth: " + action + " is executable in the high state but its refinement has no execution";
        break;
    case BisimClause::Back:
        cx.explanation = "back: the refinement of " + action + " executes but " + action + " is not executable in the high state";
        break;
    }
    return cx;
}

BisimVerdict check_bisim(const TransitionSystem& low, const TransitionSystem& high, const RefinementMapping& m) {
    if (low.labels != high.labels) throw std::invalid_argument("transition systems disagree on their labels");
    BisimVerdict v;
    if (low.states.empty() || high.states.empty()) return v;
    const Abstractor abstractor(m, low.states.front().layout_ptr());
    const std::size_t nl = low.states.size();
    const std::size_t nh = high.states.size();
    const std::size_t labels = low.labels.size();
    // Each low state has one abstraction, so atom-related pairs form a
    // partial function from low to high states.
    std::map<std::vector<std::int64_t>, std::size_t> high_index;
    auto key = [](const FiniteState& s) {
        std::vector<std::int64_t> k(s.ints().begin(), s.ints().end());
        for (auto a : s.atoms()) k.push_back(a);
        return k;
    };
    for (std::size_t h = 0; h < nh; ++h) high_index.emplace(key(rehome(high.states[h], abstractor.high_layout())), h);
    constexpr std::size_t none = SIZE_MAX;
    std::vector<std::size_t> partner(nl, none);
    for (std::size_t l = 0; l < nl; ++l) {
        auto it = high_index.find(key(abstractor(low.states[l])));
        if (it != high_index.end()) partner[l] = it->second;
    }
    // Removal round per low state (0: atom clause), with the reason.
    struct Reason {
        BisimClause clause = BisimClause::Atom;
        std::size_t label = 0;
        std::size_t round = 0;
    };
    std::vector<std::optional<Reason>> removed(nl);
    for (std::size_t l = 0; l < nl; ++l)
        if (partner[l] == none) removed[l] = Reason{};
    auto alive = [&](std::size_t l, std::size_t h) { return !removed[l] && partner[l] == h; };
    for (std::size_t round = 1;; ++round) {
        std::vector<std::pair<std::size_t, Reason>> kill;
        for (std::size_t l = 0; l < nl; ++l) {
            if (removed[l]) continue;
            const std::size_t h = partner[l];
            for (std::size_t a = 0; a < labels; ++a) {
                const auto lp = low.post(l, a);
                const auto hp = high.post(h, a);
                bool forth = true;
                for (std::size_t h2 : hp)
                    forth = forth && std::any_of(lp.begin(), lp.end(), [&](std::size_t l2) { return alive(l2, h2); });
                if (!forth) {
                    kill.push_back({l, Reason{BisimClause::Forth, a, round}});
                    break;
                }
                bool back = true;
                for (std::size_t l2 : lp)
                    back = back && std::any_of(hp.begin(), hp.end(), [&](std::size_t h2) { return alive(l2, h2); });
                if (!back) {
                    kill.push_back({l, Reason{BisimClause::Back, a, round}});
                    break;
                }
            }
        }
        if (kill.empty()) break;
        for (auto& [l, r] : kill) removed[l] = r;
    }
    const std::size_t l0 = low.initial;
    const std::size_t h0 = high.initial;
    if (alive(l0, h0)) {
        v.bisimilar = true;
        for (std::size_t l = 0; l < nl; ++l)
            if (!removed[l]) v.relation.emplace_back(l, partner[l]);
        return v;
    }
    // Descend along the earliest-removed successors to a defect that needs
    // no further justification.
    BisimCounterexample cx;
    std::size_t l = l0;
    std::size_t h = h0;
    auto round_of = [&](std::size_t l2, std::size_t h2) -> std::size_t {
        if (partner[l2] != h2) return 0;
        return removed[l2] ? removed[l2]->round : SIZE_MAX;
    };
    while (true) {
        cx.low.push_back(low.states[l]);
        cx.high.push_back(high.states[h]);
        if (partner[l] != h) {
            cx.clause = BisimClause::Atom;
            break;
        }
        const Reason r = *removed[l];
        cx.clause = r.clause;
        cx.action = low.labels[r.label];
        const auto lp = low.post(l, r.label);
        const auto hp = high.post(h, r.label);
        std::size_t best = SIZE_MAX;
        std::pair<std::size_t, std::size_t> next{none, none};
        if (r.clause == BisimClause::Forth) {
            if (lp.empty()) break;
            // A high successor none of whose low matches survived.
            for (std::size_t h2 : hp) {
                std::size_t worst = 0;
                std::size_t pick = none;
                for (std::size_t l2 : lp) {
                    const std::size_t rr = round_of(l2, h2);
                    if (pick == none || rr > worst) {
                        worst = rr;
                        pick = l2;
                    }
                }
                if (worst < r.round && (next.first == none || worst < best)) {
                    best = worst;
                    next = {pick, h2};
                }
            }
        } else {
            if (hp.empty()) break;
            for (std::size_t l2 : lp) {
                std::size_t worst = 0;
                std::size_t pick = none;
                for (std::size_t h2 : hp) {
                    const std::size_t rr = round_of(l2, h2);
                    if (pick == none || rr > worst) {
                        worst = rr;
                        pick = h2;
                    }
                }
                if (worst < r.round && (next.first == none || worst < best)) {
                    best = worst;
                    next = {l2, pick};
                }
            }
        }
        if (next.first == none) break;
        cx.path.push_back(cx.action);
        l = next.first;
        h = next.second;
    }
    v.counterexample = std::move(cx);
    return v;
}

bool replay(const BAT& low, const RefinementMapping& m, const BAT& high, const BisimCounterexample& cx) {
    if (cx.low.size() != cx.path.size() + 1 || cx.high.size() != cx.path.size() + 1) return false;
    const Machine lm(low, cx.low.front().layout().domain);
    const Machine hm(high, Domain::make({}, 0));
    if (!lm.init().holds(cx.low.front())) return false;
    auto program = [&](const std::string& a) -> const Program* {
        const ActionMapping* am = m.action(a);
        return am ? &am->program : nullptr;
    };
    for (std::size_t i = 0; i < cx.path.size(); ++i) {
        const Program* p = program(cx.path[i]);
        if (!p) return false;
        const auto next = ProgramRunner(lm, *p).run(cx.low[i]);
        if (std::find(next.begin(), next.end(), cx.low[i + 1]) == next.end()) return false;
        const FiniteState h = rehome(cx.high[i], hm.layout());
        const GroundAction g{cx.path[i], {}};
        if (!hm.poss(h, g) || !(hm.successor(h, g) == rehome(cx.high[i + 1], hm.layout()))) return false;
        if (!(rehome(abstract_state(m, cx.low[i]), hm.layout()) == h)) return false;
    }
    const FiniteState h = rehome(cx.high.back(), hm.layout());
    const FiniteState image = rehome(abstract_state(m, cx.low.back()), hm.layout());
    if (cx.clause == BisimClause::Atom) return !(image == h);
    if (!(image == h)) return false;
    const Program* p = program(cx.action);
    if (!p) return false;
    const bool low_moves = !ProgramRunner(lm, *p).run(cx.low.back()).empty();
    const bool high_moves = hm.poss(h, GroundAction{cx.action, {}});
    return cx.clause == BisimClause::Forth ? high_moves && !low_moves : low_moves && !high_moves;
}

Check check_edge_laws(const TransitionSystem& high, const Classification& c) {
    Check check;
    check.name = "edge-laws";
    std::size_t count = 0;
    for (const auto& e : high.edges) {
        const FiniteState& s = high.states[e.from];
        const FiniteState& t = high.states[e.to];
        const std::string& action = high.labels[e.label];
        for (const auto& entry : c.entries) {
            if (entry.action != action) continue;
            const std::string& f = entry.fluent;
            std::string broken;
            switch (entry.label) {
            case Label::Incremental:
                if (t.value(f) != s.value(f) + 1) broken = "does not increase " + f + " by 1";
                break;
            case Label::Decremental:
                if (t.value(f) != s.value(f) - 1) broken = "does not decrease " + f + " by 1";
                break;
            case Label::FnInvariant:
                if (t.value(f) != s.value(f)) broken = "changes " + f;
                break;
            case Label::Enabling:
                if (!t.holds(f)) broken = "leaves " + f + " false";
                break;
            case Label::Disabling:
                if (t.holds(f)) broken = "leaves " + f + " true";
                break;
            case Label::Invariant:
                if (t.holds(f) != s.holds(f)) broken = "changes " + f;
                break;
            case Label::Unknown:
                break;
            }
            ++count;
            if (!broken.empty()) {
                check.verdict = Verdict::Fail;
                check.detail = to_string(s) + " -" + action + "-> " + to_string(t) + " " + broken;
                return check;
            }
        }
    }
    check.verdict = Verdict::Pass;
    check.detail = std::to_string(high.edges.size()) + " edges, " + std::to_string(count) + " laws checked";
    return check;
}

namespace {

struct InstanceResult {
    std::optional<BisimCounterexample> bisim;
    std::optional<Counterexample> condition;  // first per-state condition failure
    std::string condition_name;
    std::size_t low_states = 0;
    std::size_t high_states = 0;
    std::string error;
};

InstanceResult certify_instance(const Machine& lm, const RefinementMapping& m, const BAT& high, const Machine& hm,
                                const FiniteState& initial, std::size_t budget, std::int64_t cap) {
    InstanceResult r;
    const TransitionSystem lts = build_low_ts(lm, m, initial, budget);
    r.low_states = lts.states.size();
    const Abstractor abstractor(m, lm.layout());
    std::vector<FiniteState> images;
    for (const auto& s : lts.states) images.push_back(rehome(abstractor(s), hm.layout()));
    auto fail = [&](std::string name, std::size_t state, std::string why, std::optional<GroundAction> a = {}) {
        Counterexample cx;
        cx.state = lts.states[state];
        cx.action = std::move(a);
        cx.bindings["initial"] = to_string(initial);
        cx.bindings["high"] = to_string(images[state]);
        cx.explanation = std::move(why);
        r.condition = std::move(cx);
        r.condition_name = std::move(name);
    };
    // Initial KB, then per reachable state executability and effects.
    if (!hm.init().holds(images[lts.initial])) {
        fail("initial-kb", lts.initial, "abstract initial state violates the high initial KB");
        return r;
    }
    for (std::size_t k = 0; k < lts.states.size() && !r.condition; ++k) {
        for (std::size_t a = 0; a < lts.labels.size() && !r.condition; ++a) {
            const GroundAction g{lts.labels[a], {}};
            const auto post = lts.post(k, a);
            const bool high_poss = hm.poss(images[k], g);
            if (high_poss != !post.empty()) {
                fail("executability", k,
                     "Poss(" + g.name + ") is " + (high_poss ? "true" : "false") + " but its refinement " +
                         (post.empty() ? "has no execution" : "executes"),
                     g);
                break;
            }
            const FiniteState expect = hm.successor(images[k], g);
            for (std::size_t t : post) {
                if (images[t] == expect) continue;
                std::string diff;
                for (const auto& f : hm.layout()->vocab->preds)
                    if (images[t].holds(f.name) != expect.holds(f.name)) diff += (diff.empty() ? "" : ", ") + f.name;
                for (const auto& f : hm.layout()->vocab->funcs)
                    if (images[t].value(f) != expect.value(f)) diff += (diff.empty() ? "" : ", ") + f;
                fail("effects", k,
                     "after " + g.name + " the refinement reaches " + to_string(images[t]) + " but the high theory predicts " +
                         to_string(expect) + " (differs on " + diff + ")",
                     g);
                break;
            }
        }
    }
    const TransitionSystem hts = build_high_ts(high, images[lts.initial], budget, cap);
    r.high_states = hts.states.size();
    BisimVerdict v = check_bisim(lts, hts, m);
    if (!v.bisimilar) r.bisim = std::move(v.counterexample);
    return r;
}

}  // namespace

CertReport certify(const BAT& low, const RefinementMapping& m, const BAT& high, const DomainBounds& bounds) {
    CertReport report;
    {
        const CertReport v = validate(high);
        if (!v.passed()) {
            Check c;
            c.name = "high-theory";
            c.verdict = Verdict::Fail;
            c.detail = "high theory is not a valid LIBAT";
            report.add(std::move(c));
            report.merge(v);
            return report;
        }
    }
    {
        std::vector<std::string> names;
        for (const auto& a : m.actions) names.push_back(a.name);
        std::vector<std::string> declared;
        for (const auto& a : high.actions) declared.push_back(a.name);
        if (names != declared) throw std::invalid_argument("high theory must declare the mapped actions in mapping order");
    }
    Instances inst(low, bounds);
    const Machine hm(high, Domain::make({}, 0));
    std::set<AbstractState> covered;
    for (int n = bounds.min_objects; n <= bounds.max_objects; ++n) {
        const Machine& lm = inst.machine(n);
        const auto& initial = inst.initial(n);
        // One instance per isomorphism class of initial states.
        std::vector<FiniteState> reps;
        {
            std::set<FiniteState> seen;
            for (const auto& s : initial)
                if (seen.insert(canonical(s)).second) reps.push_back(s);
        }
        const std::string bound = std::to_string(n) + " objects beyond constants";
        const Abstractor abstractor(m, lm.layout());
        for (const auto& s : reps) covered.insert(rehome(abstractor(s), hm.layout()));
        // Counts are bounded by the number of tuples over the domain.
        std::int64_t cap = 1;
        for (const auto& f : m.fluents)
            if (f.functional) {
                std::int64_t t = 1;
                for (std::size_t i = 0; i < f.count.bound().size(); ++i) t *= static_cast<std::int64_t>(lm.domain().size());
                cap = std::max(cap, t);
            }
        std::vector<InstanceResult> results(reps.size());
        detail::parallel_for(reps.size(), bounds.jobs, [&](std::size_t i) {
            results[i] = certify_instance(lm, m, high, hm, reps[i], bounds.budget, cap);
        });
        Check bis;
        bis.name = "bisimilar n=" + std::to_string(n);
        bis.bound = bound;
        Check cond;
        cond.name = "refinement-conditions n=" + std::to_string(n);
        cond.bound = bound;
        if (reps.empty()) {
            bis.detail = cond.detail = "vacuous: no admissible initial states";
            report.add(std::move(bis));
            report.add(std::move(cond));
            continue;
        }
        std::size_t low_total = 0;
        std::size_t high_total = 0;
        for (auto& r : results) {
            low_total += r.low_states;
            high_total += r.high_states;
            if (r.bisim && bis.verdict != Verdict::Fail) {
                bis.verdict = Verdict::Fail;
                bis.counterexample = r.bisim->to_counterexample();
                bis.detail = "initial state " + to_string(r.bisim->low.front()) + " is not m-bisimilar to its abstraction";
            }
            if (r.condition && cond.verdict != Verdict::Fail) {
                cond.verdict = Verdict::Fail;
                cond.detail = r.condition_name + " fails";
                cond.counterexample = std::move(r.condition);
            }
        }
        const std::string sizes = std::to_string(initial.size()) + " initial states (" + std::to_string(reps.size()) +
                                  " up to symmetry), " + std::to_string(low_total) + " low and " +
                                  std::to_string(high_total) + " high states";
        if (bis.verdict != Verdict::Fail) {
            bis.verdict = Verdict::Pass;
            bis.detail = sizes;
        }
        bis.provenance = "greatest m-bisimulation per instance";
        if (cond.verdict != Verdict::Fail) {
            cond.verdict = Verdict::Pass;
            cond.detail = "initial KB, executability and effects agree at every reachable state; " + sizes;
        }
        cond.provenance = "exhaustive over reachable low states";
        report.add(std::move(bis));
        report.add(std::move(cond));

        // High initial states with values up to the largest seen so far must
        // be abstractions of some admissible initial state.
        Check cov;
        cov.name = "initial-coverage n=" + std::to_string(n);
        cov.bound = std::to_string(bounds.min_objects) + ".." + std::to_string(n) + " objects beyond constants";
        std::int64_t vmax = 0;
        for (const auto& s : covered)
            for (auto v : s.ints()) vmax = std::max(vmax, v);
        const auto& vocab = *hm.layout()->vocab;
        const std::size_t np = vocab.preds.size();
        const std::size_t nf = vocab.funcs.size();
        std::vector<std::int64_t> vals(nf, 0);
        std::size_t checked = 0;
        cov.verdict = Verdict::Pass;
        for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << np) && cov.verdict == Verdict::Pass; ++bits) {
            std::fill(vals.begin(), vals.end(), 0);
            do {
                FiniteState h = hm.blank();
                for (std::size_t p = 0; p < np; ++p) h.set_atom(h.layout().atom(p, {}), (bits >> p) & 1 ? Truth::True : Truth::False);
                for (std::size_t f = 0; f < nf; ++f) h.set_value(f, vals[f]);
                if (!hm.init().holds(h)) continue;
                ++checked;
                if (!covered.contains(h)) {
                    cov.verdict = Verdict::Fail;
                    cov.detail = to_string(h) + " satisfies the high initial KB but abstracts no admissible initial state";
                    break;
                }
            } while ([&] {
                for (std::size_t f = nf; f-- > 0;) {
                    if (++vals[f] <= vmax) return true;
                    vals[f] = 0;
                }
                return false;
            }());
        }
        if (cov.verdict == Verdict::Pass)
            cov.detail = std::to_string(checked) + " high initial states with values up to " + std::to_string(vmax);
        report.add(std::move(cov));
    }
    return report;
}

}  // namespace absynth
