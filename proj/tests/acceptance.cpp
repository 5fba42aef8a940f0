// Acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "absynth/bisim.hpp"
#include "absynth/cli.hpp"
#include "absynth/print.hpp"
#include "absynth/synth.hpp"
#include "absynth/transform.hpp"
#include "absynth/verifier.hpp"
#include "support.hpp"

using namespace absynth;
using namespace absynth::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt_seconds(double s) {
    std::ostringstream o;
    o.precision(2);
    o << std::fixed << s << " s";
    return o.str();
}

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

DomainBounds bounds(int lo, int hi) {
    DomainBounds b;
    b.min_objects = lo;
    b.max_objects = hi;
    b.jobs = default_jobs();
    return b;
}

Var v(const std::string& n) { return Var{n, Sort::Object}; }

// Shared between criteria: the classification at 2..5 and the synthesized theory.
std::optional<Classification> g_labels;
std::optional<BAT> g_synthesized;

// ---------------------------------------------------------------- 1

Outcome golden_synthesis() {
    const auto t0 = Clock::now();
    const CliRun r = cli({"synth", fixture("blocks_world.abs")});
    const double total = seconds_since(t0);
    if (r.code != kExitOk) return {false, "synth exited " + std::to_string(r.code) + ": " + r.err};
    const BAT got = *parse_text(r.out).high();
    g_synthesized = got;
    std::vector<std::string> bad;
    if (got.init != normalize(high_formula("!Holding && Num > 0"))) bad.push_back("init " + print(got.init));
    if (got.action("Putdown")->poss != normalize(high_formula("Holding"))) bad.push_back("Poss(Putdown)");
    if (got.action("PickAboveC")->poss != normalize(high_formula("!Holding && Num > 0"))) bad.push_back("Poss(PickAboveC)");
    for (const char* f : {"Holding", "Num"})
        if (!same_ssa(got, blocks_high(), f)) bad.push_back(std::string("ssa ") + f);
    // The synthesis step alone, given the labels.
    const auto t1 = Clock::now();
    Classification c;
    for (auto [a, f, l] : {std::tuple{"PickAboveC", "Num", Label::Decremental},
                           std::tuple{"PickAboveC", "Holding", Label::Enabling},
                           std::tuple{"Putdown", "Num", Label::FnInvariant},
                           std::tuple{"Putdown", "Holding", Label::Disabling}}) {
        ClassEntry e;
        e.action = a;
        e.fluent = f;
        e.label = l;
        c.entries.push_back(e);
    }
    SynthOptions so;
    so.simplify = true;
    const BAT direct = synthesize({&blocks_low(), &blocks_mapping(), &c, nullptr}, so).high;
    const double step = seconds_since(t1);
    if (print(direct) != r.out) bad.push_back("direct synthesis differs from the command output");
    if (step >= 1.0) bad.push_back("synthesis took " + fmt_seconds(step));
    if (!bad.empty()) {
        std::string d;
        for (const auto& b : bad) d += (d.empty() ? "" : "; ") + b;
        return {false, d};
    }
    return {true, "init, both preconditions and both SSAs match; synthesis " + fmt_seconds(step) +
                      ", command with restriction checks " + fmt_seconds(total)};
}

// ---------------------------------------------------------------- 2

Outcome classification() {
    const auto t0 = Clock::now();
    Instances inst(blocks_low(), bounds(2, 5));
    const Classification c = classify_all(inst, blocks_mapping());
    const double t = seconds_since(t0);
    g_labels = c;
    const std::map<std::pair<std::string, std::string>, Label> want = {
        {{"Putdown", "Holding"}, Label::Disabling},
        {{"Putdown", "Num"}, Label::FnInvariant},
        {{"PickAboveC", "Holding"}, Label::Enabling},
        {{"PickAboveC", "Num"}, Label::Decremental}};
    std::map<std::pair<std::string, std::string>, Label> got;
    for (const auto& e : c.entries) got[{e.action, e.fluent}] = e.label;
    if (got != want) {
        std::string d;
        for (const auto& e : c.entries) d += e.action + "/" + e.fluent + "=" + std::string(to_string(e.label)) + " ";
        return {false, "labels " + d};
    }
    if (t >= 30.0) return {false, "labels match but took " + fmt_seconds(t)};
    return {true, "4 labels as expected at 2..5 objects beyond C in " + fmt_seconds(t)};
}

// ---------------------------------------------------------------- 3

Outcome property_suite() {
    Instances inst(blocks_low(), bounds(1, 5));
    const auto put = *as_guarded(low_program("pi x. putdown(x)"));
    const auto pick = *as_guarded(low_program("pi x, y. on+(x, C)?; unstack(x, y)"));
    std::vector<std::string> bad;
    auto expect = [&](const Check& c, const std::string& what) {
        if (c.verdict != Verdict::Pass) bad.push_back(what + ": " + c.detail);
    };
    expect(check_alt_enabling(inst, put, low_formula("!holding(x)"), {v("x")}), "putdown alt !holding(x)");
    expect(check_single_enabling(inst, pick, low_formula("!on+(x, C)"), {v("x")}), "unstack single !on+(x, C)");
    expect(check_invariant(inst, put, low_formula("on+(y, C)"), {v("y")}), "putdown invariant on+(y, C)");
    expect(check_exclusive(inst, low_formula("holding(x)"), {v("x")}), "holding exclusive");

    struct Mutant {
        std::string program;
        std::string phi;
        std::vector<Var> y;
        std::string kind;
    };
    const std::vector<Mutant> mutants = {
        {"pi x. putdown(x)", "holding(x)", {v("x")}, "alt"},
        {"pi x, y. unstack(x, y)", "!on+(x, C)", {v("x")}, "single"},
        {"pi x, y. on+(x, C)?; unstack(x, y)", "on+(y, C)", {v("y")}, "invariant"},
        {"pi x. pickup(x)", "!holding(x)", {v("x")}, "alt"},
        {"pi x, y. on+(x, C)?; unstack(x, y)", "on+(x, C)", {v("x")}, "single"},
        {"", "on(x, y)", {v("x"), v("y")}, "exclusive"},
    };
    int refuted = 0;
    for (const auto& mu : mutants) {
        const auto g = *as_guarded(low_program(mu.program.empty() ? "pi x. putdown(x)" : mu.program));
        const Formula phi = low_formula(mu.phi);
        Check c;
        if (mu.kind == "alt") c = check_alt_enabling(inst, g, phi, mu.y);
        if (mu.kind == "single") c = check_single_enabling(inst, g, phi, mu.y);
        if (mu.kind == "invariant") c = check_invariant(inst, g, phi, mu.y);
        if (mu.kind == "exclusive") c = check_exclusive(inst, phi, mu.y);
        if (c.verdict == Verdict::Fail && replay_counterexample(blocks_low(), c, g, phi, mu.y, mu.kind))
            ++refuted;
        else
            bad.push_back("mutant " + mu.kind + " " + mu.phi + " not refuted with a replayable counterexample");
    }
    if (!bad.empty()) return {false, bad.front()};
    return {true, "4 claims pass up to 5 objects beyond C; " + std::to_string(refuted) + " mutants refuted and replayed"};
}

// ---------------------------------------------------------------- 4

Formula random_prop_exists(std::mt19937& rng, const std::vector<Formula>& atoms, int depth) {
    std::uniform_int_distribution<int> pick(0, depth == 0 ? 0 : 3);
    switch (pick(rng)) {
    case 1: return Formula::negate(random_prop_exists(rng, atoms, depth - 1));
    case 2: return Formula::conj(random_prop_exists(rng, atoms, depth - 1), random_prop_exists(rng, atoms, depth - 1));
    case 3: return Formula::disj(random_prop_exists(rng, atoms, depth - 1), random_prop_exists(rng, atoms, depth - 1));
    default: return atoms[std::uniform_int_distribution<std::size_t>(0, atoms.size() - 1)(rng)];
    }
}

Outcome forgetting_oracle() {
    const RefinementMapping& m = blocks_mapping();
    Forgetter fg(blocks_low(), m);
    const std::vector<Formula> templates = prop_exists_templates(m, 2);
    std::vector<Formula> samples = templates;
    std::vector<Formula> atoms;
    for (const auto& e : phi_set(m)) atoms.push_back(Formula::exists(e.vars, e.body));
    std::mt19937 rng(2024);
    for (int i = 0; i < 120; ++i) samples.push_back(random_prop_exists(rng, atoms, 3 + i % 3));
    const auto vocab = Vocabulary::of(m);
    std::size_t compared = 0;
    for (int n = 1; n <= 4; ++n)
        for (const auto& phi : samples) {
            // Without constraints, Holding is free and any of the n-1 blocks
            // other than C may sit above it.
            const Formula high = inverse_translate(phi, m);
            AbstractSet want;
            for (std::int64_t h = 0; h <= 1; ++h)
                for (std::int64_t k = 0; k < n; ++k) {
                    AbstractState s = make_abstract(vocab, {{"Holding", h}, {"Num", k}});
                    if (eval_formula(s, high)) want.insert(s);
                }
            if (fg.project(Formula::top(), phi, n) != want)
                return {false, "mismatch for " + print(phi) + " over " + std::to_string(n) + " objects"};
            ++compared;
        }
    return {true, std::to_string(templates.size()) + " templates and " + std::to_string(samples.size() - templates.size()) +
                      " deeper samples agree at 1..4 objects (" + std::to_string(compared) + " set comparisons)"};
}

// ---------------------------------------------------------------- 5

Outcome simple_forgettability() {
    DomainBounds b = bounds(1, 4);
    b.template_depth = 2;
    b.forget_max = 4;
    const Check ok = check_simply_forgettable(blocks_low(), blocks_mapping(), b);
    if (ok.verdict != Verdict::Pass) return {false, "fixture: " + ok.detail};
    RefinementMapping m = blocks_mapping();
    m.fluents.push_back({"HeldOn", false, low_formula("exists x, y. holding(x) && on(x, y)")});
    const Check bad = check_simply_forgettable(blocks_low(), m, b);
    if (bad.verdict != Verdict::Fail) return {false, "coupled mapping not refuted"};
    return {true, "fixture passes (" + ok.detail + "); HeldOn mapping refuted: " + bad.detail};
}

// ---------------------------------------------------------------- 6

Outcome certification() {
    const auto t0 = Clock::now();
    const CertReport r = certify(blocks_low(), blocks_mapping(), g_synthesized ? *g_synthesized : blocks_high(), bounds(2, 4));
    const double t = seconds_since(t0);
    for (const auto& c : r.checks)
        if (c.verdict != Verdict::Pass) return {false, c.name + ": " + c.detail};
    for (int n = 2; n <= 4; ++n)
        for (const char* k : {"bisimilar n=", "refinement-conditions n="})
            if (!r.find(k + std::to_string(n))) return {false, std::string("missing ") + k + std::to_string(n)};
    if (t >= 300.0) return {false, "took " + fmt_seconds(t)};
    return {true, "bisimilar with all refinement conditions at 2, 3, 4 objects beyond C in " + fmt_seconds(t) + "; " +
                      r.find("bisimilar n=4")->detail};
}

// ---------------------------------------------------------------- 7

// Finds a defect instance by instance and re-executes it with the
// finite-state semantics.
std::string replay_defect(const BAT& low, const RefinementMapping& m, const BAT& high, const DomainBounds& b) {
    Instances inst(low, b);
    const Machine hm(high, Domain::make({}, 0));
    std::set<std::string> realized;
    for (int n = b.min_objects; n <= b.max_objects; ++n) {
        const Machine& lm = inst.machine(n);
        for (const auto& s : inst.initial(n)) {
            const AbstractState a = abstract_state(m, s);
            FiniteState h = hm.blank();
            for (const auto& p : h.vocab().preds) h.set(p.name, {}, a.holds(p.name));
            for (const auto& f : h.vocab().funcs) h.set_value(f, a.value(f));
            realized.insert(to_string(h));
            if (!hm.init().holds(h)) {
                if (eval_formula(s, low.init)) return "initial-kb at " + to_string(s);
                continue;
            }
            const TransitionSystem lo = build_low_ts(lm, m, s, b.budget);
            const TransitionSystem hi = build_high_ts(high, h);
            const BisimVerdict bv = check_bisim(lo, hi, m);
            if (!bv.bisimilar && bv.counterexample && replay(low, m, high, *bv.counterexample))
                return std::string(to_string(bv.counterexample->clause)) + " after " +
                       std::to_string(bv.counterexample->path.size()) + " steps from " + to_string(s);
        }
    }
    // A high initial state that no admissible low initial state realizes.
    for (int holding = 0; holding <= 1; ++holding)
        for (std::int64_t k = 0; k <= b.max_objects; ++k) {
            FiniteState h = hm.blank();
            h.set("Holding", {}, holding);
            h.set_value("Num", k);
            if (hm.init().holds(h) && !realized.contains(to_string(h))) return "uncovered initial state " + to_string(h);
        }
    return {};
}

Outcome mutation_sensitivity() {
    struct Mutant {
        std::string name;
        std::string low;
        std::string high;
    };
    const std::vector<Mutant> mutants = {
        {"precondition flipped", "blocks_world.abs", "mutants/precondition_flipped.abs"},
        {"guard dropped", "mutants/guard_dropped.abs", "blocks_world_high.abs"},
        {"decrement off by one", "blocks_world.abs", "mutants/decrement_off_by_one.abs"},
        {"add/delete swapped", "blocks_world.abs", "mutants/effects_swapped.abs"},
        {"high initial KB weakened", "blocks_world.abs", "mutants/high_init_weakened.abs"},
        {"low initial KB weakened", "mutants/low_init_weakened.abs", "blocks_world_high.abs"},
    };
    const DomainBounds b = bounds(1, 3);
    std::string d;
    for (const auto& mu : mutants) {
        const Document lo = load(mu.low);
        const Document hi = load(mu.high);
        const CertReport r = certify(*lo.low(), *lo.mapping(), *hi.high(), b);
        if (r.overall() != Verdict::Fail) return {false, mu.name + " certified"};
        const std::string why = replay_defect(*lo.low(), *lo.mapping(), *hi.high(), b);
        if (why.empty()) return {false, mu.name + ": no replayable counterexample"};
        d += (d.empty() ? "" : "; ") + mu.name + " (" + why + ")";
    }
    return {true, std::to_string(mutants.size()) + " mutants refuted: " + d};
}

// ---------------------------------------------------------------- 8

Outcome edge_laws() {
    if (!g_labels) return {false, "no classification"};
    const BAT& high = g_synthesized ? *g_synthesized : blocks_high();
    Instances inst(blocks_low(), bounds(2, 4));
    std::set<std::string> starts;
    std::size_t systems = 0;
    std::size_t edges = 0;
    for (int n = 2; n <= 4; ++n)
        for (const auto& s : inst.initial(n)) {
            const AbstractState a = abstract_state(blocks_mapping(), s);
            if (!starts.insert(to_string(a)).second) continue;
            const TransitionSystem t = build_high_ts(high, a);
            const Check c = check_edge_laws(t, *g_labels);
            if (c.verdict != Verdict::Pass) return {false, "from " + to_string(a) + ": " + c.detail};
            ++systems;
            edges += t.edges.size();
        }
    return {true, std::to_string(systems) + " high systems, " + std::to_string(edges) + " edges, zero violations"};
}

// ---------------------------------------------------------------- 9

std::string print_document(const Document& d) {
    std::string text;
    for (const auto& b : d.bats) text += print(b);
    for (const auto& m : d.mappings) text += print(m);
    return text;
}

bool same_axioms(const Document& a, const Document& b, std::string& why) {
    if (a.bats.size() != b.bats.size() || a.mappings.size() != b.mappings.size()) {
        why = "different number of blocks";
        return false;
    }
    for (std::size_t i = 0; i < a.bats.size(); ++i) {
        const BAT& x = a.bats[i];
        const BAT& y = b.bats[i];
        bool ok = x.name == y.name && alpha_equal(x.init, y.init) && x.actions.size() == y.actions.size() &&
                  x.constraints.size() == y.constraints.size() && x.fluents.size() == y.fluents.size();
        for (std::size_t k = 0; ok && k < x.actions.size(); ++k)
            ok = x.actions[k].name == y.actions[k].name && alpha_equal(x.actions[k].poss, y.actions[k].poss);
        for (std::size_t k = 0; ok && k < x.constraints.size(); ++k) ok = alpha_equal(x.constraints[k], y.constraints[k]);
        for (std::size_t k = 0; ok && k < x.fluents.size(); ++k)
            ok = render_ssa(x, x.fluents[k].name) == render_ssa(y, y.fluents[k].name);
        if (!ok) {
            why = "theory " + x.name + " changed";
            return false;
        }
    }
    for (std::size_t i = 0; i < a.mappings.size(); ++i) {
        const RefinementMapping& x = a.mappings[i];
        const RefinementMapping& y = b.mappings[i];
        bool ok = x.fluents.size() == y.fluents.size() && x.actions.size() == y.actions.size() &&
                  x.action_witnesses.size() == y.action_witnesses.size();
        for (std::size_t k = 0; ok && k < x.fluents.size(); ++k)
            ok = x.fluents[k].functional ? x.fluents[k].count == y.fluents[k].count
                                         : alpha_equal(x.fluents[k].formula, y.fluents[k].formula);
        for (std::size_t k = 0; ok && k < x.actions.size(); ++k) ok = x.actions[k].program == y.actions[k].program;
        if (ok && x.init_witness) ok = y.init_witness && alpha_equal(*x.init_witness, *y.init_witness);
        for (const auto& [name, w] : x.action_witnesses)
            ok = ok && y.action_witnesses.contains(name) && alpha_equal(w, y.action_witnesses.at(name));
        if (!ok) {
            why = "mapping " + x.name + " changed";
            return false;
        }
    }
    return true;
}

Outcome round_trip_and_determinism() {
    std::size_t files = 0;
    std::vector<fs::path> paths;
    for (const auto& e : fs::recursive_directory_iterator(ABSYNTH_FIXTURES))
        if (e.path().extension() == ".abs") paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
        const Document d = parse_text(read_file(p.string()));
        const std::string once = print_document(d);
        const Document back = parse_text(once);
        std::string why;
        if (print_document(back) != once || !same_axioms(d, back, why))
            return {false, p.filename().string() + ": " + (why.empty() ? "printing is not stable" : why)};
        ++files;
    }
    const std::string low = fixture("blocks_world.abs");
    const std::string mutant = fixture("mutants/decrement_off_by_one.abs");
    const std::vector<std::vector<std::string>> commands = {
        {"synth", low},
        {"check", low, "--bounds", "1..3", "--report", "json"},
        {"certify", low, "--bounds", "1..3", "--report", "json"},
        {"certify", low, mutant, "--bounds", "1..3"},
    };
    for (const auto& cmd : commands) {
        std::string first;
        for (int run = 0; run < 3; ++run) {
            std::vector<std::string> args = cmd;
            args.push_back("--jobs");
            args.push_back(std::to_string(run + 1));
            const CliRun r = cli(args);
            if (run == 0) first = r.out;
            if (r.out != first) return {false, cmd[0] + " output differs between runs with --jobs 1 and " + std::to_string(run + 1)};
        }
    }
    return {true, std::to_string(files) + " fixture files round-trip; " + std::to_string(commands.size()) +
                      " commands byte-identical across 3 runs with 1..3 jobs"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"golden synthesis", golden_synthesis},
        {"classification", classification},
        {"guarded-action properties", property_suite},
        {"forgetting oracle", forgetting_oracle},
        {"simple forgettability", simple_forgettability},
        {"end-to-end certification", certification},
        {"mutation sensitivity", mutation_sensitivity},
        {"edge laws", edge_laws},
        {"round-trip and determinism", round_trip_and_determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << i + 1 << " " << criteria[i].first << ": " << o.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
