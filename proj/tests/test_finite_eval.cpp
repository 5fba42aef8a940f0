#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "absynth/finite_eval.hpp"
#include "absynth/print.hpp"
#include "support.hpp"

using namespace absynth;
using namespace absynth::testing;

namespace {

Machine blocks_machine(std::size_t extra) { return Machine(blocks_low(), Domain::make(blocks_low().objects, extra)); }

// All total states over a layout, by brute force over atom bit vectors.
std::vector<FiniteState> all_states(const Machine& m) {
    const std::size_t n = m.layout()->atom_count;
    std::vector<FiniteState> out;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
        FiniteState s = m.blank();
        for (std::size_t i = 0; i < n; ++i) s.set_atom(i, (bits >> i) & 1 ? Truth::True : Truth::False);
        out.push_back(std::move(s));
    }
    return out;
}

// Sets of ordered lists over n labelled items: 1, 1, 3, 13, 73, 501, ...
std::int64_t sets_of_lists(int n) {
    std::vector<std::int64_t> a{1, 1};
    for (int k = 2; k <= n; ++k) a.push_back((2 * k - 1) * a[k - 1] - (k - 1) * (k - 2) * a[k - 2]);
    return a[static_cast<std::size_t>(n)];
}

// Transitive closure of `on` by Floyd-Warshall.
std::vector<std::vector<bool>> closure(const FiniteState& s) {
    const std::size_t n = s.domain().size();
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) r[i][j] = s.holds("on", {s.domain().objects[i], s.domain().objects[j]});
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) r[i][j] = r[i][j] || (r[i][k] && r[k][j]);
    return r;
}

}  // namespace

TEST(Domain, ConstantsFirst) {
    auto d = Domain::make({"C"}, 3);
    EXPECT_EQ(d->objects, (std::vector<std::string>{"C", "B1", "B2", "B3"}));
    EXPECT_EQ(d->constants, 1u);
    EXPECT_EQ(*d->index("B2"), 2u);
    EXPECT_FALSE(d->index("D"));
}

TEST(Eval, KleeneConnectives) {
    const Machine m = blocks_machine(1);
    FiniteState s = m.blank();
    const std::size_t a = m.layout()->atom(*s.vocab().pred_index("holding"), {1});
    s.set_atom(a, Truth::Unknown);
    auto eval = [&](const std::string& text) {
        return CompiledFormula::compile(low_formula(text), *m.layout(), {Var{"x"}}).eval(s, {1});
    };
    EXPECT_EQ(eval("holding(x)"), Truth::Unknown);
    EXPECT_EQ(eval("holding(x) || true"), Truth::True);
    EXPECT_EQ(eval("holding(x) && false"), Truth::False);
    EXPECT_EQ(eval("!holding(x)"), Truth::Unknown);
    EXPECT_EQ(eval("holding(C)"), Truth::False);
    EXPECT_EQ(eval("exists y. holding(y)"), Truth::Unknown);
    EXPECT_THROW(CompiledFormula::compile(low_formula("holding(x)"), *m.layout(), {Var{"x"}}).holds(s, {1}), EvalError);
}

TEST(Eval, TransitiveClosureMatchesOracle) {
    const Machine m = blocks_machine(3);
    std::mt19937 rng(7);
    const CompiledFormula plus = m.compile(low_formula("on+(x, y)"), {Var{"x"}, Var{"y"}});
    const CompiledFormula star = m.compile(low_formula("on*(x, y)"), {Var{"x"}, Var{"y"}});
    for (int trial = 0; trial < 200; ++trial) {
        FiniteState s = m.blank();
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                if (rng() % 4 == 0) s.set("on", {s.domain().objects[i], s.domain().objects[j]}, true);
        const auto r = closure(s);
        EvalCache cache(s);
        for (std::int64_t i = 0; i < 4; ++i)
            for (std::int64_t j = 0; j < 4; ++j) {
                const bool tc = r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                // on+(x, y) reads x != y && on*(x, y).
                EXPECT_EQ(plus.holds(cache, {i, j}), i != j && tc);
                EXPECT_EQ(star.holds(cache, {i, j}), i == j || tc);
            }
    }
}

TEST(Eval, CountingTerms) {
    const Machine m = blocks_machine(3);
    const FiniteState s = blocks_state(m, {{"B1", "C"}, {"B2", "B1"}}, "B3");
    EXPECT_EQ(eval_term(s, *parse_term("count x. on+(x, C)", nullptr).value), 2);
    EXPECT_EQ(eval_term(s, *parse_term("count x, y. on(x, y)", nullptr).value), 2);
    EXPECT_EQ(eval_term(s, *parse_term("(count x. holding(x)) + 4 - 1", nullptr).value), 4);
    EXPECT_TRUE(eval_formula(s, low_formula("exists x. holding(x) && !(exists y. on(y, x))")));
    EXPECT_TRUE(eval_formula(s, low_formula("on(x, C)"), {{Var{"x"}, Term::obj("B1")}}));
}

TEST(Eval, CongruenceAndArithmetic) {
    const Machine hm(blocks_high(), Domain::make({}, 0));
    FiniteState h = hm.blank();
    h.set_value("Num", 7);
    EXPECT_TRUE(eval_formula(h, high_formula("Num - 1 =[3] 0")));
    EXPECT_FALSE(eval_formula(h, high_formula("Num =[3] 0")));
    EXPECT_TRUE(eval_formula(h, high_formula("Num + Num > 13")));
    h.set_value("Num", INT64_MAX);
    EXPECT_THROW(eval_formula(h, high_formula("Num + 1 > 0")), EvalError);
}

TEST(Machine, SuccessorFollowsCausalClauses) {
    const Machine m = blocks_machine(2);
    const FiniteState s = blocks_state(m, {{"B1", "C"}, {"B2", "B1"}});
    const GroundAction un{"unstack", {"B2", "B1"}};
    ASSERT_TRUE(m.poss(s, un));
    const FiniteState t = m.successor(s, un);
    EXPECT_EQ(to_string(t), to_string(blocks_state(m, {{"B1", "C"}}, "B2")));
    EXPECT_FALSE(m.poss(s, GroundAction{"unstack", {"B1", "C"}}));  // B2 is on B1
    EXPECT_FALSE(m.poss(t, GroundAction{"stack", {"B2", "B2"}}));
    EXPECT_TRUE(m.poss(t, GroundAction{"stack", {"B2", "B1"}}));
    EXPECT_EQ(m.successor(t, GroundAction{"putdown", {"B2"}}), blocks_state(m, {{"B1", "C"}}));
    // Unrelated actions leave fluents unchanged.
    EXPECT_EQ(m.successor(s, GroundAction{"putdown", {"B1"}}), s);
}

TEST(Machine, GroundActionsInDeclarationOrder) {
    const Machine m = blocks_machine(1);
    const auto& g = m.ground_actions();
    ASSERT_EQ(g.size(), 2u + 2u + 4u + 4u);
    EXPECT_EQ(to_string(g.front()), "pickup(C)");
    EXPECT_EQ(to_string(g.back()), "stack(B1, B1)");
}

TEST(Programs, DoSemantics) {
    const Machine m = blocks_machine(2);
    const FiniteState s = blocks_state(m, {{"B1", "C"}, {"B2", "B1"}});
    const auto pick = ProgramRunner(m, low_program("pi x, y. on+(x, C)?; unstack(x, y)")).run(s);
    ASSERT_EQ(pick.size(), 1u);
    EXPECT_EQ(pick.front(), blocks_state(m, {{"B1", "C"}}, "B2"));
    // Failing tests yield no final state; nil keeps the state.
    EXPECT_TRUE(ProgramRunner(m, low_program("false?")).run(s).empty());
    EXPECT_EQ(ProgramRunner(m, Program::nil()).run(s), std::vector<FiniteState>{s});
    // Iteration reaches the empty tower above C and everything in between.
    const auto star = ProgramRunner(m, low_program("(pi x, y. unstack(x, y); pi z. putdown(z))*")).run(s);
    EXPECT_EQ(star.size(), 3u);
    const auto choice = ProgramRunner(m, low_program("pi x. putdown(x) | nil")).run(s);
    EXPECT_EQ(choice.size(), 1u);
}

TEST(Reachability, BudgetMarksIncomplete) {
    const Machine m = blocks_machine(2);
    const FiniteState s = blocks_state(m, {{"B1", "C"}, {"B2", "B1"}});
    const Reachability full = reachable(m, {s}, StepMode::PossOnly);
    EXPECT_TRUE(full.complete);
    EXPECT_EQ(full.states.size(), 22u);
    const Reachability cut = reachable(m, {s}, StepMode::PossOnly, std::nullopt, 5);
    EXPECT_FALSE(cut.complete);
    EXPECT_EQ(cut.states.size(), 5u);
}

TEST(Enumeration, MatchesBruteForce) {
    for (std::size_t extra : {0u, 1u, 2u}) {
        const Machine m = blocks_machine(extra);
        std::set<FiniteState> expected;
        for (const auto& s : all_states(m))
            if (m.constraints().holds(s)) expected.insert(s);
        const auto got = constraint_states(m);
        EXPECT_EQ(std::set<FiniteState>(got.begin(), got.end()), expected) << extra;
        EXPECT_EQ(got.size(), expected.size());
    }
}

TEST(Enumeration, CountsBlocksConfigurations) {
    // Towers over n objects with an empty gripper, plus n choices of the
    // held block over the remaining towers.
    for (int extra = 0; extra <= 4; ++extra) {
        const int n = extra + 1;
        const Machine m = blocks_machine(static_cast<std::size_t>(extra));
        EXPECT_EQ(static_cast<std::int64_t>(constraint_states(m).size()), sets_of_lists(n) + n * sets_of_lists(n - 1))
            << n << " objects";
    }
}

TEST(Canonical, InvariantUnderRenaming) {
    const Machine m = blocks_machine(3);
    const FiniteState a = blocks_state(m, {{"B1", "C"}, {"B2", "B1"}}, "B3");
    const FiniteState b = blocks_state(m, {{"B3", "C"}, {"B1", "B3"}}, "B2");
    EXPECT_EQ(canonical(a), canonical(b));
    EXPECT_NE(canonical(a), canonical(blocks_state(m, {{"B1", "C"}}, "B3")));
    EXPECT_EQ(canonical(canonical(a)), canonical(a));
}

TEST(Canonical, OrbitCountsMatchBruteForce) {
    const Machine m = blocks_machine(3);
    const auto states = constraint_states(m);
    std::set<FiniteState> classes;
    for (const auto& s : states) classes.insert(canonical(s));
    // Oracle: orbits under all permutations of B1..B3 by explicit renaming.
    std::set<std::vector<std::uint8_t>> orbits;
    std::vector<std::size_t> perm{1, 2, 3};
    const auto& layout = *m.layout();
    for (const auto& s : states) {
        std::vector<std::uint8_t> best;
        std::vector<std::size_t> p = perm;
        do {
            std::vector<std::size_t> map{0, p[0], p[1], p[2]};
            std::vector<std::uint8_t> img(s.atoms().size());
            for (std::size_t i = 0; i < s.atoms().size(); ++i) {
                auto [pred, args] = layout.decode(i);
                for (auto& x : args) x = map[x];
                img[layout.atom(pred, args)] = s.atoms()[i];
            }
            if (best.empty() || img < best) best = img;
        } while (std::next_permutation(p.begin(), p.end()));
        orbits.insert(best);
    }
    EXPECT_EQ(classes.size(), orbits.size());
}

TEST(Admissible, MatchesReachabilityOracle) {
    for (std::size_t extra : {1u, 2u, 3u}) {
        const Machine m = blocks_machine(extra);
        const InitialStates got = admissible_initial_states(m);
        std::vector<FiniteState> expected;
        std::size_t rejected = 0;
        for (const auto& s : constraint_states(m)) {
            if (!m.init().holds(s)) continue;
            const Reachability r = reachable(m, {s}, StepMode::PossOnly);
            const bool ok = std::all_of(r.states.begin(), r.states.end(), [&](const FiniteState& t) { return m.constraints().holds(t); });
            if (ok)
                expected.push_back(s);
            else
                ++rejected;
        }
        EXPECT_EQ(std::set<FiniteState>(got.admissible.begin(), got.admissible.end()),
                  std::set<FiniteState>(expected.begin(), expected.end()));
        EXPECT_EQ(got.rejected, rejected);
    }
}

TEST(Admissible, RejectsStatesReachingViolations) {
    // Without the on-table condition, picking up a block that sits on
    // another leaves it both held and on.
    BAT low = blocks_low();
    for (auto& a : low.actions)
        if (a.name == "pickup") a.poss = low_formula("!(exists y. on(y, x)) && !(exists y. holding(y))");
    const Machine m(low, Domain::make(low.objects, 1));
    const InitialStates got = admissible_initial_states(m);
    EXPECT_TRUE(got.admissible.empty());
    EXPECT_EQ(got.rejected, 1u);
}

TEST(Abstraction, MappedValues) {
    const Machine m = blocks_machine(3);
    const FiniteState s = blocks_state(m, {{"B1", "C"}, {"B2", "B1"}}, "B3");
    const AbstractState h = abstract_state(blocks_mapping(), s);
    EXPECT_EQ(to_string(h), "{Holding:true, Num:2}");
    EXPECT_EQ(h, make_abstract(Vocabulary::of(blocks_mapping()), {{"Holding", 1}, {"Num", 2}}));
}

TEST(Printing, LowStates) {
    const Machine m = blocks_machine(2);
    EXPECT_EQ(to_string(blocks_state(m, {{"B1", "C"}}, "B2")), "{holding(B2), on(B1, C)}");
}
