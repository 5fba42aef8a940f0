#include <gtest/gtest.h>

#include <random>

#include "absynth/bisim.hpp"
#include "absynth/print.hpp"
#include "support.hpp"

using namespace absynth;
using namespace absynth::testing;

namespace {

const char* const kHighText = R"(bat high H {
  fluent Holding;
  fluent Num : int;
  action PickAboveC poss %PICK%;
  action Putdown poss %PUT%;
  ssa Holding {
    add PickAboveC;
    del Putdown;
  }
  ssa Num {
    set PickAboveC = %NUM%;
  }
  init !Holding && Num > 0;
}
)";

BAT high_variant(const std::string& pick, const std::string& put, const std::string& num) {
    std::string text = kHighText;
    auto put_in = [&](const std::string& key, const std::string& value) { text.replace(text.find(key), key.size(), value); };
    put_in("%PICK%", pick);
    put_in("%PUT%", put);
    put_in("%NUM%", num);
    return *parse_text(text).high();
}

Classification blocks_labels() {
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
    return c;
}

AbstractState high_state(bool holding, std::int64_t num) {
    const Machine hm(blocks_high(), Domain::make({}, 0));
    FiniteState s = hm.blank();
    s.set("Holding", {}, holding);
    s.set_value("Num", num);
    return s;
}

// Greatest relation over all pairs with equal abstractions that is closed
// under forth and back, by naive iteration.
std::set<std::pair<std::size_t, std::size_t>> brute_bisim(const TransitionSystem& lo, const TransitionSystem& hi,
                                                         const RefinementMapping& m) {
    std::set<std::pair<std::size_t, std::size_t>> r;
    for (std::size_t i = 0; i < lo.states.size(); ++i)
        for (std::size_t j = 0; j < hi.states.size(); ++j)
            if (to_string(abstract_state(m, lo.states[i])) == to_string(hi.states[j])) r.insert({i, j});
    for (bool changed = true; changed;) {
        changed = false;
        for (auto it = r.begin(); it != r.end();) {
            bool ok = true;
            for (std::size_t a = 0; a < lo.labels.size() && ok; ++a) {
                for (auto l2 : lo.post(it->first, a)) {
                    bool match = false;
                    for (auto h2 : hi.post(it->second, a)) match = match || r.contains({l2, h2});
                    ok = ok && match;
                }
                for (auto h2 : hi.post(it->second, a)) {
                    bool match = false;
                    for (auto l2 : lo.post(it->first, a)) match = match || r.contains({l2, h2});
                    ok = ok && match;
                }
            }
            if (ok) {
                ++it;
            } else {
                it = r.erase(it);
                changed = true;
            }
        }
    }
    return r;
}

}  // namespace

TEST(Systems, LowFromTowerOfThree) {
    const Machine lm(blocks_low(), Domain::make(blocks_low().objects, 3));
    const FiniteState s = blocks_state(lm, {{"B1", "C"}, {"B2", "B1"}, {"B3", "B2"}});
    const TransitionSystem t = build_low_ts(lm, blocks_mapping(), s);
    EXPECT_EQ(t.labels, (std::vector<std::string>{"PickAboveC", "Putdown"}));
    EXPECT_EQ(t.states[t.initial], s);
    // Unstack the top, put it down, and so on: 7 states in a line.
    EXPECT_EQ(t.states.size(), 7u);
    EXPECT_EQ(t.edges.size(), 6u);
    EXPECT_TRUE(std::is_sorted(t.edges.begin(), t.edges.end()));
    EXPECT_THROW(build_low_ts(lm, blocks_mapping(), blocks_state(lm, {}, "B1")), std::invalid_argument);
}

TEST(Systems, HighFromNumThree) {
    const TransitionSystem t = build_high_ts(blocks_high(), high_state(false, 3));
    // Holding with Num 3 is never reached.
    EXPECT_EQ(t.states.size(), 7u);
    std::set<std::string> seen;
    for (const auto& s : t.states) seen.insert(to_string(s));
    EXPECT_FALSE(seen.contains(to_string(high_state(true, 3))));
    EXPECT_TRUE(seen.contains(to_string(high_state(false, 0))));
    EXPECT_THROW(build_high_ts(blocks_high(), high_state(true, 1)), std::invalid_argument);
}

TEST(Systems, HighWithoutMovesAndUnbounded) {
    const BAT grow = high_variant("true", "Holding", "Num + 1");
    try {
        build_high_ts(grow, high_state(false, 1), 1000);
        FAIL() << "expected the state budget to run out";
    } catch (const BudgetExceeded& e) {
        EXPECT_NE(std::string(e.what()).find("Num"), std::string::npos) << e.what();
    }
    const BAT stuck = high_variant("false", "false", "Num - 1");
    const TransitionSystem t = build_high_ts(stuck, high_state(false, 2));
    EXPECT_EQ(t.states.size(), 1u);
    EXPECT_TRUE(t.edges.empty());
    // With a cap the growing system stops at the first state beyond it.
    const TransitionSystem capped = build_high_ts(grow, high_state(false, 1), 1000, 5);
    EXPECT_EQ(capped.states.size(), 10u);
}

TEST(Bisim, FixtureInstancesAreBisimilar) {
    const Machine lm(blocks_low(), Domain::make(blocks_low().objects, 3));
    for (const auto& on : std::vector<std::vector<std::pair<std::string, std::string>>>{
             {{"B1", "C"}},
             {{"B1", "C"}, {"B2", "B1"}, {"B3", "B2"}},
             {{"B1", "C"}, {"B3", "B2"}},
             {{"B2", "C"}, {"B1", "B2"}, {"C", "B3"}}}) {
        const FiniteState s = blocks_state(lm, on);
        const TransitionSystem lo = build_low_ts(lm, blocks_mapping(), s);
        const TransitionSystem hi = build_high_ts(blocks_high(), abstract_state(blocks_mapping(), s));
        const BisimVerdict v = check_bisim(lo, hi, blocks_mapping());
        EXPECT_TRUE(v.bisimilar) << to_string(s);
        const auto brute = brute_bisim(lo, hi, blocks_mapping());
        EXPECT_EQ(std::set(v.relation.begin(), v.relation.end()), brute) << to_string(s);
    }
}

TEST(Bisim, AgreesWithBruteForceOnRandomSystems) {
    const Machine lm(blocks_low(), Domain::make(blocks_low().objects, 2));
    const std::vector<FiniteState> pool = constraint_states(lm);
    ASSERT_GT(pool.size(), 12u);
    const Abstractor abs(blocks_mapping(), lm.layout());
    std::mt19937 rng(11);
    int agreed_bisimilar = 0;
    for (int round = 0; round < 300; ++round) {
        TransitionSystem lo;
        TransitionSystem hi;
        lo.labels = hi.labels = {"PickAboveC", "Putdown"};
        std::set<std::size_t> picked;
        while (picked.size() < 6) picked.insert(std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng));
        for (auto i : picked) lo.states.push_back(pool[i]);
        // High states are the distinct abstractions, so every low state has a partner.
        std::map<std::string, std::size_t> index;
        std::vector<std::size_t> image;
        const Machine hm(blocks_high(), Domain::make({}, 0));
        for (const auto& s : lo.states) {
            AbstractState a = abs(s);
            FiniteState h = hm.blank();
            h.set("Holding", {}, a.holds("Holding"));
            h.set_value("Num", a.value("Num"));
            auto [it, fresh] = index.emplace(to_string(h), hi.states.size());
            if (fresh) hi.states.push_back(h);
            image.push_back(it->second);
        }
        std::bernoulli_distribution coin(0.2);
        for (std::size_t i = 0; i < lo.states.size(); ++i)
            for (std::size_t a = 0; a < 2; ++a)
                for (std::size_t j = 0; j < lo.states.size(); ++j)
                    if (coin(rng)) {
                        lo.edges.push_back({i, a, j});
                        // Mirror most edges so that both verdicts occur.
                        if (!coin(rng)) hi.edges.push_back({image[i], a, image[j]});
                    }
        std::sort(lo.edges.begin(), lo.edges.end());
        std::sort(hi.edges.begin(), hi.edges.end());
        hi.edges.erase(std::unique(hi.edges.begin(), hi.edges.end()), hi.edges.end());
        hi.initial = image[0];
        const BisimVerdict v = check_bisim(lo, hi, blocks_mapping());
        const auto brute = brute_bisim(lo, hi, blocks_mapping());
        ASSERT_EQ(v.bisimilar, brute.contains({lo.initial, hi.initial})) << "round " << round;
        if (v.bisimilar) {
            ++agreed_bisimilar;
            EXPECT_EQ(std::set(v.relation.begin(), v.relation.end()), brute) << "round " << round;
        } else {
            ASSERT_TRUE(v.counterexample);
            EXPECT_EQ(v.counterexample->low.size(), v.counterexample->path.size() + 1);
            EXPECT_EQ(v.counterexample->high.size(), v.counterexample->path.size() + 1);
        }
    }
    EXPECT_GT(agreed_bisimilar, 10);
    EXPECT_LT(agreed_bisimilar, 290);
}

TEST(Bisim, FlippedPreconditionFailsAtTheStart) {
    const BAT mutant = high_variant("!Holding && Num > 0", "!Holding", "Num - 1");
    const Machine lm(blocks_low(), Domain::make(blocks_low().objects, 2));
    const FiniteState s = blocks_state(lm, {{"B1", "C"}});
    const TransitionSystem lo = build_low_ts(lm, blocks_mapping(), s);
    const TransitionSystem hi = build_high_ts(mutant, abstract_state(blocks_mapping(), s));
    const BisimVerdict v = check_bisim(lo, hi, blocks_mapping());
    ASSERT_FALSE(v.bisimilar);
    ASSERT_TRUE(v.counterexample);
    const BisimCounterexample& cx = *v.counterexample;
    EXPECT_TRUE(cx.path.empty());
    EXPECT_EQ(cx.clause, BisimClause::Forth);
    EXPECT_EQ(cx.action, "Putdown");
    EXPECT_TRUE(replay(blocks_low(), blocks_mapping(), mutant, cx));
    EXPECT_FALSE(replay(blocks_low(), blocks_mapping(), blocks_high(), cx));
    const Counterexample c = cx.to_counterexample();
    ASSERT_TRUE(c.state);
    EXPECT_EQ(*c.state, s);
}

TEST(Bisim, OffByOneFailsDeeper) {
    const BAT mutant = high_variant("!Holding && Num > 0", "Holding", "Num - 2");
    const Machine lm(blocks_low(), Domain::make(blocks_low().objects, 2));
    const FiniteState s = blocks_state(lm, {{"B1", "C"}, {"B2", "B1"}});
    const TransitionSystem lo = build_low_ts(lm, blocks_mapping(), s);
    const TransitionSystem hi = build_high_ts(mutant, abstract_state(blocks_mapping(), s));
    const BisimVerdict v = check_bisim(lo, hi, blocks_mapping());
    ASSERT_FALSE(v.bisimilar);
    const BisimCounterexample& cx = *v.counterexample;
    EXPECT_EQ(cx.clause, BisimClause::Atom);
    EXPECT_EQ(cx.path, std::vector<std::string>{"PickAboveC"});
    EXPECT_TRUE(replay(blocks_low(), blocks_mapping(), mutant, cx));
}

TEST(EdgeLaws, HoldOnTheFixtureAndCatchWrongLabels) {
    const TransitionSystem t = build_high_ts(blocks_high(), high_state(false, 3));
    EXPECT_EQ(check_edge_laws(t, blocks_labels()).verdict, Verdict::Pass);
    Classification wrong = blocks_labels();
    wrong.entries[0].label = Label::Incremental;
    const Check c = check_edge_laws(t, wrong);
    EXPECT_EQ(c.verdict, Verdict::Fail);
    EXPECT_NE(c.detail.find("PickAboveC"), std::string::npos) << c.detail;
    wrong = blocks_labels();
    wrong.entries[3].label = Label::Enabling;
    EXPECT_EQ(check_edge_laws(t, wrong).verdict, Verdict::Fail);
}

TEST(Certify, FixtureAndMutants) {
    DomainBounds b;
    b.min_objects = 1;
    b.max_objects = 3;
    const CertReport ok = certify(blocks_low(), blocks_mapping(), blocks_high(), b);
    EXPECT_TRUE(ok.passed()) << ok.to_text();
    EXPECT_TRUE(ok.find("bisimilar n=3"));
    EXPECT_TRUE(ok.find("refinement-conditions n=2"));
    EXPECT_TRUE(ok.find("initial-coverage n=1"));

    const CertReport flipped =
        certify(blocks_low(), blocks_mapping(), high_variant("!Holding && Num > 0", "!Holding", "Num - 1"), b);
    EXPECT_EQ(flipped.overall(), Verdict::Fail);
    ASSERT_TRUE(flipped.find("bisimilar n=1"));
    EXPECT_TRUE(flipped.find("bisimilar n=1")->counterexample);

    const CertReport weak = certify(blocks_low(), blocks_mapping(), high_variant("!Holding", "Holding", "Num - 1"), b);
    EXPECT_EQ(weak.overall(), Verdict::Fail) << weak.to_text();
}

TEST(Certify, VacuousInstancesAreInconclusive) {
    BAT low = blocks_low();
    low.init = Formula::bottom();
    DomainBounds b;
    b.min_objects = 1;
    b.max_objects = 2;
    const CertReport r = certify(low, blocks_mapping(), blocks_high(), b);
    EXPECT_EQ(r.overall(), Verdict::Unknown) << r.to_text();
}

TEST(Certify, InvalidHighTheoryFails) {
    BAT high = blocks_high();
    high.actions.front().poss = low_formula("exists x. holding(x)");
    DomainBounds b;
    const CertReport r = certify(blocks_low(), blocks_mapping(), high, b);
    EXPECT_EQ(r.overall(), Verdict::Fail);
    EXPECT_TRUE(r.find("high-theory"));
}

TEST(Certify, SameReportForAnyJobCount) {
    DomainBounds one;
    one.min_objects = 1;
    one.max_objects = 3;
    DomainBounds four = one;
    four.jobs = 4;
    const BAT mutant = high_variant("!Holding && Num > 0", "Holding", "Num - 2");
    EXPECT_EQ(certify(blocks_low(), blocks_mapping(), mutant, one).to_json(),
              certify(blocks_low(), blocks_mapping(), mutant, four).to_json());
    EXPECT_EQ(certify(blocks_low(), blocks_mapping(), blocks_high(), one).to_json(),
              certify(blocks_low(), blocks_mapping(), blocks_high(), four).to_json());
}
