#include <gtest/gtest.h>

#include "absynth/print.hpp"
#include "absynth/synth.hpp"
#include "absynth/transform.hpp"
#include "support.hpp"

using namespace absynth;
using namespace absynth::testing;

namespace {

// The labels of the blocks mapping, written out rather than computed.
Classification blocks_labels() {
    Classification c;
    auto add = [&](const char* a, const char* f, Label l) {
        ClassEntry e;
        e.action = a;
        e.fluent = f;
        e.label = l;
        e.passing = {l};
        c.entries.push_back(e);
    };
    add("PickAboveC", "Num", Label::Decremental);
    add("PickAboveC", "Holding", Label::Enabling);
    add("Putdown", "Num", Label::FnInvariant);
    add("Putdown", "Holding", Label::Disabling);
    return c;
}

SynthesisResult run(bool simplify, const RefinementMapping& m = blocks_mapping(),
                    const Classification& c = blocks_labels()) {
    SynthOptions o;
    o.simplify = simplify;
    return synthesize({&blocks_low(), &m, &c, nullptr}, o);
}

}  // namespace

TEST(Synth, GoldenBlocksTheory) {
    const SynthesisResult r = run(true);
    const BAT& got = r.high;
    const BAT& want = blocks_high();
    EXPECT_TRUE(validate(got).passed());
    EXPECT_TRUE(r.warnings.empty());
    EXPECT_EQ(got.init, normalize(want.init)) << print(got.init);
    for (const char* a : {"PickAboveC", "Putdown"}) {
        ASSERT_TRUE(got.action(a));
        EXPECT_EQ(got.action(a)->poss, normalize(want.action(a)->poss)) << a << ": " << print(got.action(a)->poss);
    }
    for (const char* f : {"Holding", "Num"}) EXPECT_TRUE(same_ssa(got, want, f)) << f;
    EXPECT_EQ(render_ssa(got, "Num"), render_ssa(want, "Num"));
    EXPECT_EQ(print(got), read_file(fixture("golden/blocks_synth.abs")));
}

TEST(Synth, LiteralTranslationKeepsBounds) {
    const SynthesisResult r = run(false);
    EXPECT_EQ(r.high.init, normalize(high_formula("!Holding && Num > 0 && Num >= 0")));
    EXPECT_EQ(r.high.action("PickAboveC")->poss, normalize(high_formula("!Holding && Num > 0 && Num >= 0")));
    EXPECT_EQ(r.high.action("Putdown")->poss, high_formula("Holding"));
    EXPECT_EQ(simplify_bounds(r.high.init), normalize(high_formula("!Holding && Num > 0")));
}

TEST(Synth, ProvenancePerAxiom) {
    const SynthesisResult r = run(true);
    for (const char* name : {"init", "poss PickAboveC", "poss Putdown", "ssa Num", "ssa Holding"}) {
        const Check* c = r.provenance.find(name);
        ASSERT_TRUE(c) << name;
        EXPECT_EQ(c->verdict, Verdict::Pass);
        EXPECT_FALSE(c->provenance.empty());
    }
}

TEST(Synth, SsaClausesFollowLabels) {
    const auto ssas = synth_ssa(blocks_mapping(), blocks_labels());
    ASSERT_EQ(ssas.size(), 2u);
    EXPECT_EQ(ssas[0].fluent, "Num");
    EXPECT_EQ(ssas[1].fluent, "Holding");
    Classification inc = blocks_labels();
    inc.entries[0].label = Label::Incremental;
    BAT high = run(true, blocks_mapping(), inc).high;
    const Var y = ssa_value_var();
    EXPECT_EQ(simplify_for_action(high, "Num", GroundAction{"PickAboveC", {}}),
              normalize(Formula::eq(Term::var(y), Term::add(Term::fluent("Num"), Term::int_const(1)))));
    Classification inv = blocks_labels();
    inv.entries[1].label = Label::Invariant;
    high = run(true, blocks_mapping(), inv).high;
    EXPECT_EQ(render_ssa(high, "Holding"), "Holding(do(a, s)) <-> (Holding(s) && !(a = Putdown))");
}

TEST(Synth, UnknownLabelIsAnError) {
    Classification c = blocks_labels();
    c.entries[3].label = Label::Unknown;
    EXPECT_THROW(run(true, blocks_mapping(), c), SynthError);
    c = blocks_labels();
    c.entries.pop_back();
    EXPECT_THROW(synth_ssa(blocks_mapping(), c), SynthError);
}

TEST(Synth, ContradictoryWitnessWarns) {
    RefinementMapping m = blocks_mapping();
    m.init_witness = low_formula("(exists x. holding(x)) && false");
    m.action_witnesses["Putdown"] = Formula::bottom();
    const SynthesisResult r = run(true, m);
    EXPECT_EQ(r.high.init, Formula::bottom());
    EXPECT_EQ(r.warnings.size(), 2u);
}

TEST(Synth, MissingWitnessIsAnError) {
    RefinementMapping m = blocks_mapping();
    m.action_witnesses.erase("Putdown");
    EXPECT_THROW(synth_precond(m, "Putdown"), SynthError);
}

TEST(Synth, Deterministic) {
    const std::string first = print(run(true).high);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(print(run(true).high), first);
    EXPECT_EQ(run(true).provenance.to_json(), run(true).provenance.to_json());
}

TEST(SimplifyBounds, OnlyEntailedLowerBounds) {
    EXPECT_EQ(simplify_bounds(high_formula("Num > 0 && Num >= 0")), high_formula("Num > 0"));
    EXPECT_EQ(simplify_bounds(high_formula("Num > -1 && Num >= 0")), high_formula("Num > -1"));
    EXPECT_EQ(simplify_bounds(high_formula("Num = 2 && Num >= 0")), high_formula("Num = 2"));
    EXPECT_EQ(simplify_bounds(high_formula("Num > -2 && Num >= 0")), normalize(high_formula("Num > -2 && Num >= 0")));
    EXPECT_EQ(simplify_bounds(high_formula("Num < 3 && Num >= 0")), normalize(high_formula("Num < 3 && Num >= 0")));
    // Only siblings count: the bound under a disjunction stays.
    EXPECT_EQ(simplify_bounds(high_formula("(Holding || Num > 0) && Num >= 0")),
              normalize(high_formula("(Holding || Num > 0) && Num >= 0")));
}
