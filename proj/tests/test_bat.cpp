#include <gtest/gtest.h>

#include "absynth/bat.hpp"
#include "absynth/print.hpp"
#include "absynth/report.hpp"
#include "absynth/transform.hpp"
#include "support.hpp"

using namespace absynth;
using namespace absynth::testing;

namespace {

// Names of the failing checks of validate().
std::set<std::string> failing(const BAT& b) {
    std::set<std::string> out;
    for (const auto& c : validate(b).checks)
        if (c.verdict == Verdict::Fail) out.insert(c.name);
    return out;
}

std::set<std::string> violations(const std::string& text) {
    Parsed<Document> doc = parse_document(text);
    if (!doc.ok()) {
        std::string msg;
        for (const auto& d : doc.diagnostics) msg += to_string(d) + "; ";
        throw std::runtime_error(msg);
    }
    return failing(doc.value->bats.front());
}

}  // namespace

TEST(Validate, FixturesPass) {
    const CertReport low = validate(blocks_low());
    EXPECT_TRUE(low.passed()) << low.to_text();
    ASSERT_EQ(low.checks.size(), 1u);
    EXPECT_EQ(low.checks.front().name, "validate");
    EXPECT_TRUE(validate(blocks_high()).passed());
}

TEST(Validate, HighLevelRestrictions) {
    EXPECT_TRUE(violations("bat high H { fluent P(x); action A poss true; ssa P { add A; } init true; }")
                    .contains("libat-predicate-arity"));
    EXPECT_TRUE(violations("bat high H { fluent P; action A(x) poss true; ssa P { add A(x); } init true; }")
                    .contains("libat-action-arity"));
}

// The parser rejects these inputs already; validate() must still catch them
// in theories built programmatically.
TEST(Validate, BuiltTheories) {
    BAT high = blocks_high();
    high.actions.front().poss = low_formula("exists x. holding(x)");
    EXPECT_FALSE(failing(high).empty());

    BAT arity = blocks_low();
    arity.actions[1].poss = Formula::pred("holding", {Term::var(Var{"x"}), Term::var(Var{"x"})});
    EXPECT_TRUE(failing(arity).contains("arity"));

    BAT open = blocks_low();
    open.actions[1].poss = Formula::pred("holding", {Term::var(Var{"w"})});
    EXPECT_TRUE(failing(open).contains("closedness"));

    BAT undeclared = blocks_low();
    undeclared.init = Formula::pred("clear", {Term::obj("C")});
    EXPECT_TRUE(failing(undeclared).contains("declarations"));
}

TEST(Validate, LowLevelShape) {
    EXPECT_TRUE(violations("bat low L { fluent n : int; action a poss true; ssa n { set a = n + 1; } init true; }")
                    .contains("low-fluent-kind"));
    EXPECT_TRUE(violations("bat low L { fluent p(x); action a(x) poss true; init true; }").contains("ssa-unique"));
}

TEST(Validate, FunctionalConsistency) {
    // A value-setting action needs matching add and delete clauses.
    EXPECT_TRUE(violations("bat high H { fluent N : int; action A poss true; ssa N { add A = N + 1; } init N = 0; }")
                    .contains("functional-consistency"));
    EXPECT_TRUE(violations("bat high H { fluent N : int; action A poss true; ssa N { set A = N + 1; } init N = 0; }").empty());
}

TEST(SimplifyForAction, PredicateInstances) {
    const BAT& low = blocks_low();
    const Var x{"x"};
    const Var y{"y"};
    // holding(x) after unstack(B1, C): x = B1 || holding(x)
    const Formula h = simplify_for_action(low, "holding", GroundAction{"unstack", {"B1", "C"}});
    EXPECT_EQ(h, normalize(Formula::disj(Formula::eq(Term::var(x), Term::obj("B1")), Formula::pred("holding", {Term::var(x)}))))
        << print(h);
    // on(x, y) after putdown(B1) is the frame.
    EXPECT_EQ(simplify_for_action(low, "on", GroundAction{"putdown", {"B1"}}),
              Formula::pred("on", {Term::var(x), Term::var(y)}));
    // holding(x) after putdown(B1): holding(x) && x != B1
    const Formula d = simplify_for_action(low, "holding", GroundAction{"putdown", {"B1"}});
    EXPECT_EQ(d, normalize(Formula::conj(Formula::pred("holding", {Term::var(x)}),
                                         Formula::negate(Formula::eq(Term::var(x), Term::obj("B1"))))))
        << print(d);
}

TEST(SimplifyForAction, FunctionalInstances) {
    const Var y = ssa_value_var();
    const Formula num = simplify_for_action(blocks_high(), "Num", GroundAction{"PickAboveC", {}});
    EXPECT_EQ(num, normalize(Formula::eq(Term::var(y), Term::sub(Term::fluent("Num"), Term::int_const(1))))) << print(num);
    const Formula keep = simplify_for_action(blocks_high(), "Num", GroundAction{"Putdown", {}});
    EXPECT_EQ(keep, Formula::eq(Term::var(y), Term::fluent("Num"))) << print(keep);
}

TEST(RenderSsa, Biconditionals) {
    EXPECT_EQ(render_ssa(blocks_high(), "Holding"),
              "Holding(do(a, s)) <-> (a = PickAboveC) || (Holding(s) && !(a = Putdown))");
    EXPECT_EQ(render_ssa(blocks_low(), "on"), "on(x, y, do(a, s)) <-> (a = stack(x, y)) || (on(x, y, s) && !(a = unstack(x, y)))");
}

TEST(Constraint, ClosesFreeVariables) {
    EXPECT_TRUE(is_closed(blocks_low().constraint()));
    EXPECT_EQ(blocks_low().constraints.size(), 8u);
}
