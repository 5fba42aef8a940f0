// Basic action theories in causal (add/delete clause) form.
//
// One struct serves both levels. A low-level theory has object-parameterized
// predicate fluents and actions; a high-level theory (LIBAT) has 0-ary
// predicate fluents, integer functional fluents and parameterless actions.

#ifndef ABSYNTH_BAT_HPP
#define ABSYNTH_BAT_HPP

#include <optional>
#include <string>
#include <vector>

#include "absynth/ast.hpp"

namespace absynth {

class CertReport;

enum class Level { Low, High };
enum class FluentKind { Predicate, Function };
enum class Polarity { Add, Del };

std::string_view to_string(Level level);

struct FluentDecl {
    std::string name;
    FluentKind kind = FluentKind::Predicate;
    std::vector<Var> params;  // object-sorted; empty at the high level

    std::size_t arity() const { return params.size(); }
};

struct ActionDecl {
    std::string name;
    std::vector<Var> params;
    Formula poss;
};

// a = A(pattern) && context. Pattern entries are variables or object
// constants; variables that are not fluent parameters are implicitly
// existential. Functional add clauses carry the new value.
struct EffectClause {
    Polarity polarity = Polarity::Add;
    std::string action;
    std::vector<Term> pattern;
    Formula context;
    std::optional<Term> value;
};

struct SSA {
    std::string fluent;
    std::vector<EffectClause> clauses;
};

struct BAT {
    std::string name;
    Level level = Level::Low;
    std::vector<std::string> objects;
    std::vector<FluentDecl> fluents;
    std::vector<ActionDecl> actions;
    std::vector<SSA> ssas;
    Formula init;
    std::vector<Formula> constraints;  // free variables read universally

    const FluentDecl* fluent(const std::string& name) const;
    const ActionDecl* action(const std::string& name) const;
    const SSA* ssa(const std::string& fluent) const;
    bool has_object(const std::string& name) const;

    // Conjunction of the universal closures of all constraints.
    Formula constraint() const;
};

using LowBAT = BAT;
using HighLIBAT = BAT;

/// Well-formedness of declarations, sorts, arities, SSA shape and, for
/// high-level theories, the LIBAT restrictions. Violations become fail
/// entries of the report.
CertReport validate(const BAT& bat);

/// A ground action instance.
struct GroundAction {
    std::string name;
    std::vector<std::string> args;

    friend bool operator==(const GroundAction&, const GroundAction&) = default;
    friend auto operator<=>(const GroundAction&, const GroundAction&) = default;
};

std::string to_string(const GroundAction& a);

/// Instantiates the SSA of `fluent` for the ground action `a` by unique
/// names: clauses of other actions vanish, same-name clauses unify their
/// pattern with the arguments. For a predicate fluent the result is a formula
/// over the fluent's parameters; for a functional fluent it is a formula over
/// the integer variable `y` (see ssa_value_var).
Formula simplify_for_action(const BAT& bat, const std::string& fluent, const GroundAction& a);

inline Var ssa_value_var() { return Var{"y", Sort::Integer}; }

/// Human-readable biconditional of an SSA in situation notation.
std::string render_ssa(const BAT& bat, const std::string& fluent);

}  // namespace absynth

#endif  // ABSYNTH_BAT_HPP
