// Guarded actions, the mapping formula, forward and inverse translation.

#ifndef ABSYNTH_REFINEMENT_HPP
#define ABSYNTH_REFINEMENT_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "absynth/ast.hpp"
#include "absynth/bat.hpp"
#include "absynth/mapping.hpp"
#include "absynth/report.hpp"

namespace absynth {

class MappingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// pi x.. . guard?; action(args)
struct GuardedAction {
    std::vector<Var> vars;
    Formula guard;
    std::string action;
    std::vector<Term> args;  // picked variables or object constants

    Program program() const;
};

/// Recognizes nested picks over `guard?; A(..)` or a bare action.
std::optional<GuardedAction> as_guarded(const Program& p);

/// exists x.. . guard && Poss_A(args): when the guarded action can run.
Formula executability_condition(const BAT& low, const GuardedAction& g);

/// Two-level formula: (P <-> m(P)) for predicates, f = m(f) for functions.
Formula mapping_formula(const RefinementMapping& m);

/// Replaces every high-level fluent by its image; throws MappingError on
/// symbols that are not mapped.
Formula apply_mapping(const RefinementMapping& m, const Formula& f);
Term apply_mapping(const RefinementMapping& m, const Term& t);

struct PhiSource {
    std::string fluent;
    bool functional = false;
};

// A member of the body set, with the tuple it binds.
struct PhiEntry {
    std::vector<Var> vars;
    Formula body;
    std::vector<PhiSource> sources;
};

/// Bodies of the existential and counting images, deduplicated up to
/// renaming of the bound tuple. Throws MappingError if a predicate image has
/// no existential prefix.
std::vector<PhiEntry> phi_set(const RefinementMapping& m);

/// Index into phi_set(m) of the existential atom `f`, if any.
std::optional<std::size_t> match_phi_atom(const Formula& f, const std::vector<PhiEntry>& phi);

/// Boolean combination of existential closures of the body set.
bool is_prop_exists(const Formula& f, const RefinementMapping& m);

/// Step one of the inverse translation: atoms become P or f > 0.
Formula inverse_atoms(const Formula& f, const RefinementMapping& m);
/// Step one conjoined with f >= 0 for every function it mentions.
Formula inverse_translate(const Formula& f, const RefinementMapping& m);

/// Structural checks: closed images, guarded actions over declared low
/// actions with matching arity, witnesses and assumptions naming mapped
/// symbols. One fail check per problem, or a single pass.
CertReport validate_mapping(const BAT& low, const RefinementMapping& m);

}  // namespace absynth

#endif  // ABSYNTH_REFINEMENT_HPP
