// Symbolic algebra over the AST: free variables, capture-avoiding
// substitution, normalization and fragment checks.

#ifndef ABSYNTH_TRANSFORM_HPP
#define ABSYNTH_TRANSFORM_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "absynth/ast.hpp"

namespace absynth {

using VarSet = std::set<Var>;
using Binding = std::map<Var, Term>;

VarSet free_vars(const Term& t);
VarSet free_vars(const Formula& f);
VarSet free_vars(const Program& p);

inline bool is_closed(const Formula& f) { return free_vars(f).empty(); }
inline bool is_closed(const Program& p) { return free_vars(p).empty(); }

/// Simultaneous, capture-avoiding substitution. Bound variables that would
/// capture a free variable of the substituted terms are renamed by appending
/// primes (x -> x'). Throws std::invalid_argument on a sort mismatch.
Term substitute(const Term& t, const Binding& binding);
Formula substitute(const Formula& f, const Binding& binding);
Program substitute(const Program& p, const Binding& binding);

/// Canonical form: flattens nested And/Or, drops units, folds negated
/// constants, removes duplicate operands and orders the operands of And/Or by
/// the structural order. No entailment-based simplification is done.
Formula normalize(const Formula& f);
Term normalize(const Term& t);

/// Quantifier-free linear integer arithmetic over 0-ary predicate fluents and
/// integer functional fluents.
bool is_lia_definable(const Formula& f);
bool is_lia_definable(const Term& t);

/// Structural equality up to consistent renaming of bound variables.
/// `pairs` seeds the correspondence between free variables of a and b.
bool alpha_equal(const Formula& a, const Formula& b,
                 const std::vector<std::pair<Var, Var>>& pairs = {});
bool alpha_equal(const Term& a, const Term& b,
                 const std::vector<std::pair<Var, Var>>& pairs = {});

/// Names of predicate fluents occurring in f (P^l(f) for low formulas).
std::set<std::string> predicate_symbols(const Formula& f);
std::set<std::string> predicate_symbols(const Term& t);
/// Names of functional fluents occurring in f (F^h(f)).
std::set<std::string> function_symbols(const Formula& f);
std::set<std::string> function_symbols(const Term& t);
/// Object constants mentioned in f.
std::set<std::string> object_constants(const Formula& f);
std::set<std::string> object_constants(const Program& p);

/// Peels a maximal prefix of existential quantifiers.
struct ExistsPrefix {
    std::vector<Var> vars;
    Formula body;
};
ExistsPrefix strip_exists(const Formula& f);

/// Peels exactly `count` existential quantifiers, if present.
bool strip_exists(const Formula& f, std::size_t count, ExistsPrefix& out);

/// Picks a name not in `used`, derived from `base` by appending primes.
std::string fresh_name(const std::string& base, const std::set<std::string>& used);

}  // namespace absynth

#endif  // ABSYNTH_TRANSFORM_HPP
