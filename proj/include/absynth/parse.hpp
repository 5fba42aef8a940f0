// Parser for the theory description language.
//
// Formulas:  <->  ->  ||  &&  !  with exists/forall extending to the right.
// Atoms:     true, false, P, P(t, ..), P*(a, b), P+(a, b),
//            tc[u.., v..: body](a.., b..), and comparisons
//            = != < <= > >= and =[c] (congruence modulo c).
// Terms:     integers, identifiers, + and -, count x, y. body.
// Programs:  |  ;  postfix (..)* with pi x. body, nil, tests φ? and actions.
//
// Without a signature, identifiers are resolved by shape: an identifier
// followed by '(' in formula position is a predicate, a bare one is a 0-ary
// predicate; in term position capitalised names are object constants (or
// integer fluents where an integer is expected) and lower-case names are
// variables.

#ifndef ABSYNTH_PARSE_HPP
#define ABSYNTH_PARSE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "absynth/ast.hpp"
#include "absynth/bat.hpp"
#include "absynth/mapping.hpp"

namespace absynth {

struct Diagnostic {
    int line = 0;
    int column = 0;
    std::string message;
};

std::string to_string(const Diagnostic& d);

template <class T>
struct Parsed {
    std::optional<T> value;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return value.has_value() && diagnostics.empty(); }
};

struct Signature {
    std::map<std::string, std::size_t> predicates;  // name -> object arity
    std::set<std::string> functions;                // integer fluents
    std::set<std::string> objects;
    std::map<std::string, std::size_t> actions;
    std::map<std::string, Sort> variables;  // free variables in scope
    bool strict = false;  // reject undeclared capitalised names

    static Signature of(const BAT& bat);
};

// Settings of a `project { .. }` block.
struct ProjectSettings {
    std::optional<int> min_objects;
    std::optional<int> max_objects;
    std::optional<int> template_depth;
    std::optional<bool> simplify;
    std::optional<std::int64_t> budget;
    std::optional<int> forget_max;
};

struct Document {
    std::vector<BAT> bats;
    std::vector<RefinementMapping> mappings;
    std::optional<ProjectSettings> project;

    const BAT* low() const;
    const BAT* high() const;
    const RefinementMapping* mapping() const;
};

Parsed<Formula> parse_formula(std::string_view text, const Signature* sig = nullptr);
Parsed<Term> parse_term(std::string_view text, const Signature* sig = nullptr);
Parsed<Program> parse_program(std::string_view text, const Signature* sig = nullptr);

/// Whole documents: any sequence of `bat`, `mapping` and `project` blocks.
/// A mapping is resolved against the nearest preceding low-level theory.
/// Errors are reported per statement; parsing resumes at the next one, but no
/// value is returned when any diagnostic was produced.
Parsed<Document> parse_document(std::string_view text);

Parsed<BAT> parse_bat(std::string_view text);
Parsed<RefinementMapping> parse_mapping(std::string_view text, const BAT& low);

}  // namespace absynth

#endif  // ABSYNTH_PARSE_HPP
