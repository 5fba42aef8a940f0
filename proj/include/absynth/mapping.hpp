// Refinement mappings from a high-level theory to a low-level one.

#ifndef ABSYNTH_MAPPING_HPP
#define ABSYNTH_MAPPING_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absynth/ast.hpp"

namespace absynth {

enum class Label { Enabling, Disabling, Invariant, Incremental, Decremental, FnInvariant, Unknown };

std::string_view to_string(Label label);
std::optional<Label> parse_label(std::string_view text);

struct FluentMapping {
    std::string name;
    bool functional = false;
    Formula formula;  // predicate fluents
    Term count = Term::int_const(0);  // functional fluents
};

struct ActionMapping {
    std::string name;
    Program program;
};

struct Assumption {
    std::string action;
    std::string fluent;
    Label label = Label::Unknown;
};

struct RefinementMapping {
    std::string name;
    std::vector<FluentMapping> fluents;
    std::vector<ActionMapping> actions;
    std::optional<Formula> init_witness;
    std::map<std::string, Formula> action_witnesses;
    std::vector<Assumption> assumptions;

    const FluentMapping* fluent(const std::string& name) const;
    const ActionMapping* action(const std::string& name) const;
    const Formula* witness(const std::string& action) const;
    std::optional<Label> assumed(const std::string& action, const std::string& fluent) const;
};

}  // namespace absynth

#endif  // ABSYNTH_MAPPING_HPP
