#include "absynth/mapping.hpp"

#include <array>

namespace absynth {

namespace {

constexpr std::array<std::pair<Label, std::string_view>, 7> kLabels{{
    {Label::Enabling, "enabling"},
    {Label::Disabling, "disabling"},
    {Label::Invariant, "invariant"},
    {Label::Incremental, "incremental"},
    {Label::Decremental, "decremental"},
    {Label::FnInvariant, "fn_invariant"},
    {Label::Unknown, "unknown"},
}};

}  // namespace

std::string_view to_string(Label label) {
    for (const auto& [l, s] : kLabels)
        if (l == label) return s;
    return "unknown";
}

std::optional<Label> parse_label(std::string_view text) {
    for (const auto& [l, s] : kLabels)
        if (s == text) return l;
    return std::nullopt;
}

const FluentMapping* RefinementMapping::fluent(const std::string& n) const {
    for (const auto& f : fluents)
        if (f.name == n) return &f;
    return nullptr;
}

const ActionMapping* RefinementMapping::action(const std::string& n) const {
    for (const auto& a : actions)
        if (a.name == n) return &a;
    return nullptr;
}

const Formula* RefinementMapping::witness(const std::string& a) const {
    auto it = action_witnesses.find(a);
    return it == action_witnesses.end() ? nullptr : &it->second;
}

std::optional<Label> RefinementMapping::assumed(const std::string& a, const std::string& f) const {
    for (const auto& x : assumptions)
        if (x.action == a && x.fluent == f) return x.label;
    return std::nullopt;
}

}  // namespace absynth
