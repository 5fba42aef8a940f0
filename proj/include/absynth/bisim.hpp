// Certification of an abstraction on finite instances by m-bisimulation.

#ifndef ABSYNTH_BISIM_HPP
#define ABSYNTH_BISIM_HPP

#include <optional>
#include <string>
#include <vector>

#include "absynth/bat.hpp"
#include "absynth/finite_eval.hpp"
#include "absynth/mapping.hpp"
#include "absynth/report.hpp"
#include "absynth/verifier.hpp"

namespace absynth {

struct TransitionSystem {
    struct Edge {
        std::size_t from;
        std::size_t label;  // index into labels
        std::size_t to;

        friend auto operator<=>(const Edge&, const Edge&) = default;
    };

    std::vector<std::string> labels;  // high action names
    std::vector<FiniteState> states;  // discovery order; states[initial] is the start
    std::size_t initial = 0;
    std::vector<Edge> edges;          // sorted

    // Successors of `from` under `label`.
    std::vector<std::size_t> post(std::size_t from, std::size_t label) const;
    // "id label id" lines followed by one "id state" line per state.
    std::string dump() const;
};

/// States reachable from `initial` by refinements of high actions; an edge
/// s -a-> t for every t in Do(m(a), s). Throws std::invalid_argument if
/// `initial` violates the low initial KB, BudgetExceeded past `budget` states.
TransitionSystem build_low_ts(const Machine& low, const RefinementMapping& m, const FiniteState& initial,
                              std::size_t budget = 1000000);

/// Closure of `initial` under executable high actions. Throws
/// std::invalid_argument if `initial` violates the high initial KB and
/// BudgetExceeded, naming the fastest-growing fluent, past `budget` states.
/// States with a value outside [-value_cap, value_cap] are kept without
/// successors.
TransitionSystem build_high_ts(const BAT& high, const AbstractState& initial, std::size_t budget = 100000,
                               std::optional<std::int64_t> value_cap = std::nullopt);

enum class BisimClause { Atom, Forth, Back };

std::string_view to_string(BisimClause c);

// A run of both systems along the same labels that ends in a defect.
struct BisimCounterexample {
    std::vector<std::string> path;
    std::vector<FiniteState> low;     // path.size() + 1 states
    std::vector<AbstractState> high;  // path.size() + 1 states
    BisimClause clause = BisimClause::Atom;
    std::string action;               // forth/back: the action one side cannot match

    Counterexample to_counterexample() const;
};

struct BisimVerdict {
    bool bisimilar = false;
    // (low, high) state indices of the largest bisimulation, when bisimilar.
    std::vector<std::pair<std::size_t, std::size_t>> relation;
    std::optional<BisimCounterexample> counterexample;
};

/// Greatest m-bisimulation between the systems by iterated refinement.
/// Both systems must share the label order.
BisimVerdict check_bisim(const TransitionSystem& low, const TransitionSystem& high, const RefinementMapping& m);

/// Re-executes a counterexample with do_program and the high theory's
/// successor function; true if every step is legal and the defect holds.
bool replay(const BAT& low, const RefinementMapping& m, const BAT& high, const BisimCounterexample& cx);

/// Per edge of a high system: f-incremental/decremental actions change f by
/// exactly +1/-1, invariant actions keep the fluent, enabling/disabling edges
/// land in states where the predicate is true/false.
Check check_edge_laws(const TransitionSystem& high, const Classification& c);

/// Bisimulation per size and admissible initial state, the per-state
/// conditions on the refinement (initial KB, executability and effects of
/// each high action agree with the high theory at every reachable low state)
/// and coverage of the high initial states.
CertReport certify(const BAT& low, const RefinementMapping& m, const BAT& high, const DomainBounds& bounds);

}  // namespace absynth

#endif  // ABSYNTH_BISIM_HPP
