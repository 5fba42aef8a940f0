// Bounded checks of the side conditions of abstraction synthesis.
//
// Every check enumerates finite instances: domains with the theory's named
// constants plus n anonymous objects, for n in [min_objects, max_objects].
// A pass therefore means "no violation up to the bound", never a proof.

#ifndef ABSYNTH_VERIFIER_HPP
#define ABSYNTH_VERIFIER_HPP

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "absynth/bat.hpp"
#include "absynth/finite_eval.hpp"
#include "absynth/mapping.hpp"
#include "absynth/refinement.hpp"
#include "absynth/report.hpp"

namespace absynth {

// Which situations the enabling/invariance checks range over.
enum class Scope {
    Executable,  // poss-only reachable from admissible initial states
    All,         // reachable under every ground action, executable or not
};

struct DomainBounds {
    int min_objects = 1;  // anonymous objects beyond the named constants
    int max_objects = 3;
    Scope scope = Scope::Executable;
    int template_depth = 2;
    int forget_max = 4;  // total domain size for forgetting checks
    std::size_t budget = 2000000;
    unsigned jobs = 1;
    // Initial states to use instead of all admissible ones, keyed by the
    // number of anonymous objects.
    std::map<int, std::vector<FiniteState>> explicit_initial;

    std::string describe() const;
};

/// Jobs from ABSYNTH_JOBS, or 1.
unsigned default_jobs();

class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Finite instances of a low-level theory, built lazily per domain size.
class Instances {
public:
    Instances(const BAT& low, DomainBounds bounds);

    const BAT& low() const { return low_; }
    const DomainBounds& bounds() const { return bounds_; }

    const Machine& machine(int n);
    const std::vector<FiniteState>& initial(int n);
    // States the enabling/invariance checks range over (per bounds.scope).
    const std::vector<FiniteState>& scope_states(int n);
    // Poss-only reachable from the initial states.
    const std::vector<FiniteState>& executable(int n);
    // All states satisfying the constraints.
    const std::vector<FiniteState>& constraint_states(int n);

private:
    struct PerSize {
        std::unique_ptr<Machine> machine;
        std::optional<std::vector<FiniteState>> initial, executable, all, constrained;
    };
    PerSize& at(int n);

    BAT low_;
    DomainBounds bounds_;
    std::map<int, PerSize> sizes_;
};

// ---------------------------------------------------------------- guarded-action properties

/// phi over the tuple y, which must be a sub-tuple of the guarded action's
/// picked variables.
Check check_alt_enabling(Instances& inst, const GuardedAction& g, const Formula& phi, const std::vector<Var>& y);
Check check_single_enabling(Instances& inst, const GuardedAction& g, const Formula& phi, const std::vector<Var>& y);
/// The whole extension of phi over y is unchanged; y is independent of the
/// picked variables.
Check check_invariant(Instances& inst, const GuardedAction& g, const Formula& phi, const std::vector<Var>& y);
/// At most one tuple satisfies phi in every executable state.
Check check_exclusive(Instances& inst, const Formula& phi, const std::vector<Var>& x);

/// Re-runs the defining condition of a failed guarded-action check on its
/// counterexample; true if the violation is reproduced.
bool replay_counterexample(const BAT& low, const Check& c, const GuardedAction& g, const Formula& phi,
                           const std::vector<Var>& y, const std::string& kind);

// ---------------------------------------------------------------- classification

struct ClassEntry {
    std::string action;
    std::string fluent;
    Label label = Label::Unknown;
    std::vector<Label> passing;  // every label whose checks passed
    bool assumed = false;
    std::string detail;
    CertReport evidence;
};

struct Classification {
    std::vector<ClassEntry> entries;

    const ClassEntry* find(const std::string& action, const std::string& fluent) const;
    Label label(const std::string& action, const std::string& fluent) const;
};

ClassEntry classify(Instances& inst, const RefinementMapping& m, const std::string& action, const std::string& fluent);
Classification classify_all(Instances& inst, const RefinementMapping& m);

// ---------------------------------------------------------------- restrictions

using AbstractSet = std::set<AbstractState>;

/// Abstract images of the states over `size` objects in total that satisfy
/// the closed low formula `constraint` and the propositional existential
/// formula `phi`. Results are cached per (constraint, size).
class Forgetter {
public:
    Forgetter(const BAT& low, const RefinementMapping& m, std::size_t budget = 5000000);

    AbstractSet project(const Formula& constraint, const Formula& phi, int size);
    // Largest value of each function seen at `size` under `constraint`.
    std::map<std::string, std::int64_t> max_values(const Formula& constraint, int size);
    const std::shared_ptr<const Vocabulary>& high_vocab() const { return vocab_; }

private:
    struct Profile {
        // Representative low state per valuation of the body atoms, with the
        // abstract states realized under that valuation.
        std::vector<std::pair<FiniteState, AbstractSet>> classes;
        std::map<std::string, std::int64_t> max_values;
    };
    const Profile& profile(const Formula& constraint, int size);

    BAT low_;
    RefinementMapping m_;
    std::size_t budget_;
    std::shared_ptr<const Vocabulary> vocab_;
    std::vector<Formula> atoms_;
    std::map<std::pair<std::string, int>, Profile> cache_;
};

AbstractSet forget_project(const BAT& low, const RefinementMapping& m, const Formula& constraint, const Formula& phi,
                           int size);

/// Propositional existential formulas over the body set of m up to the
/// given nesting depth, deduplicated after normalization.
std::vector<Formula> prop_exists_templates(const RefinementMapping& m, int depth);

struct RestrictionResult {
    CertReport report;
    Classification classification;
};

RestrictionResult check_restrictions(Instances& inst, const RefinementMapping& m);

Check check_simply_forgettable(const BAT& low, const RefinementMapping& m, const DomainBounds& bounds);

}  // namespace absynth

#endif  // ABSYNTH_VERIFIER_HPP
