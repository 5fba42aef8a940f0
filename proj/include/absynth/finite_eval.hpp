// Semantics over finite structures.
//
// A FiniteState interprets the fluents of a vocabulary over a finite domain.
// Formulas are compiled against a layout (vocabulary + domain) and evaluated
// in Kleene's three-valued logic, so the same code serves total states and
// the partial states used while enumerating models.

#ifndef ABSYNTH_FINITE_EVAL_HPP
#define ABSYNTH_FINITE_EVAL_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "absynth/ast.hpp"
#include "absynth/bat.hpp"
#include "absynth/mapping.hpp"
#include "absynth/transform.hpp"

namespace absynth {

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Vocabulary {
    struct Pred {
        std::string name;
        std::size_t arity;
    };
    std::vector<Pred> preds;          // sorted by name
    std::vector<std::string> funcs;   // sorted by name

    std::optional<std::size_t> pred_index(const std::string& name) const;
    std::optional<std::size_t> func_index(const std::string& name) const;

    static std::shared_ptr<const Vocabulary> of(const BAT& bat);
    // High-level vocabulary induced by the mapped fluents.
    static std::shared_ptr<const Vocabulary> of(const RefinementMapping& m);

    friend bool operator==(const Vocabulary& a, const Vocabulary& b);
};

struct Domain {
    std::vector<std::string> objects;  // named constants first
    std::size_t constants = 0;

    std::size_t size() const { return objects.size(); }
    std::optional<std::size_t> index(const std::string& name) const;

    // Named constants plus `extra` anonymous objects B1..Bextra.
    static std::shared_ptr<const Domain> make(const std::vector<std::string>& constants, std::size_t extra);
};

struct Layout {
    std::shared_ptr<const Vocabulary> vocab;
    std::shared_ptr<const Domain> domain;
    std::vector<std::size_t> offsets;  // per predicate, into the atom vector
    std::size_t atom_count = 0;

    static std::shared_ptr<const Layout> make(std::shared_ptr<const Vocabulary> vocab,
                                              std::shared_ptr<const Domain> domain);
    std::size_t atom(std::size_t pred, const std::vector<std::size_t>& args) const;
    // Inverse of atom(): predicate index and argument tuple.
    std::pair<std::size_t, std::vector<std::size_t>> decode(std::size_t atom) const;
};

enum class Truth : std::uint8_t { False = 0, True = 1, Unknown = 2 };

Truth kleene_not(Truth t);

class FiniteState {
public:
    FiniteState() = default;
    explicit FiniteState(std::shared_ptr<const Layout> layout);

    const Layout& layout() const { return *layout_; }
    const std::shared_ptr<const Layout>& layout_ptr() const { return layout_; }
    const Domain& domain() const { return *layout_->domain; }
    const Vocabulary& vocab() const { return *layout_->vocab; }

    Truth atom(std::size_t index) const { return static_cast<Truth>(atoms_[index]); }
    void set_atom(std::size_t index, Truth t) { atoms_[index] = static_cast<std::uint8_t>(t); }
    std::int64_t value(std::size_t func) const { return ints_[func]; }
    void set_value(std::size_t func, std::int64_t v) { ints_[func] = v; }

    // Name-based access; throw EvalError on unknown symbols.
    bool holds(const std::string& pred, const std::vector<std::string>& args = {}) const;
    void set(const std::string& pred, const std::vector<std::string>& args, bool value);
    std::int64_t value(const std::string& func) const;
    void set_value(const std::string& func, std::int64_t v);

    bool is_total() const;
    const std::vector<std::uint8_t>& atoms() const { return atoms_; }
    const std::vector<std::int64_t>& ints() const { return ints_; }

    friend bool operator==(const FiniteState& a, const FiniteState& b) {
        return a.atoms_ == b.atoms_ && a.ints_ == b.ints_;
    }
    friend bool operator<(const FiniteState& a, const FiniteState& b) {
        if (a.ints_ != b.ints_) return a.ints_ < b.ints_;
        return a.atoms_ < b.atoms_;
    }

private:
    std::shared_ptr<const Layout> layout_;
    std::vector<std::uint8_t> atoms_;
    std::vector<std::int64_t> ints_;
};

struct StateHash {
    std::size_t operator()(const FiniteState& s) const;
};

using StateSet = std::unordered_set<FiniteState, StateHash>;

// Low states print their true atoms, "{holding(B1), on(B2, C)}"; states
// without a domain print fluent values, "{Holding:false, Num:2}".
std::string to_string(const FiniteState& s);

using AbstractState = FiniteState;

// ---------------------------------------------------------------- evaluation

struct CompiledNode;
struct CompiledTerm;

// Caches closures computed for one state; reuse across evaluations on the
// same state only.
class EvalCache {
public:
    explicit EvalCache(const FiniteState& s) : state(s) {}
    const FiniteState& state;
    std::map<std::pair<const void*, std::vector<std::int64_t>>, std::vector<std::uint8_t>> closures;
};

class CompiledFormula {
public:
    CompiledFormula() = default;
    // `params` are the free variables, supplied positionally to eval().
    // Objects are passed as domain indices.
    static CompiledFormula compile(const Formula& f, const Layout& layout, const std::vector<Var>& params = {});

    Truth eval(EvalCache& cache, const std::vector<std::int64_t>& args = {}) const;
    Truth eval(const FiniteState& s, const std::vector<std::int64_t>& args = {}) const;
    // Classical evaluation; throws EvalError if the state leaves it open.
    bool holds(const FiniteState& s, const std::vector<std::int64_t>& args = {}) const;
    bool holds(EvalCache& cache, const std::vector<std::int64_t>& args = {}) const;

private:
    std::shared_ptr<const CompiledNode> root_;
    std::size_t slots_ = 0;
    std::size_t params_ = 0;
};

class CompiledTermFn {
public:
    static CompiledTermFn compile(const Term& t, const Layout& layout, const std::vector<Var>& params = {});
    // Exact value on total states; interval [lo, hi] on partial ones.
    std::pair<std::int64_t, std::int64_t> range(EvalCache& cache, const std::vector<std::int64_t>& args = {}) const;
    std::int64_t value(const FiniteState& s, const std::vector<std::int64_t>& args = {}) const;

private:
    std::shared_ptr<const CompiledTerm> root_;
    std::size_t slots_ = 0;
    std::size_t params_ = 0;
};

/// One-shot evaluation; `binding` maps free variables to ground terms
/// (object names or integer constants).
bool eval_formula(const FiniteState& s, const Formula& f, const Binding& binding = {});
/// Integer terms evaluate to their value, object terms to their domain index.
std::int64_t eval_term(const FiniteState& s, const Term& t, const Binding& binding = {});
std::string eval_object(const FiniteState& s, const Term& t, const Binding& binding = {});

// ---------------------------------------------------------------- theories

/// A theory compiled over one domain.
class Machine {
public:
    Machine(const BAT& bat, std::shared_ptr<const Domain> domain);

    const BAT& bat() const { return *bat_; }
    const std::shared_ptr<const Layout>& layout() const { return layout_; }
    const Domain& domain() const { return *layout_->domain; }

    FiniteState blank() const { return FiniteState(layout_); }
    const std::vector<GroundAction>& ground_actions() const { return ground_; }

    bool poss(const FiniteState& s, const GroundAction& a) const;
    bool poss(EvalCache& cache, const GroundAction& a) const;
    FiniteState successor(const FiniteState& s, const GroundAction& a) const;

    // Successors under all ground actions, or only the executable ones.
    std::vector<std::pair<GroundAction, FiniteState>> successors(const FiniteState& s, bool poss_only) const;

    CompiledFormula compile(const Formula& f, const std::vector<Var>& params = {}) const {
        return CompiledFormula::compile(f, *layout_, params);
    }
    std::vector<std::int64_t> args_of(const GroundAction& a) const;

    // Initial KB and the conjunction of the constraints, both closed.
    const CompiledFormula& init() const { return init_; }
    const CompiledFormula& constraints() const { return constraints_; }

private:
    enum class ArgKind { Param, Extra, Const };
    struct PatternArg {
        ArgKind kind;
        std::size_t index;  // parameter, extra variable or object index
    };
    struct ClauseCode {
        Polarity polarity;
        std::vector<PatternArg> pattern;
        std::size_t extra_count = 0;
        CompiledFormula context;  // params: fluent params then extras
        std::optional<CompiledTermFn> value;
    };
    struct FluentCode {
        bool functional = false;
        std::size_t index = 0;  // predicate or function index
        std::size_t arity = 0;
        std::map<std::string, std::vector<ClauseCode>> by_action;
    };

    std::shared_ptr<const BAT> bat_;
    std::shared_ptr<const Layout> layout_;
    std::vector<GroundAction> ground_;
    std::map<std::string, CompiledFormula> poss_;
    std::vector<FluentCode> fluents_;
    CompiledFormula init_;
    CompiledFormula constraints_;
};

bool poss(const BAT& bat, const FiniteState& s, const GroundAction& a);
FiniteState successor(const BAT& bat, const FiniteState& s, const GroundAction& a);

/// Executes closed Golog programs by their Do semantics over state sets.
class ProgramRunner {
public:
    ProgramRunner(const Machine& machine, const Program& p);
    // Final states, deduplicated and sorted.
    std::vector<FiniteState> run(const FiniteState& s) const;

    struct Node;

private:
    const Machine* machine_;
    std::shared_ptr<const Node> root_;
};

std::vector<FiniteState> do_program(const BAT& bat, const FiniteState& s, const Program& p);

enum class StepMode { AllGroundActions, PossOnly, Program };

struct Reachability {
    std::vector<FiniteState> states;  // discovery order
    bool complete = true;             // false when the budget was hit
};

/// Least fixpoint from `initial` under the step relation. In program mode
/// each step is one execution of `program`. At most `budget` states.
Reachability reachable(const Machine& machine, const std::vector<FiniteState>& initial, StepMode mode,
                       const std::optional<Program>& program = std::nullopt, std::size_t budget = 1000000);

// ---------------------------------------------------------------- mappings

/// Evaluates the mapped high-level fluents on low states.
class Abstractor {
public:
    Abstractor(const RefinementMapping& m, std::shared_ptr<const Layout> low);
    AbstractState operator()(const FiniteState& low) const;
    AbstractState operator()(EvalCache& cache) const;
    const std::shared_ptr<const Layout>& high_layout() const { return high_; }

private:
    std::shared_ptr<const Layout> high_;
    std::vector<CompiledFormula> preds_;
    std::vector<CompiledTermFn> funcs_;
};

AbstractState abstract_state(const RefinementMapping& m, const FiniteState& low);

/// A high-level state with the given values, over the mapping's vocabulary.
AbstractState make_abstract(std::shared_ptr<const Vocabulary> vocab, const std::map<std::string, std::int64_t>& values);

// ---------------------------------------------------------------- enumeration

/// Calls `visit` on every total state over `layout` (all functional values
/// zero) satisfying the closed formula `filter`. Partial assignments are
/// pruned as soon as `filter` evaluates to false. Returns false if `visit`
/// asked to stop.
bool enumerate_states(const std::shared_ptr<const Layout>& layout, const Formula& filter,
                      const std::function<bool(const FiniteState&)>& visit);

/// Canonical representative under permutations of the anonymous objects.
FiniteState canonical(const FiniteState& s);

/// Initial states of a low theory over a domain: total states satisfying init
/// and the constraints from which every executable successor chain keeps the
/// constraints.
struct InitialStates {
    std::vector<FiniteState> admissible;
    std::size_t rejected = 0;  // satisfy init and constraints but reach a violation
};
InitialStates admissible_initial_states(const Machine& machine, std::size_t budget = 5000000);

/// States satisfying the constraints (no init, no admissibility filter).
std::vector<FiniteState> constraint_states(const Machine& machine);

}  // namespace absynth

#endif  // ABSYNTH_FINITE_EVAL_HPP
