#include "absynth/finite_eval.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <unordered_map>

namespace absynth {

// ---------------------------------------------------------------- vocabulary, domain, layout

std::optional<std::size_t> Vocabulary::pred_index(const std::string& name) const {
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i].name == name) return i;
    return std::nullopt;
}

std::optional<std::size_t> Vocabulary::func_index(const std::string& name) const {
    for (std::size_t i = 0; i < funcs.size(); ++i)
        if (funcs[i] == name) return i;
    return std::nullopt;
}

namespace {

std::shared_ptr<const Vocabulary> sorted_vocab(Vocabulary v) {
    std::sort(v.preds.begin(), v.preds.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    std::sort(v.funcs.begin(), v.funcs.end());
    return std::make_shared<const Vocabulary>(std::move(v));
}

}  // namespace

std::shared_ptr<const Vocabulary> Vocabulary::of(const BAT& bat) {
    Vocabulary v;
    for (const auto& f : bat.fluents) {
        if (f.kind == FluentKind::Function)
            v.funcs.push_back(f.name);
        else
            v.preds.push_back({f.name, f.arity()});
    }
    return sorted_vocab(std::move(v));
}

std::shared_ptr<const Vocabulary> Vocabulary::of(const RefinementMapping& m) {
    Vocabulary v;
    for (const auto& f : m.fluents) {
        if (f.functional)
            v.funcs.push_back(f.name);
        else
            v.preds.push_back({f.name, 0});
    }
    return sorted_vocab(std::move(v));
}

bool operator==(const Vocabulary& a, const Vocabulary& b) {
    if (a.funcs != b.funcs || a.preds.size() != b.preds.size()) return false;
    for (std::size_t i = 0; i < a.preds.size(); ++i)
        if (a.preds[i].name != b.preds[i].name || a.preds[i].arity != b.preds[i].arity) return false;
    return true;
}

std::optional<std::size_t> Domain::index(const std::string& name) const {
    for (std::size_t i = 0; i < objects.size(); ++i)
        if (objects[i] == name) return i;
    return std::nullopt;
}

std::shared_ptr<const Domain> Domain::make(const std::vector<std::string>& constants, std::size_t extra) {
    Domain d;
    d.objects = constants;
    d.constants = constants.size();
    for (std::size_t i = 1; i <= extra; ++i) {
        std::string name = "B" + std::to_string(i);
        while (std::find(d.objects.begin(), d.objects.end(), name) != d.objects.end()) name += "'";
        d.objects.push_back(name);
    }
    return std::make_shared<const Domain>(std::move(d));
}

namespace {

std::size_t ipow(std::size_t base, std::size_t exp) {
    std::size_t r = 1;
    for (std::size_t i = 0; i < exp; ++i) r *= base;
    return r;
}

}  // namespace

std::shared_ptr<const Layout> Layout::make(std::shared_ptr<const Vocabulary> vocab, std::shared_ptr<const Domain> domain) {
    auto l = std::make_shared<Layout>();
    l->vocab = std::move(vocab);
    l->domain = std::move(domain);
    std::size_t off = 0;
    for (const auto& p : l->vocab->preds) {
        l->offsets.push_back(off);
        off += ipow(l->domain->size(), p.arity);
    }
    l->atom_count = off;
    return l;
}

std::size_t Layout::atom(std::size_t pred, const std::vector<std::size_t>& args) const {
    std::size_t idx = 0;
    const std::size_t n = domain->size();
    for (std::size_t a : args) idx = idx * n + a;
    return offsets[pred] + idx;
}

std::pair<std::size_t, std::vector<std::size_t>> Layout::decode(std::size_t atom) const {
    std::size_t p = 0;
    while (p + 1 < offsets.size() && offsets[p + 1] <= atom) ++p;
    std::size_t rest = atom - offsets[p];
    const std::size_t k = vocab->preds[p].arity;
    const std::size_t n = domain->size();
    std::vector<std::size_t> args(k);
    for (std::size_t i = k; i-- > 0;) {
        args[i] = rest % n;
        rest /= n;
    }
    return {p, args};
}

Truth kleene_not(Truth t) {
    switch (t) {
    case Truth::True:
        return Truth::False;
    case Truth::False:
        return Truth::True;
    default:
        return Truth::Unknown;
    }
}

// ---------------------------------------------------------------- states

FiniteState::FiniteState(std::shared_ptr<const Layout> layout)
    : layout_(std::move(layout)), atoms_(layout_->atom_count, 0), ints_(layout_->vocab->funcs.size(), 0) {}

namespace {

std::size_t atom_of(const FiniteState& s, const std::string& pred, const std::vector<std::string>& args) {
    auto p = s.vocab().pred_index(pred);
    if (!p) throw EvalError("undeclared fluent '" + pred + "'");
    if (s.vocab().preds[*p].arity != args.size()) throw EvalError("arity mismatch for fluent '" + pred + "'");
    std::vector<std::size_t> idx;
    for (const auto& a : args) {
        auto i = s.domain().index(a);
        if (!i) throw EvalError("object '" + a + "' is not in the domain");
        idx.push_back(*i);
    }
    return s.layout().atom(*p, idx);
}

std::size_t func_of(const FiniteState& s, const std::string& func) {
    auto f = s.vocab().func_index(func);
    if (!f) throw EvalError("undeclared functional fluent '" + func + "'");
    return *f;
}

}  // namespace

bool FiniteState::holds(const std::string& pred, const std::vector<std::string>& args) const {
    Truth t = atom(atom_of(*this, pred, args));
    if (t == Truth::Unknown) throw EvalError("atom is unassigned");
    return t == Truth::True;
}

void FiniteState::set(const std::string& pred, const std::vector<std::string>& args, bool value) {
    set_atom(atom_of(*this, pred, args), value ? Truth::True : Truth::False);
}

std::int64_t FiniteState::value(const std::string& func) const { return ints_[func_of(*this, func)]; }

void FiniteState::set_value(const std::string& func, std::int64_t v) { ints_[func_of(*this, func)] = v; }

bool FiniteState::is_total() const {
    return std::none_of(atoms_.begin(), atoms_.end(), [](std::uint8_t a) { return a == 2; });
}

std::size_t StateHash::operator()(const FiniteState& s) const {
    std::size_t h = 1469598103934665603ull;
    for (std::uint8_t a : s.atoms()) h = (h ^ a) * 1099511628211ull;
    for (std::int64_t v : s.ints()) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
    return h;
}

std::string to_string(const FiniteState& s) {
    const Layout& l = s.layout();
    std::string out = "{";
    bool first = true;
    auto sep = [&] {
        if (!first) out += ", ";
        first = false;
    };
    if (l.domain->size() == 0) {
        // Interleave predicates and functions by name.
        std::vector<std::pair<std::string, std::string>> items;
        for (std::size_t p = 0; p < l.vocab->preds.size(); ++p) {
            Truth t = s.atom(l.offsets[p]);
            items.emplace_back(l.vocab->preds[p].name,
                               t == Truth::True ? "true" : t == Truth::False ? "false" : "?");
        }
        for (std::size_t f = 0; f < l.vocab->funcs.size(); ++f)
            items.emplace_back(l.vocab->funcs[f], std::to_string(s.value(f)));
        std::sort(items.begin(), items.end());
        for (const auto& [k, v] : items) {
            sep();
            out += k + ":" + v;
        }
        return out + "}";
    }
    for (std::size_t a = 0; a < l.atom_count; ++a) {
        Truth t = s.atom(a);
        if (t == Truth::False) continue;
        auto [p, args] = l.decode(a);
        sep();
        if (t == Truth::Unknown) out += "?";
        out += l.vocab->preds[p].name;
        if (!args.empty()) {
            out += "(";
            for (std::size_t i = 0; i < args.size(); ++i) out += (i ? ", " : "") + l.domain->objects[args[i]];
            out += ")";
        }
    }
    for (std::size_t f = 0; f < l.vocab->funcs.size(); ++f) {
        sep();
        out += l.vocab->funcs[f] + ":" + std::to_string(s.value(f));
    }
    return out + "}";
}

// ---------------------------------------------------------------- compiled formulas

struct Arg {
    bool slot;
    std::int64_t v;
};

struct CompiledTerm {
    enum class K { Int, Obj, Slot, Add, Sub, Fn, Count } k;
    std::int64_t v = 0;
    std::shared_ptr<const CompiledTerm> a, b;
    std::vector<std::size_t> bound;
    std::shared_ptr<const CompiledNode> body;
};

struct CompiledNode {
    enum class K { True, False, Pred, Eq, Lt, Cong, Not, And, Or, Exists, Forall, TC } k;
    std::size_t base = 0;
    std::vector<Arg> args;  // Pred; TC lhs
    std::vector<Arg> rhs;   // TC rhs
    std::shared_ptr<const CompiledTerm> l, r;
    std::int64_t mod = 1;
    std::vector<std::shared_ptr<const CompiledNode>> kids;
    std::size_t slot = 0;
    std::vector<std::size_t> from, to, outer;
};

namespace {

class Compiler {
public:
    Compiler(const Layout& layout, const std::vector<Var>& params) : layout_(layout) {
        for (const auto& p : params) scope_.emplace_back(p, next_++);
    }
    std::size_t slots() const { return next_; }

    std::shared_ptr<const CompiledNode> formula(const Formula& f) {
        auto n = std::make_shared<CompiledNode>();
        switch (f.kind()) {
        case FormulaKind::True:
            n->k = CompiledNode::K::True;
            break;
        case FormulaKind::False:
            n->k = CompiledNode::K::False;
            break;
        case FormulaKind::Pred: {
            auto p = layout_.vocab->pred_index(f.name());
            if (!p) throw EvalError("undeclared fluent '" + f.name() + "'");
            if (layout_.vocab->preds[*p].arity != f.args().size())
                throw EvalError("arity mismatch for fluent '" + f.name() + "'");
            n->k = CompiledNode::K::Pred;
            n->base = layout_.offsets[*p];
            for (const auto& a : f.args()) n->args.push_back(arg(a));
            break;
        }
        case FormulaKind::Eq:
            n->k = CompiledNode::K::Eq;
            n->l = term(f.lhs());
            n->r = term(f.rhs());
            break;
        case FormulaKind::Lt:
            n->k = CompiledNode::K::Lt;
            n->l = term(f.lhs());
            n->r = term(f.rhs());
            break;
        case FormulaKind::CongMod:
            n->k = CompiledNode::K::Cong;
            n->mod = f.modulus();
            n->l = term(f.lhs());
            n->r = term(f.rhs());
            break;
        case FormulaKind::Not:
        case FormulaKind::And:
        case FormulaKind::Or:
            n->k = f.kind() == FormulaKind::Not   ? CompiledNode::K::Not
                   : f.kind() == FormulaKind::And ? CompiledNode::K::And
                                                  : CompiledNode::K::Or;
            for (const auto& c : f.children()) n->kids.push_back(formula(c));
            break;
        case FormulaKind::Exists:
        case FormulaKind::Forall: {
            if (f.var().sort != Sort::Object)
                throw EvalError("quantification over sort " + std::string(to_string(f.var().sort)) +
                                " is not supported");
            n->k = f.kind() == FormulaKind::Exists ? CompiledNode::K::Exists : CompiledNode::K::Forall;
            n->slot = bind(f.var());
            n->kids.push_back(formula(f.body()));
            unbind(1);
            break;
        }
        case FormulaKind::TC: {
            n->k = CompiledNode::K::TC;
            for (const auto& a : f.tc_lhs()) n->args.push_back(arg(a));
            for (const auto& a : f.tc_rhs()) n->rhs.push_back(arg(a));
            VarSet inner(f.tc_from().begin(), f.tc_from().end());
            inner.insert(f.tc_to().begin(), f.tc_to().end());
            for (const auto& v : free_vars(f.body()))
                if (!inner.contains(v)) n->outer.push_back(lookup(v));
            for (const auto& v : f.tc_from()) n->from.push_back(bind(v));
            for (const auto& v : f.tc_to()) n->to.push_back(bind(v));
            n->kids.push_back(formula(f.body()));
            unbind(f.tc_from().size() * 2);
            break;
        }
        }
        return n;
    }

    std::shared_ptr<const CompiledTerm> term(const Term& t) {
        auto n = std::make_shared<CompiledTerm>();
        switch (t.kind()) {
        case TermKind::IntConst:
            n->k = CompiledTerm::K::Int;
            n->v = t.value();
            break;
        case TermKind::ObjConst: {
            auto i = layout_.domain->index(t.name());
            if (!i) throw EvalError("object '" + t.name() + "' is not in the domain");
            n->k = CompiledTerm::K::Obj;
            n->v = static_cast<std::int64_t>(*i);
            break;
        }
        case TermKind::Var:
            n->k = CompiledTerm::K::Slot;
            n->v = static_cast<std::int64_t>(lookup(t.as_var()));
            break;
        case TermKind::Add:
        case TermKind::Sub:
            n->k = t.kind() == TermKind::Add ? CompiledTerm::K::Add : CompiledTerm::K::Sub;
            n->a = term(t.lhs());
            n->b = term(t.rhs());
            break;
        case TermKind::FluentFn: {
            auto f = layout_.vocab->func_index(t.name());
            if (!f) throw EvalError("undeclared functional fluent '" + t.name() + "'");
            n->k = CompiledTerm::K::Fn;
            n->v = static_cast<std::int64_t>(*f);
            break;
        }
        case TermKind::Count:
            n->k = CompiledTerm::K::Count;
            for (const auto& v : t.bound()) n->bound.push_back(bind(v));
            n->body = formula(t.body());
            unbind(t.bound().size());
            break;
        }
        return n;
    }

private:
    Arg arg(const Term& t) {
        if (t.kind() == TermKind::Var) return {true, static_cast<std::int64_t>(lookup(t.as_var()))};
        if (t.kind() == TermKind::ObjConst) {
            auto i = layout_.domain->index(t.name());
            if (!i) throw EvalError("object '" + t.name() + "' is not in the domain");
            return {false, static_cast<std::int64_t>(*i)};
        }
        throw EvalError("fluent arguments must be variables or object constants");
    }

    std::size_t bind(const Var& v) {
        scope_.emplace_back(v, next_);
        return next_++;
    }
    void unbind(std::size_t n) { scope_.resize(scope_.size() - n); }

    std::size_t lookup(const Var& v) const {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (it->first == v) return it->second;
        throw EvalError("unbound variable '" + v.name + "'");
    }

    const Layout& layout_;
    std::vector<std::pair<Var, std::size_t>> scope_;
    std::size_t next_ = 0;
};

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw EvalError("integer overflow");
    return r;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_sub_overflow(a, b, &r)) throw EvalError("integer overflow");
    return r;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

struct Env {
    EvalCache& cache;
    std::vector<std::int64_t> slots;
};

Truth eval_node(const CompiledNode& n, Env& env);

using Range = std::pair<std::int64_t, std::int64_t>;

Range eval_term_node(const CompiledTerm& t, Env& env) {
    switch (t.k) {
    case CompiledTerm::K::Int:
    case CompiledTerm::K::Obj:
        return {t.v, t.v};
    case CompiledTerm::K::Slot: {
        std::int64_t v = env.slots[static_cast<std::size_t>(t.v)];
        return {v, v};
    }
    case CompiledTerm::K::Fn: {
        std::int64_t v = env.cache.state.value(static_cast<std::size_t>(t.v));
        return {v, v};
    }
    case CompiledTerm::K::Add: {
        Range a = eval_term_node(*t.a, env);
        Range b = eval_term_node(*t.b, env);
        return {checked_add(a.first, b.first), checked_add(a.second, b.second)};
    }
    case CompiledTerm::K::Sub: {
        Range a = eval_term_node(*t.a, env);
        Range b = eval_term_node(*t.b, env);
        return {checked_sub(a.first, b.second), checked_sub(a.second, b.first)};
    }
    case CompiledTerm::K::Count: {
        const auto n = static_cast<std::int64_t>(env.cache.state.domain().size());
        std::int64_t yes = 0;
        std::int64_t maybe = 0;
        const std::size_t k = t.bound.size();
        std::vector<std::int64_t> idx(k, 0);
        if (n == 0) return {0, 0};
        while (true) {
            for (std::size_t i = 0; i < k; ++i) env.slots[t.bound[i]] = idx[i];
            Truth r = eval_node(*t.body, env);
            if (r == Truth::True) ++yes;
            if (r == Truth::Unknown) ++maybe;
            std::size_t i = k;
            while (i > 0) {
                --i;
                if (++idx[i] < n) break;
                idx[i] = 0;
                if (i == 0) return {yes, yes + maybe};
            }
        }
    }
    }
    return {0, 0};
}

std::int64_t arg_value(const Arg& a, const Env& env) {
    return a.slot ? env.slots[static_cast<std::size_t>(a.v)] : a.v;
}

const std::vector<std::uint8_t>& closure_of(const CompiledNode& n, Env& env) {
    std::vector<std::int64_t> key;
    for (std::size_t s : n.outer) key.push_back(env.slots[s]);
    auto& cache = env.cache.closures;
    auto found = cache.find({&n, key});
    if (found != cache.end()) return found->second;

    const std::size_t dom = env.cache.state.domain().size();
    const std::size_t k = n.from.size();
    const std::size_t nodes = ipow(dom, k);
    auto assign = [&](const std::vector<std::size_t>& slots, std::size_t code) {
        for (std::size_t i = k; i-- > 0;) {
            env.slots[slots[i]] = static_cast<std::int64_t>(code % dom);
            code /= dom;
        }
    };
    // Edge values of the base relation.
    std::vector<std::uint8_t> edge(nodes * nodes, 0);
    for (std::size_t a = 0; a < nodes; ++a) {
        assign(n.from, a);
        for (std::size_t b = 0; b < nodes; ++b) {
            assign(n.to, b);
            edge[a * nodes + b] = static_cast<std::uint8_t>(eval_node(*n.kids[0], env));
        }
    }
    // Reflexive-transitive closure of the certain edges and of the possible
    // edges; a pair is true if certainly reachable, unknown if possibly.
    std::vector<std::uint8_t> result(nodes * nodes, 0);
    std::vector<std::uint8_t> seen(nodes);
    std::vector<std::size_t> stack;
    for (int pass = 0; pass < 2; ++pass) {
        const std::uint8_t mark = pass == 0 ? 2 : 1;  // possible first, then certain
        for (std::size_t src = 0; src < nodes; ++src) {
            std::fill(seen.begin(), seen.end(), 0);
            seen[src] = 1;
            stack.assign(1, src);
            while (!stack.empty()) {
                std::size_t u = stack.back();
                stack.pop_back();
                for (std::size_t v = 0; v < nodes; ++v) {
                    std::uint8_t e = edge[u * nodes + v];
                    if (seen[v] || e == 0 || (pass == 1 && e != 1)) continue;
                    seen[v] = 1;
                    stack.push_back(v);
                }
            }
            for (std::size_t v = 0; v < nodes; ++v)
                if (seen[v]) result[src * nodes + v] = mark;
        }
    }
    return cache.emplace(std::make_pair(&n, std::move(key)), std::move(result)).first->second;
}

Truth eval_node(const CompiledNode& n, Env& env) {
    switch (n.k) {
    case CompiledNode::K::True:
        return Truth::True;
    case CompiledNode::K::False:
        return Truth::False;
    case CompiledNode::K::Pred: {
        const auto dom = static_cast<std::int64_t>(env.cache.state.domain().size());
        std::int64_t idx = 0;
        for (const auto& a : n.args) idx = idx * dom + arg_value(a, env);
        return env.cache.state.atom(n.base + static_cast<std::size_t>(idx));
    }
    case CompiledNode::K::Eq: {
        Range a = eval_term_node(*n.l, env);
        Range b = eval_term_node(*n.r, env);
        if (a.first == a.second && b.first == b.second) return a.first == b.first ? Truth::True : Truth::False;
        if (a.second < b.first || b.second < a.first) return Truth::False;
        return Truth::Unknown;
    }
    case CompiledNode::K::Lt: {
        Range a = eval_term_node(*n.l, env);
        Range b = eval_term_node(*n.r, env);
        if (a.second < b.first) return Truth::True;
        if (a.first >= b.second) return Truth::False;
        return Truth::Unknown;
    }
    case CompiledNode::K::Cong: {
        Range a = eval_term_node(*n.l, env);
        Range b = eval_term_node(*n.r, env);
        if (a.first != a.second || b.first != b.second) return Truth::Unknown;
        return floor_mod(checked_sub(a.first, b.first), n.mod) == 0 ? Truth::True : Truth::False;
    }
    case CompiledNode::K::Not:
        return kleene_not(eval_node(*n.kids[0], env));
    case CompiledNode::K::And: {
        Truth r = Truth::True;
        for (const auto& c : n.kids) {
            Truth t = eval_node(*c, env);
            if (t == Truth::False) return Truth::False;
            if (t == Truth::Unknown) r = Truth::Unknown;
        }
        return r;
    }
    case CompiledNode::K::Or: {
        Truth r = Truth::False;
        for (const auto& c : n.kids) {
            Truth t = eval_node(*c, env);
            if (t == Truth::True) return Truth::True;
            if (t == Truth::Unknown) r = Truth::Unknown;
        }
        return r;
    }
    case CompiledNode::K::Exists:
    case CompiledNode::K::Forall: {
        const bool ex = n.k == CompiledNode::K::Exists;
        const Truth stop = ex ? Truth::True : Truth::False;
        Truth r = ex ? Truth::False : Truth::True;
        const auto dom = static_cast<std::int64_t>(env.cache.state.domain().size());
        for (std::int64_t o = 0; o < dom; ++o) {
            env.slots[n.slot] = o;
            Truth t = eval_node(*n.kids[0], env);
            if (t == stop) return stop;
            if (t == Truth::Unknown) r = Truth::Unknown;
        }
        return r;
    }
    case CompiledNode::K::TC: {
        const auto& closure = closure_of(n, env);
        const auto dom = static_cast<std::int64_t>(env.cache.state.domain().size());
        std::int64_t a = 0;
        std::int64_t b = 0;
        for (const auto& x : n.args) a = a * dom + arg_value(x, env);
        for (const auto& x : n.rhs) b = b * dom + arg_value(x, env);
        const auto nodes = static_cast<std::int64_t>(ipow(static_cast<std::size_t>(dom), n.from.size()));
        std::uint8_t v = closure[static_cast<std::size_t>(a * nodes + b)];
        return v == 1 ? Truth::True : v == 2 ? Truth::Unknown : Truth::False;
    }
    }
    return Truth::Unknown;
}

}  // namespace

CompiledFormula CompiledFormula::compile(const Formula& f, const Layout& layout, const std::vector<Var>& params) {
    Compiler c(layout, params);
    CompiledFormula out;
    out.root_ = c.formula(f);
    out.slots_ = c.slots();
    out.params_ = params.size();
    return out;
}

Truth CompiledFormula::eval(EvalCache& cache, const std::vector<std::int64_t>& args) const {
    if (!root_) return Truth::True;
    if (args.size() != params_) throw EvalError("wrong number of arguments for compiled formula");
    Env env{cache, std::vector<std::int64_t>(slots_, 0)};
    std::copy(args.begin(), args.end(), env.slots.begin());
    return eval_node(*root_, env);
}

Truth CompiledFormula::eval(const FiniteState& s, const std::vector<std::int64_t>& args) const {
    EvalCache cache(s);
    return eval(cache, args);
}

bool CompiledFormula::holds(EvalCache& cache, const std::vector<std::int64_t>& args) const {
    Truth t = eval(cache, args);
    if (t == Truth::Unknown) throw EvalError("formula is undetermined in a partial state");
    return t == Truth::True;
}

bool CompiledFormula::holds(const FiniteState& s, const std::vector<std::int64_t>& args) const {
    EvalCache cache(s);
    return holds(cache, args);
}

CompiledTermFn CompiledTermFn::compile(const Term& t, const Layout& layout, const std::vector<Var>& params) {
    Compiler c(layout, params);
    CompiledTermFn out;
    out.root_ = c.term(t);
    out.slots_ = c.slots();
    out.params_ = params.size();
    return out;
}

std::pair<std::int64_t, std::int64_t> CompiledTermFn::range(EvalCache& cache, const std::vector<std::int64_t>& args) const {
    if (args.size() != params_) throw EvalError("wrong number of arguments for compiled term");
    Env env{cache, std::vector<std::int64_t>(slots_, 0)};
    std::copy(args.begin(), args.end(), env.slots.begin());
    return eval_term_node(*root_, env);
}

std::int64_t CompiledTermFn::value(const FiniteState& s, const std::vector<std::int64_t>& args) const {
    EvalCache cache(s);
    auto [lo, hi] = range(cache, args);
    if (lo != hi) throw EvalError("term is undetermined in a partial state");
    return lo;
}

namespace {

// Splits a ground binding into positional parameters.
std::pair<std::vector<Var>, std::vector<std::int64_t>> ground_args(const FiniteState& s, const Binding& b) {
    std::vector<Var> params;
    std::vector<std::int64_t> args;
    for (const auto& [v, t] : b) {
        params.push_back(v);
        if (t.kind() == TermKind::IntConst) {
            args.push_back(t.value());
        } else if (t.kind() == TermKind::ObjConst) {
            auto i = s.domain().index(t.name());
            if (!i) throw EvalError("object '" + t.name() + "' is not in the domain");
            args.push_back(static_cast<std::int64_t>(*i));
        } else {
            throw EvalError("binding of '" + v.name + "' is not ground");
        }
    }
    return {params, args};
}

}  // namespace

bool eval_formula(const FiniteState& s, const Formula& f, const Binding& binding) {
    auto [params, args] = ground_args(s, binding);
    return CompiledFormula::compile(f, s.layout(), params).holds(s, args);
}

std::int64_t eval_term(const FiniteState& s, const Term& t, const Binding& binding) {
    auto [params, args] = ground_args(s, binding);
    return CompiledTermFn::compile(t, s.layout(), params).value(s, args);
}

std::string eval_object(const FiniteState& s, const Term& t, const Binding& binding) {
    if (t.sort() != Sort::Object) throw EvalError("not an object term");
    return s.domain().objects.at(static_cast<std::size_t>(eval_term(s, t, binding)));
}

// ---------------------------------------------------------------- machine

Machine::Machine(const BAT& bat, std::shared_ptr<const Domain> domain)
    : bat_(std::make_shared<const BAT>(bat)), layout_(Layout::make(Vocabulary::of(bat), std::move(domain))) {
    const Domain& dom = *layout_->domain;
    for (const auto& a : bat_->actions) {
        poss_.emplace(a.name, compile(a.poss, a.params));
        const std::size_t k = a.params.size();
        std::vector<std::size_t> idx(k, 0);
        if (k > 0 && dom.size() == 0) continue;
        while (true) {
            GroundAction g{a.name, {}};
            for (std::size_t i : idx) g.args.push_back(dom.objects[i]);
            ground_.push_back(std::move(g));
            std::size_t i = k;
            bool done = true;
            while (i > 0) {
                --i;
                if (++idx[i] < dom.size()) {
                    done = false;
                    break;
                }
                idx[i] = 0;
            }
            if (done) break;
        }
    }
    const Vocabulary& vocab = *layout_->vocab;
    for (const auto& decl : bat_->fluents) {
        FluentCode code;
        code.functional = decl.kind == FluentKind::Function;
        code.index = code.functional ? *vocab.func_index(decl.name) : *vocab.pred_index(decl.name);
        code.arity = decl.arity();
        if (const SSA* ssa = bat_->ssa(decl.name)) {
            for (const auto& c : ssa->clauses) {
                ClauseCode cc;
                cc.polarity = c.polarity;
                std::vector<Var> extras;
                for (const auto& t : c.pattern) {
                    if (t.kind() == TermKind::ObjConst) {
                        auto i = dom.index(t.name());
                        if (!i) throw EvalError("object '" + t.name() + "' is not in the domain");
                        cc.pattern.push_back({ArgKind::Const, *i});
                        continue;
                    }
                    const Var v = t.as_var();
                    auto p = std::find(decl.params.begin(), decl.params.end(), v);
                    if (p != decl.params.end()) {
                        cc.pattern.push_back({ArgKind::Param, static_cast<std::size_t>(p - decl.params.begin())});
                        continue;
                    }
                    auto e = std::find(extras.begin(), extras.end(), v);
                    if (e == extras.end()) {
                        extras.push_back(v);
                        e = extras.end() - 1;
                    }
                    cc.pattern.push_back({ArgKind::Extra, static_cast<std::size_t>(e - extras.begin())});
                }
                cc.extra_count = extras.size();
                std::vector<Var> params = decl.params;
                params.insert(params.end(), extras.begin(), extras.end());
                cc.context = compile(c.context, params);
                if (c.value) cc.value = CompiledTermFn::compile(*c.value, *layout_, params);
                code.by_action[c.action].push_back(std::move(cc));
            }
        }
        fluents_.push_back(std::move(code));
    }
    init_ = compile(bat_->init);
    constraints_ = compile(bat_->constraint());
}

std::vector<std::int64_t> Machine::args_of(const GroundAction& a) const {
    std::vector<std::int64_t> out;
    for (const auto& n : a.args) {
        auto i = layout_->domain->index(n);
        if (!i) throw EvalError("object '" + n + "' is not in the domain");
        out.push_back(static_cast<std::int64_t>(*i));
    }
    return out;
}

bool Machine::poss(EvalCache& cache, const GroundAction& a) const {
    auto it = poss_.find(a.name);
    if (it == poss_.end()) throw EvalError("undeclared action '" + a.name + "'");
    return it->second.holds(cache, args_of(a));
}

bool Machine::poss(const FiniteState& s, const GroundAction& a) const {
    EvalCache cache(s);
    return poss(cache, a);
}

FiniteState Machine::successor(const FiniteState& s, const GroundAction& a) const {
    if (!poss_.contains(a.name)) throw EvalError("undeclared action '" + a.name + "'");
    const std::vector<std::int64_t> g = args_of(a);
    const auto dom = static_cast<std::int64_t>(layout_->domain->size());
    EvalCache cache(s);
    FiniteState next = s;
    for (const auto& fc : fluents_) {
        auto it = fc.by_action.find(a.name);
        if (it == fc.by_action.end()) continue;
        std::vector<std::size_t> adds;
        std::vector<std::size_t> dels;
        std::vector<std::int64_t> values;
        bool deleted = false;
        for (const auto& cc : it->second) {
            // Unify the pattern with the ground arguments.
            std::vector<std::int64_t> params(fc.arity, -1);
            std::vector<std::int64_t> extras(cc.extra_count, -1);
            bool match = cc.pattern.size() == g.size();
            for (std::size_t i = 0; match && i < cc.pattern.size(); ++i) {
                const PatternArg& pa = cc.pattern[i];
                if (pa.kind == ArgKind::Const) {
                    match = static_cast<std::int64_t>(pa.index) == g[i];
                } else {
                    std::int64_t& slot = pa.kind == ArgKind::Param ? params[pa.index] : extras[pa.index];
                    if (slot >= 0 && slot != g[i]) match = false;
                    slot = g[i];
                }
            }
            if (!match) continue;
            // Parameters not fixed by the pattern range over the domain.
            std::vector<std::size_t> open;
            for (std::size_t i = 0; i < fc.arity; ++i)
                if (params[i] < 0) open.push_back(i);
            if (!open.empty() && dom == 0) continue;
            for (std::size_t i : open) params[i] = 0;
            while (true) {
                std::vector<std::int64_t> args = params;
                args.insert(args.end(), extras.begin(), extras.end());
                if (cc.context.holds(cache, args)) {
                    if (fc.functional) {
                        if (cc.polarity == Polarity::Add) {
                            auto [lo, hi] = cc.value->range(cache, args);
                            if (lo != hi) throw EvalError("value undetermined");
                            values.push_back(lo);
                        } else {
                            deleted = true;
                        }
                    } else {
                        std::vector<std::size_t> tuple(params.begin(), params.end());
                        (cc.polarity == Polarity::Add ? adds : dels).push_back(layout_->atom(fc.index, tuple));
                    }
                }
                std::size_t j = open.size();
                bool done = true;
                while (j > 0) {
                    --j;
                    if (++params[open[j]] < dom) {
                        done = false;
                        break;
                    }
                    params[open[j]] = 0;
                }
                if (done) break;
            }
        }
        if (fc.functional) {
            if (!deleted) values.push_back(s.value(fc.index));
            std::sort(values.begin(), values.end());
            values.erase(std::unique(values.begin(), values.end()), values.end());
            const std::string& name = layout_->vocab->funcs[fc.index];
            if (values.empty())
                throw EvalError("successor state axiom of '" + name + "' yields no value for " + to_string(a));
            if (values.size() > 1)
                throw EvalError("successor state axiom of '" + name + "' yields several values for " + to_string(a));
            next.set_value(fc.index, values.front());
        } else {
            for (std::size_t d : dels) next.set_atom(d, Truth::False);
            for (std::size_t d : adds) next.set_atom(d, Truth::True);
        }
    }
    return next;
}

std::vector<std::pair<GroundAction, FiniteState>> Machine::successors(const FiniteState& s, bool poss_only) const {
    std::vector<std::pair<GroundAction, FiniteState>> out;
    EvalCache cache(s);
    for (const auto& a : ground_) {
        if (poss_only && !poss(cache, a)) continue;
        out.emplace_back(a, successor(s, a));
    }
    return out;
}

bool poss(const BAT& bat, const FiniteState& s, const GroundAction& a) {
    Machine m(bat, s.layout().domain);
    return m.poss(s, a);
}

FiniteState successor(const BAT& bat, const FiniteState& s, const GroundAction& a) {
    Machine m(bat, s.layout().domain);
    return m.successor(s, a);
}

// ---------------------------------------------------------------- programs

struct ProgramRunner::Node {
    ProgramKind kind;
    std::string name;
    std::vector<Arg> args;
    CompiledFormula test;
    std::vector<std::shared_ptr<const Node>> kids;
    std::size_t slot = 0;
};

namespace {

class ProgramCompiler {
public:
    explicit ProgramCompiler(const Machine& m) : m_(m) {}

    std::shared_ptr<const ProgramRunner::Node> compile(const Program& p) {
        auto n = std::make_shared<ProgramRunner::Node>();
        n->kind = p.kind();
        switch (p.kind()) {
        case ProgramKind::Nil:
            break;
        case ProgramKind::Act:
            n->name = p.name();
            if (!m_.bat().action(p.name())) throw EvalError("undeclared action '" + p.name() + "'");
            for (const auto& a : p.args()) {
                if (a.kind() == TermKind::Var) {
                    n->args.push_back({true, static_cast<std::int64_t>(lookup(a.as_var()))});
                } else {
                    auto i = m_.domain().index(a.name());
                    if (!i) throw EvalError("object '" + a.name() + "' is not in the domain");
                    n->args.push_back({false, static_cast<std::int64_t>(*i)});
                }
            }
            break;
        case ProgramKind::Test:
            n->test = m_.compile(p.formula(), scope_);
            break;
        case ProgramKind::Seq:
        case ProgramKind::Choice:
            n->kids.push_back(compile(p.first()));
            n->kids.push_back(compile(p.second()));
            break;
        case ProgramKind::Pick:
            n->slot = scope_.size();
            scope_.push_back(p.var());
            n->kids.push_back(compile(p.body()));
            scope_.pop_back();
            break;
        case ProgramKind::Star:
            n->kids.push_back(compile(p.body()));
            break;
        }
        return n;
    }

private:
    std::size_t lookup(const Var& v) const {
        for (std::size_t i = scope_.size(); i-- > 0;)
            if (scope_[i] == v) return i;
        throw EvalError("program is not closed: '" + v.name + "' is unbound");
    }

    const Machine& m_;
    std::vector<Var> scope_;
};

void exec(const Machine& m, const ProgramRunner::Node& n, const FiniteState& s, EvalCache& cache,
          std::vector<std::int64_t>& env, StateSet& out) {
    switch (n.kind) {
    case ProgramKind::Nil:
        out.insert(s);
        return;
    case ProgramKind::Act: {
        GroundAction a{n.name, {}};
        for (const auto& x : n.args) a.args.push_back(m.domain().objects[static_cast<std::size_t>(x.slot ? env[static_cast<std::size_t>(x.v)] : x.v)]);
        if (m.poss(cache, a)) out.insert(m.successor(s, a));
        return;
    }
    case ProgramKind::Test:
        if (n.test.holds(cache, env)) out.insert(s);
        return;
    case ProgramKind::Seq: {
        StateSet mid;
        exec(m, *n.kids[0], s, cache, env, mid);
        for (const auto& t : mid) {
            if (t == s) {
                exec(m, *n.kids[1], s, cache, env, out);
            } else {
                EvalCache c2(t);
                exec(m, *n.kids[1], t, c2, env, out);
            }
        }
        return;
    }
    case ProgramKind::Choice:
        exec(m, *n.kids[0], s, cache, env, out);
        exec(m, *n.kids[1], s, cache, env, out);
        return;
    case ProgramKind::Pick: {
        const auto dom = static_cast<std::int64_t>(m.domain().size());
        env.push_back(0);
        for (std::int64_t o = 0; o < dom; ++o) {
            env.back() = o;
            exec(m, *n.kids[0], s, cache, env, out);
        }
        env.pop_back();
        return;
    }
    case ProgramKind::Star: {
        StateSet seen{s};
        std::deque<FiniteState> frontier{s};
        while (!frontier.empty()) {
            FiniteState t = frontier.front();
            frontier.pop_front();
            StateSet next;
            EvalCache c2(t);
            exec(m, *n.kids[0], t, c2, env, next);
            for (const auto& u : next)
                if (seen.insert(u).second) frontier.push_back(u);
        }
        out.insert(seen.begin(), seen.end());
        return;
    }
    }
}

}  // namespace

ProgramRunner::ProgramRunner(const Machine& machine, const Program& p) : machine_(&machine) {
    if (!is_closed(p)) throw EvalError("program is not closed");
    root_ = ProgramCompiler(machine).compile(p);
}

std::vector<FiniteState> ProgramRunner::run(const FiniteState& s) const {
    StateSet out;
    EvalCache cache(s);
    std::vector<std::int64_t> env;
    exec(*machine_, *root_, s, cache, env, out);
    std::vector<FiniteState> v(out.begin(), out.end());
    std::sort(v.begin(), v.end());
    return v;
}

std::vector<FiniteState> do_program(const BAT& bat, const FiniteState& s, const Program& p) {
    Machine m(bat, s.layout().domain);
    return ProgramRunner(m, p).run(s);
}

Reachability reachable(const Machine& machine, const std::vector<FiniteState>& initial, StepMode mode,
                       const std::optional<Program>& program, std::size_t budget) {
    std::optional<ProgramRunner> runner;
    if (mode == StepMode::Program) {
        if (!program) throw EvalError("program mode needs a program");
        runner.emplace(machine, *program);
    }
    Reachability r;
    StateSet seen;
    std::deque<std::size_t> frontier;
    for (const auto& s : initial) {
        if (seen.insert(s).second) {
            r.states.push_back(s);
            frontier.push_back(r.states.size() - 1);
        }
    }
    while (!frontier.empty()) {
        const FiniteState s = r.states[frontier.front()];
        frontier.pop_front();
        std::vector<FiniteState> next;
        if (runner) {
            next = runner->run(s);
        } else {
            for (auto& [a, t] : machine.successors(s, mode == StepMode::PossOnly)) next.push_back(std::move(t));
        }
        for (auto& t : next) {
            if (seen.contains(t)) continue;
            if (r.states.size() >= budget) {
                r.complete = false;
                return r;
            }
            seen.insert(t);
            r.states.push_back(std::move(t));
            frontier.push_back(r.states.size() - 1);
        }
    }
    return r;
}

// ---------------------------------------------------------------- abstraction

Abstractor::Abstractor(const RefinementMapping& m, std::shared_ptr<const Layout> low) {
    auto vocab = Vocabulary::of(m);
    high_ = Layout::make(vocab, Domain::make({}, 0));
    for (const auto& p : vocab->preds) preds_.push_back(CompiledFormula::compile(m.fluent(p.name)->formula, *low));
    for (const auto& f : vocab->funcs) funcs_.push_back(CompiledTermFn::compile(m.fluent(f)->count, *low));
}

AbstractState Abstractor::operator()(EvalCache& cache) const {
    AbstractState a(high_);
    for (std::size_t i = 0; i < preds_.size(); ++i) a.set_atom(high_->offsets[i], preds_[i].eval(cache));
    for (std::size_t i = 0; i < funcs_.size(); ++i) {
        auto [lo, hi] = funcs_[i].range(cache);
        if (lo != hi) throw EvalError("abstract value undetermined in a partial state");
        a.set_value(i, lo);
    }
    return a;
}

AbstractState Abstractor::operator()(const FiniteState& low) const {
    EvalCache cache(low);
    return (*this)(cache);
}

AbstractState abstract_state(const RefinementMapping& m, const FiniteState& low) {
    return Abstractor(m, low.layout_ptr())(low);
}

AbstractState make_abstract(std::shared_ptr<const Vocabulary> vocab, const std::map<std::string, std::int64_t>& values) {
    auto layout = Layout::make(std::move(vocab), Domain::make({}, 0));
    AbstractState a(layout);
    for (const auto& [k, v] : values) {
        if (auto p = layout->vocab->pred_index(k))
            a.set_atom(layout->offsets[*p], v ? Truth::True : Truth::False);
        else if (auto f = layout->vocab->func_index(k))
            a.set_value(*f, v);
        else
            throw EvalError("unknown high-level fluent '" + k + "'");
    }
    return a;
}

// ---------------------------------------------------------------- enumeration

bool enumerate_states(const std::shared_ptr<const Layout>& layout, const Formula& filter,
                      const std::function<bool(const FiniteState&)>& visit) {
    const CompiledFormula f = CompiledFormula::compile(filter, *layout);
    FiniteState s(layout);
    for (std::size_t a = 0; a < layout->atom_count; ++a) s.set_atom(a, Truth::Unknown);
    // Atoms over low-numbered objects first, so substructures are complete
    // early and violations surface high in the search tree.
    std::vector<std::size_t> order(layout->atom_count);
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::size_t> key(layout->atom_count);
    for (std::size_t a = 0; a < layout->atom_count; ++a) {
        auto [p, args] = layout->decode(a);
        std::size_t mx = 0;
        for (std::size_t x : args) mx = std::max(mx, x + 1);
        key[a] = mx;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return key[x] < key[y]; });

    bool keep_going = true;
    std::function<void(std::size_t)> dfs = [&](std::size_t depth) {
        if (!keep_going) return;
        if (depth == order.size()) {
            if (f.eval(s) == Truth::True) keep_going = visit(s);
            return;
        }
        const std::size_t a = order[depth];
        for (Truth v : {Truth::False, Truth::True}) {
            s.set_atom(a, v);
            if (f.eval(s) != Truth::False) dfs(depth + 1);
            if (!keep_going) break;
        }
        s.set_atom(a, Truth::Unknown);
    };
    if (f.eval(s) != Truth::False) dfs(0);
    return keep_going;
}

namespace {

FiniteState permuted(const FiniteState& s, const std::vector<std::size_t>& perm) {
    const Layout& l = s.layout();
    FiniteState t = s;
    const std::size_t n = l.domain->size();
    for (std::size_t p = 0; p < l.vocab->preds.size(); ++p) {
        const std::size_t k = l.vocab->preds[p].arity;
        const std::size_t count = ipow(n, k);
        for (std::size_t code = 0; code < count; ++code) {
            std::size_t rest = code;
            std::size_t mapped = 0;
            std::size_t scale = 1;
            for (std::size_t i = 0; i < k; ++i) {
                mapped += perm[rest % n] * scale;
                rest /= n;
                scale *= n;
            }
            t.set_atom(l.offsets[p] + mapped, s.atom(l.offsets[p] + code));
        }
    }
    return t;
}

}  // namespace

FiniteState canonical(const FiniteState& s) {
    const Layout& l = s.layout();
    const std::size_t n = l.domain->size();
    const std::size_t c = l.domain->constants;
    if (n - c <= 1) return s;
    // Colour anonymous objects by how they occur in true atoms, refining by
    // neighbours' colours until stable.
    std::vector<std::size_t> colour(n, 0);
    for (std::size_t i = 0; i < c; ++i) colour[i] = i + 1;
    for (int round = 0; round < 4; ++round) {
        std::vector<std::vector<std::size_t>> sig(n);
        for (std::size_t a = 0; a < l.atom_count; ++a) {
            if (s.atom(a) == Truth::False) continue;
            auto [p, args] = l.decode(a);
            for (std::size_t i = 0; i < args.size(); ++i) {
                sig[args[i]].push_back(p * 64 + i * 8 + static_cast<std::size_t>(s.atom(a)));
                for (std::size_t j = 0; j < args.size(); ++j)
                    if (j != i) sig[args[i]].push_back(1000000 + p * 4096 + i * 512 + j * 64 + colour[args[j]]);
            }
        }
        std::vector<std::pair<std::pair<std::size_t, std::vector<std::size_t>>, std::size_t>> keyed;
        for (std::size_t o = 0; o < n; ++o) {
            std::sort(sig[o].begin(), sig[o].end());
            keyed.push_back({{colour[o], sig[o]}, o});
        }
        std::vector<std::size_t> next(n);
        auto sorted = keyed;
        std::sort(sorted.begin(), sorted.end());
        std::size_t id = 0;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (i > 0 && sorted[i].first != sorted[i - 1].first) ++id;
            next[sorted[i].second] = id;
        }
        // Constants keep distinct colours below all anonymous ones.
        if (next == colour) break;
        colour = next;
    }
    // Anonymous objects ordered by colour; ties resolved by trying every
    // arrangement within a colour class.
    std::vector<std::size_t> anon(n - c);
    std::iota(anon.begin(), anon.end(), c);
    std::stable_sort(anon.begin(), anon.end(), [&](std::size_t a, std::size_t b) { return colour[a] < colour[b]; });
    std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end) in anon
    for (std::size_t i = 0; i < anon.size();) {
        std::size_t j = i;
        while (j < anon.size() && colour[anon[j]] == colour[anon[i]]) ++j;
        groups.emplace_back(i, j);
        i = j;
    }
    for (auto& [b, e] : groups) std::sort(anon.begin() + static_cast<std::ptrdiff_t>(b), anon.begin() + static_cast<std::ptrdiff_t>(e));
    std::optional<FiniteState> best;
    std::function<void(std::size_t)> search = [&](std::size_t g) {
        if (g == groups.size()) {
            std::vector<std::size_t> perm(n);
            for (std::size_t i = 0; i < c; ++i) perm[i] = i;
            for (std::size_t i = 0; i < anon.size(); ++i) perm[anon[i]] = c + i;
            FiniteState t = permuted(s, perm);
            if (!best || t.atoms() < best->atoms()) best = std::move(t);
            return;
        }
        auto b = anon.begin() + static_cast<std::ptrdiff_t>(groups[g].first);
        auto e = anon.begin() + static_cast<std::ptrdiff_t>(groups[g].second);
        std::sort(b, e);
        do {
            search(g + 1);
        } while (std::next_permutation(b, e));
    };
    search(0);
    return *best;
}

InitialStates admissible_initial_states(const Machine& machine, std::size_t budget) {
    InitialStates out;
    std::vector<FiniteState> candidates;
    enumerate_states(machine.layout(), Formula::conj(machine.bat().init, machine.bat().constraint()),
                     [&](const FiniteState& s) {
                         candidates.push_back(s);
                         return true;
                     });
    // Explore the executable successors of all candidates up to symmetry
    // and mark states from which a constraint violation is reachable.
    std::unordered_map<FiniteState, std::size_t, StateHash> id;
    std::vector<FiniteState> states;
    std::vector<std::vector<std::size_t>> preds;
    std::vector<char> bad;
    std::deque<std::size_t> frontier;
    auto intern = [&](FiniteState s) -> std::size_t {
        FiniteState c = canonical(s);
        auto it = id.find(c);
        if (it != id.end()) return it->second;
        if (states.size() >= budget) throw EvalError("state budget exhausted while checking admissibility");
        const std::size_t k = states.size();
        id.emplace(c, k);
        bad.push_back(machine.constraints().holds(c) ? 0 : 1);
        states.push_back(std::move(c));
        preds.emplace_back();
        frontier.push_back(k);
        return k;
    };
    for (const auto& s : candidates) intern(s);
    while (!frontier.empty()) {
        const std::size_t k = frontier.front();
        frontier.pop_front();
        if (bad[k]) continue;
        const FiniteState s = states[k];
        for (auto& [a, t] : machine.successors(s, true)) {
            const std::size_t j = intern(std::move(t));
            preds[j].push_back(k);
        }
    }
    std::deque<std::size_t> work;
    for (std::size_t k = 0; k < states.size(); ++k)
        if (bad[k]) work.push_back(k);
    while (!work.empty()) {
        const std::size_t k = work.front();
        work.pop_front();
        for (std::size_t p : preds[k])
            if (!bad[p]) {
                bad[p] = 1;
                work.push_back(p);
            }
    }
    for (const auto& s : candidates) {
        if (bad[id.at(canonical(s))])
            ++out.rejected;
        else
            out.admissible.push_back(s);
    }
    return out;
}

std::vector<FiniteState> constraint_states(const Machine& machine) {
    std::vector<FiniteState> out;
    enumerate_states(machine.layout(), machine.bat().constraint(), [&](const FiniteState& s) {
        out.push_back(s);
        return true;
    });
    return out;
}

}  // namespace absynth
