// Sorted abstract syntax for terms, formulas and Golog programs.
//
// All nodes are immutable and shared through std::shared_ptr<const ...>, so
// copying a Term/Formula/Program is cheap and values can be passed between
// threads freely. Formulas are situation-suppressed: fluent atoms never carry
// a situation argument; the situation lives in the state an evaluator is given.

#ifndef ABSYNTH_AST_HPP
#define ABSYNTH_AST_HPP

#include <compare>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace absynth {

enum class Sort { Object, Integer, Action, Boolean };

std::string_view to_string(Sort sort);

struct Var {
    std::string name;
    Sort sort = Sort::Object;

    friend bool operator==(const Var&, const Var&) = default;
    friend std::strong_ordering operator<=>(const Var& a, const Var& b) {
        if (auto c = a.name <=> b.name; c != 0) return c;
        return a.sort <=> b.sort;
    }
};

class Term;
class Formula;
class Program;
struct TermNode;
struct FormulaNode;
struct ProgramNode;

enum class TermKind { IntConst, ObjConst, Var, Add, Sub, FluentFn, Count };

class Term {
public:
    static Term int_const(std::int64_t value);
    static Term obj(std::string name);
    static Term var(Var v);
    static Term var(std::string name, Sort sort);
    static Term add(Term lhs, Term rhs);
    static Term sub(Term lhs, Term rhs);
    static Term fluent(std::string name);
    // #vars. body; vars must be non-empty and object-sorted.
    static Term count(std::vector<Var> vars, Formula body);

    TermKind kind() const;
    Sort sort() const;
    std::int64_t value() const;          // IntConst
    const std::string& name() const;     // ObjConst, Var, FluentFn
    Var as_var() const;                  // Var
    const Term& lhs() const;             // Add, Sub
    const Term& rhs() const;             // Add, Sub
    const std::vector<Var>& bound() const;  // Count
    const Formula& body() const;         // Count

    const TermNode* node() const { return node_.get(); }

private:
    explicit Term(std::shared_ptr<const TermNode> node) : node_(std::move(node)) {}
    std::shared_ptr<const TermNode> node_;
};

enum class FormulaKind {
    True, False, Pred, Eq, Lt, CongMod, Not, And, Or, Exists, Forall, TC
};

class Formula {
public:
    Formula();  // true

    static Formula top();
    static Formula bottom();
    static Formula pred(std::string name, std::vector<Term> args = {});
    static Formula eq(Term lhs, Term rhs);
    static Formula lt(Term lhs, Term rhs);
    static Formula cong(std::int64_t modulus, Term lhs, Term rhs);
    static Formula negate(Formula f);
    // n-ary connectives; an empty list yields the unit, a singleton its member.
    static Formula conj(std::vector<Formula> parts);
    static Formula disj(std::vector<Formula> parts);
    static Formula conj(Formula a, Formula b);
    static Formula disj(Formula a, Formula b);
    static Formula implies(Formula a, Formula b);
    static Formula iff(Formula a, Formula b);
    static Formula exists(Var v, Formula body);
    static Formula forall(Var v, Formula body);
    static Formula exists(const std::vector<Var>& vs, Formula body);
    static Formula forall(const std::vector<Var>& vs, Formula body);
    // [TC_{from,to} body](lhs, rhs): reflexive transitive closure on k-tuples.
    static Formula tc(std::vector<Var> from, std::vector<Var> to, Formula body,
                      std::vector<Term> lhs, std::vector<Term> rhs);
    // P*(lhs, rhs) and P+(lhs, rhs) for a 2k-ary predicate P.
    static Formula star(const std::string& pred, std::vector<Term> lhs, std::vector<Term> rhs);
    static Formula plus(const std::string& pred, std::vector<Term> lhs, std::vector<Term> rhs);
    // lhs != rhs as tuples: a disjunction of component disequalities.
    static Formula tuple_neq(const std::vector<Term>& lhs, const std::vector<Term>& rhs);

    FormulaKind kind() const;
    const std::string& name() const;              // Pred
    const std::vector<Term>& args() const;        // Pred; Eq/Lt/CongMod as [lhs, rhs]
    const Term& lhs() const;                      // Eq, Lt, CongMod
    const Term& rhs() const;                      // Eq, Lt, CongMod
    std::int64_t modulus() const;                 // CongMod
    const std::vector<Formula>& children() const; // Not (one), And, Or
    const Formula& child() const;                 // Not
    const Var& var() const;                       // Exists, Forall
    const Formula& body() const;                  // Exists, Forall, TC
    const std::vector<Var>& tc_from() const;
    const std::vector<Var>& tc_to() const;
    const std::vector<Term>& tc_lhs() const;
    const std::vector<Term>& tc_rhs() const;

    bool is(FormulaKind k) const { return kind() == k; }
    const FormulaNode* node() const { return node_.get(); }

private:
    explicit Formula(std::shared_ptr<const FormulaNode> node) : node_(std::move(node)) {}
    std::shared_ptr<const FormulaNode> node_;
};

enum class ProgramKind { Nil, Act, Test, Seq, Choice, Pick, Star };

class Program {
public:
    Program();  // nil

    static Program nil();
    static Program act(std::string name, std::vector<Term> args = {});
    static Program test(Formula f);
    static Program seq(Program a, Program b);
    static Program choice(Program a, Program b);
    static Program pick(Var v, Program body);
    static Program pick(const std::vector<Var>& vs, Program body);
    static Program star(Program body);

    ProgramKind kind() const;
    const std::string& name() const;        // Act
    const std::vector<Term>& args() const;  // Act
    const Formula& formula() const;         // Test
    const Program& first() const;           // Seq, Choice
    const Program& second() const;          // Seq, Choice
    const Var& var() const;                 // Pick
    const Program& body() const;            // Pick, Star

    const ProgramNode* node() const { return node_.get(); }

private:
    explicit Program(std::shared_ptr<const ProgramNode> node) : node_(std::move(node)) {}
    std::shared_ptr<const ProgramNode> node_;
};

// Structural total orders. Negated formulas sort right after their argument,
// so a literal and its negation are adjacent in normalized conjunctions.
std::strong_ordering compare(const Term& a, const Term& b);
std::strong_ordering compare(const Formula& a, const Formula& b);
std::strong_ordering compare(const Program& a, const Program& b);

inline bool operator==(const Term& a, const Term& b) { return compare(a, b) == 0; }
inline bool operator==(const Formula& a, const Formula& b) { return compare(a, b) == 0; }
inline bool operator==(const Program& a, const Program& b) { return compare(a, b) == 0; }
inline std::strong_ordering operator<=>(const Term& a, const Term& b) { return compare(a, b); }
inline std::strong_ordering operator<=>(const Formula& a, const Formula& b) { return compare(a, b); }
inline std::strong_ordering operator<=>(const Program& a, const Program& b) { return compare(a, b); }

// Nodes. Exposed so visitors can switch on kind without accessor overhead.
struct TermNode {
    TermKind kind;
    Sort sort;
    std::int64_t value = 0;
    std::string name;
    std::vector<Term> operands;
    std::vector<Var> bound;
    std::vector<Formula> body;  // Count: exactly one
};

struct FormulaNode {
    FormulaKind kind;
    std::string name;
    std::int64_t modulus = 0;
    std::vector<Term> terms;
    std::vector<Formula> children;
    Var var;
    std::vector<Var> from;
    std::vector<Var> to;
    std::vector<Term> rhs;  // TC second tuple; first tuple lives in terms
};

struct ProgramNode {
    ProgramKind kind;
    std::string name;
    std::vector<Term> args;
    std::vector<Formula> formula;   // Test: exactly one
    std::vector<Program> children;  // Seq/Choice: two, Pick/Star: one
    Var var;
};

}  // namespace absynth

#endif  // ABSYNTH_AST_HPP
