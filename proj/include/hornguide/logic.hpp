#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hornguide/errors.hpp"

namespace hornguide {

enum class TermKind : std::uint8_t { Variable = 0, Constant = 1 };

// Flat term: a variable or a constant, identified by an interned id.
// There are no function symbols in this fragment.
struct Term {
    TermKind kind{TermKind::Constant};
    std::int32_t id{0};

    bool is_var() const { return kind == TermKind::Variable; }
    bool is_const() const { return kind == TermKind::Constant; }

    friend bool operator==(const Term&, const Term&) = default;
    friend bool operator<(const Term& a, const Term& b) {
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.id < b.id;
    }
};

constexpr Term make_var(std::int32_t id) { return Term{TermKind::Variable, id}; }
constexpr Term make_const(std::int32_t id) { return Term{TermKind::Constant, id}; }

struct PredicateInfo {
    std::string name;
    int arity{1};
};

// Interned symbol tables. Name lookups only happen while parsing; everything
// downstream works on integer ids so atom comparison is O(arity).
class Vocabulary {
public:
    Vocabulary() = default;

    int num_predicates() const { return static_cast<int>(predicates_.size()); }
    int num_constants() const { return static_cast<int>(constants_.size()); }
    int num_variables() const { return static_cast<int>(variables_.size()); }
    int max_arity() const { return max_arity_; }

    const PredicateInfo& predicate(std::int32_t id) const { return predicates_[id]; }
    const std::string& constant_name(std::int32_t id) const { return constants_[id]; }
    const std::string& variable_name(std::int32_t id) const { return variables_[id]; }
    const std::vector<PredicateInfo>& predicates() const { return predicates_; }

    std::int32_t add_predicate(std::string name, int arity);
    std::int32_t add_constant(std::string name);
    std::int32_t add_variable(std::string name);

    // -1 when absent.
    std::int32_t find_predicate(std::string_view name) const;
    std::int32_t find_constant(std::string_view name) const;
    std::int32_t find_variable(std::string_view name) const;

    // FNV-1a over the canonical serialization; models record this to refuse
    // data from a different vocabulary.
    std::uint64_t hash() const;

    // Throws MalformedInputError when an invariant is broken (empty pools,
    // arity out of range, no predicate of max arity).
    void check() const;

private:
    std::vector<PredicateInfo> predicates_;
    std::vector<std::string> constants_;
    std::vector<std::string> variables_;
    std::unordered_map<std::string, std::int32_t> pred_index_;
    std::unordered_map<std::string, std::int32_t> const_index_;
    std::unordered_map<std::string, std::int32_t> var_index_;
    int max_arity_{0};
};

struct Atom {
    std::int32_t predicate{0};
    std::vector<Term> args;

    friend bool operator==(const Atom&, const Atom&) = default;
    friend bool operator<(const Atom& a, const Atom& b) {
        if (a.predicate != b.predicate) return a.predicate < b.predicate;
        return a.args < b.args;
    }
};

struct AtomHash {
    std::size_t operator()(const Atom& a) const {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](std::uint64_t v) {
            h ^= v;
            h *= 1099511628211ull;
        };
        mix(static_cast<std::uint64_t>(a.predicate));
        for (const Term& t : a.args) {
            mix((static_cast<std::uint64_t>(t.id) << 1) | static_cast<std::uint64_t>(t.kind));
        }
        return static_cast<std::size_t>(h);
    }
};

// Horn clause: empty body means a fact.
struct Clause {
    Atom head;
    std::vector<Atom> body;

    bool is_fact() const { return body.empty(); }
    friend bool operator==(const Clause&, const Clause&) = default;
};

struct KnowledgeBase {
    Vocabulary vocabulary;
    std::vector<Clause> clauses;
};

bool is_ground(const Atom& a);
bool is_ground(const Clause& c);
// Safety: every head variable occurs in the body (ground facts trivially safe).
bool is_safe(const Clause& c);
// Atom conforms to the vocabulary (ids in range, declared arity respected).
void validate_atom(const Atom& a, const Vocabulary& v);
void validate_clause(const Clause& c, const Vocabulary& v);

// Idempotent variable binding map. Bindings are kept flattened: a bound
// variable never maps to another bound variable, so apply() is one step.
class Substitution {
public:
    Substitution() = default;

    bool empty() const { return bind_.empty(); }
    std::size_t size() const { return bind_.size(); }

    const Term* lookup(std::int32_t var) const;
    // Self-bindings are dropped.
    void bind(std::int32_t var, Term value);

    Term apply(Term t) const;
    Atom apply(const Atom& a) const;
    Clause apply(const Clause& c) const;

    bool is_idempotent() const;

    // Returns s with apply(s, x) == other.apply(this->apply(x)), flattened.
    // Intended for substitutions produced by successive unifications, where
    // `other` was computed on atoms already under *this.
    Substitution compose(const Substitution& other) const;

    auto begin() const { return bind_.begin(); }
    auto end() const { return bind_.end(); }

    friend bool operator==(const Substitution&, const Substitution&) = default;

private:
    // Sorted by variable id; tiny in practice, linear scans win.
    std::vector<std::pair<std::int32_t, Term>> bind_;
};

enum class UnifyMode { SharedNames, StandardizeApart };

// Deterministic first-occurrence renaming of b's variables to fresh ids
// starting at `base`. Exposed so tests can reproduce the atom that
// standardize-apart unification actually matched against.
Atom rename_vars_from(const Atom& b, std::int32_t base);

// Largest variable id occurring in the atom, or -1 if ground.
std::int32_t max_var_id(const Atom& a);

// MGU of two atoms. SharedNames treats equal variable ids in a and b as the
// same variable; StandardizeApart first renames b's variables via
// rename_vars_from(b, 1 + max(max_var_id(a), max_var_id(b))).
// Returns nullopt when no unifier exists. Throws MalformedInputError when
// the atoms disagree on the arity of a common predicate (distinct from
// unification failure).
std::optional<Substitution> unify(const Atom& a, const Atom& b, UnifyMode mode);
bool unifiable(const Atom& a, const Atom& b, UnifyMode mode);

// Monotone fresh-variable source, owned per reasoning task.
struct VarCounter {
    std::int32_t next{0};
    Term fresh() { return make_var(next++); }
};

Atom standardize_apart(const Atom& a, VarCounter& counter);
Clause standardize_apart(const Clause& c, VarCounter& counter);

// Variables renumbered 0,1,2,... by order of first occurrence. Two atoms are
// renaming-equivalent iff their canonical forms compare equal.
Atom canonical_rename(const Atom& a);
// Clause variant numbers across head then body.
Clause canonical_rename(const Clause& c);

// ---- Textual syntax ----------------------------------------------------
// Facts:  p6(c1, c2).
// Rules:  p1(V1) :- p2(V1, c3), p4(V1).
// Tokens starting with an uppercase letter or '_' are variables; '%' starts
// a comment line. Whitespace-insensitive.

enum class SymbolPolicy {
    Strict,  // unknown symbol -> MalformedInputError
    Intern,  // unknown symbols are added to the vocabulary
};

std::string to_text(const Term& t, const Vocabulary& v);
std::string to_text(const Atom& a, const Vocabulary& v);
std::string to_text(const Clause& c, const Vocabulary& v);

Atom parse_atom(std::string_view text, Vocabulary& v, SymbolPolicy policy);
Clause parse_clause(std::string_view text, Vocabulary& v, SymbolPolicy policy);
// Parses a whole program (one clause per line or many per string); '%'
// comment lines and blank lines are skipped.
std::vector<Clause> parse_program(std::string_view text, Vocabulary& v, SymbolPolicy policy);

}  // namespace hornguide
