#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "hornguide/logic.hpp"
#include "hornguide/rng.hpp"
#include "oracles.hpp"

using namespace hornguide;

namespace {

Vocabulary tiny_vocab() {
    // 2 predicates (one of max arity 2), 3 constants, 2 variables
    Vocabulary v;
    v.add_predicate("p0", 1);
    v.add_predicate("p1", 2);
    v.add_constant("c0");
    v.add_constant("c1");
    v.add_constant("c2");
    v.add_variable("X");
    v.add_variable("Y");
    v.check();
    return v;
}

Vocabulary paper_style_vocab() {
    Vocabulary v;
    for (int i = 0; i < 8; ++i) v.add_predicate("p" + std::to_string(i), i < 3 ? 1 : 2);
    for (int i = 0; i < 6; ++i) v.add_constant("c" + std::to_string(i));
    for (int i = 0; i < 5; ++i) v.add_variable("V" + std::to_string(i));
    return v;
}

Atom random_atom(const Vocabulary& v, Rng& rng) {
    Atom a;
    a.predicate = static_cast<std::int32_t>(rng.index(v.num_predicates()));
    int arity = v.predicate(a.predicate).arity;
    for (int i = 0; i < arity; ++i) {
        if (rng.bernoulli(0.5))
            a.args.push_back(make_var(static_cast<std::int32_t>(rng.index(v.num_variables()))));
        else
            a.args.push_back(make_const(static_cast<std::int32_t>(rng.index(v.num_constants()))));
    }
    return a;
}

}  // namespace

TEST_CASE("unify: worked examples") {
    Vocabulary v;
    v.add_predicate("mom", 2);
    v.add_constant("john");
    v.add_constant("mary");
    v.add_variable("X");

    Atom anchor = parse_atom("mom(X, john)", v, SymbolPolicy::Strict);
    Atom pos = parse_atom("mom(mary, john)", v, SymbolPolicy::Strict);
    auto s = unify(anchor, pos, UnifyMode::SharedNames);
    REQUIRE(s.has_value());
    CHECK(s->apply(anchor) == pos);
    CHECK(s->size() == 1);

    // identical ground atoms -> empty substitution
    auto s2 = unify(pos, pos, UnifyMode::SharedNames);
    REQUIRE(s2.has_value());
    CHECK(s2->empty());
}

TEST_CASE("unify: repeated variables and scoping modes") {
    Vocabulary v = paper_style_vocab();
    Atom dup = parse_atom("p6(V1, V1)", v, SymbolPolicy::Strict);
    Atom consts = parse_atom("p6(c1, c2)", v, SymbolPolicy::Strict);
    CHECK_FALSE(unifiable(dup, consts, UnifyMode::SharedNames));

    // shared names make p6(V1,c1) and p6(c2,V1) clash on V1; renaming apart
    // separates the two occurrences
    Atom a = parse_atom("p6(V1, c1)", v, SymbolPolicy::Strict);
    Atom b = parse_atom("p6(c2, V1)", v, SymbolPolicy::Strict);
    CHECK_FALSE(unifiable(a, b, UnifyMode::SharedNames));
    CHECK(unifiable(a, b, UnifyMode::StandardizeApart));
}

TEST_CASE("unify: arity mismatch is malformed input, not failure") {
    Atom a{0, {make_const(0)}};
    Atom b{0, {make_const(0), make_const(1)}};
    CHECK_THROWS_AS((void)unify(a, b, UnifyMode::SharedNames), MalformedInputError);
    // different predicates: plain failure
    Atom c{1, {make_const(0)}};
    CHECK_FALSE(unifiable(a, c, UnifyMode::SharedNames));
}

TEST_CASE("unify: MGU soundness and symmetry on random pairs") {
    Vocabulary v = paper_style_vocab();
    Rng rng(1234);
    int successes = 0;
    for (int i = 0; i < 10000; ++i) {
        Atom a = random_atom(v, rng);
        Atom b = random_atom(v, rng);
        for (UnifyMode mode : {UnifyMode::SharedNames, UnifyMode::StandardizeApart}) {
            auto s = unify(a, b, mode);
            CHECK(unifiable(b, a, mode) == s.has_value());
            if (!s) continue;
            ++successes;
            CHECK(s->is_idempotent());
            Atom b_eff = b;
            if (mode == UnifyMode::StandardizeApart) {
                std::int32_t base = 1 + std::max(max_var_id(a), max_var_id(b));
                b_eff = rename_vars_from(b, std::max(base, 0));
            }
            CHECK(s->apply(a) == s->apply(b_eff));
        }
    }
    CHECK(successes > 100);  // the vocabulary makes collisions common enough
}

TEST_CASE("unify: decisions match the grounding oracle on the tiny vocabulary") {
    Vocabulary v = tiny_vocab();
    std::vector<Atom> atoms = oracle::all_atoms(v);
    for (const Atom& a : atoms)
        for (const Atom& b : atoms) {
            CHECK(unifiable(a, b, UnifyMode::SharedNames) ==
                  oracle::grounding_unifiable_shared(a, b, v.num_constants()));
            CHECK(unifiable(a, b, UnifyMode::StandardizeApart) ==
                  oracle::grounding_unifiable_apart(a, b, v.num_constants()));
        }
}

TEST_CASE("substitution: apply and compose basics") {
    Vocabulary v = paper_style_vocab();
    Atom dup = parse_atom("p6(V1, V1)", v, SymbolPolicy::Strict);
    Substitution s;
    s.bind(v.find_variable("V1"), make_const(v.find_constant("c1")));
    Atom applied = s.apply(dup);
    CHECK(applied == parse_atom("p6(c1, c1)", v, SymbolPolicy::Strict));

    // apply(empty, a) == a
    Substitution empty;
    CHECK(empty.apply(dup) == dup);

    // compose(empty, s) == s
    CHECK(empty.compose(s) == s);

    // {X->Y} then {Y->c1} gives {X->c1, Y->c1}
    Substitution s1, s2;
    s1.bind(0, make_var(1));
    s2.bind(1, make_const(0));
    Substitution c = s1.compose(s2);
    CHECK(c.size() == 2);
    CHECK(*c.lookup(0) == make_const(0));
    CHECK(*c.lookup(1) == make_const(0));
    CHECK(c.is_idempotent());
}

TEST_CASE("substitution: compose equation on unifier chains") {
    // s1 = mgu(a, b); s2 = mgu of two atoms already under s1 -- the pattern
    // produced by resolution. The defining equation and idempotence must
    // both hold.
    Vocabulary v = paper_style_vocab();
    Rng rng(987);
    int checked = 0;
    while (checked < 10000) {
        Atom a = random_atom(v, rng);
        Atom b = random_atom(v, rng);
        auto s1 = unify(a, b, UnifyMode::SharedNames);
        if (!s1) continue;
        Atom c = s1->apply(random_atom(v, rng));
        Atom d = s1->apply(random_atom(v, rng));
        auto s2 = unify(c, d, UnifyMode::SharedNames);
        if (!s2) continue;
        Substitution comp = s1->compose(*s2);
        Atom probe = random_atom(v, rng);
        CHECK(comp.apply(probe) == s2->apply(s1->apply(probe)));
        CHECK(comp.is_idempotent());
        ++checked;
    }
}

TEST_CASE("standardize_apart: fresh ids, structure preserved") {
    Vocabulary v = paper_style_vocab();
    Clause c = parse_clause("p0(V0) :- p6(V0, V1), p1(V0).", v, SymbolPolicy::Strict);
    VarCounter counter{100};
    Clause r1 = standardize_apart(c, counter);
    Clause r2 = standardize_apart(c, counter);
    CHECK(r1.head.args[0].id >= 100);
    CHECK(canonical_rename(r1) == canonical_rename(c));
    // successive calls share no ids
    std::set<std::int32_t> ids1, ids2;
    auto collect = [](const Clause& cl, std::set<std::int32_t>& ids) {
        for (const Term& t : cl.head.args)
            if (t.is_var()) ids.insert(t.id);
        for (const Atom& a : cl.body)
            for (const Term& t : a.args)
                if (t.is_var()) ids.insert(t.id);
    };
    collect(r1, ids1);
    collect(r2, ids2);
    for (std::int32_t id : ids1) CHECK(ids2.count(id) == 0);

    // ground fact unchanged
    Clause fact = parse_clause("p3(c1, c2).", v, SymbolPolicy::Strict);
    CHECK(standardize_apart(fact, counter) == fact);
}

TEST_CASE("canonical_rename: first-occurrence numbering and idempotence") {
    Vocabulary v = paper_style_vocab();
    Atom a = parse_atom("p6(V3, V3)", v, SymbolPolicy::Strict);
    Atom c = canonical_rename(a);
    CHECK(c.args[0] == make_var(0));
    CHECK(c.args[1] == make_var(0));
    CHECK(canonical_rename(c) == c);

    Atom x = parse_atom("p6(V3, c1)", v, SymbolPolicy::Strict);
    Atom y = parse_atom("p6(V0, c1)", v, SymbolPolicy::Strict);
    CHECK(canonical_rename(x) == canonical_rename(y));
}

TEST_CASE("canonical_rename matches brute-force renaming equivalence") {
    // equal canonical forms iff some bijective variable renaming maps a to b
    Vocabulary v = tiny_vocab();
    std::vector<Atom> atoms = oracle::all_atoms(v);
    auto renaming_equivalent = [&](const Atom& a, const Atom& b) {
        if (a.predicate != b.predicate || a.args.size() != b.args.size()) return false;
        // try all injective maps from a's vars to b's terms
        std::vector<std::int32_t> avars;
        for (const Term& t : a.args)
            if (t.is_var() && std::find(avars.begin(), avars.end(), t.id) == avars.end())
                avars.push_back(t.id);
        // candidate targets: variable ids in b
        std::vector<std::int32_t> bvars;
        for (const Term& t : b.args)
            if (t.is_var() && std::find(bvars.begin(), bvars.end(), t.id) == bvars.end())
                bvars.push_back(t.id);
        if (avars.size() != bvars.size()) return false;
        std::vector<int> perm(avars.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
        do {
            Atom mapped = a;
            for (Term& t : mapped.args) {
                if (!t.is_var()) continue;
                for (std::size_t i = 0; i < avars.size(); ++i) {
                    if (avars[i] == t.id) {
                        t = make_var(bvars[perm[i]]);
                        break;
                    }
                }
            }
            if (mapped == b) return true;
        } while (std::next_permutation(perm.begin(), perm.end()));
        return false;
    };
    for (const Atom& a : atoms)
        for (const Atom& b : atoms)
            CHECK((canonical_rename(a) == canonical_rename(b)) == renaming_equivalent(a, b));
}

TEST_CASE("clause safety") {
    Vocabulary v = paper_style_vocab();
    CHECK(is_safe(parse_clause("p0(V0) :- p6(V0, V1).", v, SymbolPolicy::Strict)));
    CHECK(is_safe(parse_clause("p3(c1, c2).", v, SymbolPolicy::Strict)));
    Clause unsafe;
    unsafe.head = parse_atom("p0(V0)", v, SymbolPolicy::Strict);
    unsafe.body.push_back(parse_atom("p1(c1)", v, SymbolPolicy::Strict));
    CHECK_FALSE(is_safe(unsafe));
}

TEST_CASE("text: round trip for facts, rules and fresh variables") {
    Vocabulary v = paper_style_vocab();
    for (const char* text : {
             "p3(c1, c2).",
             "p0(V1) :- p6(V1, c3), p1(V1).",
             "p6(V0, V0) :- p6(V0, c0).",
         }) {
        Clause c = parse_clause(text, v, SymbolPolicy::Strict);
        CHECK(to_text(c, v) == text);
        CHECK(parse_clause(to_text(c, v), v, SymbolPolicy::Strict) == c);
    }

    // fresh variables print as _G<id> and parse back to the same id
    Atom fresh{3, {make_var(1234), make_const(0)}};
    std::string s = to_text(fresh, v);
    CHECK(s == "p3(_G1234, c0)");
    CHECK(parse_atom(s, v, SymbolPolicy::Strict) == fresh);
}

TEST_CASE("text: interning, comments, whitespace") {
    Vocabulary v;
    Clause c = parse_clause("likes( Alice ,bob) :- knows(Alice,  bob ).  % a comment", v,
                            SymbolPolicy::Intern);
    CHECK(v.num_predicates() == 2);
    CHECK(v.num_constants() == 1);  // bob
    CHECK(v.num_variables() == 1);  // Alice
    CHECK(c.body.size() == 1);

    auto program = parse_program("% header\np(c).\nq(X) :- p(X).\n", v, SymbolPolicy::Intern);
    CHECK(program.size() == 2);

    CHECK_THROWS_AS(parse_clause("p(", v, SymbolPolicy::Intern), MalformedInputError);
    CHECK_THROWS_AS(parse_clause("p(unknown_new).", v, SymbolPolicy::Strict),
                    MalformedInputError);
}

TEST_CASE("vocabulary invariants and hashing") {
    Vocabulary v = tiny_vocab();
    std::uint64_t h = v.hash();
    CHECK(h == tiny_vocab().hash());
    Vocabulary w = tiny_vocab();
    w.add_constant("c3");
    CHECK(w.hash() != h);

    Vocabulary bad;
    bad.add_predicate("p", 1);
    CHECK_THROWS_AS(bad.check(), MalformedInputError);
}
