#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <unordered_set>

#include "hornguide/encoder.hpp"
#include "hornguide/rng.hpp"
#include "hornguide/synth.hpp"
#include "hornguide/triplet.hpp"

using namespace hornguide;

namespace {

// Test-side decoder: inverts the documented layout exactly.
Atom decode_atom(const std::vector<double>& enc, const Vocabulary& v) {
    const int np = v.num_predicates();
    const int nv = v.num_variables();
    const int nc = v.num_constants();
    const int slot_width = 2 + nv + nc;
    Atom a;
    a.predicate = -1;
    for (int i = 0; i < np; ++i)
        if (enc[i] == 1.0) {
            REQUIRE(a.predicate == -1);
            a.predicate = i;
        }
    REQUIRE(a.predicate >= 0);
    for (int k = 0; k < v.max_arity(); ++k) {
        const int base = np + k * slot_width;
        if (enc[base + 1] == 1.0) continue;  // empty slot
        bool isvar = enc[base] == 1.0;
        int found = -1;
        if (isvar) {
            for (int j = 0; j < nv; ++j)
                if (enc[base + 2 + j] == 1.0) found = j;
            a.args.push_back(make_var(found));
        } else {
            for (int j = 0; j < nc; ++j)
                if (enc[base + 2 + nv + j] == 1.0) found = j;
            a.args.push_back(make_const(found));
        }
        REQUIRE(found >= 0);
    }
    return a;
}

}  // namespace

TEST_CASE("encoding layout and width") {
    Rng rng(3);
    Vocabulary v = gen_vocabulary(20, 200, 10, 2, rng);
    CHECK(encoding_width(v) == 20 + 2 * (2 + 10 + 200));  // 444

    // unary atom: second slot holds only the empty flag
    std::int32_t up = -1;
    for (int i = 0; i < v.num_predicates(); ++i)
        if (v.predicate(i).arity == 1) up = i;
    REQUIRE(up >= 0);
    Atom a{up, {make_const(1)}};
    std::vector<double> enc = encode_atom(a, v);
    const int base2 = 20 + (2 + 10 + 200);
    CHECK(enc[base2 + 1] == 1.0);
    double slot2_sum = 0;
    for (int i = base2; i < base2 + 2 + 10 + 200; ++i) slot2_sum += enc[i];
    CHECK(slot2_sum == 1.0);

    // exactly one predicate position; per filled slot one symbol position
    double pred_sum = 0;
    for (int i = 0; i < 20; ++i) pred_sum += enc[i];
    CHECK(pred_sum == 1.0);
}

TEST_CASE("repeated variables encode both occurrences identically, distinct from fresh pairs") {
    Rng rng(3);
    Vocabulary v = gen_vocabulary(20, 200, 10, 2, rng);
    std::int32_t bp = -1;
    for (int i = 0; i < v.num_predicates(); ++i)
        if (v.predicate(i).arity == 2) bp = i;
    REQUIRE(bp >= 0);

    Atom dup{bp, {make_var(1), make_var(1)}};
    Atom two{bp, {make_var(1), make_var(2)}};
    CHECK(encode_atom(dup, v) != encode_atom(two, v));

    auto sd = encode_atom_sparse(dup, v);
    // same variable position active in both slots (offset by slot width)
    const int slot_width = 2 + 10 + 200;
    std::set<std::int32_t> active(sd.begin(), sd.end());
    CHECK(active.count(20 + 2 + 1));               // slot 1 var one-hot
    CHECK(active.count(20 + slot_width + 2 + 1));  // slot 2 var one-hot

    // name sensitivity under identity mode; canonical mode collapses
    Atom v1c{bp, {make_var(1), make_const(3)}};
    Atom v2c{bp, {make_var(2), make_const(3)}};
    CHECK(encode_atom(v1c, v, VariableMode::Identity) !=
          encode_atom(v2c, v, VariableMode::Identity));
    CHECK(encode_atom(v1c, v, VariableMode::Canonical) ==
          encode_atom(v2c, v, VariableMode::Canonical));
}

TEST_CASE("injectivity over 100k random distinct atoms") {
    Rng rng(5);
    Vocabulary v = gen_vocabulary(20, 200, 10, 2, rng);
    std::unordered_set<Atom, AtomHash> atoms;
    Rng arng(6);
    while (atoms.size() < 100000) atoms.insert(sample_atom(v, 0.15, arng));
    std::unordered_set<std::string> encodings;
    for (const Atom& a : atoms) {
        auto sparse = encode_atom_sparse(a, v);
        std::string key(reinterpret_cast<const char*>(sparse.data()),
                        sparse.size() * sizeof(std::int32_t));
        CHECK(encodings.insert(key).second);
    }
    CHECK(encodings.size() == 100000);
}

TEST_CASE("dense encoding equals sparse expansion; decode round-trips") {
    Rng rng(9);
    Vocabulary v = gen_vocabulary(8, 30, 6, 3, rng);
    Rng arng(10);
    for (int i = 0; i < 2000; ++i) {
        Atom a = sample_atom(v, 0.2, arng);
        std::vector<double> dense = encode_atom(a, v);
        std::vector<double> expanded(encoding_width(v), 0.0);
        for (std::int32_t idx : encode_atom_sparse(a, v)) expanded[idx] = 1.0;
        CHECK(dense == expanded);
        CHECK(decode_atom(dense, v) == a);
    }
}

TEST_CASE("out-of-vocabulary symbols are encoding errors") {
    Rng rng(11);
    Vocabulary v = gen_vocabulary(4, 10, 3, 2, rng);
    Atom bad_pred{99, {make_const(0)}};
    CHECK_THROWS_AS(encode_atom(bad_pred, v), EncodingError);
    Atom fresh_var{0, {make_var(50)}};
    if (v.predicate(0).arity == 1)
        CHECK_THROWS_AS(encode_atom(fresh_var, v), EncodingError);
}

TEST_CASE("fold_into_pool maps fresh variables deterministically") {
    Rng rng(12);
    Vocabulary v = gen_vocabulary(4, 10, 5, 2, rng);
    std::int32_t bp = -1;
    for (int i = 0; i < v.num_predicates(); ++i)
        if (v.predicate(i).arity == 2) bp = i;
    REQUIRE(bp >= 0);

    // in-pool atoms unchanged
    Atom pool_atom{bp, {make_var(2), make_const(1)}};
    CHECK(fold_into_pool(pool_atom, v) == pool_atom);

    // fresh ids fold to the lowest unused pool ids, co-reference preserved
    Atom fresh{bp, {make_var(100), make_var(100)}};
    Atom folded = fold_into_pool(fresh, v);
    CHECK(folded.args[0] == make_var(0));
    CHECK(folded.args[1] == make_var(0));

    Atom mixed{bp, {make_var(3), make_var(77)}};
    Atom folded2 = fold_into_pool(mixed, v);
    CHECK(folded2.args[0] == make_var(3));
    CHECK(folded2.args[1] == make_var(0));  // 0 is the lowest id not in use

    // encodable after folding
    CHECK_NOTHROW(encode_atom(folded2, v));
}
