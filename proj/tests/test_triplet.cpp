#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <map>
#include <set>
#include <unordered_set>

#include "hornguide/triplet.hpp"
#include "hornguide/synth.hpp"

using namespace hornguide;
namespace fs = std::filesystem;

namespace {

// 10 unary + 10 binary predicates, 200 constants, 10 variables.
Vocabulary eval_vocab() {
    Vocabulary v;
    for (int i = 0; i < 20; ++i) v.add_predicate("p" + std::to_string(i), i < 10 ? 1 : 2);
    for (int i = 0; i < 200; ++i) v.add_constant("c" + std::to_string(i));
    for (int i = 0; i < 10; ++i) v.add_variable("V" + std::to_string(i));
    v.check();
    return v;
}

Atom binary(const Vocabulary&, Term a, Term b) { return Atom{10, {a, b}}; }
Atom unary(const Vocabulary&, Term a) { return Atom{0, {a}}; }

std::vector<std::pair<Atom, AnchorType>> anchors_of_each_type(const Vocabulary& v) {
    return {
        {binary(v, make_const(1), make_const(2)), AnchorType::Binary2Consts},
        {binary(v, make_var(1), make_const(1)), AnchorType::BinaryVarConst},
        {binary(v, make_const(1), make_var(1)), AnchorType::BinaryVarConst},
        {binary(v, make_var(1), make_var(2)), AnchorType::Binary2Vars},
        {binary(v, make_var(1), make_var(1)), AnchorType::BinaryDupVar},
        {binary(v, make_const(1), make_const(1)), AnchorType::BinaryDupConst},
        {unary(v, make_const(1)), AnchorType::UnaryConst},
        {unary(v, make_var(1)), AnchorType::UnaryVar},
    };
}

}  // namespace

TEST_CASE("classify_anchor: the seven types, arity > 2 rejected") {
    Vocabulary v = eval_vocab();
    for (const auto& [atom, type] : anchors_of_each_type(v)) CHECK(classify_anchor(atom) == type);
    Atom wide{0, {make_const(0), make_const(1), make_const(2)}};
    CHECK_THROWS_AS(classify_anchor(wide), UnsupportedAnchorError);
}

TEST_CASE("sample_atom: conditional repeat rate matches the closed form") {
    Vocabulary v = eval_vocab();
    auto measure = [&](double rc, std::uint64_t seed) {
        Rng rng(seed);
        long long binary_draws = 0, repeats = 0;
        while (binary_draws < 100000) {
            Atom a = sample_atom(v, rc, rng);
            if (a.args.size() != 2) continue;
            ++binary_draws;
            if (a.args[0] == a.args[1]) ++repeats;
        }
        return static_cast<double>(repeats) / static_cast<double>(binary_draws);
    };
    // 1/4 (1/nv + 1/nc) = 2.625% at nv=10, nc=200
    CHECK(measure(0.0, 77) == doctest::Approx(0.02625).epsilon(0.15));
    // rc + (1-rc) * base = 17.23% at rc = 0.15
    CHECK(measure(0.15, 78) == doctest::Approx(0.172313).epsilon(0.05));
    // rc = 1: second slot always repeats
    Rng rng(79);
    for (int i = 0; i < 200; ++i) {
        Atom a = sample_atom(v, 1.0, rng);
        if (a.args.size() == 2) CHECK(a.args[0] == a.args[1]);
    }
}

TEST_CASE("uniform sampling yields few repeated-term atoms; 15% boosts them") {
    Vocabulary v = eval_vocab();
    auto repeated_of = [&](double rc, std::uint64_t seed) {
        Rng rng(seed);
        int repeated = 0;
        for (int i = 0; i < 10000; ++i) {
            Atom a = sample_atom(v, rc, rng);
            if (a.args.size() == 2 && a.args[0] == a.args[1]) ++repeated;
        }
        return repeated;
    };
    int base = repeated_of(0.0, 101);
    int boosted = repeated_of(0.15, 102);
    // expectation: 10000 * 1/2 * 2.625% ~ 131 uniform; the published
    // 110/10000 figure depends on an unstated predicate arity split
    CHECK(base > 80);
    CHECK(base < 190);
    CHECK(boosted > 3 * base);
}

TEST_CASE("apply_policy: worked transformations") {
    Vocabulary v = eval_vocab();
    Rng rng(7);

    // OCNV on a unary constant anchor gives a variable argument
    Atom uc = unary(v, make_const(1));
    auto out = apply_policy(uc, Policy::OCNV, v, rng);
    REQUIRE(out.has_value());
    CHECK(out->args[0].is_var());
    CHECK(unifiable(uc, *out, UnifyMode::SharedNames));

    // OCNC picks a constant not already in the anchor
    Atom b2c = binary(v, make_const(1), make_const(2));
    for (int i = 0; i < 50; ++i) {
        auto neg = apply_policy(b2c, Policy::OCNC, v, rng);
        REQUIRE(neg.has_value());
        CHECK_FALSE(unifiable(b2c, *neg, UnifyMode::SharedNames));
        int changed = 0;
        for (int k = 0; k < 2; ++k) {
            if (!(neg->args[k] == b2c.args[k])) {
                ++changed;
                CHECK(neg->args[k].is_const());
                CHECK(neg->args[k].id != 1);
                CHECK(neg->args[k].id != 2);
            }
        }
        CHECK(changed == 1);
    }

    // SWA swaps the two arguments
    Atom b2v = binary(v, make_var(1), make_var(2));
    auto swapped = apply_policy(b2v, Policy::SWA, v, rng);
    REQUIRE(swapped.has_value());
    CHECK(swapped->args[0] == make_var(2));
    CHECK(swapped->args[1] == make_var(1));

    // TNC on a duplicate-variable anchor breaks unifiability
    Atom dup = binary(v, make_var(1), make_var(1));
    auto tnc = apply_policy(dup, Policy::TNC, v, rng);
    REQUIRE(tnc.has_value());
    CHECK(tnc->args[0].is_const());
    CHECK(tnc->args[1].is_const());
    CHECK_FALSE(tnc->args[0] == tnc->args[1]);
    CHECK_FALSE(unifiable(dup, *tnc, UnifyMode::SharedNames));

    // inapplicable pair is a contract violation
    CHECK_THROWS(apply_policy(uc, Policy::SWA, v, rng));

    // empty pool: OCNC with a single constant
    Vocabulary small;
    small.add_predicate("p", 1);
    small.add_predicate("q", 1);
    small.add_constant("c0");
    small.add_variable("X");
    small.add_variable("Y");
    Atom a{0, {make_const(0)}};
    CHECK_FALSE(apply_policy(a, Policy::OCNC, small, rng).has_value());
}

TEST_CASE("policy table fidelity: every cell, 1000 examples each") {
    Vocabulary v = eval_vocab();
    Rng rng(40);
    for (const auto& [anchor, type] : anchors_of_each_type(v)) {
        for (auto diff : {ExampleDifficulty::Easy, ExampleDifficulty::Hard}) {
            for (auto pol : {Polarity::Positive, Polarity::Negative}) {
                auto cell = policies_for(type, diff, pol);
                std::set<Policy> allowed(cell.begin(), cell.end());
                if (allowed.empty()) {
                    // unary hard positives are the only empty cells
                    CHECK(diff == ExampleDifficulty::Hard);
                    CHECK(pol == Polarity::Positive);
                    CHECK((type == AnchorType::UnaryConst || type == AnchorType::UnaryVar));
                    CHECK_FALSE(gen_example(anchor, diff, pol, v, rng).has_value());
                    continue;
                }
                for (int i = 0; i < 1000; ++i) {
                    auto ex = gen_example(anchor, diff, pol, v, rng);
                    REQUIRE(ex.has_value());
                    CHECK(allowed.count(ex->policy) == 1);
                    bool unifies = unifiable(anchor, ex->atom, UnifyMode::SharedNames);
                    CHECK(unifies == (pol == Polarity::Positive));
                }
            }
        }
    }
}

TEST_CASE("gen_example: worked mom(X, john) transformations") {
    Vocabulary v;
    v.add_predicate("mom", 2);
    v.add_predicate("dad", 2);
    v.add_predicate("person", 1);
    v.add_constant("john");
    v.add_constant("mary");
    v.add_constant("sue");
    v.add_variable("X");
    v.add_variable("Y");
    v.add_variable("Z");
    Atom anchor = parse_atom("mom(X, john)", v, SymbolPolicy::Strict);

    // easy positive can be mom(mary, john); hard positive mom(Y, Z)
    bool saw_const_sub = false, saw_two_vars = false;
    Rng rng(9);
    for (int i = 0; i < 400; ++i) {
        auto easy = gen_example(anchor, ExampleDifficulty::Easy, Polarity::Positive, v, rng);
        REQUIRE(easy.has_value());
        CHECK(unifiable(anchor, easy->atom, UnifyMode::SharedNames));
        if (easy->atom.args[0].is_const() && easy->atom.args[1] == anchor.args[1])
            saw_const_sub = true;
        auto hard = gen_example(anchor, ExampleDifficulty::Hard, Polarity::Positive, v, rng);
        REQUIRE(hard.has_value());
        if (hard->atom.args[0].is_var() && hard->atom.args[1].is_var()) saw_two_vars = true;
    }
    CHECK(saw_const_sub);
    CHECK(saw_two_vars);
}

TEST_CASE("gen_triplet: classes, fallback, label checks") {
    Vocabulary v = eval_vocab();
    Rng rng(11);

    // hard request on a unary anchor falls back to medium
    Atom u = unary(v, make_var(1));
    for (int i = 0; i < 100; ++i) {
        Triplet t = gen_triplet(u, 2, v, rng);
        CHECK(t.fallback);
        CHECK((t.cls == TripletClass::MediumEpHn || t.cls == TripletClass::MediumHpEn));
        CHECK(unifiable(t.anchor, t.positive, UnifyMode::SharedNames));
        CHECK_FALSE(unifiable(t.anchor, t.negative, UnifyMode::SharedNames));
    }

    // binary anchors can realize hard triplets
    Atom b = binary(v, make_var(1), make_var(2));
    Triplet t = gen_triplet(b, 2, v, rng);
    CHECK(t.cls == TripletClass::Hard);
    CHECK_FALSE(t.fallback);

    // anchor with no easy negative (single unary predicate world)
    Vocabulary lonely;
    lonely.add_predicate("p", 1);
    lonely.add_constant("c0");
    lonely.add_constant("c1");
    lonely.add_variable("X");
    lonely.add_variable("Y");
    Atom a{0, {make_const(0)}};
    CHECK_THROWS_AS(gen_triplet(a, 0, lonely, rng), GenerationError);
    CHECK_FALSE(anchor_usable(a, lonely));
}

TEST_CASE("gen_dataset: anchor arithmetic, mix, label soundness, determinism") {
    Vocabulary v = eval_vocab();
    const std::size_t n = 20000;
    TripletDataset ds = gen_dataset(v, n, 20, {0.4, 0.5, 0.1}, 0.15, 123);
    REQUIRE(ds.triplets.size() == n);

    // distinct anchors = ceil(n / tpa), each with <= tpa triplets
    std::unordered_set<Atom, AtomHash> anchors;
    std::map<std::string, int> per_anchor;
    for (const Triplet& t : ds.triplets) {
        anchors.insert(t.anchor);
        ++per_anchor[to_text(t.anchor, v)];
    }
    CHECK(anchors.size() == (n + 19) / 20);
    for (const auto& [_, count] : per_anchor) CHECK(count <= 20);

    // label soundness on the full run
    for (const Triplet& t : ds.triplets) {
        CHECK(unifiable(t.anchor, t.positive, UnifyMode::SharedNames));
        CHECK_FALSE(unifiable(t.anchor, t.negative, UnifyMode::SharedNames));
    }

    // requested mix close to (0.40, 0.50, 0.10); fallbacks only demote
    CHECK(static_cast<double>(ds.requested[0]) / n == doctest::Approx(0.40).epsilon(0.04));
    CHECK(static_cast<double>(ds.requested[1]) / n == doctest::Approx(0.50).epsilon(0.04));
    CHECK(static_cast<double>(ds.requested[2]) / n == doctest::Approx(0.10).epsilon(0.08));
    std::size_t realized_hard = ds.realized[static_cast<int>(TripletClass::Hard)];
    CHECK(realized_hard <= ds.requested[2]);
    for (const Triplet& t : ds.triplets)
        if (t.requested == 2 && t.fallback)
            CHECK((t.cls == TripletClass::MediumEpHn || t.cls == TripletClass::MediumHpEn));

    // serial reference produces the identical dataset
    TripletDataset serial = gen_dataset(v, 4000, 20, {0.4, 0.5, 0.1}, 0.15, 123, false);
    TripletDataset par = gen_dataset(v, 4000, 20, {0.4, 0.5, 0.1}, 0.15, 123, true);
    REQUIRE(serial.triplets.size() == par.triplets.size());
    for (std::size_t i = 0; i < serial.triplets.size(); ++i) {
        CHECK(serial.triplets[i].anchor == par.triplets[i].anchor);
        CHECK(serial.triplets[i].positive == par.triplets[i].positive);
        CHECK(serial.triplets[i].negative == par.triplets[i].negative);
        CHECK(serial.triplets[i].cls == par.triplets[i].cls);
    }

    // mix (1,0,0): everything easy, realized == requested
    TripletDataset easy_only = gen_dataset(v, 1000, 10, {1.0, 0.0, 0.0}, 0.15, 7);
    CHECK(easy_only.requested[0] == 1000);
    CHECK(easy_only.realized[static_cast<int>(TripletClass::Easy)] == 1000);

    // anchor space exhaustion cites the capacity limit
    Vocabulary cramped;
    cramped.add_predicate("p", 1);
    cramped.add_predicate("q", 1);
    cramped.add_constant("c0");
    cramped.add_constant("c1");
    cramped.add_constant("c2");
    cramped.add_variable("X");
    cramped.add_variable("Y");
    CHECK_THROWS_AS(gen_dataset(cramped, 1000, 1, {1, 0, 0}, 0.0, 3), GenerationError);
}

TEST_CASE("gen_dataset_legacy: labels sound, tpa 1, empty request") {
    Vocabulary v = eval_vocab();
    TripletDataset ds = gen_dataset_legacy(v, 2000, 321);
    REQUIRE(ds.triplets.size() == 2000);
    CHECK(ds.tpa == 1);
    for (const Triplet& t : ds.triplets) {
        CHECK(t.cls == TripletClass::Legacy);
        CHECK(t.positive_policy == -1);
        CHECK(unifiable(t.anchor, t.positive, UnifyMode::SharedNames));
        CHECK_FALSE(unifiable(t.anchor, t.negative, UnifyMode::SharedNames));
    }
    CHECK(ds.realized[static_cast<int>(TripletClass::Legacy)] == 2000);

    TripletDataset none = gen_dataset_legacy(v, 0, 1);
    CHECK(none.triplets.empty());
}

TEST_CASE("triplet file round-trips") {
    Vocabulary v = eval_vocab();
    TripletDataset ds = gen_dataset(v, 500, 10, {0.4, 0.5, 0.1}, 0.15, 9);
    fs::path dir = fs::temp_directory_path() / "hg_triplet_test";
    fs::create_directories(dir);
    write_triplets(dir / "t.tsv", ds, v, {{"config", "abc"}});
    Vocabulary v2 = v;
    TripletDataset loaded = read_triplets(dir / "t.tsv", v2);
    REQUIRE(loaded.triplets.size() == ds.triplets.size());
    CHECK(loaded.tpa == ds.tpa);
    CHECK(loaded.repeat_chance == doctest::Approx(ds.repeat_chance));
    for (std::size_t i = 0; i < ds.triplets.size(); ++i) {
        CHECK(loaded.triplets[i].anchor == ds.triplets[i].anchor);
        CHECK(loaded.triplets[i].positive == ds.triplets[i].positive);
        CHECK(loaded.triplets[i].negative == ds.triplets[i].negative);
        CHECK(loaded.triplets[i].cls == ds.triplets[i].cls);
        CHECK(loaded.triplets[i].positive_policy == ds.triplets[i].positive_policy);
    }
    fs::remove_all(dir);
}
