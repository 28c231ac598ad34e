#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "hornguide/synth.hpp"
#include "oracles.hpp"

using namespace hornguide;
namespace fs = std::filesystem;

TEST_CASE("gen_vocabulary: arities uniform in range, max arity present") {
    Rng rng(1);
    Vocabulary v = gen_vocabulary(20, 200, 10, 2, rng);
    CHECK(v.num_predicates() == 20);
    CHECK(v.num_constants() == 200);
    CHECK(v.num_variables() == 10);
    CHECK(v.max_arity() == 2);
    bool has2 = false;
    for (const auto& p : v.predicates()) {
        CHECK(p.arity >= 1);
        CHECK(p.arity <= 2);
        if (p.arity == 2) has2 = true;
    }
    CHECK(has2);

    // degenerate single-symbol vocabulary
    Rng rng2(2);
    Vocabulary tiny = gen_vocabulary(1, 1, 1, 1, rng2);
    CHECK(tiny.num_predicates() == 1);
    CHECK(tiny.predicate(0).arity == 1);

    // max unique atoms arithmetic for the ablation-scale vocabulary
    double max_atoms = 20.0 * (200 + 10) * (200 + 10);
    CHECK(max_atoms == doctest::Approx(882000.0));
}

TEST_CASE("gen_kb: sizes, composition, safety, determinism") {
    KbGenConfig cfg;
    cfg.kb_size = 250;
    cfg.vocab_seed = 11;
    cfg.rng_seed = 12;
    KnowledgeBase kb = gen_kb(cfg);
    CHECK(kb.clauses.size() == 250);
    CHECK(kb.vocabulary.num_constants() == 200);

    int facts = 0;
    std::set<std::string> canon;
    for (const Clause& c : kb.clauses) {
        validate_clause(c, kb.vocabulary);
        if (c.is_fact()) {
            ++facts;
            CHECK(is_ground(c.head));
        } else {
            CHECK(c.body.size() >= 1);
            CHECK(static_cast<int>(c.body.size()) <= cfg.max_body_len);
        }
        CHECK(canon.insert(to_text(canonical_rename(c), kb.vocabulary)).second);
    }
    CHECK(facts == 200);  // ceil(0.8 * 250)

    // same seeds, same KB; different seed, different clauses, same vocab
    KnowledgeBase again = gen_kb(cfg);
    CHECK(again.clauses == kb.clauses);
    cfg.rng_seed = 13;
    KnowledgeBase other = gen_kb(cfg);
    CHECK(other.clauses != kb.clauses);
    CHECK(other.vocabulary.hash() == kb.vocabulary.hash());

    // rule-free KB: forward chaining adds nothing
    KbGenConfig ff;
    ff.kb_size = 40;
    ff.num_constants = 30;
    ff.fact_fraction = 1.0;
    KnowledgeBase facts_only = gen_kb(ff);
    for (const Clause& c : facts_only.clauses) CHECK(c.is_fact());
    CHECK(forward_chain(facts_only, 1000).empty());
}

TEST_CASE("gen_kb: unsatisfiable config errors out") {
    KbGenConfig cfg;
    cfg.kb_size = 50;  // only 1 distinct unary ground fact exists
    cfg.num_predicates = 1;
    cfg.num_constants = 1;
    cfg.num_variables = 1;
    cfg.max_arity = 1;
    cfg.fact_fraction = 1.0;
    CHECK_THROWS_AS(gen_kb(cfg), GenerationError);
}

TEST_CASE("forward_chain: one-step derivation") {
    Vocabulary v;
    v.add_predicate("q", 1);
    v.add_predicate("p", 1);
    v.add_constant("c1");
    v.add_variable("X");
    KnowledgeBase kb;
    kb.vocabulary = v;
    kb.clauses.push_back(parse_clause("q(c1).", kb.vocabulary, SymbolPolicy::Strict));
    kb.clauses.push_back(parse_clause("p(X) :- q(X).", kb.vocabulary, SymbolPolicy::Strict));
    auto derived = forward_chain(kb, 100);
    REQUIRE(derived.size() == 1);
    CHECK(to_text(derived[0], kb.vocabulary) == "p(c1)");
}

TEST_CASE("forward_chain: fixpoint equals the naive bottom-up oracle") {
    for (std::uint64_t seed : {21, 22, 23, 24}) {
        KbGenConfig cfg;
        cfg.kb_size = 30;
        cfg.num_predicates = 4;
        cfg.num_constants = 8;
        cfg.num_variables = 3;
        cfg.max_arity = 2;
        cfg.fact_fraction = 0.6;
        cfg.vocab_seed = 7;
        cfg.rng_seed = seed;
        KnowledgeBase kb = gen_kb(cfg);

        std::set<Atom> expected = oracle::naive_fixpoint(kb);
        std::set<Atom> base;
        for (const Clause& c : kb.clauses)
            if (c.is_fact()) base.insert(c.head);

        auto derived = forward_chain(kb, 1000000);
        std::set<Atom> got(derived.begin(), derived.end());
        CHECK(got.size() == derived.size());  // no duplicates
        for (const Atom& f : base) CHECK(got.count(f) == 0);

        std::set<Atom> full = got;
        full.insert(base.begin(), base.end());
        CHECK(full == expected);
    }
}

TEST_CASE("forward_chain: monotone in added facts, truncation respected") {
    KbGenConfig cfg;
    cfg.kb_size = 30;
    cfg.num_predicates = 4;
    cfg.num_constants = 8;
    cfg.num_variables = 3;
    cfg.fact_fraction = 0.6;
    cfg.vocab_seed = 7;
    cfg.rng_seed = 25;
    KnowledgeBase kb = gen_kb(cfg);
    auto derived = forward_chain(kb, 1000000);

    Atom extra;
    extra.predicate = 0;
    int arity = kb.vocabulary.predicate(0).arity;
    for (int i = 0; i < arity; ++i) extra.args.push_back(make_const(7));
    KnowledgeBase bigger = kb;
    bool already = false;
    for (const Clause& c : bigger.clauses)
        if (c.is_fact() && c.head == extra) already = true;
    if (!already) bigger.clauses.push_back(Clause{extra, {}});

    std::set<Atom> small_set(derived.begin(), derived.end());
    auto derived_big = forward_chain(bigger, 1000000);
    std::set<Atom> big_set(derived_big.begin(), derived_big.end());
    big_set.insert(extra);
    for (const Atom& f : small_set) CHECK(big_set.count(f) == 1);

    if (derived.size() > 3) {
        auto truncated = forward_chain(kb, 3);
        CHECK(truncated.size() == 3);
        CHECK(std::vector<Atom>(derived.begin(), derived.begin() + 3) == truncated);
    }
}

TEST_CASE("gen_queries: counts, co-reference, canonical disjointness, answerability") {
    KbGenConfig cfg;
    cfg.kb_size = 60;
    cfg.num_predicates = 5;
    cfg.num_constants = 12;
    cfg.num_variables = 4;
    cfg.fact_fraction = 0.7;
    cfg.vocab_seed = 31;
    cfg.rng_seed = 32;
    KnowledgeBase kb = gen_kb(cfg);
    auto derived = forward_chain(kb, 100000);
    REQUIRE(derived.size() >= 20);

    Rng rng(5);
    QuerySet qs = gen_queries(derived, 10, 10, 0.5, rng);
    CHECK(qs.train.size() == 10);
    CHECK(qs.test.size() == 10);

    std::set<std::string> canon;
    for (const auto* list : {&qs.train, &qs.test})
        for (const Atom& q : *list) {
            validate_atom(q, kb.vocabulary);
            CHECK(canon.insert(to_text(canonical_rename(q), kb.vocabulary)).second);
            // every query generalizes a derived fact, so it is answerable
            bool witnessed = false;
            for (const Atom& f : derived)
                if (unifiable(q, f, UnifyMode::StandardizeApart)) witnessed = true;
            CHECK(witnessed);
        }

    // var_sub_prob = 0 reproduces sampled facts exactly
    Rng rng0(6);
    QuerySet ground = gen_queries(derived, 10, 10, 0.0, rng0);
    std::set<Atom> derived_set(derived.begin(), derived.end());
    for (const auto* list : {&ground.train, &ground.test})
        for (const Atom& q : *list) CHECK(derived_set.count(q) == 1);

    // repeated constants map to one shared variable
    if (kb.vocabulary.predicate(0).arity == 2) {
        std::vector<Atom> dup_fact{Atom{0, {make_const(3), make_const(3)}}};
        Rng r(6);
        QuerySet one = gen_queries(dup_fact, 1, 0, 1.0, r);
        const Atom& q = one.train[0];
        CHECK(q.args[0].is_var());
        CHECK(q.args[0] == q.args[1]);
    }

    CHECK_THROWS_AS(gen_queries(derived, static_cast<int>(derived.size()), 1, 0.5, rng),
                    GenerationError);
}

TEST_CASE("kb and query files round-trip byte-identically") {
    KbGenConfig cfg;
    cfg.kb_size = 40;
    cfg.num_predicates = 5;
    cfg.num_constants = 15;
    cfg.num_variables = 4;
    cfg.vocab_seed = 41;
    cfg.rng_seed = 42;
    KnowledgeBase kb = gen_kb(cfg);
    auto derived = forward_chain(kb, 10000);
    REQUIRE(derived.size() >= 8);
    Rng rng(43);
    QuerySet qs = gen_queries(derived, 4, 4, 0.5, rng);

    fs::path dir = fs::temp_directory_path() / "hg_synth_test";
    fs::create_directories(dir);
    write_kb(dir / "kb.txt", kb, {{"kb_seed", "42"}});
    KnowledgeBase loaded = read_kb(dir / "kb.txt");
    CHECK(loaded.vocabulary.hash() == kb.vocabulary.hash());
    CHECK(loaded.clauses == kb.clauses);

    write_kb(dir / "kb2.txt", loaded, {{"kb_seed", "42"}});
    std::ifstream a(dir / "kb.txt"), b(dir / "kb2.txt");
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());

    auto header = read_header(dir / "kb.txt");
    CHECK(header.at("kb_seed") == "42");
    CHECK(header.at("np") == "5");

    write_queries(dir / "q.txt", qs, kb.vocabulary);
    Vocabulary v2 = loaded.vocabulary;
    QuerySet qs2 = read_queries(dir / "q.txt", v2);
    CHECK(qs2.train == qs.train);
    CHECK(qs2.test == qs.test);
    fs::remove_all(dir);
}
