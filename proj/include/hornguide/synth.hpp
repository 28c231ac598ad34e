#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hornguide/logic.hpp"
#include "hornguide/rng.hpp"

namespace hornguide {

struct KbGenConfig {
    int kb_size{250};
    int num_predicates{20};
    int num_constants{200};
    int num_variables{10};
    int max_arity{2};
    double fact_fraction{0.8};
    int max_body_len{2};
    std::uint64_t vocab_seed{1};
    std::uint64_t rng_seed{1};
};

// Arity uniform in {1..ma}; redrawn until at least one predicate has arity
// ma. Names are canonical: p0.., c0.., V0..
Vocabulary gen_vocabulary(int num_predicates, int num_constants, int num_variables,
                          int max_arity, Rng& rng);

// ceil(fact_fraction * kb_size) ground facts followed by safe rules with
// body length uniform in {1..max_body_len}; duplicates (by canonical form)
// are resampled. KBs sharing vocab parameters and vocab_seed share the
// vocabulary exactly.
KnowledgeBase gen_kb(const KbGenConfig& config);

// Least fixpoint of the rules over the facts, semi-naive by round,
// deterministic order within a round. Returns derived ground facts not
// already present in the KB, truncated at max_new_facts.
std::vector<Atom> forward_chain(const KnowledgeBase& kb, std::size_t max_new_facts);

struct QuerySet {
    std::vector<Atom> train;
    std::vector<Atom> test;
};

// Samples n_train + n_test distinct derived facts and lifts constants to
// variables: each distinct constant (not occurrence) is replaced, with
// probability var_sub_prob, by one shared fresh pool variable. Queries are
// pairwise distinct as canonical forms.
QuerySet gen_queries(const std::vector<Atom>& derived, int n_train, int n_test,
                     double var_sub_prob, Rng& rng);

// ---- Files ----------------------------------------------------------------
// KB file: header comment block (np/nc/nv/ma, arities, seeds, extra keys),
// then one clause per line. Query file: '# train' / '# test' markers with one
// atom per line. Atom/fact files: one atom per line.

void write_kb(const std::filesystem::path& path, const KnowledgeBase& kb,
              const std::map<std::string, std::string>& extra = {});
KnowledgeBase read_kb(const std::filesystem::path& path);

void write_queries(const std::filesystem::path& path, const QuerySet& qs, const Vocabulary& v,
                   const std::map<std::string, std::string>& extra = {});
QuerySet read_queries(const std::filesystem::path& path, Vocabulary& v);

void write_atoms(const std::filesystem::path& path, const std::vector<Atom>& atoms,
                 const Vocabulary& v, const std::map<std::string, std::string>& extra = {});
std::vector<Atom> read_atoms(const std::filesystem::path& path, Vocabulary& v);

// First '% key=value' header entries of an artifact file.
std::map<std::string, std::string> read_header(const std::filesystem::path& path);

}  // namespace hornguide
